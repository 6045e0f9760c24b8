#ifndef IFEM_EXPRESSION_HPP
#define IFEM_EXPRESSION_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace ifem {

// Parsed scalar expression over the variables x, y, t. Supports + - * / ^,
// the comparisons > < >= <= == !=, sin cos exp ln sqrt abs, a lazy
// if(cond, a, b), and the constant pi. Precedence, loosest to tightest:
// comparisons, + -, * /, unary minus, ^ (right associative).
class ScalarExpression {
 public:
  struct Node;

  double evaluate(double x, double y, double t) const;

  friend class Expression;

 private:
  std::shared_ptr<const Node> root_;
};

// A semicolon-separated list of scalar components.
class Expression {
 public:
  Expression() = default;

  // Parses with the component count taken from the text.
  static Expression parse(const std::string& text,
                          const std::map<std::string, double>& constants = {});
  // Parses and checks the component count; throws ParseError on
  // arity mismatch.
  static Expression parse(const std::string& text, int expected_components,
                          const std::map<std::string, double>& constants = {});

  int components() const { return static_cast<int>(parts_.size()); }
  double evaluate(int component, double x, double y, double t) const {
    return parts_[component].evaluate(x, y, t);
  }
  std::vector<double> evaluate(double x, double y, double t) const;

  const std::string& text() const { return text_; }

 private:
  std::vector<ScalarExpression> parts_;
  std::string text_;
};

Expression parse_expression(const std::string& text, int expected_components);

}  // namespace ifem

#endif
