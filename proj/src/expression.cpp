#include "ifem/expression.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>

#include "ifem/errors.hpp"

namespace ifem {

namespace {

enum class Op {
  Number,
  VarX,
  VarY,
  VarT,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Less,
  Greater,
  LessEq,
  GreaterEq,
  Eq,
  NotEq,
  Sin,
  Cos,
  Exp,
  Ln,
  Sqrt,
  Abs,
  If,
};

}  // namespace

struct ScalarExpression::Node {
  Op op;
  double value = 0.0;  // Number only
  std::shared_ptr<const Node> a, b, c;
};

namespace {

using NodePtr = std::shared_ptr<const ScalarExpression::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, NodePtr c = nullptr) {
  auto n = std::make_shared<ScalarExpression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->c = std::move(c);
  return n;
}

NodePtr make_number(double v) {
  auto n = std::make_shared<ScalarExpression::Node>();
  n->op = Op::Number;
  n->value = v;
  return n;
}

double eval_node(const ScalarExpression::Node& n, double x, double y, double t) {
  switch (n.op) {
    case Op::Number:
      return n.value;
    case Op::VarX:
      return x;
    case Op::VarY:
      return y;
    case Op::VarT:
      return t;
    case Op::Add:
      return eval_node(*n.a, x, y, t) + eval_node(*n.b, x, y, t);
    case Op::Sub:
      return eval_node(*n.a, x, y, t) - eval_node(*n.b, x, y, t);
    case Op::Mul:
      return eval_node(*n.a, x, y, t) * eval_node(*n.b, x, y, t);
    case Op::Div: {
      const double d = eval_node(*n.b, x, y, t);
      if (d == 0.0) throw EvalDomainError("division by zero");
      return eval_node(*n.a, x, y, t) / d;
    }
    case Op::Pow:
      return std::pow(eval_node(*n.a, x, y, t), eval_node(*n.b, x, y, t));
    case Op::Neg:
      return -eval_node(*n.a, x, y, t);
    case Op::Less:
      return eval_node(*n.a, x, y, t) < eval_node(*n.b, x, y, t) ? 1.0 : 0.0;
    case Op::Greater:
      return eval_node(*n.a, x, y, t) > eval_node(*n.b, x, y, t) ? 1.0 : 0.0;
    case Op::LessEq:
      return eval_node(*n.a, x, y, t) <= eval_node(*n.b, x, y, t) ? 1.0 : 0.0;
    case Op::GreaterEq:
      return eval_node(*n.a, x, y, t) >= eval_node(*n.b, x, y, t) ? 1.0 : 0.0;
    case Op::Eq:
      return eval_node(*n.a, x, y, t) == eval_node(*n.b, x, y, t) ? 1.0 : 0.0;
    case Op::NotEq:
      return eval_node(*n.a, x, y, t) != eval_node(*n.b, x, y, t) ? 1.0 : 0.0;
    case Op::Sin:
      return std::sin(eval_node(*n.a, x, y, t));
    case Op::Cos:
      return std::cos(eval_node(*n.a, x, y, t));
    case Op::Exp:
      return std::exp(eval_node(*n.a, x, y, t));
    case Op::Ln: {
      const double v = eval_node(*n.a, x, y, t);
      if (v <= 0.0) throw EvalDomainError("ln of a nonpositive value");
      return std::log(v);
    }
    case Op::Sqrt: {
      const double v = eval_node(*n.a, x, y, t);
      if (v < 0.0) throw EvalDomainError("sqrt of a negative value");
      return std::sqrt(v);
    }
    case Op::Abs:
      return std::abs(eval_node(*n.a, x, y, t));
    case Op::If:
      // Lazy: only the taken branch is evaluated.
      return eval_node(*n.a, x, y, t) != 0.0 ? eval_node(*n.b, x, y, t)
                                             : eval_node(*n.c, x, y, t);
  }
  throw EvalDomainError("corrupt expression node");
}

class Parser {
 public:
  Parser(const std::string& text, std::size_t offset,
         const std::map<std::string, double>& constants)
      : text_(text), pos_(offset), constants_(constants) {}

  // Grammar, loosest binding first:
  //   comparison := additive (cmp-op additive)?
  //   additive   := multiplicative (('+'|'-') multiplicative)*
  //   multiplicative := unary (('*'|'/') unary)*
  //   unary      := '-' unary | power
  //   power      := primary ('^' unary)?          (right associative)
  //   primary    := number | name | name '(' args ')' | '(' comparison ')'
  NodePtr parse_component() {
    NodePtr n = parse_comparison();
    skip_ws();
    if (!at_end() && peek() != ';')
      fail("unexpected character '" + std::string(1, peek()) + "'");
    return n;
  }

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r'))
      ++pos_;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression: " + msg, 0, static_cast<int>(pos_) + 1);
  }

  bool consume(char c) {
    skip_ws();
    if (!at_end() && peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_comparison() {
    NodePtr lhs = parse_additive();
    skip_ws();
    if (at_end()) return lhs;
    Op op;
    if (match("<=")) op = Op::LessEq;
    else if (match(">=")) op = Op::GreaterEq;
    else if (match("==")) op = Op::Eq;
    else if (match("!=")) op = Op::NotEq;
    else if (match("<")) op = Op::Less;
    else if (match(">")) op = Op::Greater;
    else return lhs;
    return make(op, lhs, parse_additive());
  }

  NodePtr parse_additive() {
    NodePtr lhs = parse_multiplicative();
    for (;;) {
      skip_ws();
      if (consume('+')) lhs = make(Op::Add, lhs, parse_multiplicative());
      else if (consume('-')) lhs = make(Op::Sub, lhs, parse_multiplicative());
      else return lhs;
    }
  }

  NodePtr parse_multiplicative() {
    NodePtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      if (consume('*')) lhs = make(Op::Mul, lhs, parse_unary());
      else if (consume('/')) lhs = make(Op::Div, lhs, parse_unary());
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    if (consume('-')) return make(Op::Neg, parse_unary());
    if (consume('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    skip_ws();
    if (consume('^')) return make(Op::Pow, base, parse_unary());
    return base;
  }

  bool match(const char* s) {
    skip_ws();
    std::size_t k = 0;
    while (s[k] != '\0') {
      if (pos_ + k >= text_.size() || text_[pos_ + k] != s[k]) return false;
      ++k;
    }
    pos_ += k;
    return true;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (at_end()) fail("unexpected end of expression");
    const char c = peek();
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      NodePtr n = parse_comparison();
      if (!consume(')')) fail("expected ')'");
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr parse_number() {
    std::size_t end = pos_;
    while (end < text_.size() &&
           ((text_[end] >= '0' && text_[end] <= '9') || text_[end] == '.')) ++end;
    // Exponent suffix.
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
      std::size_t digits = e;
      while (digits < text_.size() && text_[digits] >= '0' && text_[digits] <= '9') ++digits;
      if (digits > e) end = digits;
    }
    const std::string token = text_.substr(pos_, end - pos_);
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) fail("malformed number '" + token + "'");
      pos_ = end;
      return make_number(v);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      fail("malformed number '" + token + "'");
    }
  }

  NodePtr parse_name() {
    std::size_t end = pos_;
    while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                  text_[end] == '_')) ++end;
    const std::string name = text_.substr(pos_, end - pos_);
    pos_ = end;
    skip_ws();

    if (!at_end() && peek() == '(') {
      ++pos_;
      if (name == "if") {
        NodePtr cond = parse_comparison();
        if (!consume(',')) fail("if(): expected ','");
        NodePtr a = parse_comparison();
        if (!consume(',')) fail("if(): expected ','");
        NodePtr b = parse_comparison();
        if (!consume(')')) fail("if(): expected ')'");
        return make(Op::If, cond, a, b);
      }
      NodePtr arg = parse_comparison();
      if (!consume(')')) fail(name + "(): expected ')'");
      if (name == "sin") return make(Op::Sin, arg);
      if (name == "cos") return make(Op::Cos, arg);
      if (name == "exp") return make(Op::Exp, arg);
      if (name == "ln" || name == "log") return make(Op::Ln, arg);
      if (name == "sqrt") return make(Op::Sqrt, arg);
      if (name == "abs") return make(Op::Abs, arg);
      fail("unknown function '" + name + "'");
    }

    if (name == "x") return make(Op::VarX);
    if (name == "y") return make(Op::VarY);
    if (name == "t") return make(Op::VarT);
    if (name == "pi" || name == "Pi") return make_number(std::numbers::pi);
    if (auto it = constants_.find(name); it != constants_.end()) return make_number(it->second);
    fail("unknown symbol '" + name + "'");
  }

  const std::string& text_;
  std::size_t pos_;
  const std::map<std::string, double>& constants_;
};

}  // namespace

double ScalarExpression::evaluate(double x, double y, double t) const {
  return eval_node(*root_, x, y, t);
}

Expression Expression::parse(const std::string& text,
                             const std::map<std::string, double>& constants) {
  Expression expr;
  expr.text_ = text;
  std::size_t offset = 0;
  for (;;) {
    Parser parser(text, offset, constants);
    ScalarExpression part;
    part.root_ = parser.parse_component();
    expr.parts_.push_back(std::move(part));
    parser.skip_ws();
    if (parser.at_end()) break;
    offset = parser.pos() + 1;  // skip ';'
  }
  return expr;
}

Expression Expression::parse(const std::string& text, int expected_components,
                             const std::map<std::string, double>& constants) {
  Expression expr = parse(text, constants);
  if (expr.components() != expected_components)
    throw ParseError("expression '" + text + "': expected " +
                     std::to_string(expected_components) + " components, found " +
                     std::to_string(expr.components()));
  return expr;
}

std::vector<double> Expression::evaluate(double x, double y, double t) const {
  std::vector<double> out(parts_.size());
  for (std::size_t k = 0; k < parts_.size(); ++k) out[k] = parts_[k].evaluate(x, y, t);
  return out;
}

Expression parse_expression(const std::string& text, int expected_components) {
  return Expression::parse(text, expected_components);
}

}  // namespace ifem
