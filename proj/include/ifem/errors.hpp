#ifndef IFEM_ERRORS_HPP
#define IFEM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ifem {

// Common base so callers can catch everything from this library at once.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgumentError : Error {
  using Error::Error;
};

// Malformed text input. line/column are 1-based; 0 means unknown.
struct ParseError : Error {
  ParseError(const std::string& what, int line_ = 0, int column_ = 0)
      : Error(what), line(line_), column(column_) {}
  int line;
  int column;
};

// Structurally valid input that refers to things that do not exist
// (e.g. a cell naming an unknown vertex).
struct ConsistencyError : Error {
  using Error::Error;
};

// Geometric mapping with nonpositive determinant (inverted element).
struct DegenerateMappingError : Error {
  using Error::Error;
};

struct PointOutsideDomainError : Error {
  PointOutsideDomainError(const std::string& what, std::size_t point_index_ = 0)
      : Error(what), point_index(point_index_) {}
  std::size_t point_index;
};

struct SingularDeformationError : Error {
  using Error::Error;
};

struct SingularMatrixError : Error {
  SingularMatrixError(const std::string& what, int position_ = -1)
      : Error(what), position(position_) {}
  int position;  // offending row/column if known, -1 otherwise
};

struct NoConvergenceError : Error {
  NoConvergenceError(const std::string& what, double residual_norm_, int iterations_)
      : Error(what), residual_norm(residual_norm_), iterations(iterations_) {}
  double residual_norm;
  int iterations;
};

// Expression evaluated outside its domain on the taken branch (ln(x<=0), ...).
struct EvalDomainError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace ifem

#endif
