#ifndef QUASISL_ERRORS_HPP
#define QUASISL_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace quasisl {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input text (expression grammar, unknown identifier, arity).
// Carries the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Structurally invalid configuration (dimensions, missing fields, deltas at
// nodes, ...). Messages are path-qualified where a config document exists.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Expression evaluated to a nonfinite value, or to a nonreal value in a
// real-coefficient context.
class EvalError : public Error {
 public:
  using Error::Error;
};

// A coefficient was sampled at a point where it is not usable (p(t) = 0).
class SingularCoefficientError : public Error {
 public:
  SingularCoefficientError(const std::string& what, double t)
      : Error(what), t_(t) {}
  double where() const { return t_; }

 private:
  double t_ = 0;
};

// The ODE propagator could not reach the requested tolerance.
class PropagationError : public Error {
 public:
  using Error::Error;
};

// Any other numerical failure (singular linear systems, winding
// nonconvergence, quadrature nonconvergence, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace quasisl

#endif
