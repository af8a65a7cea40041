#ifndef QUASISL_EXPR_HPP
#define QUASISL_EXPR_HPP

#include <complex>
#include <memory>
#include <string>
#include <string_view>

namespace quasisl {

using Complex = std::complex<double>;

namespace detail {
struct ExprNode;
}

// Immutable arithmetic expression in the variable t.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?
//   unary  := '-' unary | atom
//   atom   := number | ident | ident '(' args ')' | '(' expr ')'
//
// '^' is right-associative and binds tighter than unary minus, so -t^2
// means -(t^2). Functions: sin cos tan exp log sqrt abs sign. Constants:
// pi, e, and (where permitted) the imaginary unit i. Coefficient contexts
// are real-valued and reject i at parse time.
class Expr {
 public:
  Expr() = default;

  static Expr parse(std::string_view src, bool allow_imaginary = false);

  // Convenience constructors used by tests and config plumbing.
  static Expr constant(double value);
  static Expr zero() { return constant(0.0); }

  bool empty() const { return root_ == nullptr; }

  // Throws EvalError if the result is nonfinite.
  Complex eval(double t) const;

  // Additionally rejects results with a nonzero imaginary part (beyond
  // rounding noise from principal-branch powers).
  double eval_real(double t) const;

  // Canonical text form; print-parse-print is a fixed point.
  std::string str() const;

  bool references_imaginary_unit() const;

 private:
  explicit Expr(std::shared_ptr<const detail::ExprNode> root)
      : root_(std::move(root)) {}
  std::shared_ptr<const detail::ExprNode> root_;
};

}  // namespace quasisl

#endif
