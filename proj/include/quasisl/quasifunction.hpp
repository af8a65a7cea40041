#ifndef QUASISL_QUASIFUNCTION_HPP
#define QUASISL_QUASIFUNCTION_HPP

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "quasisl/propagate.hpp"

namespace quasisl {

// A forcing term together with its discontinuity points.
struct Forcing {
  std::function<Complex(double)> fn;
  std::vector<double> breakpoints;

  Complex operator()(double t) const { return fn ? fn(t) : Complex(0, 0); }
  bool empty() const { return !fn; }
};

// A member of the maximal domain: per interval the pair (y, D1 y) as dense
// output, together with enough metadata to evaluate l[y] exactly:
//   l[y] = lambda * y + forcing   (lambda absent => l[y] = forcing).
class QuasiFunction {
 public:
  struct Piece {
    double left = 0, right = 0;
    std::shared_ptr<const MatTrajectory> basis;      // Phi(., left), optional
    Vector2c coeff = Vector2c::Zero();               // homogeneous weights
    std::shared_ptr<const VecTrajectory> particular; // optional
    Forcing forcing;

    Vector2c vec(double t) const {
      Vector2c v = Vector2c::Zero();
      if (basis && (coeff(0) != Complex(0, 0) || coeff(1) != Complex(0, 0)))
        v = basis->eval(t) * coeff;
      if (particular) v += particular->eval(t);
      return v;
    }
    Vector2c deriv(double t) const {
      Vector2c v = Vector2c::Zero();
      if (basis && (coeff(0) != Complex(0, 0) || coeff(1) != Complex(0, 0)))
        v = basis->deriv(t) * coeff;
      if (particular) v += particular->deriv(t);
      return v;
    }
    // union of the dense meshes of every term, plus forcing breakpoints
    std::vector<double> mesh() const;
  };

  QuasiFunction(std::vector<double> partition, std::vector<Piece> pieces,
                std::optional<Complex> lambda = std::nullopt);

  int intervals() const { return static_cast<int>(pieces_.size()); }
  const Piece& piece(int k) const { return pieces_[k]; }
  const std::vector<double>& partition() const { return partition_; }
  std::optional<Complex> lambda() const { return lambda_; }

  int interval_of(double t) const;

  Vector2c vec(double t, int k) const { return pieces_[k].vec(t); }
  Complex value(double t) const { return pieces_[interval_of(t)].vec(t)(0); }
  Complex d1(double t) const { return pieces_[interval_of(t)].vec(t)(1); }

  // l[y](t) on interval k.
  Complex ell(double t, int k) const {
    Complex v = lambda_ ? (*lambda_) * pieces_[k].vec(t)(0) : Complex(0, 0);
    if (!pieces_[k].forcing.empty()) v += pieces_[k].forcing(t);
    return v;
  }

 private:
  std::vector<double> partition_;
  std::vector<Piece> pieces_;
  std::optional<Complex> lambda_;
};

// Constructs a member of Dom(L_max) with the given per-interval initial
// values v_k(a_{k-1}) and forcings l[y] = f_k; the main generator of test
// functions for the verification suites.
QuasiFunction synthesize_domain_function(const Problem& problem,
                                         const std::vector<Vector2c>& initial,
                                         const std::vector<Forcing>& forcings,
                                         const IntegratorOptions& opt = {});

// L2 machinery on the dense-output mesh: composite Gauss-Legendre of degree
// 10 on every mesh segment.
Complex inner_product(const QuasiFunction& f, const QuasiFunction& g);
Complex inner_ell_left(const QuasiFunction& f, const QuasiFunction& g);  // <l[f], g>
double l2_norm(const QuasiFunction& f);

// <h, g> for a raw forcing against a domain function.
Complex inner_forcing(const Forcing& h, const QuasiFunction& g);

// Integral of |v' - (A + lambda E21) v - (0,-f)|_1 over the whole partition;
// the defining ODE residual of a QuasiFunction.
double ode_residual_l1(const QuasiFunction& y, const Problem& problem);

}  // namespace quasisl

#endif
