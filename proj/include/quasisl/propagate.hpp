#ifndef QUASISL_PROPAGATE_HPP
#define QUASISL_PROPAGATE_HPP

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "quasisl/problem.hpp"

namespace quasisl {

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  long max_steps = 2000000;

  IntegratorOptions with_tol(double rel, double abs) const {
    IntegratorOptions o = *this;
    o.rel_tol = rel;
    o.abs_tol = abs;
    return o;
  }
};

// Dense output of an embedded Dormand-Prince 5(4) integration. Each step
// stores the quartic interpolation polynomial; evaluation anywhere inside
// the integration range is O(log steps).
template <class State>
class DenseOutput {
 public:
  struct Step {
    double t0, h;
    State r1, r2, r3, r4, r5;
  };

  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  const std::vector<Step>& steps() const { return steps_; }

  State eval(double t) const {
    const Step& s = locate(t);
    double theta = (t - s.t0) / s.h;
    if (theta < 0) theta = 0;
    if (theta > 1) theta = 1;
    const double th1 = 1.0 - theta;
    return s.r1 + theta * (s.r2 + th1 * (s.r3 + theta * (s.r4 + th1 * s.r5)));
  }

  // d/dt of the interpolant.
  State deriv(double t) const {
    const Step& s = locate(t);
    double theta = (t - s.t0) / s.h;
    if (theta < 0) theta = 0;
    if (theta > 1) theta = 1;
    State d = s.r2 + (1.0 - 2.0 * theta) * s.r3 +
              (2.0 * theta - 3.0 * theta * theta) * s.r4 +
              (2.0 * theta - 6.0 * theta * theta +
               4.0 * theta * theta * theta) *
                  s.r5;
    return d / s.h;
  }

  // Step boundaries (sorted, including both endpoints); the natural
  // quadrature mesh for inner products.
  std::vector<double> knots() const {
    std::vector<double> k;
    k.reserve(steps_.size() + 1);
    for (const Step& s : steps_) k.push_back(s.t0);
    k.push_back(t_end_);
    return k;
  }

  // assembled by the integrator
  std::vector<Step> steps_;
  double t_begin_ = 0, t_end_ = 0;

 private:
  const Step& locate(double t) const;
};

using VecTrajectory = DenseOutput<Vector2c>;
using MatTrajectory = DenseOutput<Matrix2c>;

// Integrates y' = f(t, y) from t0 to t1 (t0 < t1) with dense output.
// Interior breakpoints are honored exactly: every breakpoint is a step
// endpoint, so discontinuous right-hand sides are integrated piecewise.
VecTrajectory integrate_vec(const std::function<Vector2c(double, const Vector2c&)>& f,
                            double t0, double t1, const Vector2c& y0,
                            std::span<const double> breakpoints,
                            const IntegratorOptions& opt);
MatTrajectory integrate_mat(const std::function<Matrix2c(double, const Matrix2c&)>& f,
                            double t0, double t1, const Matrix2c& y0,
                            std::span<const double> breakpoints,
                            const IntegratorOptions& opt);

// Fundamental matrix Phi(., t0) of v' = (A + lambda E21)v on [t0, t1] with
// Phi(t0) = I; columns span the solution space of l[y] = lambda y.
MatTrajectory fundamental_matrix(const ShinZettlSystem& sys, Complex lambda,
                                 double t0, double t1,
                                 const IntegratorOptions& opt);

// Solves v' = (A + lambda E21)v + (0, -f)^T, v(t0) = v0. Breakpoints of the
// forcing are merged into the system breakpoint set for the solve.
VecTrajectory solve_inhomogeneous(const ShinZettlSystem& sys, Complex lambda,
                                  const Vector2c& v0, double t0, double t1,
                                  const std::function<Complex(double)>& forcing,
                                  std::span<const double> forcing_breakpoints,
                                  const IntegratorOptions& opt);

// |det Phi(t1) - exp(int tr A)| / |exp(int tr A)| — the Liouville identity
// defect; a propagation-quality diagnostic used by the test suites.
double liouville_defect(const ShinZettlSystem& sys, Complex lambda, double t0,
                        double t1, const IntegratorOptions& opt);

}  // namespace quasisl

#endif
