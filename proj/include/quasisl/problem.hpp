#ifndef QUASISL_PROBLEM_HPP
#define QUASISL_PROBLEM_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "quasisl/expr.hpp"
#include "quasisl/potential.hpp"

namespace quasisl {

using Matrix2c = Eigen::Matrix2cd;
using Vector2c = Eigen::Vector2cd;

// Coefficients of one interval: p and r as expressions (real-valued), the
// potential through its antiderivative Q, and any user-declared kinks.
struct IntervalCoefficients {
  Expr p;
  Primitive Q;
  Expr r;
  BreakpointSet extra_breakpoints;
};

// Partition a = a_0 < ... < a_m = b plus the per-interval coefficient
// triples. Immutable after construction; the entire analytic input.
class Problem {
 public:
  Problem(std::vector<double> partition,
          std::vector<IntervalCoefficients> coefficients);

  int intervals() const { return static_cast<int>(coefficients_.size()); }
  double left(int k) const { return partition_[k]; }
  double right(int k) const { return partition_[k + 1]; }
  double a() const { return partition_.front(); }
  double b() const { return partition_.back(); }
  const std::vector<double>& partition() const { return partition_; }
  const IntervalCoefficients& coefficients(int k) const {
    return coefficients_[k];
  }

  // Convenience: the free problem p=1, q=0, r=0 on the given partition.
  static Problem free_problem(std::vector<double> partition);

 private:
  std::vector<double> partition_;
  std::vector<IntervalCoefficients> coefficients_;
};

// The 2x2 first-order system matrix of one interval,
//   A = [ (Q+ir)/p      1/p
//        -(Q^2+r^2)/p  -(Q-ir)/p ],
// so that v = (y, p y' - (Q+ir) y) turns the quasi-differential equation
// into v' = A v. Entries jump wherever Q jumps; those points are recorded
// as breakpoints and the propagator never steps across them.
class ShinZettlSystem {
 public:
  ShinZettlSystem(const Problem& problem, int k);

  Matrix2c matrix(double t) const;
  double p(double t) const;  // throws SingularCoefficientError when |p|<1e-300
  double r(double t) const;
  double Q(double t) const;

  int interval() const { return k_; }
  double left() const { return left_; }
  double right() const { return right_; }
  const BreakpointSet& breakpoints() const { return breakpoints_; }

 private:
  int k_;
  double left_, right_;
  Expr p_, r_;
  Primitive Q_;
  BreakpointSet breakpoints_;
};

ShinZettlSystem assemble_system(const Problem& problem, int k);

// A + lambda * [[0,0],[-1,0]]; the system of the eigenvalue equation.
struct SpectralSystem {
  const ShinZettlSystem* sys;
  Complex lambda;

  Matrix2c operator()(double t) const {
    Matrix2c m = sys->matrix(t);
    m(1, 0) -= lambda;
    return m;
  }
};

// Numerical check of the membership conditions on the coefficients
// (integrals of 1/|p|, Q^2/|p|, r^2/|p|). Reported as warnings only;
// quadrature cannot prove membership.
struct CoefficientConditionReport {
  int interval;
  double inv_p;
  double Q_sq;
  double r_sq;
  bool ok;
  std::string message;
};
std::vector<CoefficientConditionReport> check_coefficient_conditions(
    const Problem& problem);

}  // namespace quasisl

#endif
