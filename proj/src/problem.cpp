#include "quasisl/problem.hpp"

#include <cmath>

#include "quasisl/errors.hpp"
#include "quasisl/log.hpp"
#include "quasisl/quadrature.hpp"

namespace quasisl {

Problem::Problem(std::vector<double> partition,
                 std::vector<IntervalCoefficients> coefficients)
    : partition_(std::move(partition)), coefficients_(std::move(coefficients)) {
  if (partition_.size() < 2)
    throw ConfigError("partition needs at least two points");
  for (std::size_t i = 1; i < partition_.size(); ++i)
    if (!(partition_[i] > partition_[i - 1]))
      throw ConfigError("partition must be strictly increasing");
  if (coefficients_.size() + 1 != partition_.size())
    throw ConfigError("expected " + std::to_string(partition_.size() - 1) +
                      " coefficient triples, got " +
                      std::to_string(coefficients_.size()));
  for (auto& c : coefficients_) {
    if (c.p.empty()) c.p = Expr::constant(1.0);
    if (c.r.empty()) c.r = Expr::constant(0.0);
  }
}

Problem Problem::free_problem(std::vector<double> partition) {
  std::vector<IntervalCoefficients> coeffs(partition.size() - 1);
  for (std::size_t k = 0; k + 1 < partition.size(); ++k) {
    coeffs[k].p = Expr::constant(1.0);
    coeffs[k].r = Expr::constant(0.0);
    coeffs[k].Q = build_primitive(PotentialSpec{}, partition[k],
                                  partition[k + 1]);
  }
  return Problem(std::move(partition), std::move(coeffs));
}

ShinZettlSystem::ShinZettlSystem(const Problem& problem, int k)
    : k_(k),
      left_(problem.left(k)),
      right_(problem.right(k)),
      p_(problem.coefficients(k).p),
      r_(problem.coefficients(k).r),
      Q_(problem.coefficients(k).Q) {
  breakpoints_ = Q_.breakpoints();
  breakpoints_.merge(problem.coefficients(k).extra_breakpoints);
}

double ShinZettlSystem::p(double t) const {
  double value = p_.eval_real(t);
  if (std::abs(value) < 1e-300)
    throw SingularCoefficientError(
        "coefficient p vanishes at t=" + std::to_string(t) +
        " (interval " + std::to_string(k_ + 1) + ")",
        t);
  return value;
}

double ShinZettlSystem::r(double t) const { return r_.eval_real(t); }

double ShinZettlSystem::Q(double t) const { return Q_(t); }

Matrix2c ShinZettlSystem::matrix(double t) const {
  const double pv = p(t);
  const double rv = r_.eval_real(t);
  const double qv = Q_(t);
  const Complex q_plus(qv, rv);   // Q + i r
  const Complex q_minus(qv, -rv); // Q - i r
  Matrix2c m;
  m(0, 0) = q_plus / pv;
  m(0, 1) = Complex(1.0 / pv, 0.0);
  m(1, 0) = Complex(-(qv * qv + rv * rv) / pv, 0.0);
  m(1, 1) = -q_minus / pv;
  return m;
}

ShinZettlSystem assemble_system(const Problem& problem, int k) {
  if (k < 0 || k >= problem.intervals())
    throw ConfigError("interval index out of range");
  return ShinZettlSystem(problem, k);
}

std::vector<CoefficientConditionReport> check_coefficient_conditions(
    const Problem& problem) {
  std::vector<CoefficientConditionReport> reports;
  for (int k = 0; k < problem.intervals(); ++k) {
    const auto& c = problem.coefficients(k);
    CoefficientConditionReport rep;
    rep.interval = k;
    rep.ok = true;
    auto guarded = [&](const std::function<double(double)>& f) {
      try {
        return adaptive_integrate(f, problem.left(k), problem.right(k), 1e-8,
                                  24);
      } catch (const Error&) {
        rep.ok = false;
        return std::nan("");
      }
    };
    rep.inv_p = guarded([&](double t) { return 1.0 / std::abs(c.p.eval_real(t)); });
    rep.Q_sq = guarded([&](double t) {
      double q = c.Q(t);
      return q * q / std::abs(c.p.eval_real(t));
    });
    rep.r_sq = guarded([&](double t) {
      double r = c.r.eval_real(t);
      return r * r / std::abs(c.p.eval_real(t));
    });
    if (!rep.ok || !std::isfinite(rep.inv_p) || !std::isfinite(rep.Q_sq) ||
        !std::isfinite(rep.r_sq)) {
      rep.ok = false;
      rep.message = "membership integrals did not converge on interval " +
                    std::to_string(k + 1) +
                    "; results near a zero of p are unreliable";
      log_warn(rep.message);
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace quasisl
