#ifndef QUASISL_POTENTIAL_HPP
#define QUASISL_POTENTIAL_HPP

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "quasisl/expr.hpp"

namespace quasisl {

// Sorted, deduplicated set of interior points where system coefficients are
// allowed to be discontinuous or non-smooth. Points closer than
// 1e-14 * span are merged.
class BreakpointSet {
 public:
  BreakpointSet() = default;
  BreakpointSet(std::vector<double> points, double span);

  void merge(const BreakpointSet& other);
  void add(double point);

  const std::vector<double>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  double span() const { return span_; }

  // Interior breakpoints strictly inside (a, b).
  std::vector<double> within(double a, double b) const;

 private:
  void normalize();
  std::vector<double> points_;
  double span_ = 1.0;
};

struct Delta {
  double location = 0;
  double weight = 0;
};

// The potential q on one interval: either a classical density plus point
// interactions, or the antiderivative Q supplied directly.
struct PotentialSpec {
  Expr ac_part;                 // optional
  std::vector<Delta> deltas;    // optional
  Expr direct_Q;                // exclusive with the other two

  bool has_direct() const { return !direct_Q.empty(); }
};

// Antiderivative Q of the potential, normalized so that Q(a) = 0 at the
// left endpoint of its host interval. The smooth part is a cumulative
// integral with checkpoints cached at breakpoints and at a fixed grid of 64
// interior anchors; jumps are bookkept exactly and applied
// right-continuously: Q(t) = smooth(t) + sum of weights with location <= t.
class Primitive {
 public:
  Primitive() = default;

  double operator()(double t) const;

  double a() const { return a_; }
  double b() const { return b_; }
  const std::vector<Delta>& jumps() const { return jumps_; }
  const BreakpointSet& breakpoints() const { return breakpoints_; }
  bool trivially_zero() const { return smooth_ == nullptr && jumps_.empty(); }

 private:
  friend Primitive build_primitive(const PotentialSpec& spec, double a,
                                   double b, double quad_tol);

  struct Smooth;  // checkpointed cumulative integral (or shifted direct Q)
  double a_ = 0, b_ = 1;
  std::shared_ptr<const Smooth> smooth_;
  std::vector<Delta> jumps_;  // sorted by location
  BreakpointSet breakpoints_;
};

// Builds the antiderivative of spec on [a, b]. The smooth part is accurate
// to quad_tol in sup norm. Throws ConfigError for deltas at or outside the
// interval endpoints and NumericalError if the quadrature fails.
Primitive build_primitive(const PotentialSpec& spec, double a, double b,
                          double quad_tol = 1e-12);

}  // namespace quasisl

#endif
