#include "quasisl/potential.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quasisl/errors.hpp"
#include "quasisl/quadrature.hpp"

namespace quasisl {

BreakpointSet::BreakpointSet(std::vector<double> points, double span)
    : points_(std::move(points)), span_(span) {
  normalize();
}

void BreakpointSet::normalize() {
  std::sort(points_.begin(), points_.end());
  const double tol = 1e-14 * std::abs(span_);
  std::vector<double> out;
  for (double p : points_) {
    if (out.empty() || p - out.back() > tol) out.push_back(p);
  }
  points_.swap(out);
}

void BreakpointSet::merge(const BreakpointSet& other) {
  points_.insert(points_.end(), other.points_.begin(), other.points_.end());
  span_ = std::max(span_, other.span_);
  normalize();
}

void BreakpointSet::add(double point) {
  points_.push_back(point);
  normalize();
}

std::vector<double> BreakpointSet::within(double a, double b) const {
  const double tol = 1e-14 * std::abs(span_);
  std::vector<double> out;
  for (double p : points_)
    if (p > a + tol && p < b - tol) out.push_back(p);
  return out;
}

// Cumulative integral of the density with cached checkpoints. Evaluation
// integrates adaptively from the nearest checkpoint at or below t.
struct Primitive::Smooth {
  Expr density;                    // empty when direct Q is used
  Expr direct;                     // empty when density route is used
  double direct_offset = 0;        // direct(a), subtracted for Q(a)=0
  std::vector<double> checkpoints;
  std::vector<double> cumulative;
  double tol = 1e-12;

  double eval(double t) const {
    if (!direct.empty()) return direct.eval_real(t) - direct_offset;
    auto it = std::upper_bound(checkpoints.begin(), checkpoints.end(), t);
    std::size_t idx = (it == checkpoints.begin())
                          ? 0
                          : static_cast<std::size_t>(it - checkpoints.begin()) - 1;
    double base = cumulative[idx];
    double t0 = checkpoints[idx];
    if (t == t0) return base;
    auto f = [this](double x) { return density.eval_real(x); };
    return base + adaptive_integrate(f, t0, t, tol);
  }
};

double Primitive::operator()(double t) const {
  double value = smooth_ ? smooth_->eval(t) : 0.0;
  // right-continuous: a jump located exactly at t is included
  for (const Delta& d : jumps_) {
    if (d.location <= t)
      value += d.weight;
    else
      break;
  }
  return value;
}

Primitive build_primitive(const PotentialSpec& spec, double a, double b,
                          double quad_tol) {
  if (!(b > a)) throw ConfigError("empty interval for potential");
  const double span = b - a;
  const double edge_tol = 1e-14 * span;

  Primitive prim;
  prim.a_ = a;
  prim.b_ = b;

  if (spec.has_direct()) {
    if (!spec.ac_part.empty() || !spec.deltas.empty())
      throw ConfigError(
          "potential must supply either {ac, deltas} or a direct Q, not both");
    auto smooth = std::make_shared<Primitive::Smooth>();
    smooth->direct = spec.direct_Q;
    smooth->direct_offset = spec.direct_Q.eval_real(a);
    prim.smooth_ = std::move(smooth);
    prim.breakpoints_ = BreakpointSet({}, span);
    return prim;
  }

  std::vector<Delta> jumps = spec.deltas;
  std::sort(jumps.begin(), jumps.end(),
            [](const Delta& x, const Delta& y) { return x.location < y.location; });
  std::vector<double> break_pts;
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const Delta& d = jumps[i];
    if (d.location <= a + edge_tol || d.location >= b - edge_tol)
      throw ConfigError(
          "delta at t=" + std::to_string(d.location) +
          " lies at an interval endpoint; split the partition there and use "
          "a transmission-type K block instead");
    if (i > 0 && d.location - jumps[i - 1].location <= edge_tol)
      throw ConfigError("coincident delta locations at t=" +
                        std::to_string(d.location));
    break_pts.push_back(d.location);
  }
  prim.jumps_ = std::move(jumps);

  if (!spec.ac_part.empty()) {
    auto smooth = std::make_shared<Primitive::Smooth>();
    smooth->density = spec.ac_part;
    smooth->tol = quad_tol;
    // checkpoints: interval ends, jump locations, and 64 interior anchors
    std::vector<double> pts;
    pts.push_back(a);
    pts.push_back(b);
    for (double p : break_pts) pts.push_back(p);
    for (int i = 1; i <= 64; ++i) pts.push_back(a + span * i / 65.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [edge_tol](double x, double y) {
                            return y - x <= edge_tol;
                          }),
              pts.end());
    smooth->checkpoints = pts;
    smooth->cumulative.assign(pts.size(), 0.0);
    auto f = [&](double x) { return spec.ac_part.eval_real(x); };
    double acc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      acc += adaptive_integrate(f, pts[i - 1], pts[i],
                                quad_tol / static_cast<double>(pts.size()));
      smooth->cumulative[i] = acc;
    }
    prim.smooth_ = std::move(smooth);
  }

  prim.breakpoints_ = BreakpointSet(std::move(break_pts), span);
  return prim;
}

}  // namespace quasisl
