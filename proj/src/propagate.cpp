#include "quasisl/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "quasisl/errors.hpp"
#include "quasisl/quadrature.hpp"

namespace quasisl {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

template <class State>
double error_norm(const State& err, const State& y0, const State& y1,
                  double atol, double rtol) {
  double sum = 0;
  const auto* e = err.data();
  const auto* a = y0.data();
  const auto* b = y1.data();
  const long n = err.size();
  for (long i = 0; i < n; ++i) {
    double scale = atol + rtol * std::max(std::abs(a[i]), std::abs(b[i]));
    double q = std::abs(e[i]) / scale;
    sum += q * q;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

template <class State>
double state_norm(const State& y) {
  double m = 0;
  const auto* p = y.data();
  for (long i = 0; i < y.size(); ++i) m = std::max(m, std::abs(p[i]));
  return m;
}

template <class State, class Rhs>
double initial_step(const Rhs& f, double t0, double t_end, const State& y0,
                    const State& f0, double atol, double rtol) {
  const double dny = state_norm(y0);
  const double dnf = state_norm(f0);
  double h;
  if (dnf < 1e-10 || dny < 1e-10)
    h = 1e-6;
  else
    h = 0.01 * (dny / dnf);
  h = std::min(h, t_end - t0);
  State y1 = y0 + h * f0;
  State f1 = f(t0 + h, y1);
  double der2 = state_norm(State(f1 - f0)) / h;
  double der12 = std::max(der2, dnf);
  double h1;
  if (der12 <= 1e-15)
    h1 = std::max(1e-6, h * 1e-3);
  else
    h1 = std::pow(0.01 / der12 * (atol + rtol), 0.2);
  return std::max(1e-14, std::min({100 * h, h1, t_end - t0}));
}

// One smooth panel; appends dense records to out.
template <class State, class Rhs>
void integrate_panel(const Rhs& f, double t0, double t1, State& y,
                     const IntegratorOptions& opt, DenseOutput<State>& out,
                     long& steps_used) {
  const double atol = opt.abs_tol, rtol = opt.rel_tol;
  double t = t0;
  State k1 = f(t, y);
  double h = initial_step(f, t0, t1, y, k1, atol, rtol);

  const double safe = 0.9, beta = 0.04;
  const double expo1 = 0.2 - beta * 0.75;
  double facold = 1e-4;
  bool rejected = false;

  while (t < t1) {
    if (steps_used++ > opt.max_steps)
      throw PropagationError("step budget exhausted near t=" +
                             std::to_string(t));
    if (h < 16.0 * std::numeric_limits<double>::epsilon() *
                (std::abs(t) + std::abs(h)))
      throw PropagationError("step size underflow at t=" + std::to_string(t) +
                             "; requested tolerances are unreachable");
    bool last = false;
    if (t + h >= t1 - 1e-14 * (std::abs(t1) + 1.0)) {
      h = t1 - t;
      last = true;
    }

    State k2 = f(t + c2 * h, State(y + h * (a21 * k1)));
    State k3 = f(t + c3 * h, State(y + h * (a31 * k1 + a32 * k2)));
    State k4 = f(t + c4 * h, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    State k5 = f(t + c5 * h,
                 State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    State k6 = f(t + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 +
                                       a64 * k4 + a65 * k5)));
    State y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    State k7 = f(t + h, y1);
    State err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 +
                         e7 * k7);
    double err = error_norm(err_vec, y, y1, atol, rtol);

    double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      // accept; record the dense interpolant for [t, t+h]
      typename DenseOutput<State>::Step rec;
      rec.t0 = t;
      rec.h = h;
      rec.r1 = y;
      rec.r2 = y1 - y;
      rec.r3 = h * k1 - rec.r2;
      rec.r4 = rec.r2 - h * k7 - rec.r3;
      rec.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 +
                    d7 * k7);
      out.steps_.push_back(std::move(rec));

      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(0.1, std::min(5.0, fac / safe));
      double hnew = h / fac;
      if (rejected) hnew = std::min(hnew, h);
      facold = std::max(err, 1e-4);
      rejected = false;
      t = last ? t1 : t + h;
      y = y1;
      k1 = k7;  // FSAL
      h = hnew;
    } else {
      h = h / std::min(5.0, fac11 / safe);
      rejected = true;
    }
  }
}

template <class State, class Rhs>
DenseOutput<State> integrate_impl(const Rhs& f, double t0, double t1,
                                  State y0, std::span<const double> breaks,
                                  const IntegratorOptions& opt) {
  if (!(t1 > t0)) throw PropagationError("integration range is empty");
  DenseOutput<State> out;
  out.t_begin_ = t0;
  out.t_end_ = t1;
  std::vector<double> panel_ends;
  const double tol = 1e-14 * (t1 - t0);
  for (double b : breaks)
    if (b > t0 + tol && b < t1 - tol) panel_ends.push_back(b);
  std::sort(panel_ends.begin(), panel_ends.end());
  panel_ends.push_back(t1);

  State y = std::move(y0);
  double t = t0;
  long steps_used = 0;
  for (double end : panel_ends) {
    integrate_panel(f, t, end, y, opt, out, steps_used);
    t = end;
  }
  return out;
}

}  // namespace

template <class State>
const typename DenseOutput<State>::Step& DenseOutput<State>::locate(
    double t) const {
  if (steps_.empty()) throw PropagationError("empty dense output");
  const double slack = 1e-9 * (1.0 + std::abs(t_end_ - t_begin_));
  if (t < t_begin_ - slack || t > t_end_ + slack)
    throw PropagationError("dense output evaluated outside [" +
                           std::to_string(t_begin_) + ", " +
                           std::to_string(t_end_) + "] at t=" +
                           std::to_string(t));
  // last step whose start is <= t
  std::size_t lo = 0, hi = steps_.size();
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (steps_[mid].t0 <= t)
      lo = mid;
    else
      hi = mid;
  }
  return steps_[lo];
}

template class DenseOutput<Vector2c>;
template class DenseOutput<Matrix2c>;

VecTrajectory integrate_vec(
    const std::function<Vector2c(double, const Vector2c&)>& f, double t0,
    double t1, const Vector2c& y0, std::span<const double> breakpoints,
    const IntegratorOptions& opt) {
  return integrate_impl(f, t0, t1, Vector2c(y0), breakpoints, opt);
}

MatTrajectory integrate_mat(
    const std::function<Matrix2c(double, const Matrix2c&)>& f, double t0,
    double t1, const Matrix2c& y0, std::span<const double> breakpoints,
    const IntegratorOptions& opt) {
  return integrate_impl(f, t0, t1, Matrix2c(y0), breakpoints, opt);
}

MatTrajectory fundamental_matrix(const ShinZettlSystem& sys, Complex lambda,
                                 double t0, double t1,
                                 const IntegratorOptions& opt) {
  SpectralSystem spectral{&sys, lambda};
  auto rhs = [&spectral](double t, const Matrix2c& m) -> Matrix2c {
    return spectral(t) * m;
  };
  return integrate_impl(rhs, t0, t1, Matrix2c(Matrix2c::Identity()),
                        sys.breakpoints().within(t0, t1), opt);
}

VecTrajectory solve_inhomogeneous(const ShinZettlSystem& sys, Complex lambda,
                                  const Vector2c& v0, double t0, double t1,
                                  const std::function<Complex(double)>& forcing,
                                  std::span<const double> forcing_breakpoints,
                                  const IntegratorOptions& opt) {
  SpectralSystem spectral{&sys, lambda};
  auto rhs = [&spectral, &forcing](double t, const Vector2c& v) -> Vector2c {
    Vector2c dv = spectral(t) * v;
    dv(1) -= forcing(t);
    return dv;
  };
  BreakpointSet breaks = sys.breakpoints();
  for (double b : forcing_breakpoints) breaks.add(b);
  return integrate_impl(rhs, t0, t1, Vector2c(v0), breaks.within(t0, t1), opt);
}

double liouville_defect(const ShinZettlSystem& sys, Complex lambda, double t0,
                        double t1, const IntegratorOptions& opt) {
  MatTrajectory phi = fundamental_matrix(sys, lambda, t0, t1, opt);
  Complex det = phi.eval(t1).determinant();
  // trace(A + lambda E21) = 2 i r / p, integrated piecewise between
  // breakpoints (the trace does not see the jumps of Q)
  std::vector<double> pts = sys.breakpoints().within(t0, t1);
  pts.insert(pts.begin(), t0);
  pts.push_back(t1);
  double integral_im = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    integral_im += adaptive_integrate(
        [&](double t) { return 2.0 * sys.r(t) / sys.p(t); }, pts[i - 1],
        pts[i], 1e-13);
  Complex expected = std::exp(Complex(0.0, integral_im));
  return std::abs(det - expected) / std::abs(expected);
}

}  // namespace quasisl
