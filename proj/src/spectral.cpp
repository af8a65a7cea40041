#include "quasisl/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>

#include "quasisl/errors.hpp"
#include "quasisl/log.hpp"
#include "quasisl/parallel.hpp"
#include "quasisl/quadrature.hpp"

namespace quasisl {

namespace {
constexpr double kCondLimit = 1e12;
}

ScaledComplex scaled_determinant(MatrixXc A) {
  const long n = A.rows();
  ScaledComplex det;
  det.log_mag = 0;
  det.phase = Complex(1, 0);
  // column equilibration, log-tracked
  for (long j = 0; j < n; ++j) {
    double mx = A.col(j).cwiseAbs().maxCoeff();
    if (mx == 0.0) return ScaledComplex{};  // singular
    A.col(j) /= mx;
    det.log_mag += std::log(mx);
  }
  for (long k = 0; k < n; ++k) {
    long piv = k;
    double best = std::abs(A(k, k));
    for (long i = k + 1; i < n; ++i) {
      double v = std::abs(A(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) return ScaledComplex{};
    if (piv != k) {
      A.row(piv).swap(A.row(k));
      det.phase = -det.phase;
    }
    const Complex pivot = A(k, k);
    det.log_mag += std::log(std::abs(pivot));
    det.phase *= pivot / std::abs(pivot);
    for (long i = k + 1; i < n; ++i) {
      Complex factor = A(i, k) / pivot;
      if (factor != Complex(0, 0))
        A.row(i).tail(n - k - 1) -= factor * A.row(k).tail(n - k - 1);
    }
  }
  return det;
}

CharSystem assemble_char(const Problem& problem, const BoundaryMatrix& K,
                         Complex lambda, const IntegratorOptions& opt) {
  const int m = problem.intervals();
  if (K.size() != 2 * m)
    throw ConfigError("boundary matrix size " + std::to_string(K.size()) +
                      " does not match 2m=" + std::to_string(2 * m));
  CharSystem cs;
  cs.lambda = lambda;
  cs.phi.resize(m);
  cs.G1 = MatrixXc::Zero(2 * m, 2 * m);
  cs.G2 = MatrixXc::Zero(2 * m, 2 * m);
  for (int k = 0; k < m; ++k) {
    ShinZettlSystem sys = assemble_system(problem, k);
    auto phi = std::make_shared<MatTrajectory>(fundamental_matrix(
        sys, lambda, problem.left(k), problem.right(k), opt));
    Matrix2c end = phi->eval(problem.right(k));
    // basis solution (k, j): v(a_{k-1}) = e_j, zero on other intervals
    //   G1 block: rows (left D1, -right D1), G2 block: rows (left y, right y)
    cs.G1(2 * k, 2 * k + 1) = 1.0;
    cs.G1(2 * k + 1, 2 * k) = -end(1, 0);
    cs.G1(2 * k + 1, 2 * k + 1) = -end(1, 1);
    cs.G2(2 * k, 2 * k) = 1.0;
    cs.G2(2 * k + 1, 2 * k) = end(0, 0);
    cs.G2(2 * k + 1, 2 * k + 1) = end(0, 1);
    cs.phi[k] = std::move(phi);
  }
  const Complex si(0.0, variant_sign(K.variant()));
  const MatrixXc I = MatrixXc::Identity(2 * m, 2 * m);
  cs.B = (K.K() - I) * cs.G1 + si * ((K.K() + I) * cs.G2);
  cs.det = scaled_determinant(cs.B);
  return cs;
}

std::pair<MatrixXc, ScaledComplex> char_det(const Problem& problem,
                                            const BoundaryMatrix& K,
                                            Complex lambda,
                                            const IntegratorOptions& opt) {
  CharSystem cs = assemble_char(problem, K, lambda, opt);
  return {std::move(cs.B), cs.det};
}

namespace {

// ------------------------------------------------------------------
// argument-principle machinery

struct NearSingularBoundary : NumericalError {
  using NumericalError::NumericalError;
};

class DetEvaluator {
 public:
  DetEvaluator(const Problem& problem, const BoundaryMatrix& K,
               const SearchOptions& opt)
      : problem_(problem), K_(K), opt_(opt) {
    scout_ = opt.ode.with_tol(std::max(opt.scout_rel, opt.ode.rel_tol),
                              std::max(opt.scout_abs, opt.ode.abs_tol));
  }

  ScaledComplex at(Complex lambda) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(key(lambda));
      if (it != cache_.end()) return it->second;
    }
    ScaledComplex d = compute(lambda);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key(lambda), d);
    return d;
  }

  // evaluates the missing points in parallel, deterministically
  void batch(const std::vector<Complex>& points) {
    std::vector<Complex> missing;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      for (Complex p : points)
        if (cache_.find(key(p)) == cache_.end()) missing.push_back(p);
    }
    if (missing.empty()) return;
    std::vector<ScaledComplex> results(missing.size());
    parallel_for(missing.size(), [&](std::size_t i) {
      results[i] = compute(missing[i]);
    });
    std::lock_guard<std::mutex> lock(mutex_);
    for (std::size_t i = 0; i < missing.size(); ++i)
      cache_.emplace(key(missing[i]), results[i]);
  }

  long evals() const { return evals_.load(); }

 private:
  using Key = std::pair<double, double>;
  static Key key(Complex z) { return {z.real(), z.imag()}; }

  ScaledComplex compute(Complex lambda) {
    long used = evals_.fetch_add(1) + 1;
    if (used > opt_.max_det_evals)
      throw NumericalError("determinant evaluation budget exhausted");
    return assemble_char(problem_, K_, lambda, scout_).det;
  }

  const Problem& problem_;
  const BoundaryMatrix& K_;
  SearchOptions opt_;
  IntegratorOptions scout_;
  std::map<Key, ScaledComplex> cache_;
  std::mutex mutex_;
  std::atomic<long> evals_{0};
};

struct Box {
  double re0, re1, im0, im1;
  double width() const { return re1 - re0; }
  double height() const { return im1 - im0; }
  double diag() const { return std::hypot(width(), height()); }
  Complex center() const {
    return {0.5 * (re0 + re1), 0.5 * (im0 + im1)};
  }
  bool contains(Complex z, double slack) const {
    return z.real() >= re0 - slack && z.real() <= re1 + slack &&
           z.imag() >= im0 - slack && z.imag() <= im1 + slack;
  }
};

// phase increment between consecutive boundary samples
double phase_step(const ScaledComplex& a, const ScaledComplex& b) {
  return std::arg(b.phase / a.phase);
}

// winding number of det along the boundary of box, refining until every
// phase increment is below pi/2; throws NearSingularBoundary when samples
// collapse onto a zero of det.
long winding_number(DetEvaluator& dets, const Box& box, double scale) {
  struct Sample {
    Complex z;
    ScaledComplex d;
  };
  const Complex c0(box.re0, box.im0), c1(box.re1, box.im0),
      c2(box.re1, box.im1), c3(box.re0, box.im1);
  std::vector<Complex> init;
  auto edge = [&init](Complex a, Complex b, int n) {
    for (int i = 0; i < n; ++i)
      init.push_back(a + (b - a) * (static_cast<double>(i) / n));
  };
  const int n0 = 16;
  edge(c0, c1, n0);
  edge(c1, c2, n0);
  edge(c2, c3, n0);
  edge(c3, c0, n0);
  dets.batch(init);

  std::vector<Sample> loop;
  loop.reserve(init.size() + 1);
  for (Complex z : init) loop.push_back({z, dets.at(z)});
  loop.push_back(loop.front());  // close the loop

  const double min_gap = 1e-12 * scale;
  const double mag_floor_drop = 60.0;  // e^-60 below the median magnitude
  for (int round = 0; round < 64; ++round) {
    // detect collapse onto a root
    std::vector<double> mags;
    mags.reserve(loop.size());
    for (const auto& s : loop) {
      if (s.d.is_zero())
        throw NearSingularBoundary("det vanishes on the box boundary");
      mags.push_back(s.d.log_mag);
    }
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    const double median = mags[mags.size() / 2];

    std::vector<std::size_t> refine;
    for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
      if (std::abs(phase_step(loop[i].d, loop[i + 1].d)) > M_PI_2) {
        if (std::abs(loop[i + 1].z - loop[i].z) < min_gap)
          throw NearSingularBoundary(
              "phase jump persists at the sampling-resolution limit");
        refine.push_back(i);
      }
      if (loop[i].d.log_mag < median - mag_floor_drop)
        throw NearSingularBoundary("det collapses on the box boundary");
    }
    if (refine.empty()) break;
    if (round == 63)
      throw NumericalError(
          "winding nonconvergence: phase continuation did not settle");
    std::vector<Complex> mids;
    mids.reserve(refine.size());
    for (std::size_t i : refine)
      mids.push_back(0.5 * (loop[i].z + loop[i + 1].z));
    dets.batch(mids);
    std::vector<Sample> next;
    next.reserve(loop.size() + mids.size());
    std::size_t r = 0;
    for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
      next.push_back(loop[i]);
      if (r < refine.size() && refine[r] == i) {
        next.push_back({mids[r], dets.at(mids[r])});
        ++r;
      }
    }
    next.push_back(loop.back());
    loop.swap(next);
    if (loop.size() > 40000)
      throw NumericalError("winding nonconvergence: sample budget exhausted");
  }

  double total = 0;
  for (std::size_t i = 0; i + 1 < loop.size(); ++i)
    total += phase_step(loop[i].d, loop[i + 1].d);
  const double two_pi = 2.0 * M_PI;
  long w = std::lround(total / two_pi);
  if (std::abs(total - two_pi * static_cast<double>(w)) > 0.5)
    throw NumericalError("winding number failed to close to an integer");
  return w;
}

// Newton on d/dlambda log det; returns true on convergence inside the box.
bool newton_polish(DetEvaluator& dets, const Box& box, double scale,
                   Complex& lambda) {
  Complex z = lambda;
  const double slack = 1e-7 * scale;
  double last_step = std::numeric_limits<double>::infinity();
  int stagnation = 0;
  for (int it = 0; it < 80; ++it) {
    double h = std::max(1e-9 * scale, 1e-7 * std::abs(last_step));
    if (!std::isfinite(h) || h > 1e-3 * scale) h = 1e-6 * scale;
    ScaledComplex dp = dets.at(z + Complex(h, 0));
    ScaledComplex dm = dets.at(z - Complex(h, 0));
    if (dp.is_zero() || dm.is_zero()) return true;  // sitting on the root
    Complex dlog((dp.log_mag - dm.log_mag) / (2 * h),
                 phase_step(dm, dp) / (2 * h));
    if (dlog == Complex(0, 0)) return false;
    Complex step = -1.0 / dlog;
    z += step;
    if (!box.contains(z, 0.05 * box.diag() + slack)) return false;
    double mag = std::abs(step);
    if (mag < 1e-13 * (1.0 + std::abs(z))) {
      lambda = z;
      return true;
    }
    if (mag > 0.9 * last_step) {
      if (++stagnation > 12) {
        // linear-rate convergence (multiple root); accept if the step is
        // already far below the box scale
        if (mag < 1e-10 * scale) {
          lambda = z;
          return true;
        }
        return false;
      }
    } else {
      stagnation = 0;
    }
    last_step = mag;
  }
  return false;
}

}  // namespace

QuasiFunction solution_from_char(const Problem& problem, const CharSystem& cs,
                                 const VectorXc& coeff,
                                 std::vector<std::shared_ptr<const VecTrajectory>>
                                     particular,
                                 Forcing h, bool lambda_in_ell) {
  const int m = problem.intervals();
  std::vector<QuasiFunction::Piece> pieces(m);
  for (int k = 0; k < m; ++k) {
    auto& piece = pieces[k];
    piece.left = problem.left(k);
    piece.right = problem.right(k);
    piece.basis = cs.phi[k];
    piece.coeff = Vector2c(coeff(2 * k), coeff(2 * k + 1));
    if (!particular.empty()) piece.particular = particular[k];
    piece.forcing = h;
  }
  return QuasiFunction(problem.partition(), std::move(pieces),
                       lambda_in_ell ? std::optional<Complex>(cs.lambda)
                                     : std::nullopt);
}

namespace {

Eigenpair make_eigenpair(const Problem& problem, const BoundaryMatrix& K,
                         Complex lambda, int alg_mult,
                         const SearchOptions& opt) {
  CharSystem cs = assemble_char(problem, K, lambda, opt.ode);
  Eigen::JacobiSVD<MatrixXc> svd(cs.B, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double smax = sigma(0);
  const long n = sigma.size();
  int geo = 0;
  for (long i = 0; i < n; ++i)
    if (sigma(i) <= 1e-8 * std::max(1.0, smax)) ++geo;
  if (geo == 0) geo = 1;  // Newton converged: treat the smallest as null
  Eigenpair pair;
  pair.lambda = lambda;
  pair.alg_mult = alg_mult;
  pair.geo_mult = geo;
  pair.jordan_suspected = alg_mult > geo;
  pair.residual = smax > 0 ? sigma(n - 1) / smax : 0.0;
  if (opt.compute_root_functions) {
    for (int j = 0; j < geo; ++j) {
      VectorXc c = svd.matrixV().col(n - 1 - j);
      QuasiFunction y =
          solution_from_char(problem, cs, c, {}, Forcing{}, true);
      double norm = l2_norm(y);
      if (norm > 0) {
        c /= norm;
        y = solution_from_char(problem, cs, c, {}, Forcing{}, true);
      }
      pair.root_functions.push_back(std::move(y));
    }
  }
  return pair;
}

}  // namespace

SearchReport find_eigenvalues(const Problem& problem, const BoundaryMatrix& K,
                              const SearchRegion& region,
                              const SearchOptions& opt) {
  SearchReport report;
  DetEvaluator dets(problem, K, opt);
  const double scale =
      std::max({1.0, std::abs(region.re_min), std::abs(region.re_max),
                std::abs(region.im_min), std::abs(region.im_max)});

  // region boundary must avoid eigenvalues; expand slightly on collision
  Box top{region.re_min, region.re_max, region.im_min, region.im_max};
  long top_winding = 0;
  bool have_top = false;
  for (int attempt = 0; attempt < 6 && !have_top; ++attempt) {
    try {
      top_winding = winding_number(dets, top, scale);
      have_top = true;
    } catch (const NearSingularBoundary&) {
      double eps = 1e-6 * scale * std::pow(3.0, attempt);
      top = Box{top.re0 - eps, top.re1 + eps, top.im0 - eps, top.im1 + eps};
      log_info("perturbing search region by ", eps,
               " (eigenvalue near the boundary)");
    }
  }
  if (!have_top)
    throw NumericalError(
        "search region boundary keeps hitting eigenvalues; adjust the region");
  report.region_winding = top_winding;
  report.region_used =
      SearchRegion{top.re0, top.re1, top.im0, top.im1};

  struct WorkItem {
    Box box;
    long winding;
  };
  std::vector<WorkItem> queue{{top, top_winding}};
  std::vector<Eigenpair> found;

  auto subdivide = [&](const Box& box, long w) {
    const bool split_re = box.width() >= box.height();
    const double fractions[] = {0.5, 0.53, 0.47, 0.57, 0.43, 0.61};
    for (double frac : fractions) {
      Box lo = box, hi = box;
      if (split_re) {
        double cut = box.re0 + frac * box.width();
        lo.re1 = cut;
        hi.re0 = cut;
      } else {
        double cut = box.im0 + frac * box.height();
        lo.im1 = cut;
        hi.im0 = cut;
      }
      try {
        long wl = winding_number(dets, lo, scale);
        long wh = winding_number(dets, hi, scale);
        if (wl + wh != w) continue;  // aliasing or a root on the cut; retry
        queue.push_back({lo, wl});
        queue.push_back({hi, wh});
        return;
      } catch (const NearSingularBoundary&) {
        continue;  // root on the cut line; nudge the fraction
      }
    }
    throw NumericalError("box subdivision kept hitting eigenvalues");
  };

  while (!queue.empty()) {
    WorkItem item = queue.back();
    queue.pop_back();
    ++report.boxes_processed;
    if (item.winding == 0) continue;

    const Box& box = item.box;
    if (box.diag() < 1e-10 * scale) {
      // unresolvable cluster: report the center with the box winding
      found.push_back(make_eigenpair(problem, K, box.center(),
                                     static_cast<int>(item.winding), opt));
      continue;
    }
    if (item.winding <= 2) {
      Complex lambda = box.center();
      if (newton_polish(dets, box, scale, lambda) &&
          box.contains(lambda, 1e-9 * scale)) {
        // tight contour around the candidate counts its multiplicity
        double r = std::max(1e-8 * scale,
                            std::min(0.05 * box.diag(), 1e-4 * scale));
        Box tight{lambda.real() - r, lambda.real() + r, lambda.imag() - r,
                  lambda.imag() + r};
        bool counted = false;
        long mult = 0;
        for (int attempt = 0; attempt < 4 && !counted; ++attempt) {
          try {
            mult = winding_number(dets, tight, scale);
            counted = true;
          } catch (const NearSingularBoundary&) {
            double grow = 1.7;
            tight = Box{lambda.real() - r * grow, lambda.real() + r * grow,
                        lambda.imag() - r * grow, lambda.imag() + r * grow};
            r *= grow;
          }
        }
        if (counted && mult == item.winding) {
          found.push_back(make_eigenpair(problem, K, lambda,
                                         static_cast<int>(mult), opt));
          continue;
        }
      }
    }
    subdivide(box, item.winding);
  }

  std::sort(found.begin(), found.end(), [](const Eigenpair& a,
                                           const Eigenpair& b) {
    if (a.lambda.real() != b.lambda.real())
      return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
  if (static_cast<int>(found.size()) > opt.max_count) {
    found.resize(opt.max_count);
    report.truncated = true;
  }
  report.eigenvalues = std::move(found);
  report.det_evals = dets.evals();
  return report;
}

namespace {

QuasiFunction resolve_with(const Problem& problem, const BoundaryMatrix& K,
                           Complex lambda, const Forcing& h,
                           const IntegratorOptions& opt) {
  CharSystem cs = assemble_char(problem, K, lambda, opt);
  Eigen::JacobiSVD<MatrixXc> svd(cs.B);
  const auto& sigma = svd.singularValues();
  if (!(sigma(sigma.size() - 1) > 0) ||
      sigma(0) / sigma(sigma.size() - 1) > kCondLimit)
    throw NumericalError(
        "boundary system is numerically singular: lambda is (near) an "
        "eigenvalue");

  const int m = problem.intervals();
  std::vector<std::shared_ptr<const VecTrajectory>> particular(m);
  VectorXc g1w = VectorXc::Zero(2 * m), g2w = VectorXc::Zero(2 * m);
  auto fn = h.fn ? h.fn : std::function<Complex(double)>([](double) {
    return Complex(0, 0);
  });
  for (int k = 0; k < m; ++k) {
    ShinZettlSystem sys = assemble_system(problem, k);
    auto w = std::make_shared<VecTrajectory>(
        solve_inhomogeneous(sys, lambda, Vector2c::Zero(), problem.left(k),
                            problem.right(k), fn, h.breakpoints, opt));
    Vector2c wr = w->eval(problem.right(k));
    g1w(2 * k + 1) = -wr(1);
    g2w(2 * k + 1) = wr(0);
    particular[k] = std::move(w);
  }
  VectorXc rhs = -K.apply_condition(g1w, g2w);
  VectorXc coeff = cs.B.partialPivLu().solve(rhs);
  return solution_from_char(problem, cs, coeff, std::move(particular), h,
                            true);
}

}  // namespace

QuasiFunction apply_resolvent(const Problem& problem, const BoundaryMatrix& K,
                              Complex lambda, const Forcing& h,
                              const IntegratorOptions& opt) {
  return resolve_with(problem, K, lambda, h, opt);
}

QuasiFunction apply_resolvent(const Problem& problem, const KFamily& Kfun,
                              Variant variant, Complex lambda, const Forcing& h,
                              const IntegratorOptions& opt) {
  if (lambda.imag() == 0.0)
    throw NumericalError(
        "generalized resolvents are defined off the real axis");
  if (lambda.imag() < 0.0 && variant != Variant::Dissipative)
    throw ConfigError(
        "Im lambda < 0 requires the dissipative-form boundary condition");
  if (lambda.imag() > 0.0 && variant != Variant::Accumulative)
    throw ConfigError(
        "Im lambda > 0 requires the accumulative-form boundary condition");
  MatrixXc Kl = Kfun(lambda);
  BoundaryMatrix K(std::move(Kl), variant);
  if (K.classification().norm > 1.0 + 1e-10)
    throw NumericalError("K(lambda) is not a contraction (||K|| = " +
                         std::to_string(K.classification().norm) + ")");
  return resolve_with(problem, K, lambda, h, opt);
}

GreenKernel green_kernel(const Problem& problem, const BoundaryMatrix& K,
                         Complex lambda, int nodes_per_interval,
                         const IntegratorOptions& opt) {
  CharSystem cs = assemble_char(problem, K, lambda, opt);
  Eigen::JacobiSVD<MatrixXc> svd(cs.B);
  const auto& sigma = svd.singularValues();
  if (!(sigma(sigma.size() - 1) > 0) ||
      sigma(0) / sigma(sigma.size() - 1) > kCondLimit)
    throw NumericalError("lambda is (near) an eigenvalue of the boundary "
                         "problem; no Green kernel");
  Eigen::PartialPivLU<MatrixXc> lu(cs.B);

  const int m = problem.intervals();
  // quadrature panels per interval (split at coefficient breakpoints)
  struct Panel {
    int interval;
    double a, b;
    int order;
  };
  std::vector<Panel> panels;
  for (int k = 0; k < m; ++k) {
    ShinZettlSystem sys = assemble_system(problem, k);
    std::vector<double> cuts =
        sys.breakpoints().within(problem.left(k), problem.right(k));
    cuts.insert(cuts.begin(), problem.left(k));
    cuts.push_back(problem.right(k));
    const double len = problem.right(k) - problem.left(k);
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      int order = std::max(
          8, static_cast<int>(std::lround(nodes_per_interval *
                                          (cuts[i] - cuts[i - 1]) / len)));
      panels.push_back({k, cuts[i - 1], cuts[i], order});
    }
  }

  GreenKernel kernel;
  kernel.lambda = lambda;
  std::vector<int> node_interval;
  for (const Panel& p : panels) {
    GaussRule rule = gauss_legendre_on(p.order, p.a, p.b);
    for (int i = 0; i < p.order; ++i) {
      kernel.t_nodes.push_back(rule.nodes[i]);
      kernel.t_weights.push_back(rule.weights[i]);
      node_interval.push_back(p.interval);
    }
  }
  const std::size_t n_glob = kernel.t_nodes.size();
  kernel.values = MatrixXc::Zero(n_glob, n_glob);

  // evaluates the kernel column G(., s) given the interval j of s
  struct Column {
    VectorXc coeff;       // homogeneous coefficients
    Vector2c jump_seed;   // Phi_j(s)^{-1} (0,-1)^T
    int j;
    double s;
  };
  auto make_column = [&](int j, double s) {
    Column col;
    col.j = j;
    col.s = s;
    Matrix2c phis = cs.phi[j]->eval(s);
    col.jump_seed = phis.inverse() * Vector2c(Complex(0, 0), Complex(-1, 0));
    Vector2c wr = cs.phi[j]->eval(problem.right(j)) * col.jump_seed;
    VectorXc g1w = VectorXc::Zero(2 * m), g2w = VectorXc::Zero(2 * m);
    g1w(2 * j + 1) = -wr(1);
    g2w(2 * j + 1) = wr(0);
    col.coeff = lu.solve(VectorXc(-K.apply_condition(g1w, g2w)));
    return col;
  };
  auto eval_column = [&](const Column& col, int interval, double t) {
    Matrix2c phi = cs.phi[interval]->eval(t);
    Vector2c v = phi * Vector2c(col.coeff(2 * interval),
                                col.coeff(2 * interval + 1));
    if (interval == col.j && t >= col.s) v += phi * col.jump_seed;
    return v(0);
  };

  // Hilbert-Schmidt accumulation: for each s-node, integrate |G(., s)|^2
  // with the panel containing s split at s.
  std::vector<double> hs_terms(n_glob, 0.0);
  std::vector<std::vector<Complex>> cols(n_glob);
  parallel_for(n_glob, [&](std::size_t sj) {
    const double s = kernel.t_nodes[sj];
    const int j = node_interval[sj];
    Column col = make_column(j, s);

    // tensor-grid samples (output)
    std::vector<Complex> column(n_glob);
    for (std::size_t i = 0; i < n_glob; ++i)
      column[i] = eval_column(col, node_interval[i], kernel.t_nodes[i]);
    cols[sj] = std::move(column);

    double inner = 0;
    for (const Panel& p : panels) {
      auto accumulate = [&](double a, double b, int order) {
        if (!(b > a)) return;
        GaussRule rule = gauss_legendre_on(order, a, b);
        for (int q = 0; q < order; ++q) {
          Complex g = eval_column(col, p.interval, rule.nodes[q]);
          inner += rule.weights[q] * std::norm(g);
        }
      };
      if (p.interval == j && s > p.a && s < p.b) {
        accumulate(p.a, s, p.order);
        accumulate(s, p.b, p.order);
      } else {
        accumulate(p.a, p.b, p.order);
      }
    }
    hs_terms[sj] = kernel.t_weights[sj] * inner;
  });
  for (std::size_t sj = 0; sj < n_glob; ++sj)
    for (std::size_t i = 0; i < n_glob; ++i)
      kernel.values(i, sj) = cols[sj][i];
  double hs2 = 0;
  for (double term : hs_terms) hs2 += term;
  kernel.hs = std::sqrt(hs2);
  return kernel;
}

double eigen_equation_residual(const QuasiFunction& y, const Problem& problem) {
  if (!y.lambda())
    throw ConfigError("eigen residual needs a spectral-solution function");
  const Complex lambda = *y.lambda();
  double total = 0;
  for (int k = 0; k < y.intervals(); ++k) {
    ShinZettlSystem sys = assemble_system(problem, k);
    const auto& piece = y.piece(k);
    auto mesh = piece.mesh();
    const GaussRule& rule = gauss_legendre(10);
    for (std::size_t i = 1; i < mesh.size(); ++i) {
      const double a = mesh[i - 1], b = mesh[i];
      const double c = 0.5 * (a + b), h2 = 0.5 * (b - a);
      for (int q = 0; q < 10; ++q) {
        double t = c + h2 * rule.nodes[q];
        Vector2c v = piece.vec(t);
        Vector2c dv = piece.deriv(t);
        const double pv = sys.p(t);
        const double rv = sys.r(t);
        const double qv = sys.Q(t);
        // l[y] = -(D1y)' - ((Q-ir)/p) D1y - ((Q^2+r^2)/p) y
        Complex ell = -dv(1) - (Complex(qv, -rv) / pv) * v(1) -
                      ((qv * qv + rv * rv) / pv) * v(0);
        Complex target = lambda * v(0);
        if (!piece.forcing.empty()) target += piece.forcing(t);
        total += h2 * rule.weights[q] * std::norm(ell - target);
      }
    }
  }
  return std::sqrt(total);
}

}  // namespace quasisl
