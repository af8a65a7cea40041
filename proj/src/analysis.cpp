#include "quasisl/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "quasisl/errors.hpp"
#include "quasisl/log.hpp"
#include "quasisl/parallel.hpp"
#include "quasisl/quadrature.hpp"

namespace quasisl {

namespace {

// <u, v> = sum u_i conj(v_i); matches the L2 convention of inner_product.
Complex cinner(const VectorXc& u, const VectorXc& v) { return v.dot(u); }

}  // namespace

MatrixXc random_contraction(Rng& rng, int size, double max_norm) {
  MatrixXc G(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) G(i, j) = rng.complex_normal();
  Eigen::JacobiSVD<MatrixXc> svd(G);
  double target = max_norm * (0.1 + 0.9 * rng.uniform());
  return G * (target / svd.singularValues()(0));
}

MatrixXc random_unitary(Rng& rng, int size) {
  MatrixXc G(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) G(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<MatrixXc> qr(G);
  MatrixXc Q = qr.householderQ();
  MatrixXc R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < size; ++j) {
    Complex d = R(j, j);
    Q.col(j) *= (d == Complex(0, 0)) ? Complex(1, 0) : d / std::abs(d);
  }
  return Q;
}

QuasiFunction random_domain_function(const Problem& problem, Rng& rng,
                                     const IntegratorOptions& opt) {
  const int m = problem.intervals();
  std::vector<Vector2c> initial(m);
  std::vector<Forcing> forcings(m);
  for (int k = 0; k < m; ++k) {
    initial[k] = Vector2c(rng.complex_normal(), rng.complex_normal());
    const double a = problem.left(k), len = problem.right(k) - a;
    Complex c0 = rng.complex_normal(), c1 = rng.complex_normal(),
            c2 = rng.complex_normal(), c3 = rng.complex_normal();
    forcings[k].fn = [c0, c1, c2, c3, a, len](double t) {
      double u = (t - a) / len;
      return c0 + u * (c1 + u * (c2 + u * c3));
    };
  }
  return synthesize_domain_function(problem, initial, forcings, opt);
}

GreenIdentityReport green_identity_suite(const Problem& problem, int n_samples,
                                         std::uint64_t seed,
                                         const IntegratorOptions& opt) {
  GreenIdentityReport report;
  report.samples = n_samples;
  std::vector<double> residuals(n_samples, 0.0);
  // independent per-sample streams keep the suite order-independent
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
    Rng rng(seed + 0x9e3779b97f4a7c15ULL * (i + 1));
    QuasiFunction f = random_domain_function(problem, rng, opt);
    QuasiFunction g = random_domain_function(problem, rng, opt);
    Complex lf_g = inner_ell_left(f, g);
    Complex f_lg = std::conj(inner_ell_left(g, f));
    TraceVector tf = traces(f);
    TraceVector tg = traces(g);
    Complex boundary = cinner(tf.gamma1, tg.gamma2) -
                       cinner(tf.gamma2, tg.gamma1);
    double scale = std::abs(lf_g) + std::abs(f_lg) + std::abs(boundary) +
                   l2_norm(f) * l2_norm(g) + 1e-300;
    residuals[i] = std::abs(lf_g - f_lg - boundary) / scale;
  });
  for (double r : residuals) report.max_residual = std::max(report.max_residual, r);
  report.pass = report.max_residual <= 1e-8;
  return report;
}

DissipativityReport dissipativity_suite(const Problem& problem,
                                        const BoundaryMatrix& K, int n_samples,
                                        std::uint64_t seed,
                                        const IntegratorOptions& opt) {
  DissipativityReport report;
  report.samples = n_samples;
  const double s = variant_sign(K.variant());
  std::vector<double> signed_forms(n_samples);
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
    Rng rng(seed + 0xbf58476d1ce4e5b9ULL * (i + 1));
    // generate y in Dom(L_K) through the resolvent; lambda drawn from the
    // half-plane opposite the guaranteed spectrum
    double value = 0;
    for (int attempt = 0; attempt < 50; ++attempt) {
      Complex lambda(rng.uniform(-2.0, 2.0), s * rng.uniform(-2.5, -0.7));
      Forcing h;
      Complex c0 = rng.complex_normal(), c1 = rng.complex_normal(),
              c2 = rng.complex_normal();
      const double a = problem.a(), len = problem.b() - a;
      h.fn = [c0, c1, c2, a, len](double t) {
        double u = (t - a) / len;
        return c0 + u * (c1 + u * c2);
      };
      try {
        QuasiFunction y = apply_resolvent(problem, K, lambda, h, opt);
        double norm2 = std::abs(inner_product(y, y));
        if (norm2 < 1e-280) continue;
        value = s * inner_ell_left(y, y).imag() / norm2;
        break;
      } catch (const NumericalError&) {
        if (attempt >= 5) throw;
      }
    }
    signed_forms[i] = value;
  });
  report.min_signed_form = *std::min_element(signed_forms.begin(),
                                             signed_forms.end());
  for (double v : signed_forms)
    if (v < -1e-8) ++report.violations;
  report.pass = report.violations == 0;
  return report;
}

std::vector<std::pair<std::string, Forcing>> standard_test_functions(
    const Problem& problem) {
  const double a = problem.a(), b = problem.b();
  const double mid = 0.5 * (a + b);
  const double width = (b - a) / 40.0;
  const double center = a + 0.37 * (b - a);
  std::vector<std::pair<std::string, Forcing>> out;
  Forcing one;
  one.fn = [](double) { return Complex(1, 0); };
  out.emplace_back("const1", std::move(one));
  Forcing linear;
  linear.fn = [](double t) { return Complex(t, 0); };
  out.emplace_back("linear_t", std::move(linear));
  Forcing step;
  step.fn = [mid](double t) {
    return Complex(t > mid ? 1.0 : (t < mid ? -1.0 : 0.0), 0.0);
  };
  step.breakpoints = {mid};
  out.emplace_back("sign_mid", std::move(step));
  Forcing bump;
  bump.fn = [center, width](double t) {
    double u = (t - center) / width;
    return Complex(std::exp(-u * u), 0.0);
  };
  out.emplace_back("gauss_bump", std::move(bump));
  return out;
}

std::vector<CompletenessReport> completeness_suite(
    const Problem& problem, const std::vector<Eigenpair>& eigenpairs,
    const std::vector<std::pair<std::string, Forcing>>& test_functions,
    const std::vector<int>& counts, const IntegratorOptions& opt) {
  (void)opt;
  // collect root functions in (Re, Im) eigenvalue order
  std::vector<const QuasiFunction*> ys;
  for (const Eigenpair& ep : eigenpairs)
    for (const QuasiFunction& y : ep.root_functions) ys.push_back(&y);
  const int available = static_cast<int>(ys.size());
  if (available == 0) throw NumericalError("no root functions available");

  int n_max = 0;
  for (int n : counts) n_max = std::max(n, n_max);
  n_max = std::min(n_max, available);

  // Hermitian Gram matrix G(j,n) = <y_n, y_j>
  MatrixXc gram = MatrixXc::Zero(n_max, n_max);
  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j < n_max; ++j)
    for (int n = j; n < n_max; ++n) pairs.emplace_back(j, n);
  std::vector<Complex> vals(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t idx) {
    auto [j, n] = pairs[idx];
    vals[idx] = inner_product(*ys[n], *ys[j]);
  });
  for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
    auto [j, n] = pairs[idx];
    gram(j, n) = vals[idx];
    if (n != j) gram(n, j) = std::conj(vals[idx]);
  }
  Eigen::JacobiSVD<MatrixXc> gsvd(gram);
  const double gcond =
      gsvd.singularValues()(0) /
      std::max(gsvd.singularValues()(n_max - 1), 1e-300);

  std::vector<CompletenessReport> reports;
  for (const auto& [name, f] : test_functions) {
    CompletenessReport rep;
    rep.test_function = name;
    rep.gram_condition = gcond;

    VectorXc d(n_max);
    std::vector<Complex> dv(n_max);
    parallel_for(static_cast<std::size_t>(n_max), [&](std::size_t n) {
      dv[n] = inner_forcing(f, *ys[n]);
    });
    for (int n = 0; n < n_max; ++n) d(n) = dv[n];

    // ||f||^2 by adaptive quadrature per interval (split at forcing
    // discontinuities)
    double f_norm2 = 0;
    for (int k = 0; k < problem.intervals(); ++k) {
      std::vector<double> cuts{problem.left(k), problem.right(k)};
      for (double bp : f.breakpoints)
        if (bp > cuts.front() && bp < cuts.back())
          cuts.insert(cuts.end() - 1, bp);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t i = 1; i < cuts.size(); ++i)
        f_norm2 += adaptive_integrate(
            [&](double t) { return std::norm(f(t)); }, cuts[i - 1], cuts[i],
            1e-13);
    }

    for (int n : counts) {
      int use = std::min(n, available);
      MatrixXc G = gram.topLeftCorner(use, use);
      // guard against ill-conditioned Gram blocks
      Eigen::JacobiSVD<MatrixXc> bsvd(G);
      double cond = bsvd.singularValues()(0) /
                    std::max(bsvd.singularValues()(use - 1), 1e-300);
      if (cond > 1e12) {
        double ridge = 1e-14 * G.trace().real();
        G += ridge * MatrixXc::Identity(use, use);
        rep.regularized = true;
        log_warn("gram condition ", cond, " above 1e12; applying ridge ",
                 ridge);
      }
      VectorXc dn = d.head(use);
      VectorXc c = G.ldlt().solve(dn);
      double r2 = f_norm2 - 2.0 * (c.adjoint() * dn)(0).real() +
                  (c.adjoint() * gram.topLeftCorner(use, use) * c)(0).real();
      if (r2 < 0) r2 = 0;
      rep.N.push_back(use);
      rep.rho.push_back(std::sqrt(r2 / std::max(f_norm2, 1e-300)));
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace quasisl
