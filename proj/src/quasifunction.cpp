#include "quasisl/quasifunction.hpp"

#include <algorithm>
#include <cmath>

#include "quasisl/errors.hpp"
#include "quasisl/quadrature.hpp"

namespace quasisl {

namespace {

void append_unique_sorted(std::vector<double>& mesh, double span) {
  std::sort(mesh.begin(), mesh.end());
  const double tol = 1e-13 * span;
  std::vector<double> out;
  for (double t : mesh)
    if (out.empty() || t - out.back() > tol) out.push_back(t);
  mesh.swap(out);
}

// integral of fn over [a,b] with the merged mesh, 10-point GL per segment
Complex quad_mesh(const std::vector<double>& mesh,
                  const std::function<Complex(double)>& fn) {
  const GaussRule& rule = gauss_legendre(10);
  Complex total(0, 0);
  for (std::size_t i = 1; i < mesh.size(); ++i) {
    const double a = mesh[i - 1], b = mesh[i];
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Complex acc(0, 0);
    for (int j = 0; j < 10; ++j)
      acc += rule.weights[j] * fn(c + h * rule.nodes[j]);
    total += h * acc;
  }
  return total;
}

std::vector<double> merged_mesh(const QuasiFunction::Piece& f,
                                const QuasiFunction::Piece& g) {
  std::vector<double> mesh = f.mesh();
  std::vector<double> other = g.mesh();
  mesh.insert(mesh.end(), other.begin(), other.end());
  append_unique_sorted(mesh, f.right - f.left);
  return mesh;
}

}  // namespace

std::vector<double> QuasiFunction::Piece::mesh() const {
  std::vector<double> out;
  out.push_back(left);
  out.push_back(right);
  if (basis) {
    auto k = basis->knots();
    out.insert(out.end(), k.begin(), k.end());
  }
  if (particular) {
    auto k = particular->knots();
    out.insert(out.end(), k.begin(), k.end());
  }
  for (double b : forcing.breakpoints)
    if (b > left && b < right) out.push_back(b);
  append_unique_sorted(out, right - left);
  return out;
}

QuasiFunction::QuasiFunction(std::vector<double> partition,
                             std::vector<Piece> pieces,
                             std::optional<Complex> lambda)
    : partition_(std::move(partition)),
      pieces_(std::move(pieces)),
      lambda_(lambda) {
  if (partition_.size() != pieces_.size() + 1)
    throw ConfigError("quasi-function pieces do not match the partition");
}

int QuasiFunction::interval_of(double t) const {
  auto it = std::upper_bound(partition_.begin(), partition_.end(), t);
  int k = static_cast<int>(it - partition_.begin()) - 1;
  if (k < 0) k = 0;
  if (k >= intervals()) k = intervals() - 1;
  return k;
}

QuasiFunction synthesize_domain_function(const Problem& problem,
                                         const std::vector<Vector2c>& initial,
                                         const std::vector<Forcing>& forcings,
                                         const IntegratorOptions& opt) {
  const int m = problem.intervals();
  if (static_cast<int>(initial.size()) != m ||
      static_cast<int>(forcings.size()) != m)
    throw ConfigError("need one initial value and one forcing per interval");
  std::vector<QuasiFunction::Piece> pieces(m);
  for (int k = 0; k < m; ++k) {
    ShinZettlSystem sys = assemble_system(problem, k);
    QuasiFunction::Piece& piece = pieces[k];
    piece.left = problem.left(k);
    piece.right = problem.right(k);
    piece.forcing = forcings[k];
    auto fn = forcings[k].fn
                  ? forcings[k].fn
                  : std::function<Complex(double)>([](double) {
                      return Complex(0, 0);
                    });
    piece.particular = std::make_shared<VecTrajectory>(solve_inhomogeneous(
        sys, Complex(0, 0), initial[k], piece.left, piece.right, fn,
        forcings[k].breakpoints, opt));
  }
  return QuasiFunction(problem.partition(), std::move(pieces));
}

Complex inner_product(const QuasiFunction& f, const QuasiFunction& g) {
  Complex total(0, 0);
  for (int k = 0; k < f.intervals(); ++k) {
    const auto& fp = f.piece(k);
    const auto& gp = g.piece(k);
    auto mesh = merged_mesh(fp, gp);
    total += quad_mesh(mesh, [&](double t) {
      return fp.vec(t)(0) * std::conj(gp.vec(t)(0));
    });
  }
  return total;
}

Complex inner_ell_left(const QuasiFunction& f, const QuasiFunction& g) {
  Complex total(0, 0);
  for (int k = 0; k < f.intervals(); ++k) {
    const auto& fp = f.piece(k);
    const auto& gp = g.piece(k);
    auto mesh = merged_mesh(fp, gp);
    total += quad_mesh(mesh, [&](double t) {
      return f.ell(t, k) * std::conj(gp.vec(t)(0));
    });
  }
  return total;
}

double l2_norm(const QuasiFunction& f) {
  return std::sqrt(std::abs(inner_product(f, f)));
}

Complex inner_forcing(const Forcing& h, const QuasiFunction& g) {
  Complex total(0, 0);
  for (int k = 0; k < g.intervals(); ++k) {
    const auto& gp = g.piece(k);
    std::vector<double> mesh = gp.mesh();
    for (double b : h.breakpoints)
      if (b > gp.left && b < gp.right) mesh.push_back(b);
    append_unique_sorted(mesh, gp.right - gp.left);
    total += quad_mesh(mesh, [&](double t) {
      return h(t) * std::conj(gp.vec(t)(0));
    });
  }
  return total;
}

double ode_residual_l1(const QuasiFunction& y, const Problem& problem) {
  double total = 0;
  const Complex lambda = y.lambda() ? *y.lambda() : Complex(0, 0);
  for (int k = 0; k < y.intervals(); ++k) {
    ShinZettlSystem sys = assemble_system(problem, k);
    const auto& piece = y.piece(k);
    auto mesh = piece.mesh();
    for (double b : sys.breakpoints().within(piece.left, piece.right))
      mesh.push_back(b);
    append_unique_sorted(mesh, piece.right - piece.left);
    Complex integral = quad_mesh(mesh, [&](double t) {
      Matrix2c m = sys.matrix(t);
      m(1, 0) -= lambda;
      Vector2c v = piece.vec(t);
      Vector2c resid = piece.deriv(t) - m * v;
      if (!piece.forcing.empty()) resid(1) += piece.forcing(t);
      return Complex(std::abs(resid(0)) + std::abs(resid(1)), 0.0);
    });
    total += integral.real();
  }
  return total;
}

}  // namespace quasisl
