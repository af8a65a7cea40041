#ifndef QUASISL_SPECTRAL_HPP
#define QUASISL_SPECTRAL_HPP

#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "quasisl/triplet.hpp"

namespace quasisl {

// Complex number carried as log-magnitude plus unit phase so that
// characteristic determinants stay representable for large |lambda|.
struct ScaledComplex {
  double log_mag = -std::numeric_limits<double>::infinity();
  Complex phase = Complex(0, 0);  // unit modulus, or 0 for the zero value

  bool is_zero() const { return phase == Complex(0, 0); }
  Complex value() const {
    return is_zero() ? Complex(0, 0) : phase * std::exp(log_mag);
  }
};

// det via column-equilibrated, partially pivoted LU with log-magnitude and
// phase tracking.
ScaledComplex scaled_determinant(MatrixXc A);

// The boundary-condition matrix at one lambda: trace images of the 2m
// disjointly supported basis solutions (per interval k the two solutions
// seeded with v(a_{k-1}) = e1, e2), and B = (K-I)G1 +- i(K+I)G2.
struct CharSystem {
  Complex lambda;
  std::vector<std::shared_ptr<const MatTrajectory>> phi;  // per interval
  MatrixXc G1, G2, B;
  ScaledComplex det;
};

CharSystem assemble_char(const Problem& problem, const BoundaryMatrix& K,
                         Complex lambda, const IntegratorOptions& opt = {});

// (B(lambda), det B(lambda)); det vanishes exactly at the eigenvalues.
std::pair<MatrixXc, ScaledComplex> char_det(const Problem& problem,
                                            const BoundaryMatrix& K,
                                            Complex lambda,
                                            const IntegratorOptions& opt = {});

struct Eigenpair {
  Complex lambda;
  int alg_mult = 1;           // winding number of det B around a tight contour
  int geo_mult = 1;           // rank deficiency of B(lambda)
  bool jordan_suspected = false;
  double residual = 0;        // smallest singular value of normalized B
  std::vector<QuasiFunction> root_functions;  // unit L2 norm
};

struct SearchRegion {
  double re_min, re_max, im_min, im_max;
};

struct SearchOptions {
  int max_count = 64;
  IntegratorOptions ode;          // fine tolerance (Newton polish, residuals)
  double scout_rel = 1e-6;        // winding/contour tolerance
  double scout_abs = 1e-9;
  long max_det_evals = 2000000;
  bool compute_root_functions = true;
};

struct SearchReport {
  std::vector<Eigenpair> eigenvalues;  // sorted by (Re, Im)
  long region_winding = 0;             // of the (possibly perturbed) region
  bool truncated = false;
  long det_evals = 0;
  int boxes_processed = 0;
  SearchRegion region_used{};          // after any perturbation
};

// Adaptive rectangle subdivision by the argument principle, then Newton on
// det B; multiplicities always sum to the region winding number.
SearchReport find_eigenvalues(const Problem& problem, const BoundaryMatrix& K,
                              const SearchRegion& region,
                              const SearchOptions& opt = {});

// Ordinary resolvent: solves l(y) = lambda y + h under the boundary
// condition of K. Throws NumericalError when lambda is (near) an eigenvalue
// (cond(B) > 1e12).
QuasiFunction apply_resolvent(const Problem& problem, const BoundaryMatrix& K,
                              Complex lambda, const Forcing& h,
                              const IntegratorOptions& opt = {});

// Generalized resolvent with a lambda-dependent contraction family K(.):
// condition-(5) form is required for Im lambda < 0 and condition-(6) form
// for Im lambda > 0; ||K(lambda)|| <= 1 is verified at every evaluation.
using KFamily = std::function<MatrixXc(Complex)>;
QuasiFunction apply_resolvent(const Problem& problem, const KFamily& Kfun,
                              Variant variant, Complex lambda, const Forcing& h,
                              const IntegratorOptions& opt = {});

// Sampled kernel of (L_K - lambda)^{-1}. The printable samples live on a
// per-interval Gauss-Legendre tensor grid; the Hilbert-Schmidt norm is
// accumulated with the t-quadrature split at s (the kernel has a derivative
// kink across the diagonal, which a plain tensor rule cannot integrate to
// the accuracy the refinement diagnostics require).
struct GreenKernel {
  Complex lambda;
  std::vector<double> t_nodes;     // global grid (all intervals concatenated)
  std::vector<double> t_weights;
  MatrixXc values;                 // values(i, j) = G(t_i, s_j)
  double hs = 0;                   // Hilbert-Schmidt norm
};

GreenKernel green_kernel(const Problem& problem, const BoundaryMatrix& K,
                         Complex lambda, int nodes_per_interval = 64,
                         const IntegratorOptions& opt = {});

inline double hs_norm(const GreenKernel& kernel) { return kernel.hs; }

// || l[y] - lambda y ||_L2 evaluated through the quasi-derivative formula on
// the dense output (independent of the metadata path).
double eigen_equation_residual(const QuasiFunction& y, const Problem& problem);

}  // namespace quasisl

#endif
