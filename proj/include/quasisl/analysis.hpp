#ifndef QUASISL_ANALYSIS_HPP
#define QUASISL_ANALYSIS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "quasisl/rng.hpp"
#include "quasisl/spectral.hpp"

namespace quasisl {

// Abstract Green identity residuals over random pairs from
// synthesize_domain_function:
//   <l f, g> - <f, l g> - (<G1 f, G2 g> - <G2 f, G1 g>),
// reported relative to the scale of the operands.
struct GreenIdentityReport {
  int samples = 0;
  double max_residual = 0;
  bool pass = false;  // max residual <= 1e-8
};
GreenIdentityReport green_identity_suite(const Problem& problem, int n_samples,
                                         std::uint64_t seed,
                                         const IntegratorOptions& opt = {});

// Sign of Im <L y, y> over domain functions generated through the resolvent
// (so the boundary condition holds by construction). Dissipative variant
// demands Im >= -1e-8 ||y||^2, accumulative the mirror image.
struct DissipativityReport {
  int samples = 0;
  double min_signed_form = 0;  // min over samples of s * Im<Ly,y> / ||y||^2
  int violations = 0;          // samples with signed form < -1e-8
  bool pass = false;
};
DissipativityReport dissipativity_suite(const Problem& problem,
                                        const BoundaryMatrix& K, int n_samples,
                                        std::uint64_t seed,
                                        const IntegratorOptions& opt = {});

// Least-squares completeness residuals rho_N = min_c ||f - sum c_n y_n||/||f||
// over the first N root functions (sorted by (Re, Im) of the eigenvalue).
struct CompletenessReport {
  std::string test_function;
  std::vector<int> N;
  std::vector<double> rho;
  double gram_condition = 0;
  bool regularized = false;
};

// Standard test functions: 1, t, sign(t - midpoint), narrow Gaussian bump.
std::vector<std::pair<std::string, Forcing>> standard_test_functions(
    const Problem& problem);

std::vector<CompletenessReport> completeness_suite(
    const Problem& problem, const std::vector<Eigenpair>& eigenpairs,
    const std::vector<std::pair<std::string, Forcing>>& test_functions,
    const std::vector<int>& counts, const IntegratorOptions& opt = {});

// Helpers shared by suites and tests.
MatrixXc random_contraction(Rng& rng, int size, double max_norm = 0.95);
MatrixXc random_unitary(Rng& rng, int size);
QuasiFunction random_domain_function(const Problem& problem, Rng& rng,
                                     const IntegratorOptions& opt = {});

}  // namespace quasisl

#endif
