#ifndef QUASISL_QUADRATURE_HPP
#define QUASISL_QUADRATURE_HPP

#include <functional>
#include <utility>
#include <vector>

namespace quasisl {

// n-point Gauss-Legendre rule on [-1, 1]; results are cached per n.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

// Nodes/weights of the n-point rule mapped onto [a, b].
GaussRule gauss_legendre_on(int n, double a, double b);

// Adaptive Gauss-Kronrod (G7,K15). Throws NumericalError if the tolerance
// cannot be reached within the subdivision budget.
double adaptive_integrate(const std::function<double(double)>& f, double a,
                          double b, double tol, int max_depth = 40);

}  // namespace quasisl

#endif
