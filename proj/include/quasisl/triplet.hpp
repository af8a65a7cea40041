#ifndef QUASISL_TRIPLET_HPP
#define QUASISL_TRIPLET_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "quasisl/quasifunction.hpp"

namespace quasisl {

using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

// Which of the two canonical boundary conditions K parametrizes:
//   Dissipative:  (K - I) G1 y + i (K + I) G2 y = 0
//   Accumulative: (K - I) G1 y - i (K + I) G2 y = 0
enum class Variant { Dissipative, Accumulative };

inline double variant_sign(Variant v) {
  return v == Variant::Dissipative ? 1.0 : -1.0;
}

// Trace vectors in interval-major order: block k holds
//   G1 block: ( D1 y(a_{k-1}+), -D1 y(a_k-) )
//   G2 block: (    y(a_{k-1}+),     y(a_k-) )
struct TraceVector {
  VectorXc gamma1;
  VectorXc gamma2;
};

TraceVector traces(const QuasiFunction& y);

enum class OperatorClass {
  SelfAdjoint,
  MaximalDissipative,
  MaximalAccumulative,
  Unclassified  // ||K|| > 1: the condition is usable but carries no guarantee
};

std::string to_string(OperatorClass cls);

struct Classification {
  OperatorClass cls = OperatorClass::Unclassified;
  double norm = 0;              // largest singular value of K
  double unitarity_defect = 0;  // ||K* K - I||_2
  bool contraction = false;
  bool unitary = false;
};

// The boundary parameter K with its classification, which is always
// recomputed from the matrix, never trusted from input.
class BoundaryMatrix {
 public:
  BoundaryMatrix(MatrixXc K, Variant variant);

  const MatrixXc& K() const { return K_; }
  Variant variant() const { return variant_; }
  int size() const { return static_cast<int>(K_.rows()); }
  int intervals() const { return size() / 2; }
  const Classification& classification() const { return cls_; }

  // Condition matrix applied to stacked traces:
  //   (K - I) g1 + s i (K + I) g2,  s = +-1 by variant.
  VectorXc apply_condition(const VectorXc& g1, const VectorXc& g2) const;

  static BoundaryMatrix dirichlet(int m, Variant v = Variant::Dissipative);
  static BoundaryMatrix neumann(int m, Variant v = Variant::Dissipative);

 private:
  MatrixXc K_;
  Variant variant_;
  Classification cls_;
};

Classification classify(const MatrixXc& K);

// Coordinate bookkeeping between interval-major trace coordinates and
// node-major blocks. With trace blocks ordered (left endpoint, right
// endpoint) per interval, the interval-major sequence is already grouped by
// node: a_0 owns coordinate 0, each interior node a_j owns the pair
// (2j-1, 2j) = (right trace of interval j, left trace of interval j+1),
// and a_m owns coordinate 2m-1. The permutation is therefore the identity;
// what matters is the block structure (1, 2, ..., 2, 1).
struct NodePermutation {
  int m = 1;
  std::vector<int> perm;                      // node-major pos -> interval-major idx
  std::vector<std::pair<int, int>> blocks;    // (offset, size) per node

  static NodePermutation standard(int m);
  MatrixXc to_node_major(const MatrixXc& K) const;
};

struct LocalityReport {
  bool local = false;
  double max_off_block = 0;
  std::vector<MatrixXc> blocks;  // node-major diagonal blocks when local
};

// Theorem-style block test: the boundary condition is local iff the
// node-major form of K is block diagonal with scalar blocks at the outer
// endpoints and 2x2 blocks at interior nodes.
LocalityReport locality_check(const BoundaryMatrix& K,
                              const NodePermutation& perm);

// Recovers K from a basis of admissible trace pairs (g1, g2), solving
// K (g1 + i g2) = g1 - i g2 columnwise (dissipative variant; the
// accumulative variant solves K (g1 - i g2) = g1 + i g2).
BoundaryMatrix from_trace_relation(
    const std::vector<std::pair<VectorXc, VectorXc>>& basis,
    Variant variant = Variant::Dissipative);

// Basis of the admissible trace subspace of a boundary condition: the null
// space of [(K - I), s i (K + I)] split back into (g1, g2) pairs.
std::vector<std::pair<VectorXc, VectorXc>> admissible_trace_basis(
    const BoundaryMatrix& K);

// Constructs a domain function with prescribed traces (surjectivity of the
// trace maps): per interval a two-point problem solved with a two-parameter
// polynomial forcing.
QuasiFunction attain_traces(const Problem& problem, const VectorXc& g1,
                            const VectorXc& g2,
                            const IntegratorOptions& opt = {});

// Node-major preset vocabulary: "dirichlet", "neumann", "robin(theta)",
// "transmission", or an explicit block. Builds the interval-major K.
struct NodeBlockSpec {
  std::string preset;  // empty when an explicit block is given
  MatrixXc block;      // 1x1 or 2x2
};
MatrixXc expand_presets(const std::vector<NodeBlockSpec>& node_blocks, int m);

}  // namespace quasisl

#endif
