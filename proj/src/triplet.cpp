#include "quasisl/triplet.hpp"

#include <cmath>

#include "quasisl/errors.hpp"
#include "quasisl/expr.hpp"

namespace quasisl {

TraceVector traces(const QuasiFunction& y) {
  const int m = y.intervals();
  TraceVector tv;
  tv.gamma1 = VectorXc::Zero(2 * m);
  tv.gamma2 = VectorXc::Zero(2 * m);
  for (int k = 0; k < m; ++k) {
    const auto& piece = y.piece(k);
    Vector2c vl = piece.vec(piece.left);
    Vector2c vr = piece.vec(piece.right);
    tv.gamma1(2 * k) = vl(1);
    tv.gamma1(2 * k + 1) = -vr(1);
    tv.gamma2(2 * k) = vl(0);
    tv.gamma2(2 * k + 1) = vr(0);
  }
  return tv;
}

std::string to_string(OperatorClass cls) {
  switch (cls) {
    case OperatorClass::SelfAdjoint: return "self-adjoint";
    case OperatorClass::MaximalDissipative: return "maximal dissipative";
    case OperatorClass::MaximalAccumulative: return "maximal accumulative";
    default: return "none";
  }
}

Classification classify_impl(const MatrixXc& K, Variant variant) {
  Classification cls;
  Eigen::JacobiSVD<MatrixXc> svd(K);
  cls.norm = svd.singularValues()(0);
  const long n = K.rows();
  MatrixXc defect = K.adjoint() * K - MatrixXc::Identity(n, n);
  Eigen::JacobiSVD<MatrixXc> dsvd(defect);
  cls.unitarity_defect = dsvd.singularValues()(0);
  cls.contraction = cls.norm <= 1.0 + 1e-12;
  cls.unitary = cls.unitarity_defect <= 1e-12;
  if (cls.unitary)
    cls.cls = OperatorClass::SelfAdjoint;
  else if (cls.contraction)
    cls.cls = variant == Variant::Dissipative
                  ? OperatorClass::MaximalDissipative
                  : OperatorClass::MaximalAccumulative;
  else
    cls.cls = OperatorClass::Unclassified;
  return cls;
}

Classification classify(const MatrixXc& K) {
  return classify_impl(K, Variant::Dissipative);
}

BoundaryMatrix::BoundaryMatrix(MatrixXc K, Variant variant)
    : K_(std::move(K)), variant_(variant) {
  if (K_.rows() != K_.cols() || K_.rows() < 2 || K_.rows() % 2 != 0)
    throw ConfigError("boundary matrix must be square of size 2m");
  cls_ = classify_impl(K_, variant_);
}

VectorXc BoundaryMatrix::apply_condition(const VectorXc& g1,
                                         const VectorXc& g2) const {
  if (g1.size() != size() || g2.size() != size())
    throw ConfigError("trace vector size does not match the boundary matrix");
  const Complex si(0.0, variant_sign(variant_));
  return (K_ - MatrixXc::Identity(size(), size())) * g1 +
         si * ((K_ + MatrixXc::Identity(size(), size())) * g2);
}

BoundaryMatrix BoundaryMatrix::dirichlet(int m, Variant v) {
  return BoundaryMatrix(MatrixXc::Identity(2 * m, 2 * m), v);
}

BoundaryMatrix BoundaryMatrix::neumann(int m, Variant v) {
  return BoundaryMatrix(-MatrixXc::Identity(2 * m, 2 * m), v);
}

NodePermutation NodePermutation::standard(int m) {
  NodePermutation np;
  np.m = m;
  np.perm.resize(2 * m);
  for (int i = 0; i < 2 * m; ++i) np.perm[i] = i;
  np.blocks.emplace_back(0, 1);
  for (int j = 1; j < m; ++j) np.blocks.emplace_back(2 * j - 1, 2);
  np.blocks.emplace_back(2 * m - 1, 1);
  return np;
}

MatrixXc NodePermutation::to_node_major(const MatrixXc& K) const {
  const int n = static_cast<int>(perm.size());
  MatrixXc out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = K(perm[i], perm[j]);
  return out;
}

LocalityReport locality_check(const BoundaryMatrix& K,
                              const NodePermutation& perm) {
  if (static_cast<int>(perm.perm.size()) != K.size())
    throw ConfigError("node permutation size does not match K");
  MatrixXc nm = perm.to_node_major(K.K());
  LocalityReport report;
  const int n = K.size();
  std::vector<int> owner(n, -1);
  for (std::size_t b = 0; b < perm.blocks.size(); ++b) {
    auto [off, len] = perm.blocks[b];
    for (int i = 0; i < len; ++i) owner[off + i] = static_cast<int>(b);
  }
  double max_off = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (owner[i] != owner[j]) max_off = std::max(max_off, std::abs(nm(i, j)));
  report.max_off_block = max_off;
  report.local = max_off <= 1e-12;
  if (report.local)
    for (auto [off, len] : perm.blocks)
      report.blocks.push_back(nm.block(off, off, len, len));
  return report;
}

BoundaryMatrix from_trace_relation(
    const std::vector<std::pair<VectorXc, VectorXc>>& basis, Variant variant) {
  if (basis.empty()) throw ConfigError("empty trace relation");
  const long n = basis[0].first.size();
  const long count = static_cast<long>(basis.size());
  if (count < n)
    throw ConfigError("under-determined trace relation: need " +
                      std::to_string(n) + " independent pairs, got " +
                      std::to_string(count));
  const Complex i_unit(0.0, 1.0);
  const Complex s = variant_sign(variant);
  MatrixXc X(n, count), Y(n, count);
  for (long j = 0; j < count; ++j) {
    const auto& [g1, g2] = basis[j];
    if (g1.size() != n || g2.size() != n)
      throw ConfigError("inconsistent trace vector sizes in relation");
    X.col(j) = g1 + s * i_unit * g2;
    Y.col(j) = g1 - s * i_unit * g2;
  }
  // K X = Y  =>  X^T K^T = Y^T (least squares when over-determined)
  Eigen::JacobiSVD<MatrixXc> svd(X.transpose(),
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smax > 0) || smin < 1e-12 * smax)
    throw ConfigError(
        "trace relation is degenerate: the vectors g1 + i*g2 do not span the "
        "boundary space");
  MatrixXc Kt = svd.solve(Y.transpose());
  MatrixXc K = Kt.transpose();
  double resid = (K * X - Y).norm();
  if (resid > 1e-8 * (1.0 + Y.norm()))
    throw ConfigError("inconsistent trace relation (residual " +
                      std::to_string(resid) + ")");
  return BoundaryMatrix(std::move(K), variant);
}

std::vector<std::pair<VectorXc, VectorXc>> admissible_trace_basis(
    const BoundaryMatrix& K) {
  const int n = K.size();
  MatrixXc C(n, 2 * n);
  const Complex si(0.0, variant_sign(K.variant()));
  C.leftCols(n) = K.K() - MatrixXc::Identity(n, n);
  C.rightCols(n) = si * (K.K() + MatrixXc::Identity(n, n));
  Eigen::JacobiSVD<MatrixXc> svd(C, Eigen::ComputeFullV);
  std::vector<std::pair<VectorXc, VectorXc>> basis;
  // rank of C is always n; the trailing n right singular vectors span the
  // admissible subspace
  for (int j = n; j < 2 * n; ++j) {
    VectorXc v = svd.matrixV().col(j);
    basis.emplace_back(v.head(n), v.tail(n));
  }
  return basis;
}

QuasiFunction attain_traces(const Problem& problem, const VectorXc& g1,
                            const VectorXc& g2, const IntegratorOptions& opt) {
  const int m = problem.intervals();
  if (g1.size() != 2 * m || g2.size() != 2 * m)
    throw ConfigError("trace targets must have size 2m");
  std::vector<QuasiFunction::Piece> pieces(m);
  for (int k = 0; k < m; ++k) {
    ShinZettlSystem sys = assemble_system(problem, k);
    const double a = problem.left(k), b = problem.right(k);
    // left endpoint data is set directly; the right endpoint is matched
    // with a two-parameter forcing alpha + beta (t - a)
    Vector2c v0(g2(2 * k), g1(2 * k));
    Vector2c target(g2(2 * k + 1), -g1(2 * k + 1));
    auto zero = [](double) { return Complex(0, 0); };
    auto unit = [](double) { return Complex(1, 0); };
    auto ramp = [a](double t) { return Complex(t - a, 0); };
    VecTrajectory hom =
        solve_inhomogeneous(sys, Complex(0, 0), v0, a, b, zero, {}, opt);
    VecTrajectory resp1 = solve_inhomogeneous(
        sys, Complex(0, 0), Vector2c::Zero(), a, b, unit, {}, opt);
    VecTrajectory resp2 = solve_inhomogeneous(
        sys, Complex(0, 0), Vector2c::Zero(), a, b, ramp, {}, opt);
    Matrix2c response;
    response.col(0) = resp1.eval(b);
    response.col(1) = resp2.eval(b);
    Vector2c rhs = target - hom.eval(b);
    Eigen::FullPivLU<Matrix2c> lu(response);
    if (!lu.isInvertible())
      throw NumericalError(
          "trace matching failed: degenerate forcing response on interval " +
          std::to_string(k + 1));
    Vector2c ab = lu.solve(rhs);
    const Complex alpha = ab(0), beta = ab(1);
    Forcing forcing;
    forcing.fn = [alpha, beta, a](double t) {
      return alpha + beta * Complex(t - a, 0);
    };
    QuasiFunction::Piece& piece = pieces[k];
    piece.left = a;
    piece.right = b;
    piece.forcing = forcing;
    piece.particular = std::make_shared<VecTrajectory>(solve_inhomogeneous(
        sys, Complex(0, 0), v0, a, b, forcing.fn, {}, opt));
  }
  return QuasiFunction(problem.partition(), std::move(pieces));
}

namespace {

MatrixXc robin_block(const std::string& preset) {
  // "robin(theta)": 1x1 block e^{i theta}
  auto open = preset.find('(');
  auto close = preset.rfind(')');
  if (open == std::string::npos || close == std::string::npos ||
      close <= open + 1)
    throw ConfigError("malformed robin preset '" + preset +
                      "'; expected robin(theta)");
  std::string arg = preset.substr(open + 1, close - open - 1);
  double theta = Expr::parse(arg).eval_real(0.0);
  MatrixXc block(1, 1);
  block(0, 0) = std::exp(Complex(0.0, theta));
  return block;
}

}  // namespace

MatrixXc expand_presets(const std::vector<NodeBlockSpec>& node_blocks, int m) {
  if (static_cast<int>(node_blocks.size()) != m + 1)
    throw ConfigError("expected " + std::to_string(m + 1) +
                      " node blocks (one per partition node), got " +
                      std::to_string(node_blocks.size()));
  NodePermutation np = NodePermutation::standard(m);
  MatrixXc K = MatrixXc::Zero(2 * m, 2 * m);
  for (int j = 0; j <= m; ++j) {
    auto [off, len] = np.blocks[j];
    const NodeBlockSpec& spec = node_blocks[j];
    MatrixXc block;
    if (!spec.preset.empty()) {
      const std::string& p = spec.preset;
      if (p == "dirichlet")
        block = MatrixXc::Identity(len, len);
      else if (p == "neumann")
        block = -MatrixXc::Identity(len, len);
      else if (p == "transmission") {
        if (len != 2)
          throw ConfigError(
              "transmission preset is only valid at interior nodes");
        block = MatrixXc(2, 2);
        block << 0, -1, -1, 0;
      } else if (p.rfind("robin", 0) == 0) {
        if (len != 1)
          throw ConfigError("robin preset is only valid at outer endpoints");
        block = robin_block(p);
      } else {
        throw ConfigError("unknown boundary preset '" + p + "'");
      }
    } else {
      block = spec.block;
      if (block.rows() != len || block.cols() != len)
        throw ConfigError("node block " + std::to_string(j) + " must be " +
                          std::to_string(len) + "x" + std::to_string(len));
    }
    // identity permutation: node-major offsets index interval-major K directly
    K.block(off, off, len, len) = block;
  }
  return K;
}

}  // namespace quasisl
