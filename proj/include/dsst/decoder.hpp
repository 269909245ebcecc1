#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "dsst/compress.hpp"
#include "dsst/detect.hpp"
#include "dsst/model.hpp"
#include "dsst/numeric.hpp"
#include "dsst/types.hpp"

namespace dsst {

// A support made the reconstruction ill-posed: the least-squares matrix lost
// rank beyond the slack directions, so the state estimate is not unique.
struct RankError : Error {
  RankError(const std::string& msg, std::vector<int> k) : Error(msg), support(std::move(k)) {}
  std::vector<int> support;
};

struct DecodeResult {
  Vector x_hat;      // state at the window base time
  Vector x_hat_now;  // propagated to the current time by A^{n-1}
  std::vector<int> support;          // estimated attack support, |.| <= s
  std::vector<Vector> support_values;  // per-support attack window estimates
  double residual = 0.0;
  std::vector<std::pair<std::vector<int>, double>> residual_table;  // diagnostic
};

namespace detail {

// (D ⊗ I_n) O as a vn x n matrix: block row j = sum_i d_ji O_i.
inline Matrix compressed_observability(const LtiSystem& sys, const Matrix& d) {
  const int n = sys.n();
  const ObservabilityStack stack = observability_stack(sys);
  Matrix out = Matrix::Zero(d.rows() * n, n);
  for (Eigen::Index j = 0; j < d.rows(); ++j)
    for (int i = 0; i < sys.p(); ++i)
      if (d(j, i) != 0.0) out.middleRows(j * n, n) += d(j, i) * stack.per_node[i];
  return out;
}

// Applies (L ⊗ I_n) to a vertically block-stacked matrix (n rows per block).
inline Matrix kron_row_mix(const Matrix& l, const Matrix& blocks, int n) {
  Matrix out = Matrix::Zero(l.rows() * n, blocks.cols());
  for (Eigen::Index r = 0; r < l.rows(); ++r)
    for (Eigen::Index j = 0; j < l.cols(); ++j)
      if (l(r, j) != 0.0) out.middleRows(r * n, n) += l(r, j) * blocks.middleRows(j * n, n);
  return out;
}

struct SupportSolve {
  Vector solution;  // min-norm least-squares solution
  double residual = 0.0;
  bool state_ambiguous = false;  // null space leaks into the first n_state coordinates
};

inline SupportSolve solve_support(const Matrix& m, const Vector& target, int n_state) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const int rank = numeric_rank(svd.singularValues());
  Vector z = Vector::Zero(m.cols());
  for (int i = 0; i < rank; ++i)
    z += (svd.matrixU().col(i).dot(target) / svd.singularValues()(i)) * svd.matrixV().col(i);
  SupportSolve out;
  out.solution = std::move(z);
  out.residual = (target - m * out.solution).norm();
  for (Eigen::Index i = rank; i < m.cols(); ++i)
    if (svd.matrixV().col(i).head(n_state).cwiseAbs().maxCoeff() > 1e-6)
      out.state_ambiguous = true;
  return out;
}

inline std::string support_to_string(const std::vector<int>& k) {
  std::string s = "{";
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(k[i] + 1);
  }
  return s + "}";
}

}  // namespace detail

// Secure state reconstruction from one node's tracked compressed window
// estimate.  w is the tracker output (which carries a 1/p factor); the target
// is p*w.  Supports K with |K| <= s are enumerated ascending in size, then
// lexicographically; each candidate solves the least-squares problem
//   min_{x, {E_k}} || p*w - (D ⊗ I_n)(O x + sum_k inject_k(E_k)) ||_2
// and the global minimizer wins.  Ties within 1e-9*(1+||target||) keep the
// earlier (smaller, lexicographically first) support.
inline DecodeResult ssr_decode(const Vector& w, const LtiSystem& sys, const CompressionMatrix& cm,
                               int s) {
  const int n = sys.n();
  const int p = sys.p();
  const int v = cm.v();
  if (w.size() != static_cast<Eigen::Index>(v) * n)
    throw DimensionError("ssr_decode: estimate must have v*n entries");
  if (s < 0 || s > p) throw Error("ssr_decode: sparsity out of range");
  if (p > kMaxEnumeratedSensors) throw BudgetError("ssr_decode: p exceeds the enumeration budget");

  const Vector target = static_cast<double>(p) * w;
  const Matrix m_obs = detail::compressed_observability(sys, cm.d);
  // Slack columns for node k: (D ⊗ I_n) restricted to block k = d_col_k ⊗ I_n.
  std::vector<Matrix> slack(p);
  for (int k = 0; k < p; ++k) {
    slack[k] = Matrix::Zero(v * n, n);
    for (int j = 0; j < v; ++j)
      slack[k].middleRows(j * n, n) = cm.d(j, k) * Matrix::Identity(n, n);
  }

  const double tie_tol = 1e-9 * (1.0 + target.norm());
  DecodeResult result;
  result.residual = std::numeric_limits<double>::infinity();
  std::vector<int> best_support;
  Vector best_solution;
  std::optional<RankError> deferred;

  for_each_subset(p, s, [&](const std::vector<int>& support) {
    Matrix m(v * n, n + static_cast<Eigen::Index>(support.size()) * n);
    m.leftCols(n) = m_obs;
    for (std::size_t k = 0; k < support.size(); ++k)
      m.middleCols(n + k * n, n) = slack[support[k]];
    const detail::SupportSolve solve = detail::solve_support(m, target, n);
    if (solve.state_ambiguous && !deferred) {
      deferred = RankError("ssr_decode: state not identifiable for support " +
                               detail::support_to_string(support) +
                               " (rank deficiency beyond the slack directions)",
                           support);
      return false;
    }
    result.residual_table.emplace_back(support, solve.residual);
    if (solve.residual < result.residual - tie_tol) {
      result.residual = solve.residual;
      best_support = support;
      best_solution = solve.solution;
    }
    return true;
  });
  if (deferred) throw *deferred;

  result.x_hat = best_solution.head(n);
  result.x_hat_now = matrix_power(sys.A(), n - 1) * result.x_hat;
  result.support = best_support;
  for (std::size_t k = 0; k < best_support.size(); ++k)
    result.support_values.push_back(best_solution.segment(n + k * n, n));
  return result;
}

// Worst-case amplification from compressed-tracking error to state error:
//   beta = max over |K| <= 2s of 2 / sigma_min((L_K ⊗ I_n)(D ⊗ I_n) O),
// where L_K has orthonormal rows and ker(L_K) = D span{e_i : i in K}.
// Throws RankError naming the first K whose matrix loses full column rank
// (the instance is then only detectable, not observable, after the erasure).
inline double error_bound_beta(const LtiSystem& sys, const CompressionMatrix& cm, int s) {
  const int n = sys.n();
  const int p = sys.p();
  if (s < 0) throw Error("error_bound_beta: sparsity must be nonnegative");
  if (p > kMaxEnumeratedSensors)
    throw BudgetError("error_bound_beta: p exceeds the enumeration budget");
  const Matrix m_obs = detail::compressed_observability(sys, cm.d);
  double beta = 0.0;
  std::optional<RankError> deferred;
  for_each_subset(p, std::min(2 * s, p), [&](const std::vector<int>& k) {
    Matrix spanned(cm.d.rows(), k.size());
    for (std::size_t i = 0; i < k.size(); ++i) spanned.col(i) = cm.d.col(k[i]);
    const Matrix erasure = orthogonal_complement_rows(spanned);
    const Matrix reduced = detail::kron_row_mix(erasure, m_obs, n);
    double sigma_min = 0.0;
    if (reduced.rows() >= n) {
      Eigen::JacobiSVD<Matrix> svd(reduced);
      if (numeric_rank(svd.singularValues()) == n)
        sigma_min = svd.singularValues().minCoeff();
    }
    if (sigma_min <= 0.0) {
      deferred = RankError("error_bound_beta: bound undefined, erasure " +
                               detail::support_to_string(k) +
                               " destroys full column rank of the reduced observability map",
                           k);
      return false;
    }
    beta = std::max(beta, 2.0 / sigma_min);
    return true;
  });
  if (deferred) throw *deferred;
  return beta;
}

// Equivalent uncompressed reconstruction instance over unknowns (x, r, E):
// the stacked matrix [O N] and the least-norm preimage of p*w under D ⊗ I_n.
// Any solver for the classical sparse-attack problem applied to it recovers
// ssr_decode's answer on zero-residual instances.
struct AugmentedSsrInstance {
  Matrix stacked;  // pn x (n + q), [O N]
  Vector target;   // pn, lifted measurement window
  int n = 0;       // leading state dimension inside the unknown vector
  int p = 0;       // number of n-sized attack blocks
};

inline AugmentedSsrInstance slack_reduction(const Vector& w, const LtiSystem& sys,
                                            const CompressionMatrix& cm) {
  const int n = sys.n();
  const int p = sys.p();
  if (w.size() != static_cast<Eigen::Index>(cm.v()) * n)
    throw DimensionError("slack_reduction: estimate must have v*n entries");
  const ObservabilityStack stack = observability_stack(sys);
  AugmentedSsrInstance inst;
  inst.n = n;
  inst.p = p;
  inst.stacked.resize(p * n, n + cm.kernel.cols());
  inst.stacked.leftCols(n) = stack.stacked;
  inst.stacked.rightCols(cm.kernel.cols()) = cm.kernel;
  const Matrix pinv = cm.d.completeOrthogonalDecomposition().pseudoInverse();  // p x v
  inst.target = detail::kron_row_mix(pinv, static_cast<double>(p) * w, n);
  return inst;
}

inline Vector propagate_estimate(const Vector& x_base, const Matrix& a, int steps) {
  return matrix_power(a, steps) * x_base;
}

}  // namespace dsst
