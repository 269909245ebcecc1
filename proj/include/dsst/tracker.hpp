#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dsst/graph.hpp"
#include "dsst/model.hpp"
#include "dsst/types.hpp"

namespace dsst {

struct TrackerGains {
  double k_p = 0.0;
  double k_i = 0.0;
};

// k_P = 1, k_I = 1/(sqrt(2) lambda_max(L)): places the per-mode closed-loop
// eigenvalues at a-1 and a - lambda^2/lambda_max^2.
inline TrackerGains select_gains(const CommGraph& g) {
  const auto [lambda2, lambda_max] = laplacian_extremes(g);
  (void)lambda2;
  return TrackerGains{1.0, 1.0 / (std::sqrt(2.0) * lambda_max)};
}

struct GainStabilityReport {
  bool stable = false;
  double max_spectral_radius = 0.0;
};

// Closed-loop check of the consensus error dynamics: for every nonzero
// Laplacian eigenvalue l, the block matrix
//   [ A_hat - I - 2 k_I^2 l^2 I   -2 k_I k_P l I ]
//   [ k_I l I                      A_hat         ]
// must have spectral radius < 1.
inline GainStabilityReport verify_gain_stability(const LtiSystem& sys, const CommGraph& g,
                                                 const TrackerGains& gains) {
  const int n = sys.n();
  const Matrix& a_hat = sys.A_hat();
  const Matrix eye = Matrix::Identity(n, n);
  GainStabilityReport report;
  for (Eigen::Index k = 0; k < g.spectrum().size(); ++k) {
    const double lambda = g.spectrum()(k);
    if (lambda <= 1e-9) continue;
    Matrix block(2 * n, 2 * n);
    block.topLeftCorner(n, n) = a_hat - eye - 2.0 * gains.k_i * gains.k_i * lambda * lambda * eye;
    block.topRightCorner(n, n) = -2.0 * gains.k_i * gains.k_p * lambda * eye;
    block.bottomLeftCorner(n, n) = gains.k_i * lambda * eye;
    block.bottomRightCorner(n, n) = a_hat;
    const double radius =
        Eigen::EigenSolver<Matrix>(block, false).eigenvalues().cwiseAbs().maxCoeff();
    report.max_spectral_radius = std::max(report.max_spectral_radius, radius);
  }
  report.stable = report.max_spectral_radius < 1.0;
  return report;
}

// Applies the n x n matrix to each n-block of a stacked vector.
inline Vector apply_blockwise(const Matrix& block_op, const Vector& x) {
  const Eigen::Index n = block_op.rows();
  if (x.size() % n != 0) throw DimensionError("apply_blockwise: size not a multiple of block");
  Vector out(x.size());
  for (Eigen::Index b = 0; b < x.size() / n; ++b)
    out.segment(b * n, n) = block_op * x.segment(b * n, n);
  return out;
}

// Weighted Laplacian action per node: (L x)_i = sum_j a_ij (x_i - x_j).
// Neighbor terms accumulate in ascending node id so runs are bit-for-bit
// reproducible.
inline std::vector<Vector> laplacian_action(const CommGraph& g, const std::vector<Vector>& x) {
  std::vector<Vector> out(x.size());
  for (int i = 0; i < g.size(); ++i) {
    Vector acc = Vector::Zero(x[i].size());
    for (int j : g.neighbors(i)) acc += g.adjacency()(i, j) * (x[i] - x[j]);
    out[i] = std::move(acc);
  }
  return out;
}

// Per-node tracker state.  w estimates the network average of the inputs,
// b is the integral state, eta the derived output (never integrated):
// eta_i = k_P b_i + k_I (L w)_i holds after every step.
struct NodeState {
  int node = 0;
  Vector w;
  Vector b;
  Vector eta;
  MeasurementWindow window;
};

// Zero initial state; eta = k_P 0 + k_I L 0 = 0 is consistent by construction.
inline std::vector<NodeState> tracker_init(const CommGraph& g, int block_dim) {
  std::vector<NodeState> states(g.size());
  for (int i = 0; i < g.size(); ++i) {
    states[i].node = i;
    states[i].w = Vector::Zero(block_dim);
    states[i].b = Vector::Zero(block_dim);
    states[i].eta = Vector::Zero(block_dim);
  }
  return states;
}

// One synchronous round:
//   w_i[t+1]   = (A_hat - I) w_i[t] + phi_i[t] - 2 k_I (L eta[t])_i
//   b_i[t+1]   = A_hat b_i[t] + k_I (L w[t])_i
//   eta_i[t+1] = k_P b_i[t+1] + k_I (L w[t+1])_i
// applied independently to each compression block.  Node i reads only the
// neighbors' w and eta from round t; eta[t+1] is a derived output.
inline std::vector<NodeState> tracker_step(const std::vector<NodeState>& states,
                                           const std::vector<Vector>& phi, const CommGraph& g,
                                           const TrackerGains& gains, const Matrix& a_hat) {
  const std::size_t p = states.size();
  if (p != static_cast<std::size_t>(g.size()) || phi.size() != p)
    throw DimensionError("tracker_step: node count mismatch");
  std::vector<Vector> w(p), eta(p);
  for (std::size_t i = 0; i < p; ++i) {
    if (phi[i].size() != states[i].w.size())
      throw DimensionError("tracker_step: input dimension mismatch");
    w[i] = states[i].w;
    eta[i] = states[i].eta;
  }
  const std::vector<Vector> lap_eta = laplacian_action(g, eta);
  const std::vector<Vector> lap_w = laplacian_action(g, w);

  std::vector<NodeState> next(states);
  std::vector<Vector> w_next(p);
  for (std::size_t i = 0; i < p; ++i) {
    w_next[i] = apply_blockwise(a_hat, states[i].w) - states[i].w + phi[i] -
                2.0 * gains.k_i * lap_eta[i];
    next[i].w = w_next[i];
    next[i].b = apply_blockwise(a_hat, states[i].b) + gains.k_i * lap_w[i];
  }
  const std::vector<Vector> lap_w_next = laplacian_action(g, w_next);
  for (std::size_t i = 0; i < p; ++i)
    next[i].eta = gains.k_p * next[i].b + gains.k_i * lap_w_next[i];
  return next;
}

// Consensus-coordinate diagnostics: z1 is the (1/sqrt(p))-scaled aggregate of
// the estimates, z1_target the same aggregate of the inputs, z2_norm the
// distance of the stacked estimates from the consensus subspace.
struct DecompositionDiagnostics {
  Vector z1;
  Vector z1_target;
  double z1_target_error = 0.0;
  double z2_norm = 0.0;
};

inline DecompositionDiagnostics decomposition_diagnostics(const std::vector<NodeState>& states,
                                                          const std::vector<Vector>& phi) {
  const std::size_t p = states.size();
  if (p == 0 || phi.size() != p)
    throw DimensionError("decomposition_diagnostics: node count mismatch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  DecompositionDiagnostics diag;
  diag.z1 = Vector::Zero(states[0].w.size());
  diag.z1_target = Vector::Zero(states[0].w.size());
  for (std::size_t i = 0; i < p; ++i) {
    diag.z1 += states[i].w;
    diag.z1_target += phi[i];
  }
  const Vector mean = diag.z1 / static_cast<double>(p);
  diag.z1 *= scale;
  diag.z1_target *= scale;
  diag.z1_target_error = (diag.z1 - diag.z1_target).norm();
  double sq = 0.0;
  for (std::size_t i = 0; i < p; ++i) sq += (states[i].w - mean).squaredNorm();
  diag.z2_norm = std::sqrt(sq);
  return diag;
}

}  // namespace dsst
