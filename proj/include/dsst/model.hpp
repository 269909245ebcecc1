#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "dsst/numeric.hpp"
#include "dsst/types.hpp"

namespace dsst {

// Coefficients [a_0, ..., a_{n-1}] of the monic characteristic polynomial
// chi(l) = l^n + a_{n-1} l^{n-1} + ... + a_1 l + a_0, computed with the
// Faddeev-LeVerrier recursion (exact up to rounding in matrix products).
inline Vector characteristic_polynomial(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("characteristic_polynomial: matrix not square");
  const Eigen::Index n = a.rows();
  Vector coeffs(n);  // coeffs(j) = a_j
  Matrix m = Matrix::Identity(n, n);
  double c = 1.0;  // coefficient of l^n
  for (Eigen::Index k = 1; k <= n; ++k) {
    const Matrix am = a * m;
    c = -am.trace() / static_cast<double>(k);
    coeffs(n - k) = c;
    if (k < n) m = am + c * Matrix::Identity(n, n);
  }
  return coeffs;
}

// Controller companion matrix of A: ones on the superdiagonal, last row
// [-a_0, -a_1, ..., -a_{n-1}].  Shares the spectrum of A and advances a
// sliding window of any scalar output of the system by one sample.
inline Matrix companion_form(const Matrix& a) {
  const Vector coeffs = characteristic_polynomial(a);
  const Eigen::Index n = a.rows();
  Matrix companion = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) companion(i, i + 1) = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) companion(n - 1, j) = -coeffs(j);
  return companion;
}

// Sampled-data state matrix exp(A_cont * tau).  Pade scaling-and-squaring,
// accurate to ~1e-12 relative at desk scale.
inline Matrix discretize(const Matrix& a_cont, double tau) {
  if (a_cont.rows() != a_cont.cols()) throw DimensionError("discretize: matrix not square");
  if (!(tau > 0.0)) throw Error("discretize: sampling period must be positive");
  return (a_cont * tau).exp();
}

// Plant x[t+1] = A x[t] observed by p nodes, each through one scalar row of C.
// Immutable after construction; the companion form of A is precomputed.
class LtiSystem {
 public:
  LtiSystem(Matrix a, Matrix c) : a_(std::move(a)), c_(std::move(c)) {
    if (a_.rows() != a_.cols() || a_.rows() < 1)
      throw DimensionError("LtiSystem: A must be square, n >= 1");
    if (c_.cols() != a_.rows() || c_.rows() < 1)
      throw DimensionError("LtiSystem: C must be p x n with p >= 1");
    a_hat_ = companion_form(a_);
  }

  int n() const { return static_cast<int>(a_.rows()); }
  int p() const { return static_cast<int>(c_.rows()); }
  const Matrix& A() const { return a_; }
  const Matrix& C() const { return c_; }
  // Companion form of A; drives measurement windows: Z_i[t+1] = A_hat Z_i[t].
  const Matrix& A_hat() const { return a_hat_; }
  Eigen::RowVectorXd sensor_row(int i) const { return c_.row(i); }

  ComplexVector eigenvalues() const { return Eigen::EigenSolver<Matrix>(a_, false).eigenvalues(); }

 private:
  Matrix a_;
  Matrix c_;
  Matrix a_hat_;
};

// Per-node observability matrices O_i = [C_i; C_i A; ...; C_i A^{n-1}] and
// their vertical stack in node order.
struct ObservabilityStack {
  std::vector<Matrix> per_node;  // each n x n
  Matrix stacked;                // pn x n
};

inline ObservabilityStack observability_stack(const LtiSystem& sys) {
  const int n = sys.n();
  const int p = sys.p();
  ObservabilityStack stack;
  stack.per_node.reserve(p);
  stack.stacked.resize(p * n, n);
  for (int i = 0; i < p; ++i) {
    Matrix obs(n, n);
    Eigen::RowVectorXd row = sys.sensor_row(i);
    for (int j = 0; j < n; ++j) {
      obs.row(j) = row;
      row = row * sys.A();
    }
    stack.stacked.middleRows(i * n, n) = obs;
    stack.per_node.push_back(std::move(obs));
  }
  return stack;
}

// Causal sliding window of the last n scalar measurements of one node,
// oldest first.  base_time() is the sample time of the oldest entry.
class MeasurementWindow {
 public:
  MeasurementWindow() = default;
  MeasurementWindow(int node, int n) : node_(node), buf_(n, 0.0) {}

  void push(double y) {
    if (buf_.empty()) throw Error("MeasurementWindow: zero-length window");
    for (std::size_t i = 0; i + 1 < buf_.size(); ++i) buf_[i] = buf_[i + 1];
    buf_.back() = y;
    ++count_;
  }

  int node() const { return node_; }
  bool full() const { return count_ >= static_cast<long>(buf_.size()); }
  long base_time() const { return count_ - static_cast<long>(buf_.size()); }

  Vector values() const {
    Vector v(static_cast<Eigen::Index>(buf_.size()));
    for (std::size_t i = 0; i < buf_.size(); ++i) v(static_cast<Eigen::Index>(i)) = buf_[i];
    return v;
  }

 private:
  int node_ = -1;
  std::vector<double> buf_;
  long count_ = 0;
};

// Sampling-rate admissibility of (A, L): every unstable eigenvalue m+ni of A
// must satisfy (m - l^2/l_max^2)^2 + n^2 < 1 for every nonzero Laplacian
// eigenvalue l, and every eigenvalue of A must satisfy (m-1)^2 + n^2 < 1.
// The second condition is enforced for all eigenvalues, not only unstable
// ones, because the consensus closed loop needs it.  Fast enough sampling of
// a continuous-time plant always satisfies both.
struct SamplingRateReport {
  bool pass = false;
  double min_margin = 0.0;  // min over all checks of 1 - value
  Complex worst_eig_a;      // eigenvalue of A attaining the minimum margin
  double worst_eig_l = 0.0; // Laplacian eigenvalue paired with it
};

inline SamplingRateReport check_sampling_rate(const LtiSystem& sys,
                                              const Vector& laplacian_spectrum) {
  if (laplacian_spectrum.size() == 0)
    throw Error("check_sampling_rate: empty Laplacian spectrum");
  if (laplacian_spectrum.cwiseAbs().minCoeff() > 1e-9)
    throw Error("check_sampling_rate: spectrum lacks the zero eigenvalue of a graph Laplacian");
  std::vector<double> nonzero;
  for (Eigen::Index i = 0; i < laplacian_spectrum.size(); ++i)
    if (laplacian_spectrum(i) > 1e-9) nonzero.push_back(laplacian_spectrum(i));
  if (nonzero.empty())
    throw Error("check_sampling_rate: no nonzero Laplacian eigenvalue (graph trivial or edgeless)");
  const double lambda_max = *std::max_element(nonzero.begin(), nonzero.end());

  SamplingRateReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  const ComplexVector eigs = sys.eigenvalues();
  auto consider = [&](Complex mu, double lambda, double value) {
    const double margin = 1.0 - value;
    if (margin < report.min_margin) {
      report.min_margin = margin;
      report.worst_eig_a = mu;
      report.worst_eig_l = lambda;
    }
  };
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    const Complex mu = eigs(i);
    const double m = mu.real();
    const double im = mu.imag();
    consider(mu, lambda_max, (m - 1.0) * (m - 1.0) + im * im);
    if (std::abs(mu) >= 1.0 - kUnstableTol) {
      for (double lambda : nonzero) {
        const double shift = m - (lambda * lambda) / (lambda_max * lambda_max);
        consider(mu, lambda, shift * shift + im * im);
      }
    }
  }
  report.pass = report.min_margin > 0.0;
  return report;
}

}  // namespace dsst
