#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "dsst/detect.hpp"
#include "dsst/model.hpp"
#include "dsst/numeric.hpp"
#include "dsst/types.hpp"

namespace dsst {

// Certification failed: some erasure subset breaks detectability.
struct CertificationError : Error {
  CertificationError(const std::string& msg, DetectabilityWitness w)
      : Error(msg), witness(std::move(w)) {}
  DetectabilityWitness witness;
};

// Compression map D together with the sparsity level it was certified for
// and an orthonormal basis N of ker(D ⊗ I_n).
struct CompressionMatrix {
  Matrix d;         // v x p
  int certified_s = 0;
  Matrix kernel;    // pn x n(p - rank D), orthonormal columns

  int v() const { return static_cast<int>(d.rows()); }
};

// Orthonormal basis of ker(D ⊗ I_n), built as (kernel basis of D) ⊗ I_n.
// Column count is n (p - rank D).
inline Matrix kernel_basis(const Matrix& d, int n) {
  const Eigen::Index p = d.cols();
  Matrix null_basis;  // p x (p - rank D), orthonormal columns
  if (d.rows() == 0) {
    null_basis = Matrix::Identity(p, p);
  } else {
    Eigen::JacobiSVD<Matrix> svd(d, Eigen::ComputeFullV);
    const int rank = numeric_rank(svd.singularValues());
    null_basis = svd.matrixV().rightCols(p - rank);
  }
  Matrix basis(p * n, null_basis.cols() * n);
  for (Eigen::Index k = 0; k < null_basis.cols(); ++k)
    for (Eigen::Index block = 0; block < p; ++block)
      basis.block(block * n, k * n, n, n) = null_basis(block, k) * Matrix::Identity(n, n);
  return basis;
}

// Certifies that (A, C) stays detectable through D under up to s spoofed
// sensors (erasure level 2s), and packages the kernel basis the decoder
// needs.  Throws CertificationError carrying the failing subset otherwise.
inline CompressionMatrix validate_compression(const LtiSystem& sys, const Matrix& d, int s) {
  if (d.rows() > sys.p())
    throw DimensionError("validate_compression: D may not have more rows than sensors");
  const SparseDetectabilityResult result = is_sparse_detectable_wrt(sys, d, 2 * s);
  if (!result.detectable)
    throw CertificationError("validate_compression: detectability lost after erasing a subset",
                             *result.witness);
  return CompressionMatrix{d, s, kernel_basis(d, sys.n())};
}

inline CompressionMatrix identity_compression(const LtiSystem& sys, int s) {
  return validate_compression(sys, Matrix::Identity(sys.p(), sys.p()), s);
}

// Packages D without certifying it; validate_compression is the checked
// path.  Used when a run is forced past failing validators.
inline CompressionMatrix uncertified_compression(const LtiSystem& sys, const Matrix& d, int s) {
  return CompressionMatrix{d, s, kernel_basis(d, sys.n())};
}

// Random search for a certified D with as few rows as possible: for each
// candidate row count v = 1..p, draws max_tries dense Gaussian matrices
// (per-try seeds derived by counter) and returns the first that certifies.
// Falls back to the identity, which certifies whenever the instance is
// solvable at sparsity s.
inline CompressionMatrix design_compression(const LtiSystem& sys, int s, std::uint64_t seed,
                                            int max_tries) {
  const DetectabilityReport report = sparse_detectability_index(sys);
  if (report.index < 2 * s) {
    DetectabilityWitness witness = report.witness ? *report.witness : DetectabilityWitness{};
    throw CertificationError(
        "design_compression: instance not solvable at sparsity " + std::to_string(s) +
            " (sparse detectability index " + std::to_string(report.index) + " < " +
            std::to_string(2 * s) + "); no compression matrix can certify",
        std::move(witness));
  }
  for (int v = 1; v < sys.p(); ++v) {
    for (int attempt = 0; attempt < max_tries; ++attempt) {
      const Matrix candidate =
          gaussian_matrix(v, sys.p(), mix_seed(seed, static_cast<std::uint64_t>(v),
                                               static_cast<std::uint64_t>(attempt)));
      try {
        return validate_compression(sys, candidate, s);
      } catch (const CertificationError&) {
        // try the next candidate
      }
    }
  }
  return identity_compression(sys, s);
}

}  // namespace dsst
