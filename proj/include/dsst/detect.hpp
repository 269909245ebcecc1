#pragma once

#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "dsst/model.hpp"
#include "dsst/numeric.hpp"
#include "dsst/types.hpp"

namespace dsst {

inline constexpr int kMaxEnumeratedSensors = 20;

// A sensor subset plus the unstable eigenvalue whose PBH test it fails.
struct DetectabilityWitness {
  std::vector<int> nodes;  // 0-based, sorted
  Complex eigenvalue;
};

struct DetectabilityReport {
  int index = -1;  // -1 when (A, C) itself is undetectable
  std::optional<DetectabilityWitness> witness;  // a failing subset of size index+1
  bool exhaustive = true;
};

struct SparseDetectabilityResult {
  bool detectable = false;
  std::optional<DetectabilityWitness> witness;
};

namespace detail {

inline std::vector<Complex> unstable_eigenvalues(const Matrix& a) {
  Eigen::EigenSolver<Matrix> solver(a, false);
  std::vector<Complex> unstable;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const Complex mu = solver.eigenvalues()(i);
    if (std::abs(mu) >= 1.0 - kUnstableTol) unstable.push_back(mu);
  }
  return unstable;
}

// PBH test at mu: rank([A - mu I; C]) == n, with the relative singular-value
// threshold kRankTol.
inline bool pbh_rank_full(const Matrix& a, const Matrix& c, Complex mu) {
  const Eigen::Index n = a.rows();
  ComplexMatrix stacked(n + c.rows(), n);
  stacked.topRows(n) = a.cast<Complex>() - mu * ComplexMatrix::Identity(n, n);
  if (c.rows() > 0) stacked.bottomRows(c.rows()) = c.cast<Complex>();
  Eigen::JacobiSVD<ComplexMatrix> svd(stacked);
  return numeric_rank(svd.singularValues()) == n;
}

inline bool detectable_given_unstable(const Matrix& a, const Matrix& c,
                                      const std::vector<Complex>& unstable,
                                      Complex* violating = nullptr) {
  for (const Complex& mu : unstable) {
    if (!pbh_rank_full(a, c, mu)) {
      if (violating) *violating = mu;
      return false;
    }
  }
  return true;
}

inline Matrix drop_rows(const Matrix& c, const std::vector<int>& removed) {
  std::vector<bool> gone(c.rows(), false);
  for (int r : removed) gone[r] = true;
  Matrix kept(c.rows() - static_cast<Eigen::Index>(removed.size()), c.cols());
  Eigen::Index out = 0;
  for (Eigen::Index r = 0; r < c.rows(); ++r)
    if (!gone[r]) kept.row(out++) = c.row(r);
  return kept;
}

}  // namespace detail

// PBH detectability: every eigenvalue of A with magnitude >= 1 keeps
// [A - mu I; C] at full column rank.
inline bool is_detectable(const Matrix& a, const Matrix& c) {
  if (a.rows() != a.cols()) throw DimensionError("is_detectable: A not square");
  if (c.cols() != a.cols()) throw DimensionError("is_detectable: C has wrong column count");
  return detail::detectable_given_unstable(a, c, detail::unstable_eigenvalues(a));
}

// Largest k such that removing ANY subset of <= k sensor rows leaves (A, C_K)
// detectable.  Exhaustive lexicographic enumeration; removing more rows never
// restores detectability, so the first failing size settles the index.
inline DetectabilityReport sparse_detectability_index(const LtiSystem& sys) {
  if (sys.p() > kMaxEnumeratedSensors)
    throw BudgetError("sparse_detectability_index: p exceeds the enumeration budget");
  const std::vector<Complex> unstable = detail::unstable_eigenvalues(sys.A());
  DetectabilityReport report;
  if (unstable.empty()) {
    report.index = sys.p();  // stable plant: vacuously detectable under any erasure
    return report;
  }
  // Ascending-size enumeration: the first failure hits the minimal failing
  // size, and subsets of every smaller size have already passed.
  report.index = sys.p();
  for_each_subset(sys.p(), sys.p(), [&](const std::vector<int>& subset) {
    Complex violating;
    if (!detail::detectable_given_unstable(sys.A(), detail::drop_rows(sys.C(), subset),
                                           unstable, &violating)) {
      report.index = static_cast<int>(subset.size()) - 1;
      report.witness = DetectabilityWitness{subset, violating};
      return false;
    }
    return true;
  });
  return report;
}

// Detectability of (A, C) under compression by D, with up to s spoofed
// sensors: for every V with |V| <= s, the erasure operator L with
// ker(L) = D span(V) (orthonormal rows) must keep (A, L D C) detectable.
inline SparseDetectabilityResult is_sparse_detectable_wrt(const LtiSystem& sys, const Matrix& d,
                                                          int s) {
  if (d.cols() != sys.p()) throw DimensionError("is_sparse_detectable_wrt: D must have p columns");
  if (s < 0) throw Error("is_sparse_detectable_wrt: s must be nonnegative");
  if (sys.p() > kMaxEnumeratedSensors)
    throw BudgetError("is_sparse_detectable_wrt: p exceeds the enumeration budget");
  const std::vector<Complex> unstable = detail::unstable_eigenvalues(sys.A());
  SparseDetectabilityResult result;
  result.detectable = true;
  if (unstable.empty()) return result;
  for_each_subset(sys.p(), s, [&](const std::vector<int>& subset) {
    Matrix spanned(d.rows(), subset.size());
    for (std::size_t k = 0; k < subset.size(); ++k) spanned.col(k) = d.col(subset[k]);
    const Matrix erasure = orthogonal_complement_rows(spanned);
    Complex violating;
    if (!detail::detectable_given_unstable(sys.A(), erasure * d * sys.C(), unstable,
                                           &violating)) {
      result.detectable = false;
      result.witness = DetectabilityWitness{subset, violating};
      return false;
    }
    return true;
  });
  return result;
}

// Solvability gate: state tracking under <= s attacked sensors is possible
// iff the sparse detectability index reaches 2s.
inline bool is_dsst_solvable(const LtiSystem& sys, int s) {
  if (s < 0) throw Error("is_dsst_solvable: s must be nonnegative");
  return sparse_detectability_index(sys).index >= 2 * s;
}

}  // namespace dsst
