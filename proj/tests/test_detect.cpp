#include "dsst/detect.hpp"

#include <vector>

#include <gtest/gtest.h>

#include "dsst/numeric.hpp"

namespace dsst {
namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Matrix make1(double a) {
  Matrix m(1, 1);
  m << a;
  return m;
}

TEST(IsDetectable, PbhExamples) {
  Matrix c(1, 2);
  c << 0, 1;
  // Unobservable mode 0.5 is stable: detectable.
  EXPECT_TRUE(is_detectable(diag2(0.5, 2.0), c));
  // Unstable mode 2 is unobservable through [0, 1]: not detectable.
  EXPECT_FALSE(is_detectable(diag2(2.0, 0.5), c));
}

TEST(IsDetectable, FullyObservableAlwaysDetectable) {
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 3;
    const Matrix a = 2.0 * gaussian_matrix(n, n, 900 + trial);
    EXPECT_TRUE(is_detectable(a, Matrix::Identity(n, n)));
  }
}

TEST(IsDetectable, EmptyOutputMatrix) {
  EXPECT_FALSE(is_detectable(make1(2.0), Matrix::Zero(0, 1)));
  EXPECT_TRUE(is_detectable(make1(0.5), Matrix::Zero(0, 1)));
}

TEST(SparseDetectabilityIndex, IdenticalSensorsOfUnstableScalar) {
  const LtiSystem sys(make1(2.0), Matrix::Ones(5, 1));
  const DetectabilityReport report = sparse_detectability_index(sys);
  EXPECT_EQ(report.index, 4);  // any single remaining sensor observes the state
  EXPECT_TRUE(report.exhaustive);
  ASSERT_TRUE(report.witness.has_value());
  EXPECT_EQ(report.witness->nodes.size(), 5u);
}

TEST(SparseDetectabilityIndex, TwoUnstableModesOneSensorEach) {
  Matrix c = Matrix::Identity(2, 2);
  const LtiSystem sys(diag2(2.0, 3.0), c);
  const DetectabilityReport report = sparse_detectability_index(sys);
  EXPECT_EQ(report.index, 0);
  ASSERT_TRUE(report.witness.has_value());
  EXPECT_EQ(report.witness->nodes.size(), 1u);
}

TEST(SparseDetectabilityIndex, StableSystemIsVacuouslyDetectable) {
  for (int p : {1, 3, 6}) {
    const LtiSystem sys(make1(0.5), gaussian_matrix(p, 1, 40 + p));
    EXPECT_EQ(sparse_detectability_index(sys).index, p);
  }
}

// The stored witness genuinely fails the PBH test.
TEST(SparseDetectabilityIndex, WitnessRecheck) {
  const LtiSystem sys(diag2(2.0, 3.0), Matrix::Identity(2, 2));
  const DetectabilityReport report = sparse_detectability_index(sys);
  ASSERT_TRUE(report.witness.has_value());
  const Matrix kept = detail::drop_rows(sys.C(), report.witness->nodes);
  EXPECT_FALSE(detail::pbh_rank_full(sys.A(), kept, report.witness->eigenvalue));
}

TEST(SparseDetectabilityIndex, BudgetGuard) {
  EXPECT_THROW(sparse_detectability_index(LtiSystem(make1(2.0), Matrix::Ones(21, 1))),
               BudgetError);
}

TEST(SparseDetectableWrt, CollapsingCompressionFails) {
  const LtiSystem sys(make1(2.0), Matrix::Ones(3, 1));
  Matrix d(1, 3);
  d << 1, 1, 1;
  const SparseDetectabilityResult result = is_sparse_detectable_wrt(sys, d, 1);
  EXPECT_FALSE(result.detectable);
  ASSERT_TRUE(result.witness.has_value());
  // D span{e_1} is all of R^1, so the erasure operator is empty and nothing
  // remains of the unstable mode.
  EXPECT_EQ(result.witness->nodes, std::vector<int>{0});
}

TEST(SparseDetectableWrt, LevelZeroOnlyNeedsDC) {
  const LtiSystem sys(make1(2.0), Matrix::Ones(3, 1));
  Matrix d(1, 3);
  d << 1, 1, 1;
  EXPECT_TRUE(is_sparse_detectable_wrt(sys, d, 0).detectable);
}

// With D = I the notion coincides with plain sparse detectability.
TEST(SparseDetectableWrt, IdentityCoincidesWithIndex) {
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 2;
    const int p = 2 + trial % 4;
    Matrix a = gaussian_matrix(n, n, 1000 + trial);
    a *= 1.5;  // encourage unstable modes
    Matrix c = gaussian_matrix(p, n, 2000 + trial);
    // Zero out some rows so the index varies.
    for (int i = 0; i < p; ++i)
      if ((trial + i) % 3 == 0) c.row(i).setZero();
    const LtiSystem sys(a, c);
    const int index = sparse_detectability_index(sys).index;
    const Matrix identity = Matrix::Identity(p, p);
    for (int s = 0; s <= p; ++s)
      EXPECT_EQ(is_sparse_detectable_wrt(sys, identity, s).detectable, index >= s)
          << "trial " << trial << " s " << s << " index " << index;
  }
}

TEST(SparseDetectableWrt, MonotoneInSparsity) {
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 3 + trial % 3;
    const LtiSystem sys(make1(2.0), gaussian_matrix(p, 1, 3000 + trial));
    const Matrix d = gaussian_matrix(1 + trial % p, p, 4000 + trial);
    int first_failure = p + 1;
    for (int s = 0; s <= p; ++s) {
      if (!is_sparse_detectable_wrt(sys, d, s).detectable) {
        first_failure = s;
        break;
      }
    }
    for (int s = 0; s <= p; ++s)
      EXPECT_EQ(is_sparse_detectable_wrt(sys, d, s).detectable, s < first_failure);
  }
}

// An index below s dooms every compression matrix at level s.
TEST(SparseDetectableWrt, NoMatrixRescuesALowIndex) {
  const LtiSystem sys(diag2(2.0, 3.0), Matrix::Identity(2, 2));  // index 0
  for (int trial = 0; trial < 20; ++trial) {
    const int v = 1 + trial % 2;
    const Matrix d = gaussian_matrix(v, 2, 5000 + trial);
    EXPECT_FALSE(is_sparse_detectable_wrt(sys, d, 1).detectable);
  }
}

TEST(IsDsstSolvable, ThresholdExamples) {
  const LtiSystem sys(make1(2.0), Matrix::Ones(5, 1));
  EXPECT_TRUE(is_dsst_solvable(sys, 2));   // index 4 >= 4
  EXPECT_FALSE(is_dsst_solvable(sys, 3));  // index 4 < 6

  const LtiSystem detectable_sys(make1(0.5), Matrix::Ones(2, 1));
  EXPECT_TRUE(is_dsst_solvable(detectable_sys, 0));
}

}  // namespace
}  // namespace dsst
