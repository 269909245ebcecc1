#include "dsst/model.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "dsst/numeric.hpp"

namespace dsst {
namespace {

Matrix make1(double a) {
  Matrix m(1, 1);
  m << a;
  return m;
}

// Sorted-by-(re, im) eigenvalue comparison.
std::vector<Complex> sorted_eigs(const Matrix& a) {
  Eigen::EigenSolver<Matrix> solver(a, false);
  std::vector<Complex> eigs(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(eigs.begin(), eigs.end(), [](Complex x, Complex y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return eigs;
}

TEST(CharacteristicPolynomial, ScalarCase) {
  // chi(l) = l - 2
  const Vector coeffs = characteristic_polynomial(make1(2.0));
  ASSERT_EQ(coeffs.size(), 1);
  EXPECT_DOUBLE_EQ(coeffs(0), -2.0);
}

TEST(CharacteristicPolynomial, RotationAndIdentity) {
  // det(lI - [[0,1],[-1,0]]) = l^2 + 1, expanded by hand.
  Matrix a(2, 2);
  a << 0, 1, -1, 0;
  const Vector rot = characteristic_polynomial(a);
  EXPECT_NEAR(rot(0), 1.0, 1e-12);
  EXPECT_NEAR(rot(1), 0.0, 1e-12);

  // det(lI - I_2) = l^2 - 2l + 1.
  const Vector ident = characteristic_polynomial(Matrix::Identity(2, 2));
  EXPECT_NEAR(ident(0), 1.0, 1e-12);
  EXPECT_NEAR(ident(1), -2.0, 1e-12);
}

TEST(CharacteristicPolynomial, VanishesOnSpectrum) {
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const Matrix a = gaussian_matrix(n, n, 100 + trial);
    const Vector coeffs = characteristic_polynomial(a);
    Eigen::EigenSolver<Matrix> solver(a, false);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Complex mu = solver.eigenvalues()(i);
      Complex value = std::pow(mu, n);
      for (int j = 0; j < n; ++j) value += coeffs(j) * std::pow(mu, j);
      EXPECT_LT(std::abs(value), 1e-8 * std::max(1.0, std::pow(std::abs(mu), n)));
    }
  }
}

TEST(CompanionForm, FrozenExamples) {
  EXPECT_DOUBLE_EQ(companion_form(make1(2.0))(0, 0), 2.0);

  Matrix expected(2, 2);
  expected << 0, 1, -1, 2;  // from chi = l^2 - 2l + 1, last row -[a_0, a_1]
  EXPECT_TRUE(companion_form(Matrix::Identity(2, 2)).isApprox(expected, 1e-12));

  Matrix rotation(2, 2);
  rotation << 0, 1, -1, 0;  // already in companion form (chi = l^2 + 1)
  EXPECT_TRUE(companion_form(rotation).isApprox(rotation, 1e-12));
}

TEST(CompanionForm, SameSpectrum) {
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    const Matrix a = gaussian_matrix(n, n, 300 + trial);
    const auto eigs_a = sorted_eigs(a);
    const auto eigs_hat = sorted_eigs(companion_form(a));
    for (std::size_t i = 0; i < eigs_a.size(); ++i)
      EXPECT_LT(std::abs(eigs_a[i] - eigs_hat[i]), 1e-9);
  }
}

// Attack-free sliding windows obey Z[t+1] = A_hat Z[t].
TEST(CompanionForm, WindowConsistencyOnTrajectories) {
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 4;
    const int p = 1 + (trial * 7) % 3;
    Matrix a = gaussian_matrix(n, n, 500 + trial);
    a /= std::max(1.0, Eigen::EigenSolver<Matrix>(a, false).eigenvalues().cwiseAbs().maxCoeff());
    a *= 1.05;  // mildly unstable is fine over a short run
    const Matrix c = gaussian_matrix(p, n, 600 + trial);
    const LtiSystem sys(a, c);
    const int steps = 3 * n + 2;

    std::vector<Vector> ys;
    Vector x = gaussian_vector(n, 700 + trial);
    for (int t = 0; t < steps; ++t) {
      ys.push_back(c * x);
      x = a * x;
    }
    for (int i = 0; i < p; ++i) {
      for (int tau = n; tau + 1 <= steps - n; ++tau) {
        Vector prev(n), next(n);
        for (int k = 0; k < n; ++k) {
          prev(k) = ys[tau - 1 + k](i);
          next(k) = ys[tau + k](i);
        }
        EXPECT_LT((next - sys.A_hat() * prev).lpNorm<Eigen::Infinity>(), 1e-9);
      }
    }
  }
}

TEST(ObservabilityStack, FrozenExamples) {
  {
    Matrix c(1, 2);
    c << 1, 0;
    const auto stack = observability_stack(LtiSystem(Matrix::Identity(2, 2), c));
    Matrix expected(2, 2);
    expected << 1, 0, 1, 0;
    EXPECT_TRUE(stack.per_node[0].isApprox(expected, 1e-12));
  }
  {
    Matrix a(2, 2);
    a << 1, 1, 0, 1;
    Matrix c(1, 2);
    c << 1, 0;
    const auto stack = observability_stack(LtiSystem(a, c));
    Matrix expected(2, 2);
    expected << 1, 0, 1, 1;  // second row is C A
    EXPECT_TRUE(stack.per_node[0].isApprox(expected, 1e-12));
  }
  {
    const auto stack = observability_stack(LtiSystem(make1(2.0), Matrix::Ones(3, 1)));
    EXPECT_EQ(stack.stacked.rows(), 3);
    EXPECT_TRUE(stack.stacked.isApprox(Matrix::Ones(3, 1), 1e-12));
  }
}

TEST(ObservabilityStack, BlockLayoutAndWindowReproduction) {
  const int n = 3, p = 4;
  const Matrix a = gaussian_matrix(n, n, 42);
  const Matrix c = gaussian_matrix(p, n, 43);
  const LtiSystem sys(a, c);
  const auto stack = observability_stack(sys);
  for (int k = 0; k < p; ++k)
    EXPECT_TRUE(stack.stacked.middleRows(k * n, n).isApprox(stack.per_node[k], 0.0));

  // O_i x equals the noise-free window [y_i[0], ..., y_i[n-1]].
  const Vector x0 = gaussian_vector(n, 44);
  Vector x = x0;
  Matrix windows(p, n);
  for (int t = 0; t < n; ++t) {
    windows.col(t) = c * x;
    x = a * x;
  }
  for (int i = 0; i < p; ++i)
    EXPECT_LT((stack.per_node[i] * x0 - windows.row(i).transpose()).norm(), 1e-10);
}

TEST(Discretize, ZeroMatrixGivesIdentity) {
  EXPECT_TRUE(discretize(Matrix::Zero(3, 3), 0.7).isApprox(Matrix::Identity(3, 3), 1e-14));
}

TEST(Discretize, RotationClosedForm) {
  Matrix a_cont(2, 2);
  a_cont << 0, 1, -1, 0;
  for (double tau : {0.1, 0.3, 1.2}) {
    Matrix expected(2, 2);
    expected << std::cos(tau), std::sin(tau), -std::sin(tau), std::cos(tau);
    EXPECT_TRUE(discretize(a_cont, tau).isApprox(expected, 1e-12));
  }
}

TEST(Discretize, ScalarExponential) {
  EXPECT_NEAR(discretize(make1(1.0), std::log(2.0))(0, 0), 2.0, 1e-12);
}

TEST(SamplingRate, FrozenScalarExamples) {
  Vector single_edge(2);
  single_edge << 0, 2;
  EXPECT_TRUE(check_sampling_rate(LtiSystem(make1(1.0), Matrix::Ones(2, 1)), single_edge).pass);

  Vector path3(3);
  path3 << 0, 1, 3;
  const auto fail_report =
      check_sampling_rate(LtiSystem(make1(1.5), Matrix::Ones(3, 1)), path3);
  EXPECT_FALSE(fail_report.pass);  // (1.5 - 1/9)^2 ~ 1.93 >= 1 at lambda = 1
  EXPECT_NEAR(fail_report.worst_eig_l, 1.0, 1e-9);

  Vector complete3(3);
  complete3 << 0, 3, 3;
  EXPECT_TRUE(check_sampling_rate(LtiSystem(make1(1.5), Matrix::Ones(3, 1)), complete3).pass);
}

// For a rotation discretization on a single edge, the margin condition
// reduces to 2 - 2 cos(tau) < 1, i.e. tau < pi/3.
TEST(SamplingRate, RotationBoundary) {
  Matrix a_cont(2, 2);
  a_cont << 0, 1, -1, 0;
  Vector spectrum(2);
  spectrum << 0, 2;
  const Matrix c = gaussian_matrix(2, 2, 7);
  const double boundary = std::numbers::pi / 3.0;
  EXPECT_TRUE(
      check_sampling_rate(LtiSystem(discretize(a_cont, boundary - 0.01), c), spectrum).pass);
  EXPECT_FALSE(
      check_sampling_rate(LtiSystem(discretize(a_cont, boundary + 0.01), c), spectrum).pass);
}

TEST(SamplingRate, ReportsMinimumMargin) {
  Vector spectrum(2);
  spectrum << 0, 2;
  const auto report = check_sampling_rate(LtiSystem(make1(1.0), Matrix::Ones(2, 1)), spectrum);
  EXPECT_TRUE(report.pass);
  EXPECT_NEAR(report.min_margin, 1.0, 1e-12);  // both conditions evaluate to 0
}

TEST(SamplingRate, RejectsSpectraWithoutNonzeroEigenvalue) {
  Vector all_zero = Vector::Zero(3);
  EXPECT_THROW(check_sampling_rate(LtiSystem(make1(1.0), Matrix::Ones(3, 1)), all_zero), Error);
  Vector no_zero(2);
  no_zero << 0.5, 2.0;
  EXPECT_THROW(check_sampling_rate(LtiSystem(make1(1.0), Matrix::Ones(2, 1)), no_zero), Error);
}

TEST(MeasurementWindow, CausalReindexing) {
  MeasurementWindow window(0, 3);
  EXPECT_FALSE(window.full());
  for (int t = 0; t < 5; ++t) window.push(static_cast<double>(t));
  EXPECT_TRUE(window.full());
  EXPECT_EQ(window.base_time(), 2);  // holds samples 2, 3, 4
  Vector expected(3);
  expected << 2, 3, 4;
  EXPECT_TRUE(window.values().isApprox(expected, 0.0));
}

TEST(LtiSystem, RejectsBadShapes) {
  EXPECT_THROW(LtiSystem(Matrix::Zero(2, 3), Matrix::Ones(1, 3)), DimensionError);
  EXPECT_THROW(LtiSystem(Matrix::Identity(2, 2), Matrix::Ones(1, 3)), DimensionError);
}

}  // namespace
}  // namespace dsst
