#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dsst {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Base class of every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inputs with invalid or incompatible dimensions.
struct DimensionError : Error {
  using Error::Error;
};

// A combinatorial search would exceed the desk-scale budget.
struct BudgetError : Error {
  using Error::Error;
};

// An eigenvalue counts as unstable when its magnitude is >= 1 - kUnstableTol.
inline constexpr double kUnstableTol = 1e-12;

// Relative singular-value threshold used for every numeric rank decision.
inline constexpr double kRankTol = 1e-9;

}  // namespace dsst
