#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/SVD>

#include "dsst/types.hpp"

namespace dsst {

// A^k by binary exponentiation, k >= 0.
inline Matrix matrix_power(const Matrix& a, long k) {
  if (a.rows() != a.cols()) throw DimensionError("matrix_power: matrix not square");
  if (k < 0) throw Error("matrix_power: negative exponent");
  Matrix result = Matrix::Identity(a.rows(), a.cols());
  Matrix base = a;
  while (k > 0) {
    if (k & 1) result = result * base;
    base = base * base;
    k >>= 1;
  }
  return result;
}

inline int numeric_rank(const Vector& singular_values, double rel_tol = kRankTol) {
  if (singular_values.size() == 0) return 0;
  const double cutoff = rel_tol * singular_values.maxCoeff();
  int rank = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i)
    if (singular_values(i) > cutoff) ++rank;
  return rank;
}

// Rows form an orthonormal basis of range(B)^⊥ in R^v.  B is v×k; k may be 0,
// in which case the identity is returned.  The result has v - rank(B) rows.
inline Matrix orthogonal_complement_rows(const Matrix& b) {
  const Eigen::Index v = b.rows();
  if (b.cols() == 0) return Matrix::Identity(v, v);
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullU);
  const int rank = numeric_rank(svd.singularValues());
  return svd.matrixU().rightCols(v - rank).transpose();
}

// Visits subsets of {0..p-1} with |S| <= max_size, ascending size then
// lexicographic within a size.  The visitor returns false to stop.
inline void for_each_subset(int p, int max_size,
                            const std::function<bool(const std::vector<int>&)>& visit) {
  std::vector<int> subset;
  if (!visit(subset)) return;
  for (int size = 1; size <= max_size && size <= p; ++size) {
    subset.resize(size);
    for (int i = 0; i < size; ++i) subset[i] = i;
    while (true) {
      if (!visit(subset)) return;
      int i = size - 1;
      while (i >= 0 && subset[i] == p - size + i) --i;
      if (i < 0) break;
      ++subset[i];
      for (int j = i + 1; j < size; ++j) subset[j] = subset[j - 1] + 1;
    }
  }
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state) {
  // (0, 1], 53-bit resolution.
  return static_cast<double>((splitmix64(state) >> 11) + 1) * 0x1.0p-53;
}

}  // namespace detail

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t state = seed;
  detail::splitmix64(state);
  state ^= a * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  detail::splitmix64(state);
  state ^= b * 0xda942042e4dd58b5ULL + 0x9e3779b97f4a7c15ULL;
  detail::splitmix64(state);
  return state;
}

// Standard-normal entries from a Box-Muller transform over a splitmix64
// stream; reproducible across platforms for a given seed.
inline Matrix gaussian_matrix(int rows, int cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  std::uint64_t state = seed;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double u1 = detail::uniform01(state);
      const double u2 = detail::uniform01(state);
      m(i, j) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
  }
  return m;
}

inline Vector gaussian_vector(int size, std::uint64_t seed) {
  return gaussian_matrix(size, 1, seed).col(0);
}

}  // namespace dsst
