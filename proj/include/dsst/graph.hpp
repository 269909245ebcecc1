#pragma once

#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dsst/types.hpp"

namespace dsst {

// Weighted undirected communication graph with no self-loops.  Vertices are
// 0-based.  The Laplacian L = D - A acts as (Lx)_i = sum_j a_ij (x_i - x_j),
// so unit weights reproduce plain neighbor sums.  Immutable once built.
class CommGraph {
 public:
  struct Edge {
    int i = 0;
    int j = 0;
    double weight = 1.0;
  };

  CommGraph(int p, const std::vector<Edge>& edges) : p_(p) {
    if (p < 1) throw DimensionError("CommGraph: vertex count must be >= 1");
    adjacency_ = Matrix::Zero(p, p);
    for (const Edge& e : edges) {
      if (e.i < 0 || e.i >= p || e.j < 0 || e.j >= p)
        throw Error("CommGraph: edge endpoint out of range");
      if (e.i == e.j) throw Error("CommGraph: self-loops are not allowed");
      if (!(e.weight > 0.0)) throw Error("CommGraph: edge weight must be positive");
      if (adjacency_(e.i, e.j) != 0.0) throw Error("CommGraph: duplicate edge");
      adjacency_(e.i, e.j) = e.weight;
      adjacency_(e.j, e.i) = e.weight;
    }
    laplacian_ = Matrix(adjacency_.rowwise().sum().asDiagonal()) - adjacency_;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian_, Eigen::EigenvaluesOnly);
    spectrum_ = solver.eigenvalues();  // ascending
    neighbors_.resize(p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        if (adjacency_(i, j) > 0.0) neighbors_[i].push_back(j);  // ascending by construction
  }

  int size() const { return p_; }
  const Matrix& adjacency() const { return adjacency_; }
  const Matrix& laplacian() const { return laplacian_; }
  // Real Laplacian spectrum, sorted ascending; first entry is ~0.
  const Vector& spectrum() const { return spectrum_; }
  const std::vector<int>& neighbors(int i) const { return neighbors_.at(i); }

 private:
  int p_;
  Matrix adjacency_;
  Matrix laplacian_;
  Vector spectrum_;
  std::vector<std::vector<int>> neighbors_;
};

inline CommGraph build_graph(int p, const std::vector<CommGraph::Edge>& edges) {
  return CommGraph(p, edges);
}

// Spectral connectivity test: lambda_2(L) > 1e-10.  A single vertex is
// connected by convention.
inline bool check_connected(const CommGraph& g) {
  if (g.size() == 1) return true;
  return g.spectrum()(1) > 1e-10;
}

// (lambda_2, lambda_max) of the Laplacian; requires a connected graph with
// at least one edge.
inline std::pair<double, double> laplacian_extremes(const CommGraph& g) {
  if (g.size() < 2 || !check_connected(g))
    throw Error("laplacian_extremes: graph must be connected with p >= 2");
  return {g.spectrum()(1), g.spectrum()(g.size() - 1)};
}

}  // namespace dsst
