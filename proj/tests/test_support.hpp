#pragma once

#include <random>

#include "timrp/lrmc.hpp"
#include "timrp/manifold.hpp"
#include "timrp/topology.hpp"

namespace timrp::testing {

inline Matrix gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix A(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) A(i, j) = g(rng);
  return A;
}

inline Matrix random_skew(std::mt19937_64& rng, Eigen::Index r) {
  const Matrix A = gaussian(rng, r, r);
  return A - A.transpose();
}

inline Matrix random_orthogonal(std::mt19937_64& rng, Eigen::Index r) {
  return orthonormal_factor(gaussian(rng, r, r));
}

/// Point with a full (non-diagonal) Sigma.
inline FixedRankPoint random_general_point(std::mt19937_64& rng, int M, int r) {
  FixedRankPoint X = random_point(M, r, rng());
  X.Sigma = random_orthogonal(rng, r) * X.Sigma * random_orthogonal(rng, r).transpose();
  return X;
}

inline AmbientTriple random_ambient(std::mt19937_64& rng, const FixedRankPoint& X) {
  return {gaussian(rng, X.dimension(), X.rank()), gaussian(rng, X.rank(), X.rank()),
          gaussian(rng, X.dimension(), X.rank())};
}

inline TangentTriple random_tangent(std::mt19937_64& rng, const FixedRankPoint& X) {
  return project_tangent(X, random_ambient(rng, X));
}

inline HorizontalTriple random_horizontal(std::mt19937_64& rng, const FixedRankPoint& X) {
  return project_horizontal(X, random_tangent(rng, X));
}

inline double frob_inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

/// Receiver i hears transmitters i and i+1 (mod 3).
inline NetworkTopology three_user_cycle() {
  return NetworkTopology(3, {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}, {2, 0}});
}

inline NetworkTopology fully_connected(int K) {
  std::vector<Link> links;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) links.push_back({i, j});
  return NetworkTopology(K, links);
}

inline NetworkTopology direct_only(int K) {
  std::vector<Link> links;
  for (int i = 0; i < K; ++i) links.push_back({i, i});
  return NetworkTopology(K, links);
}

inline CompletionProblem single_stream_problem(const NetworkTopology& t) {
  return build_problem(t, StreamAllocation::uniform(t.users()));
}

/// Max of ||U^T U - I||, ||V^T V - I|| (Stiefel defect).
inline double stiefel_defect(const FixedRankPoint& X) {
  const Matrix I = Matrix::Identity(X.rank(), X.rank());
  return std::max((X.U.transpose() * X.U - I).cwiseAbs().maxCoeff(), (X.V.transpose() * X.V - I).cwiseAbs().maxCoeff());
}

}  // namespace timrp::testing
