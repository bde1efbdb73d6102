#pragma once

// Completion objective f(X) = 1/2 ||P_Omega(X) - I_M||_F^2 and the normalized
// residual eps = ||P_Omega(X) - I_M||_F / sqrt(M).

#include "timrp/common.hpp"
#include "timrp/manifold.hpp"
#include "timrp/topology.hpp"

namespace timrp {

struct ObjectiveValue {
  double f = 0.0;
  double residual = 0.0;
};

double cost(const CompletionProblem& problem, const Matrix& X);
double cost(const CompletionProblem& problem, const FixedRankPoint& X);

/// P_Omega(X) - I, zero off omega.
Matrix euclidean_gradient(const CompletionProblem& problem, const Matrix& X);
Matrix euclidean_gradient(const CompletionProblem& problem, const FixedRankPoint& X);

double residual(const CompletionProblem& problem, const Matrix& X);
double residual(const CompletionProblem& problem, const FixedRankPoint& X);

ObjectiveValue evaluate(const CompletionProblem& problem, const FixedRankPoint& X);

/// Normalized residual for a given cost value.
inline double residual_from_cost(double f, int dimension) {
  return std::sqrt(2.0 * std::max(f, 0.0) / static_cast<double>(dimension));
}

}  // namespace timrp
