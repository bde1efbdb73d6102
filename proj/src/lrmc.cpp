#include "timrp/lrmc.hpp"

#include <cmath>

namespace timrp {
namespace {

void check_dimension(const CompletionProblem& problem, const Matrix& X) {
  if (X.rows() != problem.dimension() || X.cols() != problem.dimension())
    throw Error("lrmc: matrix is " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                " but the problem dimension is " + std::to_string(problem.dimension()));
}

}  // namespace

Matrix euclidean_gradient(const CompletionProblem& problem, const Matrix& X) {
  check_dimension(problem, X);
  Matrix A = problem.project(X);
  A.diagonal().array() -= 1.0;
  return A;
}

Matrix euclidean_gradient(const CompletionProblem& problem, const FixedRankPoint& X) {
  return euclidean_gradient(problem, embed(X));
}

double cost(const CompletionProblem& problem, const Matrix& X) {
  return 0.5 * euclidean_gradient(problem, X).squaredNorm();
}

double cost(const CompletionProblem& problem, const FixedRankPoint& X) { return cost(problem, embed(X)); }

double residual(const CompletionProblem& problem, const Matrix& X) {
  return euclidean_gradient(problem, X).norm() / std::sqrt(static_cast<double>(problem.dimension()));
}

double residual(const CompletionProblem& problem, const FixedRankPoint& X) { return residual(problem, embed(X)); }

ObjectiveValue evaluate(const CompletionProblem& problem, const FixedRankPoint& X) {
  const double f = cost(problem, X);
  return {f, residual_from_cost(f, problem.dimension())};
}

}  // namespace timrp
