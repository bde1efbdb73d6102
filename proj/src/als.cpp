#include <vector>

#include "solver_util.hpp"
#include "timrp/lrmc.hpp"
#include "timrp/solvers.hpp"

namespace timrp {
namespace {

// Ridge on the r x r normal equations. Entries off the mask never enter the
// cost, so unregularized solves let ||U V^T|| grow without bound on
// rank-deficient subproblems.
constexpr double kRidge = 1e-10;

// For every row i of the result, the least-squares fit of the observed
// entries (i, j) in `pattern` against the rows of `fixed`:
//   min_w sum_j (w^T fixed_j - [i == j])^2 + kRidge |w|^2.
void solve_rows(const std::vector<std::vector<int>>& pattern, const Matrix& fixed, Matrix& out) {
  const Eigen::Index r = fixed.cols();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    Matrix G = kRidge * Matrix::Identity(r, r);
    Vector b = Vector::Zero(r);
    for (const int j : pattern[static_cast<std::size_t>(i)]) {
      G.noalias() += fixed.row(j).transpose() * fixed.row(j);
      if (j == i) b += fixed.row(j).transpose();
    }
    out.row(i) = G.ldlt().solve(b).transpose();
  }
}

double factored_cost(const CompletionProblem& problem, const Matrix& U, const Matrix& V) {
  return cost(problem, Matrix(U * V.transpose()));
}

// X = U V^T as a quotient point: U = Qu Ru, V = Qv Rv, X = Qu (Ru Rv^T) Qv^T.
FixedRankPoint to_point(const Matrix& U, const Matrix& V) {
  FixedRankPoint X;
  X.U = orthonormal_factor(U);
  X.V = orthonormal_factor(V);
  X.Sigma = (X.U.transpose() * U) * (X.V.transpose() * V).transpose();
  return repair_degenerate(std::move(X));
}

SolverResult run_als(const CompletionProblem& problem, Matrix U, Matrix V, const SolverOptions& opts) {
  opts.validate();
  detail::TraceRecorder recorder(problem.dimension());
  const int M = problem.dimension();
  std::vector<std::vector<int>> by_row(static_cast<std::size_t>(M)), by_col(static_cast<std::size_t>(M));
  for (const auto& [i, j] : problem.omega()) {
    by_row[static_cast<std::size_t>(i)].push_back(j);
    by_col[static_cast<std::size_t>(j)].push_back(i);
  }

  SolverResult res;
  res.half_step_costs.push_back(factored_cost(problem, U, V));
  for (int iter = 0;; ++iter) {
    const FixedRankPoint X = to_point(U, V);
    const CostDerivatives D(X, problem);
    recorder.push(res.trace, iter, D.cost(), D.gradient_norm());
    res.iterations = iter;
    res.X = X;
    if (detail::should_stop(res.trace, iter, opts, res.status)) break;

    solve_rows(by_row, V, U);
    res.half_step_costs.push_back(factored_cost(problem, U, V));
    solve_rows(by_col, U, V);
    res.half_step_costs.push_back(factored_cost(problem, U, V));
  }
  return res;
}

}  // namespace

SolverResult solve_als(const CompletionProblem& problem, int rank, std::uint64_t seed, const SolverOptions& opts) {
  return solve_als(problem, random_point(problem.dimension(), rank, seed), opts);
}

SolverResult solve_als(const CompletionProblem& problem, const FixedRankPoint& X0, const SolverOptions& opts) {
  if (X0.dimension() != problem.dimension()) throw Error("solve_als: point and problem dimensions differ");
  return run_als(problem, X0.U * X0.Sigma, X0.V, opts);
}

}  // namespace timrp
