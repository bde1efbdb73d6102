#pragma once

// Rank-increasing outer loop: solve the fixed-rank problem, then grow the rank
// by one along the best rank-one normal direction until the residual target
// is met.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "timrp/solvers.hpp"

namespace timrp {

enum class InnerSolver { cg, tr, als };
enum class RankStepRule { variety, simple };

const char* to_string(InnerSolver kind);
const char* to_string(RankStepRule rule);
InnerSolver parse_inner_solver(const std::string& name);

struct PursuitOptions {
  double eps = 1e-6;
  /// 0 means the problem dimension.
  int max_rank = 0;
  /// Stages also stop on a stalled cost; a rank that cannot be completed
  /// otherwise burns max_iter on every stage.
  SolverOptions inner = [] {
    SolverOptions o;
    o.stall_window = 50;
    return o;
  }();
  InnerSolver inner_kind = InnerSolver::tr;
  RankStepRule rank_step_rule = RankStepRule::variety;
  std::uint64_t seed = 0;
  /// A stage that misses eps is checked for Hessian eigenvalues below
  /// -negative_curvature_tol; if one is found the iterate moves along it and
  /// the same rank is solved again, at most max_escapes times per stage.
  double negative_curvature_tol = 1e-6;
  int max_escapes = 5;
  int lanczos_steps = 60;

  int resolved_max_rank(int dimension) const { return max_rank == 0 ? dimension : max_rank; }
  void validate(int dimension) const;
};

struct StageRecord {
  int rank = 0;
  double f_start = 0.0;
  double f_end = 0.0;
  double residual_end = 0.0;
  SolverStatus status = SolverStatus::max_iterations;
  int iterations = 0;
  /// Negative-curvature moves taken inside this stage.
  int escapes = 0;
  std::vector<TraceRecord> trace;
  /// Rank step taken after this stage (absent for the last stage).
  std::optional<double> f_after_increase;
  /// Variety rule only: RankIncrease::orthogonality_defect of that step.
  std::optional<double> orthogonality_defect;
};

struct PursuitResult {
  FixedRankPoint X;
  int detected_rank = 0;
  double residual = 0.0;
  bool success = false;
  std::vector<StageRecord> stages;
  /// Per-user M_i / N, filled in by the TIM layer.
  std::vector<double> dof;
  std::string diagnostic;
};

struct RankIncrease {
  FixedRankPoint X;
  double f_before = 0.0;
  double f_after = 0.0;
  /// Step used along the composite direction (0 when the fallback fired).
  double alpha = 0.0;
  int halvings = 0;
  /// The composite direction vanished: the point is critical for the unconstrained problem.
  bool critical = false;
  /// The decrease condition failed after 50 halvings; the simple rank-one update was used.
  bool used_fallback = false;
  /// |<Xi, embedded grad>| / (||Xi|| ||embedded grad||), 0 when either vanishes.
  double orthogonality_defect = 0.0;
  /// Top singular triplet of the normal component (sigma, u, v).
  double sigma = 0.0;
  Vector u;
  Vector v;
};

/// Variety-based rank step from a fixed-rank stationary candidate X_r with
/// Riemannian gradient grad_r.
RankIncrease rank_increase(const CompletionProblem& problem, const FixedRankPoint& X_r, const HorizontalTriple& grad_r);

/// X_r - sigma u v^T with the top singular triplet of the Euclidean gradient,
/// refactored at rank r + 1.
FixedRankPoint simple_rank_one_update(const CompletionProblem& problem, const FixedRankPoint& X_r);

struct CurvatureEscape {
  FixedRankPoint X;
  double lambda_min = 0.0;
  double step = 0.0;
  bool moved = false;
};

/// One move along the most negative Hessian direction at X, if its eigenvalue
/// is below -tol and a step of the form 2^-k achieves f(Y) <= f(X) + lambda t^2 / 4.
CurvatureEscape escape_saddle(const CompletionProblem& problem, const FixedRankPoint& X, double tol, int lanczos_steps,
                              std::uint64_t seed);

/// Runs the chosen fixed-rank solver from a start point.
SolverResult run_inner_solver(InnerSolver kind, const CompletionProblem& problem, const FixedRankPoint& X0,
                              const SolverOptions& opts);

PursuitResult riemannian_pursuit(const CompletionProblem& problem, const PursuitOptions& opts);

}  // namespace timrp
