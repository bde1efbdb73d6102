#pragma once

// Fixed-rank solvers for min f(X) over rank-r matrices: Riemannian conjugate
// gradient, Riemannian trust region with truncated CG, and the two-factor
// alternating least-squares baseline.

#include <cstdint>
#include <string>
#include <vector>

#include "timrp/manifold.hpp"
#include "timrp/topology.hpp"

namespace timrp {

struct SolverOptions {
  double grad_tol = 1e-6;
  int max_iter = 500;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.1;
  double tr_delta0 = 1.0;
  double tr_delta_max = 100.0;
  double tr_rho_accept = 0.1;
  /// Inner truncated-CG step cap; 0 means the quotient dimension (2M - r) r.
  /// Large warm-started problems spend most Hessian products far from the
  /// solution, where an exact inner solve buys nothing.
  int tr_max_inner = 20;
  /// Stop as soon as the normalized residual reaches this value (0 disables).
  double residual_tol = 0.0;
  /// Gradient threshold becomes grad_tol * min(1, ||P_Omega(X) - I||_F), so
  /// runs that are approaching a completion are not cut off before they
  /// reach residual_tol.
  bool relative_grad_tol = false;
  /// Stop once the cost has dropped by at most stall_tol * f over the last
  /// stall_window iterations, or, with residual_tol set, once that window's
  /// decrease ratio would need more than max_iter iterations in total to
  /// reach residual_tol (0 disables). Below the completable rank the infimum
  /// is often approached only as ||X|| grows without bound, so the gradient
  /// never reaches grad_tol.
  int stall_window = 0;
  double stall_tol = 1e-3;
  /// Conjugate gradient with beta = 0, i.e. Riemannian steepest descent.
  bool steepest_descent = false;
  std::uint64_t seed = 0;

  /// Throws Error unless 0 < c1 < c2 < 1, 0 < delta0 <= delta_max,
  /// 0 < rho_accept < 1/4, max_iter >= 0 and grad_tol >= 0.
  void validate() const;
};

struct TraceRecord {
  int iter = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double residual = 0.0;
  double elapsed_ms = 0.0;
};

enum class SolverStatus {
  gradient_tolerance,
  residual_tolerance,
  max_iterations,
  line_search_failure,
  stalled,
};

const char* to_string(SolverStatus status);

struct SolverResult {
  FixedRankPoint X;
  std::vector<TraceRecord> trace;
  SolverStatus status = SolverStatus::max_iterations;
  int iterations = 0;
  std::string diagnostic;
  /// Trust region: outer steps rejected by the ratio test.
  int rejected_steps = 0;
  /// Trust region: Hessian-vector products spent in the inner solves.
  long hessian_products = 0;
  /// Trust region: one entry per outer iteration, the model decrease ratio.
  std::vector<double> rho;
  /// Alternating least squares: cost after every half-step (initial cost first).
  std::vector<double> half_step_costs;

  double final_cost() const { return trace.empty() ? 0.0 : trace.back().cost; }
  double final_residual() const { return trace.empty() ? 0.0 : trace.back().residual; }
  double final_grad_norm() const { return trace.empty() ? 0.0 : trace.back().grad_norm; }
};

/// Riemannian conjugate gradient: Polak-Ribiere+ on transported gradients,
/// strong Wolfe step along the retraction curve.
SolverResult solve_rcg(const CompletionProblem& problem, const FixedRankPoint& X0, const SolverOptions& opts);

/// Riemannian trust region; inner truncated CG in the metric norm.
SolverResult solve_rtr(const CompletionProblem& problem, const FixedRankPoint& X0, const SolverOptions& opts);

/// Alternating exact least squares on ||P_Omega(U V^T) - I||^2 from a seeded
/// random start.
SolverResult solve_als(const CompletionProblem& problem, int rank, std::uint64_t seed, const SolverOptions& opts);
/// Same, warm-started from U0 = U Sigma, V0 = V.
SolverResult solve_als(const CompletionProblem& problem, const FixedRankPoint& X0, const SolverOptions& opts);

/// Lanczos estimate of the smallest eigenvalue of the Riemannian Hessian and
/// a metric-unit eigenvector, from a seeded random horizontal start.
struct CurvatureEstimate {
  double lambda_min = 0.0;
  HorizontalTriple direction;
  int steps = 0;
};
CurvatureEstimate smallest_curvature(const CostDerivatives& D, int max_steps, std::uint64_t seed);

/// Exact derivative of alpha -> f(retract(X, xi, alpha)).
struct CurvePoint {
  FixedRankPoint X;
  double value = 0.0;
  double slope = 0.0;
};
CurvePoint evaluate_retraction_curve(const CompletionProblem& problem, const FixedRankPoint& X,
                                     const TangentTriple& xi, double alpha);

}  // namespace timrp
