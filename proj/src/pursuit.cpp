#include "timrp/pursuit.hpp"

#include <cmath>

#include "timrp/lrmc.hpp"

namespace timrp {
namespace {

constexpr int kMaxHalvings = 50;

struct Triplet {
  double sigma = 0.0;
  Vector u;
  Vector v;
};

Triplet top_triplet(const Matrix& A) {
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.singularValues()(0), svd.matrixU().col(0), svd.matrixV().col(0)};
}

}  // namespace

const char* to_string(InnerSolver kind) {
  switch (kind) {
    case InnerSolver::cg: return "cg";
    case InnerSolver::tr: return "tr";
    case InnerSolver::als: return "als";
  }
  return "unknown";
}

const char* to_string(RankStepRule rule) { return rule == RankStepRule::variety ? "variety" : "simple"; }

InnerSolver parse_inner_solver(const std::string& name) {
  if (name == "cg") return InnerSolver::cg;
  if (name == "tr") return InnerSolver::tr;
  if (name == "als") return InnerSolver::als;
  throw Error("unknown solver '" + name + "' (expected cg, tr or als)");
}

void PursuitOptions::validate(int dimension) const {
  if (!(eps > 0.0)) throw Error("pursuit: eps must be positive");
  const int cap = resolved_max_rank(dimension);
  if (cap < 1 || cap > dimension)
    throw Error("pursuit: max_rank " + std::to_string(cap) + " outside [1, " + std::to_string(dimension) + "]");
  if (max_escapes < 0) throw Error("pursuit: max_escapes must be nonnegative");
  if (lanczos_steps < 1) throw Error("pursuit: lanczos_steps must be positive");
  if (!(negative_curvature_tol >= 0.0)) throw Error("pursuit: negative_curvature_tol must be nonnegative");
  inner.validate();
}

FixedRankPoint simple_rank_one_update(const CompletionProblem& problem, const FixedRankPoint& X_r) {
  const Matrix A = euclidean_gradient(problem, X_r);
  const Triplet t = top_triplet(A);
  const int next = std::min(X_r.rank() + 1, X_r.dimension());
  return point_from_matrix(embed(X_r) - t.sigma * t.u * t.v.transpose(), next);
}

RankIncrease rank_increase(const CompletionProblem& problem, const FixedRankPoint& X_r,
                           const HorizontalTriple& grad_r) {
  const int M = X_r.dimension();
  const int next = std::min(X_r.rank() + 1, M);
  RankIncrease out;
  const Matrix X = embed(X_r);
  const Matrix A = euclidean_gradient(problem, X);
  out.f_before = 0.5 * A.squaredNorm();

  // Part of -grad f orthogonal to every tangent direction U * + * V^T.
  const Matrix UtA = X_r.U.transpose() * A;
  Matrix normal = A - X_r.U * UtA;
  normal -= (normal * X_r.V) * X_r.V.transpose();
  normal *= -1.0;
  const Triplet t = top_triplet(normal);
  out.sigma = t.sigma;
  out.u = t.u;
  out.v = t.v;

  const Matrix Xi = t.sigma * t.u * t.v.transpose();
  const Matrix Eg = embed_tangent(X_r, grad_r);
  const double xi_norm = Xi.norm(), eg_norm = Eg.norm();
  if (xi_norm > 0.0 && eg_norm > 0.0)
    out.orthogonality_defect = std::abs(Xi.cwiseProduct(Eg).sum()) / (xi_norm * eg_norm);

  const Matrix D = Xi - Eg;
  const double s = t.sigma * t.sigma + metric(X_r, grad_r, grad_r);
  const double curv = problem.project(D).squaredNorm();
  if (!(s > 0.0) || !(curv > 0.0)) {
    out.critical = true;
    out.X = point_from_matrix(X, next);
    out.f_after = cost(problem, out.X);
    return out;
  }

  double alpha = s / curv;
  for (int h = 0; h <= kMaxHalvings; ++h, alpha *= 0.5) {
    FixedRankPoint cand = point_from_matrix(X + alpha * D, next);
    const double f = cost(problem, cand);
    if (f <= out.f_before - 0.5 * alpha * s) {
      out.X = std::move(cand);
      out.f_after = f;
      out.alpha = alpha;
      out.halvings = h;
      return out;
    }
  }
  out.used_fallback = true;
  out.halvings = kMaxHalvings;
  out.X = simple_rank_one_update(problem, X_r);
  out.f_after = cost(problem, out.X);
  return out;
}

CurvatureEscape escape_saddle(const CompletionProblem& problem, const FixedRankPoint& X, double tol, int lanczos_steps,
                              std::uint64_t seed) {
  CurvatureEscape out;
  out.X = X;
  const CostDerivatives D(X, problem);
  const CurvatureEstimate c = smallest_curvature(D, lanczos_steps, seed);
  out.lambda_min = c.lambda_min;
  if (!(c.lambda_min < -tol)) return out;
  HorizontalTriple d = c.direction;
  if (metric(X, D.gradient(), d) > 0.0) d *= -1.0;
  double t = 1.0;
  for (int h = 0; h <= kMaxHalvings; ++h, t *= 0.5) {
    FixedRankPoint Y = retract(X, d, t);
    if (cost(problem, Y) <= D.cost() + 0.25 * c.lambda_min * t * t) {
      out.X = std::move(Y);
      out.step = t;
      out.moved = true;
      return out;
    }
  }
  return out;
}

SolverResult run_inner_solver(InnerSolver kind, const CompletionProblem& problem, const FixedRankPoint& X0,
                              const SolverOptions& opts) {
  switch (kind) {
    case InnerSolver::cg: return solve_rcg(problem, X0, opts);
    case InnerSolver::tr: return solve_rtr(problem, X0, opts);
    case InnerSolver::als: return solve_als(problem, X0, opts);
  }
  throw Error("run_inner_solver: unknown solver kind");
}

PursuitResult riemannian_pursuit(const CompletionProblem& problem, const PursuitOptions& opts) {
  const int M = problem.dimension();
  opts.validate(M);
  const int cap = opts.resolved_max_rank(M);
  SolverOptions inner = opts.inner;
  inner.residual_tol = opts.eps;
  inner.relative_grad_tol = true;

  PursuitResult res;
  FixedRankPoint X0 = random_point(M, 1, opts.seed);
  for (int r = 1;; ++r) {
    StageRecord stage;
    stage.rank = r;
    SolverResult sol = run_inner_solver(opts.inner_kind, problem, X0, inner);
    stage.f_start = sol.trace.front().cost;
    stage.trace = sol.trace;
    stage.iterations = sol.iterations;
    while (sol.final_residual() > opts.eps && stage.escapes < opts.max_escapes) {
      const std::uint64_t lanczos_seed = opts.seed + 7919u * static_cast<std::uint64_t>(r) + stage.escapes;
      const CurvatureEscape esc =
          escape_saddle(problem, sol.X, opts.negative_curvature_tol, opts.lanczos_steps, lanczos_seed);
      if (!esc.moved) break;
      ++stage.escapes;
      sol = run_inner_solver(opts.inner_kind, problem, esc.X, inner);
      for (TraceRecord rec : sol.trace) {
        rec.iter += stage.iterations + 1;
        stage.trace.push_back(rec);
      }
      stage.iterations += sol.iterations + 1;
    }
    stage.f_end = sol.final_cost();
    stage.residual_end = sol.final_residual();
    stage.status = sol.status;
    res.stages.push_back(std::move(stage));

    res.X = sol.X;
    res.detected_rank = r;
    res.residual = residual(problem, sol.X);
    if (res.residual <= opts.eps) {
      res.success = true;
      return res;
    }
    if (r >= cap) {
      res.diagnostic = "rank cap " + std::to_string(cap) + " reached with residual " + std::to_string(res.residual);
      return res;
    }

    if (opts.rank_step_rule == RankStepRule::variety) {
      const RankIncrease inc = rank_increase(problem, sol.X, riemannian_gradient(sol.X, problem));
      if (inc.critical) {
        res.diagnostic = "rank step direction vanished at rank " + std::to_string(r);
        return res;
      }
      X0 = inc.X;
      res.stages.back().f_after_increase = inc.f_after;
      res.stages.back().orthogonality_defect = inc.orthogonality_defect;
    } else {
      X0 = simple_rank_one_update(problem, sol.X);
      res.stages.back().f_after_increase = cost(problem, X0);
    }
  }
}

}  // namespace timrp
