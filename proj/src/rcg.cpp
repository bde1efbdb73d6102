#include <cmath>
#include <memory>
#include <tuple>

#include "solver_util.hpp"
#include "timrp/line_search.hpp"
#include "timrp/lrmc.hpp"
#include "timrp/solvers.hpp"

namespace timrp {
namespace {

double inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

// Derivative of qf(Y + a dY) at a, given Q = qf(Y + a dY):
//   dQ = Q Omega + (I - Q Q^T) dY R^{-1},  Omega = skew part carried by tril(Q^T dY R^{-1}).
Matrix qf_derivative(const Matrix& Q, const Matrix& Y, const Matrix& dY) {
  const Matrix R = (Q.transpose() * Y).triangularView<Eigen::Upper>();
  // dY R^{-1} = (R^{-T} dY^T)^T
  const Matrix dYRinv = R.transpose().triangularView<Eigen::Lower>().solve(dY.transpose()).transpose();
  const Matrix C = Q.transpose() * dYRinv;
  Matrix low = C.triangularView<Eigen::StrictlyLower>();
  const Matrix Omega = low - low.transpose();
  return Q * Omega + dYRinv - Q * C;
}

}  // namespace

void SolverOptions::validate() const {
  if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
    throw Error("solver options: need 0 < wolfe_c1 < wolfe_c2 < 1");
  if (!(0.0 < tr_delta0 && tr_delta0 <= tr_delta_max)) throw Error("solver options: need 0 < delta0 <= delta_max");
  if (!(0.0 < tr_rho_accept && tr_rho_accept < 0.25)) throw Error("solver options: need 0 < rho_accept < 1/4");
  if (max_iter < 0) throw Error("solver options: max_iter must be nonnegative");
  if (!(grad_tol >= 0.0)) throw Error("solver options: grad_tol must be nonnegative");
  if (!(residual_tol >= 0.0)) throw Error("solver options: residual_tol must be nonnegative");
  if (stall_window < 0 || !(stall_tol >= 0.0)) throw Error("solver options: stall_window and stall_tol must be nonnegative");
}

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::gradient_tolerance: return "gradient_tolerance";
    case SolverStatus::residual_tolerance: return "residual_tolerance";
    case SolverStatus::max_iterations: return "max_iterations";
    case SolverStatus::line_search_failure: return "line_search_failure";
    case SolverStatus::stalled: return "stalled";
  }
  return "unknown";
}

CurvePoint evaluate_retraction_curve(const CompletionProblem& problem, const FixedRankPoint& X,
                                     const TangentTriple& xi, double alpha) {
  const Matrix Yu = X.U + alpha * xi.U;
  const Matrix Yv = X.V + alpha * xi.V;
  FixedRankPoint Y{orthonormal_factor(Yu), X.Sigma + alpha * xi.Sigma, orthonormal_factor(Yv)};
  const Matrix dQu = qf_derivative(Y.U, Yu, xi.U);
  const Matrix dQv = qf_derivative(Y.V, Yv, xi.V);

  CurvePoint out;
  const Matrix A = euclidean_gradient(problem, embed(Y));
  const Matrix AQv = A * Y.V;
  out.slope = inner(AQv, dQu * Y.Sigma) + inner(Y.U.transpose() * AQv, xi.Sigma) +
              inner(A.transpose() * Y.U, dQv * Y.Sigma.transpose());
  out.X = repair_degenerate(std::move(Y));
  out.value = cost(problem, out.X);
  return out;
}

SolverResult solve_rcg(const CompletionProblem& problem, const FixedRankPoint& X0, const SolverOptions& opts) {
  opts.validate();
  detail::TraceRecorder recorder(problem.dimension());
  SolverResult res;
  auto D = std::make_unique<CostDerivatives>(X0, problem);
  HorizontalTriple dir = -D->gradient();

  for (int iter = 0;; ++iter) {
    recorder.push(res.trace, iter, D->cost(), D->gradient_norm());
    res.iterations = iter;
    if (detail::should_stop(res.trace, iter, opts, res.status)) break;

    const FixedRankPoint& X = D->point();
    const HorizontalTriple& grad = D->gradient();
    const double gg = D->gradient_norm() * D->gradient_norm();

    auto attempt = [&](const HorizontalTriple& d) -> std::pair<WolfeResult, CurvePoint> {
      const double slope0 = metric(X, grad, d);
      if (!(slope0 < 0.0)) return {WolfeResult{}, CurvePoint{}};
      // The cost is quadratic in the embedded matrix; its exact minimizer along
      // the tangent line seeds the search.
      const Matrix E = problem.project(embed_tangent(X, d));
      const double curv = E.squaredNorm();
      const double a0 = curv > 0.0 ? -slope0 / curv : 1.0;
      CurvePoint last;
      LineFunction phi = [&](double a) {
        last = evaluate_retraction_curve(problem, X, d, a);
        return std::make_pair(last.value, last.slope);
      };
      WolfeResult w = strong_wolfe_search(phi, D->cost(), slope0, a0, opts.wolfe_c1, opts.wolfe_c2);
      if (w.ok && last.value != w.value) last = evaluate_retraction_curve(problem, X, d, w.step);
      return {w, last};
    };

    bool restarted = false;
    if (opts.steepest_descent || !(metric(X, grad, dir) < 0.0)) {
      dir = -grad;
      restarted = true;
    }
    auto [w, next] = attempt(dir);
    if (!w.ok && !restarted) {
      dir = -grad;
      std::tie(w, next) = attempt(dir);
      restarted = true;
    }
    if (!w.ok) {
      res.status = SolverStatus::line_search_failure;
      res.diagnostic = "strong Wolfe search failed along the steepest-descent direction at iteration " +
                       std::to_string(iter) + " (cost " + std::to_string(D->cost()) + ", gradient norm " +
                       std::to_string(D->gradient_norm()) + ")";
      break;
    }

    auto D_new = std::make_unique<CostDerivatives>(next.X, problem);
    const HorizontalTriple& g_new = D_new->gradient();
    const HorizontalTriple g_old = transport(next.X, grad);
    const HorizontalTriple d_old = transport(next.X, dir);
    double beta = 0.0;
    if (!opts.steepest_descent && gg > 0.0)
      beta = std::max(0.0, metric(next.X, g_new, g_new - g_old) / gg);
    dir = -g_new + beta * d_old;
    D = std::move(D_new);
  }
  res.X = D->point();
  return res;
}

}  // namespace timrp
