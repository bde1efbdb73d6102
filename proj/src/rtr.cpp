#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "solver_util.hpp"
#include "timrp/lrmc.hpp"
#include "timrp/solvers.hpp"

namespace timrp {
namespace {

struct InnerSolution {
  HorizontalTriple eta;
  HorizontalTriple Heta;
  bool hit_boundary = false;
  int iterations = 0;
};

// Steihaug-Toint truncated CG on m(eta) = <g, eta> + 1/2 <eta, H eta>, ||eta||_g <= delta.
InnerSolution truncated_cg(const CostDerivatives& D, double delta, int max_inner) {
  const FixedRankPoint& X = D.point();
  InnerSolution out;
  out.eta = HorizontalTriple::zero_like(X);
  out.Heta = HorizontalTriple::zero_like(X);

  HorizontalTriple r = D.gradient();
  double r_r = metric(X, r, r);
  const double norm_r0 = std::sqrt(r_r);
  const double stop = norm_r0 * std::min(0.5, std::sqrt(norm_r0));
  HorizontalTriple d = -r;
  double e_Pe = 0.0, e_Pd = 0.0, d_Pd = r_r;
  double model = 0.0;
  const double delta2 = delta * delta;

  for (int j = 0; j < max_inner; ++j) {
    out.iterations = j + 1;
    const HorizontalTriple Hd = D.hess_vec(d);
    const double d_Hd = metric(X, d, Hd);
    const double alpha = r_r / d_Hd;
    const double e_Pe_new = e_Pe + 2.0 * alpha * e_Pd + alpha * alpha * d_Pd;

    if (!(d_Hd > 0.0) || e_Pe_new >= delta2) {
      const double tau = (-e_Pd + std::sqrt(std::max(0.0, e_Pd * e_Pd + d_Pd * (delta2 - e_Pe)))) / d_Pd;
      out.eta += tau * d;
      out.Heta += tau * Hd;
      out.hit_boundary = true;
      return out;
    }

    HorizontalTriple eta_new = out.eta + alpha * d;
    HorizontalTriple Heta_new = out.Heta + alpha * Hd;
    const double model_new = metric(X, D.gradient(), eta_new) + 0.5 * metric(X, eta_new, Heta_new);
    if (model_new >= model) return out;  // rounding took over
    out.eta = std::move(eta_new);
    out.Heta = std::move(Heta_new);
    model = model_new;
    e_Pe = e_Pe_new;

    r += alpha * Hd;
    const double r_r_new = metric(X, r, r);
    if (std::sqrt(r_r_new) <= stop) return out;
    const double beta = r_r_new / r_r;
    d = -r + beta * d;
    e_Pd = beta * (e_Pd + alpha * d_Pd);
    d_Pd = r_r_new + beta * beta * d_Pd;
    r_r = r_r_new;
  }
  return out;
}

}  // namespace

SolverResult solve_rtr(const CompletionProblem& problem, const FixedRankPoint& X0, const SolverOptions& opts) {
  opts.validate();
  detail::TraceRecorder recorder(problem.dimension());
  SolverResult res;
  auto D = std::make_unique<CostDerivatives>(X0, problem);
  double delta = opts.tr_delta0;
  const int M = X0.dimension(), r = X0.rank();
  const int dim = std::max(1, (2 * M - r) * r);
  const int max_inner = opts.tr_max_inner > 0 ? std::min(opts.tr_max_inner, dim) : dim;

  for (int iter = 0;; ++iter) {
    recorder.push(res.trace, iter, D->cost(), D->gradient_norm());
    res.iterations = iter;
    if (detail::should_stop(res.trace, iter, opts, res.status)) break;

    const FixedRankPoint& X = D->point();
    const InnerSolution inner = truncated_cg(*D, delta, max_inner);
    res.hessian_products += inner.iterations;
    const double model_decrease =
        -(metric(X, D->gradient(), inner.eta) + 0.5 * metric(X, inner.eta, inner.Heta));

    FixedRankPoint candidate = retract(X, inner.eta);
    const double f_new = cost(problem, candidate);
    const double f = D->cost();
    const double reg = 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f));
    double rho = (f - f_new + reg) / (model_decrease + reg);
    if (!std::isfinite(rho)) rho = -1.0;
    res.rho.push_back(rho);

    if (rho < 0.25) {
      delta *= 0.25;
    } else if (rho > 0.75 && inner.hit_boundary) {
      delta = std::min(2.0 * delta, opts.tr_delta_max);
    }

    if (rho >= opts.tr_rho_accept && f_new <= f) {
      D = std::make_unique<CostDerivatives>(candidate, problem);
    } else {
      ++res.rejected_steps;
    }
  }
  res.X = D->point();
  return res;
}

}  // namespace timrp
