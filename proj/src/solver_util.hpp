#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>

#include "timrp/lrmc.hpp"
#include "timrp/solvers.hpp"

namespace timrp::detail {

class TraceRecorder {
 public:
  explicit TraceRecorder(int dimension) : dimension_(dimension), start_(std::chrono::steady_clock::now()) {}

  TraceRecord push(std::vector<TraceRecord>& trace, int iter, double cost, double grad_norm) const {
    const auto now = std::chrono::steady_clock::now();
    TraceRecord rec;
    rec.iter = iter;
    rec.cost = cost;
    rec.grad_norm = grad_norm;
    rec.residual = residual_from_cost(cost, dimension_);
    rec.elapsed_ms = std::chrono::duration<double, std::milli>(now - start_).count();
    trace.push_back(rec);
    return rec;
  }

 private:
  int dimension_;
  std::chrono::steady_clock::time_point start_;
};

// Shared stopping test; returns true and sets status when the run is over.
inline bool should_stop(const std::vector<TraceRecord>& trace, int iter, const SolverOptions& opts,
                        SolverStatus& status) {
  const TraceRecord& rec = trace.back();
  if (opts.residual_tol > 0.0 && rec.residual <= opts.residual_tol) {
    status = SolverStatus::residual_tolerance;
    return true;
  }
  const double scale = opts.relative_grad_tol ? std::min(1.0, std::sqrt(2.0 * rec.cost)) : 1.0;
  if (rec.grad_norm <= opts.grad_tol * scale) {
    status = SolverStatus::gradient_tolerance;
    return true;
  }
  const auto w = static_cast<std::size_t>(opts.stall_window);
  if (w > 0 && trace.size() > w) {
    const double before = trace[trace.size() - 1 - w].cost;
    if (before - rec.cost <= opts.stall_tol * before) {
      status = SolverStatus::stalled;
      return true;
    }
    // At the current per-window rate, would residual_tol be met before max_iter?
    if (opts.residual_tol > 0.0 && rec.cost > 0.0) {
      const double windows = 2.0 * std::log(opts.residual_tol / rec.residual) / std::log(rec.cost / before);
      if (iter + windows * static_cast<double>(w) > opts.max_iter) {
        status = SolverStatus::stalled;
        return true;
      }
    }
  }
  if (iter >= opts.max_iter) {
    status = SolverStatus::max_iterations;
    return true;
  }
  return false;
}

}  // namespace timrp::detail
