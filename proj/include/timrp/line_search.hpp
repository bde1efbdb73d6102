#pragma once

#include <functional>
#include <utility>

namespace timrp {

/// phi(alpha) and phi'(alpha) of a one-dimensional restriction.
using LineFunction = std::function<std::pair<double, double>(double)>;

struct WolfeResult {
  bool ok = false;
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0;
  int evaluations = 0;
};

/// Bracketing + zoom search for a step satisfying the strong Wolfe conditions
///   phi(a) <= phi(0) + c1 a phi'(0),  |phi'(a)| <= c2 |phi'(0)|.
/// Requires phi'(0) < 0 and 0 < c1 < c2 < 1.
WolfeResult strong_wolfe_search(const LineFunction& phi, double phi0, double dphi0, double initial_step, double c1,
                                double c2, int max_evaluations = 60);

}  // namespace timrp
