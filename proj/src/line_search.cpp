#include "timrp/line_search.hpp"

#include <algorithm>
#include <cmath>

#include "timrp/common.hpp"

namespace timrp {
namespace {

struct Sample {
  double a;
  double f;
  double d;
};

// Minimizer of the cubic through (lo, hi) with matching slopes, or the
// midpoint when that falls outside the safeguarded interior.
double cubic_step(const Sample& lo, const Sample& hi) {
  const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.a - hi.a);
  const double disc = d1 * d1 - lo.d * hi.d;
  const double mid = 0.5 * (lo.a + hi.a);
  if (!(disc >= 0.0)) return mid;
  const double d2 = std::copysign(std::sqrt(disc), hi.a - lo.a);
  const double denom = hi.d - lo.d + 2.0 * d2;
  if (denom == 0.0) return mid;
  const double a = hi.a - (hi.a - lo.a) * (hi.d + d2 - d1) / denom;
  const double lower = std::min(lo.a, hi.a), upper = std::max(lo.a, hi.a);
  const double margin = 0.1 * (upper - lower);
  if (!std::isfinite(a) || a < lower + margin || a > upper - margin) return mid;
  return a;
}

}  // namespace

WolfeResult strong_wolfe_search(const LineFunction& phi, double phi0, double dphi0, double initial_step, double c1,
                                double c2, int max_evaluations) {
  if (!(dphi0 < 0.0)) throw Error("strong_wolfe_search: not a descent direction");
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw Error("strong_wolfe_search: need 0 < c1 < c2 < 1");
  WolfeResult res;
  auto eval = [&](double a) {
    auto [f, d] = phi(a);
    ++res.evaluations;
    return Sample{a, f, d};
  };
  auto armijo = [&](const Sample& s) { return std::isfinite(s.f) && s.f <= phi0 + c1 * s.a * dphi0; };
  auto curvature = [&](const Sample& s) { return std::abs(s.d) <= -c2 * dphi0; };
  auto done = [&](const Sample& s) {
    res.ok = true;
    res.step = s.a;
    res.value = s.f;
    res.slope = s.d;
    return res;
  };

  auto zoom = [&](Sample lo, Sample hi) -> WolfeResult {
    while (res.evaluations < max_evaluations) {
      if (std::abs(hi.a - lo.a) <= 1e-14 * std::max(1.0, std::abs(lo.a))) break;
      const Sample s = eval(cubic_step(lo, hi));
      if (!armijo(s) || s.f >= lo.f) {
        hi = s;
      } else {
        if (curvature(s)) return done(s);
        if (s.d * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = s;
      }
    }
    res.step = lo.a;
    res.value = lo.f;
    res.slope = lo.d;
    return res;
  };

  Sample prev{0.0, phi0, dphi0};
  double a = initial_step > 0.0 && std::isfinite(initial_step) ? initial_step : 1.0;
  for (int i = 0; res.evaluations < max_evaluations; ++i) {
    const Sample s = eval(a);
    if (!armijo(s) || (i > 0 && s.f >= prev.f)) return zoom(prev, s);
    if (curvature(s)) return done(s);
    if (s.d >= 0.0) return zoom(s, prev);
    prev = s;
    a *= 2.0;
  }
  return res;
}

}  // namespace timrp
