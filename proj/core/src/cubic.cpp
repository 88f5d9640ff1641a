#include "xyfit/cubic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xyfit {

namespace {

// A few Newton steps in extended precision tighten the closed-form values;
// the step guard keeps near-multiple roots from bouncing.
double polish(const CubicCoeffs& c, double r0) {
  long double r = r0;
  const long double a = c.a, b = c.b, cc = c.c, d = c.d;
  for (int it = 0; it < 12; ++it) {
    const long double p = ((a * r + b) * r + cc) * r + d;
    const long double dp = (3.0L * a * r + 2.0L * b) * r + cc;
    if (p == 0.0L || dp == 0.0L) break;
    const long double step = p / dp;
    if (!std::isfinite(static_cast<double>(step)) ||
        fabsl(step) > 0.5L * (1.0L + fabsl(r)))
      break;
    r -= step;
    if (fabsl(step) < 1e-17L * (1.0L + fabsl(r))) break;
  }
  return static_cast<double>(r);
}

}  // namespace

CubicRealRoots real_roots(const CubicCoeffs& c) {
  if (c.a == 0.0) throw std::invalid_argument("cubic: not a cubic (a = 0)");

  const double a = c.a, b = c.b;
  const double delta0 = b * b - 3.0 * c.a * c.c;
  const double delta1 =
      2.0 * b * b * b - 9.0 * a * b * c.c + 27.0 * a * a * c.d;
  const double disc = delta1 * delta1 - 4.0 * delta0 * delta0 * delta0;

  CubicRealRoots out;
  if (disc > 0.0) {
    // One real root. Take the cube root on the side of delta1's sign so the
    // sum delta1 +- sqrt(disc) never cancels; by C+ C- = delta0 this is the
    // same value the C+ / C- fall-through produces.
    const double q = 0.5 * (delta1 + std::copysign(std::sqrt(disc), delta1));
    const double cr = std::cbrt(q);
    if (cr != 0.0) {
      out.branch = delta1 >= 0.0 ? CubicBranch::single : CubicBranch::single_alt;
      out.values = {polish(c, -(b + cr + delta0 / cr) / (3.0 * a))};
      return out;
    }
    // q == 0 requires delta0 = delta1 = 0, which contradicts disc > 0;
    // fall through to the triple root rather than divide by zero.
  }

  if (delta0 == 0.0 && delta1 == 0.0) {
    out.branch = CubicBranch::triple;
    const double u = -b / (3.0 * a);
    out.values = {u, u, u};
    return out;
  }

  // Three real roots (repeated exactly on the disc = 0 boundary). theta is a
  // third of the argument of the complex number delta1 + i sqrt(-disc).
  const double theta = std::atan2(std::sqrt(std::max(-disc, 0.0)), delta1) / 3.0;
  const double two_sqrt_d0 = 2.0 * std::sqrt(delta0);
  constexpr double third_turn = 2.0 * std::numbers::pi / 3.0;
  out.branch = CubicBranch::trig;
  out.values = {
      polish(c, -(b + two_sqrt_d0 * std::cos(theta)) / (3.0 * a)),
      polish(c, -(b + two_sqrt_d0 * std::cos(theta + third_turn)) / (3.0 * a)),
      polish(c, -(b + two_sqrt_d0 * std::cos(theta - third_turn)) / (3.0 * a)),
  };
  return out;
}

}  // namespace xyfit
