#pragma once

#include <vector>

namespace xyfit {

// a u^3 + b u^2 + c u + d with a != 0.
struct CubicCoeffs {
  double a, b, c, d;
};

// Which closed-form branch produced the roots. trig is the only branch with
// three (possibly repeated) real roots; the discriminant boundary
// delta1^2 = 4*delta0^3 is routed to it so repeated roots come out explicitly.
enum class CubicBranch { single, trig, single_alt, triple };

struct CubicRealRoots {
  std::vector<double> values;  // 1 or 3 values, multiplicity preserved
  CubicBranch branch;
};

// Closed-form real roots: discriminant quantities delta0 = b^2 - 3ac and
// delta1 = 2b^3 - 9abc + 27a^2 d select between a single real root (via a
// sign-preserving real cube root) and the trigonometric three-root form.
// Throws std::invalid_argument when a == 0.
CubicRealRoots real_roots(const CubicCoeffs& c);

}  // namespace xyfit
