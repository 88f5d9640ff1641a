#include "xyfit/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xyfit {

SampleMoments moments(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() < 2 || x.size() != y.size())
    throw std::invalid_argument("moments: need matching vectors, N >= 2");
  const double n = static_cast<double>(x.size());
  SampleMoments m;
  m.mean_x = x.mean();
  m.mean_y = y.mean();
  m.var_x = x.squaredNorm() / n - m.mean_x * m.mean_x;
  m.var_y = y.squaredNorm() / n - m.mean_y * m.mean_y;
  m.cov_xy = x.dot(y) / n - m.mean_x * m.mean_y;
  return m;
}

SampleMoments moments(const Dataset& d) { return moments(d.x_obs, d.y_obs); }

UnifMle unif_mle(const SampleMoments& m, const HomoscedasticErrors& e) {
  if (m.var_x <= 0) throw std::invalid_argument("unif_mle: degenerate abscissa");
  UnifMle r;
  r.A = m.cov_xy / m.var_x;
  r.B = m.mean_y - r.A * m.mean_x;
  r.s2 = m.var_y - (m.cov_xy * m.cov_xy / (m.var_x * m.var_x)) *
                       (m.var_x + e.sigma_x * e.sigma_x);
  return r;
}

UnifBias unif_bias(double A_true, double mean_xt, double var_xt,
                   double sigma_x) {
  const double sx2 = sigma_x * sigma_x;
  const double denom = var_xt + sx2;
  if (denom <= 0) throw std::invalid_argument("unif_bias: var_xt + sigma_x^2 <= 0");
  UnifBias b;
  b.dA = -A_true * sx2 / denom;
  b.dB = A_true * sx2 * mean_xt / denom;
  b.ds2 = A_true * A_true * var_xt * sx2 * sx2 / (denom * denom);
  return b;
}

MnrMle mnr_mle(const SampleMoments& m, const HomoscedasticErrors& e) {
  const double sx2 = e.sigma_x * e.sigma_x;
  const double w2 = m.var_x - sx2;
  if (w2 <= 0)
    throw std::invalid_argument(
        "mnr_mle: observed x-variance not exceeding x-error variance");
  MnrMle r;
  r.A = m.cov_xy / w2;
  r.B = m.mean_y - r.A * m.mean_x;
  r.s2 = m.var_y - m.cov_xy * m.cov_xy / w2;
  r.mu = m.mean_x;
  r.w2 = w2;
  return r;
}

double prof_objective(double A, double s2, const SampleMoments& m,
                      double sigma_x) {
  const double sx2 = sigma_x * sigma_x;
  const double quad = m.var_y + A * A * m.var_x - 2.0 * A * m.cov_xy;
  return -0.5 * std::log(s2) - 0.5 * quad / (s2 + A * A * sx2);
}

namespace {

// Stationary slope values at fixed s^2: sx2*cov*A^2 + (var_x*s2 - sx2*var_y)*A
// - cov*s2 = 0, obtained by eliminating the shared factor between the two
// stationarity conditions.
std::vector<double> prof_slopes_at_fixed_s2(double s2, const SampleMoments& m,
                                            double sx2) {
  const double qa = sx2 * m.cov_xy;
  const double qb = m.var_x * s2 - sx2 * m.var_y;
  const double qc = -m.cov_xy * s2;
  if (qa == 0.0) {
    if (qb == 0.0) return {};
    return {-qc / qb};
  }
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  // numerically stable pair
  const double q = -0.5 * (qb + std::copysign(sq, qb));
  std::vector<double> roots{q / qa};
  if (q != 0.0) roots.push_back(qc / q);
  return roots;
}

}  // namespace

ProfMle prof_mle(const SampleMoments& m, const HomoscedasticErrors& e) {
  if (m.var_x <= 0) throw std::invalid_argument("prof_mle: degenerate abscissa");
  const double sx2 = e.sigma_x * e.sigma_x;
  const double sy2 = e.sigma_y * e.sigma_y;
  const double vx = m.var_x, vy = m.var_y, cxy = m.cov_xy;

  ProfMle best;
  best.report.boundary = false;
  bool have = false;
  double best_val = -std::numeric_limits<double>::infinity();

  CubicBranch branch = CubicBranch::single;
  int n_candidates = 0;

  if (cxy != 0.0) {
    CubicCoeffs cc;
    cc.a = vx * vx;
    cc.b = -vx * vx * vy + 4.0 * cxy * cxy * sx2 - 2.0 * vx * vy * sx2;
    cc.c = -std::pow(cxy, 4) + cxy * cxy * vx * vy -
           4.0 * cxy * cxy * vy * sx2 + 2.0 * vx * vy * vy * sx2 +
           vy * vy * sx2 * sx2;
    cc.d = -vy * vy * vy * sx2 * sx2;
    const CubicRealRoots roots = real_roots(cc);
    branch = roots.branch;
    for (double u : roots.values) {
      if (u < sy2) continue;  // would mean sigma_int^2 < 0
      const double den = cxy * cxy - u * vx + sx2 * vy;
      if (den == 0.0) continue;
      const double A = cxy * (vy - 2.0 * u) / den;
      const double val = prof_objective(A, u, m, e.sigma_x);
      ++n_candidates;
      if (!have || val > best_val) {
        best_val = val;
        best.A = A;
        best.s2 = u;
        best.report.boundary = false;
        have = true;
      }
    }
  } else {
    // A = 0 by symmetry; the profile over s alone peaks at s^2 = var_y.
    const double u = std::max(vy, sy2);
    best_val = prof_objective(0.0, u, m, e.sigma_x);
    best.A = 0.0;
    best.s2 = u;
    best.report.boundary = (u == sy2);
    have = true;
  }

  // Boundary sigma_int = 0 competes with every interior candidate.
  for (double A : prof_slopes_at_fixed_s2(sy2, m, sx2)) {
    const double val = prof_objective(A, sy2, m, e.sigma_x);
    if (!have || val > best_val) {
      best_val = val;
      best.A = A;
      best.s2 = sy2;
      best.report.boundary = true;
      have = true;
    }
  }

  if (!have)
    throw std::runtime_error("prof_mle: no admissible stationary point");

  best.B = m.mean_y - best.A * m.mean_x;
  best.report.branch = branch;
  best.report.n_root_candidates = n_candidates;
  return best;
}

}  // namespace xyfit
