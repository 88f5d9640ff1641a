#include "xyfit/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace xyfit {

namespace {

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> fx;
  std::vector<int> order;  // indices sorted by fx ascending

  void sort() {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fx[a] < fx[b]; });
  }
  int best() const { return order.front(); }
  int worst() const { return order.back(); }
};

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& start, const Eigen::VectorXd& step,
    const NelderMeadOptions& opts) {
  const int n = static_cast<int>(start.size());
  if (n < 1) throw std::invalid_argument("nelder_mead: empty start point");
  if (step.size() != n)
    throw std::invalid_argument("nelder_mead: step size mismatch");

  const int max_evals = opts.max_evals_per_dim * n;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& p) {
    ++evals;
    const double v = f(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };

  NelderMeadResult res;
  res.x = start;
  res.f = eval(start);
  if (res.f == std::numeric_limits<double>::max())
    throw std::runtime_error("nelder_mead: non-finite objective at start");

  for (int round = 0; round <= opts.restarts; ++round) {
    Simplex s;
    s.x.assign(n + 1, res.x);
    s.fx.assign(n + 1, 0.0);
    s.order.assign(n + 1, 0);
    s.fx[0] = res.f;
    for (int i = 0; i < n; ++i) {
      double h = step[i];
      if (h == 0.0) h = 1e-3;
      if (round > 0) h *= 0.1;  // polish with a tighter simplex
      s.x[i + 1][i] += h;
      s.fx[i + 1] = eval(s.x[i + 1]);
    }
    s.sort();

    bool converged = false;
    while (evals < max_evals) {
      if (s.fx[s.worst()] - s.fx[s.best()] < opts.f_tol) {
        converged = true;
        break;
      }
      // centroid of all but the worst
      Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
      for (int k = 0; k <= n; ++k)
        if (k != s.worst()) c += s.x[k];
      c /= n;

      const Eigen::VectorXd& xw = s.x[s.worst()];
      const Eigen::VectorXd xr = c + (c - xw);
      const double fr = eval(xr);

      if (fr < s.fx[s.best()]) {
        const Eigen::VectorXd xe = c + 2.0 * (c - xw);
        const double fe = eval(xe);
        if (fe < fr) {
          s.x[s.worst()] = xe;
          s.fx[s.worst()] = fe;
        } else {
          s.x[s.worst()] = xr;
          s.fx[s.worst()] = fr;
        }
      } else if (fr < s.fx[s.order[n - 1]]) {
        s.x[s.worst()] = xr;
        s.fx[s.worst()] = fr;
      } else {
        // contract toward the better of (worst, reflected)
        const bool outside = fr < s.fx[s.worst()];
        const Eigen::VectorXd xc = outside ? Eigen::VectorXd(c + 0.5 * (xr - c))
                                           : Eigen::VectorXd(c - 0.5 * (c - xw));
        const double fc = eval(xc);
        if (fc < std::min(fr, s.fx[s.worst()])) {
          s.x[s.worst()] = xc;
          s.fx[s.worst()] = fc;
        } else {
          // shrink toward the best vertex
          const Eigen::VectorXd xb = s.x[s.best()];
          for (int k = 0; k <= n; ++k) {
            if (k == s.best()) continue;
            s.x[k] = xb + 0.5 * (s.x[k] - xb);
            s.fx[k] = eval(s.x[k]);
          }
        }
      }
      s.sort();
    }

    if (s.fx[s.best()] < res.f) {
      res.f = s.fx[s.best()];
      res.x = s.x[s.best()];
    }
    res.converged = converged;
    if (evals >= max_evals) break;
  }
  res.evals = evals;
  return res;
}

}  // namespace xyfit
