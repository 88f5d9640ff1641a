#pragma once

#include <Eigen/Dense>
#include <functional>

namespace xyfit {

struct NelderMeadOptions {
  double f_tol = 1e-10;        // converged when max-min objective over simplex < f_tol
  int max_evals_per_dim = 500; // evaluation budget is max_evals_per_dim * n
  int restarts = 1;            // re-seed the simplex at the incumbent and rerun
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

// Downhill-simplex minimisation (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). step sets the initial simplex edge per coordinate; zero
// entries fall back to a small absolute step.
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& start, const Eigen::VectorXd& step,
    const NelderMeadOptions& opts = {});

}  // namespace xyfit
