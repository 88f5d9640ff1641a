#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

namespace xyfit {

// Log-density and gradient in unconstrained space. grad may be null when only
// the value is needed.
using LogProbFn =
    std::function<double(const Eigen::VectorXd& z, Eigen::VectorXd* grad)>;

struct NutsOptions {
  int n_warmup = 700;
  int n_samples = 5000;
  double target_accept = 0.8;
  int max_depth = 10;
  uint64_t seed = 1;
};

struct NutsResult {
  Eigen::MatrixXd draws;  // n_samples x dim, post-warmup, unconstrained
  int n_divergent = 0;    // divergent transitions after warmup
  double step_size = 0.0;
  double mean_accept = 0.0;
  Eigen::VectorXd inv_mass;
};

// No-U-Turn sampler: multinomial sampling over dynamically doubled leapfrog
// trajectories, dual-averaging step-size adaptation toward target_accept, and
// windowed diagonal mass-matrix estimation during warmup.
NutsResult nuts_sample(const LogProbFn& logprob, const Eigen::VectorXd& init,
                       const NutsOptions& opts);

}  // namespace xyfit
