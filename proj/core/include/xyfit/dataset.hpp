#pragma once

#include <Eigen/Dense>

namespace xyfit {

// Observed points with Gaussian uncertainties on both axes. Exactly one of
// {per-point errors, full 2N x 2N covariance} is populated. The full matrix is
// partitioned as [[xx, xy], [yx, yy]] with x indices first.
struct Dataset {
  Eigen::VectorXd x_obs;
  Eigen::VectorXd y_obs;
  Eigen::VectorXd x_err;   // empty when full_cov is used
  Eigen::VectorXd y_err;   // empty when full_cov is used
  Eigen::MatrixXd full_cov;

  Eigen::Index n() const { return x_obs.size(); }
  bool has_full_cov() const { return full_cov.size() > 0; }
};

// Checks shapes, positivity and (for a full matrix) symmetry and positive
// semi-definiteness. Throws std::invalid_argument with a description of the
// first violation; the PSD check reports the offending eigenvalue.
Dataset validate_dataset(Dataset d);

// Covariance blocks with the intrinsic scatter folded in: yy has sigma_int^2
// added to each diagonal element; xx and xy are passed through untouched.
struct CovarianceBlocks {
  Eigen::MatrixXd xx;
  Eigen::MatrixXd xy;   // yx is xy transposed
  Eigen::MatrixXd yy;
};

CovarianceBlocks assemble_covariance(const Dataset& d, double sigma_int);

}  // namespace xyfit
