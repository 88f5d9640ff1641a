#pragma once

#include <Eigen/Dense>
#include <vector>

namespace xyfit {

double mean(const Eigen::VectorXd& v);
double variance(const Eigen::VectorXd& v);  // 1/(n-1)
double stddev(const Eigen::VectorXd& v);
double percentile(Eigen::VectorXd v, double p);  // p in [0,100], linear interp

// Split-chain potential scale reduction over one parameter. chains holds one
// draw vector per chain, equal lengths.
double gelman_rubin(const std::vector<Eigen::VectorXd>& chains);

// Effective sample size across chains, autocorrelation summed with Geyer's
// initial-monotone-positive truncation.
double effective_sample_size(const std::vector<Eigen::VectorXd>& chains);

// ML fit of a normal truncated at zero to non-negative samples. Returns
// {mode, scale}: mode is the untruncated location clamped at 0, scale the
// untruncated sigma.
struct TruncatedNormalFit {
  double mode;
  double scale;
};
TruncatedNormalFit fit_truncated_normal(const Eigen::VectorXd& samples);

double log_normal_cdf(double t);  // log Phi(t), stable in the left tail

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double spearman_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace xyfit
