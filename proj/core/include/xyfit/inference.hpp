#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xyfit/dataset.hpp"
#include "xyfit/likelihood.hpp"
#include "xyfit/model.hpp"
#include "xyfit/transforms.hpp"
#include "xyfit/types.hpp"

namespace xyfit {

struct SamplerConfig {
  int n_warmup = 700;
  int n_samples = 5000;
  int n_chains = 2;
  uint64_t seed = 0;
  std::map<std::string, std::pair<double, double>> prior_bounds;
  double target_accept = 0.8;
  int max_depth = 10;

  void validate() const;
};

struct FitResult {
  ParamVector params;
  double loglike = 0.0;
  bool converged = true;
  std::vector<std::string> warnings;
};

struct PosteriorResult {
  Eigen::MatrixXd samples;  // (n_chains * n_samples) x n_params, constrained
  std::vector<std::string> param_names;
  int n_chains = 0;
  int n_samples_per_chain = 0;

  ParamVector mle;
  double log_like_at_mle = 0.0;
  Eigen::VectorXd gelman_rubin;
  Eigen::VectorXd ess;
  double bic = 0.0;
  int n_divergent = 0;
  std::vector<std::string> warnings;

  int index_of(const std::string& name) const;
  Eigen::VectorXd column(const std::string& name) const;
};

// Number of free parameters entering the BIC for this spec/model.
int param_count(const LikelihoodSpec& spec, const ModelFunction& model);

// Derivative-free maximum likelihood (maximum a posteriori when the
// hierarchical hyperprior is active). Positivity handled by log
// reparametrisation; a second search with sigma_int pinned at exactly 0
// competes with the free search, so boundary maxima report sigma_int = 0.
FitResult fit_mle(const LikelihoodSpec& spec, const Dataset& d,
                  const ModelFunction& model,
                  const std::optional<ParamVector>& init = {},
                  const SamplerConfig& cfg = {});

// Data-driven starting point (moment-based slope/intercept, unif-style
// scatter estimate, latent hyperprior from the x_obs moments).
ParamVector default_init(const LikelihoodSpec& spec, const Dataset& d,
                         const ModelFunction& model);

PosteriorResult sample_posterior(const LikelihoodSpec& spec, const Dataset& d,
                                 const ModelFunction& model,
                                 const SamplerConfig& cfg);

// Mode and scale of a maximum-likelihood normal fit truncated at 0.
std::pair<double, double> sigma_int_summary(const Eigen::VectorXd& samples);

double bic(double log_like_hat, int k, int n);

struct NgSelection {
  struct Row {
    int n_gauss = 0;
    double bic = 0.0;
    double loglike = 0.0;
    bool ok = false;
    std::string error;
  };
  int best = 0;
  std::vector<Row> table;
};

NgSelection select_ngauss(const Dataset& d, const ModelFunction& model,
                          int max_ng = 10,
                          HyperPrior hyperprior = HyperPrior::uniform_ordered,
                          const SamplerConfig& cfg = {});

std::vector<std::string> emit_warnings(const PosteriorResult& result,
                                       const Dataset& d,
                                       const ModelFunction& model,
                                       const ParamVector& theta_hat,
                                       const SamplerConfig& cfg);

}  // namespace xyfit
