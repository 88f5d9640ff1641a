#pragma once

#include <optional>
#include <span>

#include "xyfit/dataset.hpp"
#include "xyfit/model.hpp"
#include "xyfit/types.hpp"

namespace xyfit {

// Diagonal-error log-likelihood kernels. All take the per-point linearised
// slope from model.deriv, so nonlinear pointwise models are handled by the
// same expressions with A, B replaced by the local slope and intercept.
//
// Conventions (s_y,i^2 = y_err_i^2 + sigma_int^2 throughout):
//   unif: sum_i -log sqrt(2 pi (slope_i^2 sx_i^2 + s_y,i^2)) - r_i^2 / (2 (..))
//   prof: sum_i -log sqrt(2 pi s_y,i^2) - r_i^2 / (2 (slope_i^2 sx_i^2 + s_y,i^2))
//   mnr:  normalised 2N-dimensional Gaussian in (x_obs, y_obs); additive
//         constant -N log(2 pi)
//   gmm:  per point, log-sum-exp over components of the mnr density
double loglike_unif_diag(const Dataset& d, const ModelFunction& model,
                         const Eigen::VectorXd& theta, double sigma_int);

double loglike_prof_diag(const Dataset& d, const ModelFunction& model,
                         const Eigen::VectorXd& theta, double sigma_int);

double loglike_mnr_diag(const Dataset& d, const ModelFunction& model,
                        const Eigen::VectorXd& theta, double sigma_int,
                        double mu, double w);

double loglike_gmm_diag(const Dataset& d, const ModelFunction& model,
                        const Eigen::VectorXd& theta, double sigma_int,
                        std::span<const GmmComponent> components);

// Log-density of the hierarchical hyperprior on the mixture parameters:
// Normal(mu_k; mu_star, u2_star) on each mean, scaled-inv-chi^2(nu=1,
// scale=w2_star) on each variance w_k^2 and on u2_star itself. Uniform
// factors on mu_star and w2_star contribute zero.
double hierarchical_hyperprior_logdensity(std::span<const GmmComponent> components,
                                          double mu_star, double u2_star,
                                          double w2_star);

// Scaled inverse chi^2 log-density, nu degrees of freedom, scale tau2.
double log_scaled_inv_chi2(double x, double nu, double tau2);

// Unified dispatch over the diagonal kernels using a ParamVector (components
// carry mu/w for mnr and the mixture for gmm). Includes the hierarchical
// hyperprior term when pv.hierarchy is set.
double loglike_diag(const LikelihoodSpec& spec, const Dataset& d,
                    const ModelFunction& model, const ParamVector& pv);

// Analytic gradient of loglike_diag with respect to (theta, sigma_int,
// [mu_k, w_k, weight_k], [hierarchy]). Requires model.has_param_derivatives().
// Returns the log-likelihood; gradient components are written to the matching
// fields of `grad` (weights treated as free coordinates; simplex handling is
// the caller's concern).
double loglike_diag_grad(const LikelihoodSpec& spec, const Dataset& d,
                         const ModelFunction& model, const ParamVector& pv,
                         ParamVector& grad);

// General-covariance path (full 2N x 2N Sigma, arbitrary pointwise or coupled
// model). For mnr, latent_prior carries the prior mean (length 1 = shared
// scalar, or length N) and the W matrix (size 1x1 = w^2 * Identity, or NxN).
struct LatentPrior {
  Eigen::VectorXd mu;
  Eigen::MatrixXd W;
};

double loglike_general(Method method, const Dataset& d,
                       const ModelFunction& model, const Eigen::VectorXd& theta,
                       double sigma_int,
                       const std::optional<LatentPrior>& latent_prior = {});

}  // namespace xyfit
