#pragma once

#include "xyfit/cubic.hpp"
#include "xyfit/dataset.hpp"

namespace xyfit {

// Empirical moments with 1/N normalisation.
struct SampleMoments {
  double mean_x, mean_y;
  double var_x, var_y;
  double cov_xy;
};

SampleMoments moments(const Dataset& d);
SampleMoments moments(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Shared per-point error sizes (sigma_x^(i) = sigma_x for all i, likewise y).
struct HomoscedasticErrors {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
};

// Closed-form maximum-likelihood point for the infinite-uniform
// marginalisation. s2 = sigma_y^2 + sigma_int^2 at the maximum and may come
// out negative; it is reported as-is.
struct UnifMle {
  double A, B, s2;
};
UnifMle unif_mle(const SampleMoments& m, const HomoscedasticErrors& e);

// Asymptotic (N -> infinity) biases of the unif estimators given the true
// slope and the latent-x mean/variance.
struct UnifBias {
  double dA, dB, ds2;
};
UnifBias unif_bias(double A_true, double mean_xt, double var_xt,
                   double sigma_x);

// Closed-form MLE for the Gaussian-hyperprior marginalisation. w2 is the
// latent-x width estimate var(x) - sigma_x^2; requires var_x > sigma_x^2.
struct MnrMle {
  double A, B, s2, mu, w2;
};
MnrMle mnr_mle(const SampleMoments& m, const HomoscedasticErrors& e);

// Profile-likelihood MLE. s2 candidates are the real roots of a cubic in
// s^2; roots below sigma_y^2 are unphysical (negative intrinsic variance) and
// are discarded, and the boundary s = sigma_y competes with the survivors.
struct ProfBranchReport {
  CubicBranch branch;     // which root formula produced the candidates
  bool boundary = false;  // true when s = sigma_y beat every interior root
  int n_root_candidates = 0;
};

struct ProfMle {
  double A, B, s2;
  ProfBranchReport report;
};
ProfMle prof_mle(const SampleMoments& m, const HomoscedasticErrors& e);

// Profile objective in (A, s^2) after maximising over x_t and B, divided by
// N: -log(s)/1 - (var_y + A^2 var_x - 2 A cov) / (2 (s^2 + A^2 sigma_x^2)).
double prof_objective(double A, double s2, const SampleMoments& m,
                      double sigma_x);

}  // namespace xyfit
