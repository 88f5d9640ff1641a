#include "xyfit/causality.hpp"

#include <cmath>

#include "xyfit/stats.hpp"

namespace xyfit {

std::string to_string(Direction d) {
  switch (d) {
    case Direction::x_independent: return "x-independent";
    case Direction::y_independent: return "y-independent";
    case Direction::inconclusive: return "inconclusive";
  }
  return "?";
}

Dataset swap_axes(const Dataset& d) {
  Dataset out;
  out.x_obs = d.y_obs;
  out.y_obs = d.x_obs;
  if (d.has_full_cov()) {
    const Eigen::Index n = d.n();
    out.full_cov.resize(2 * n, 2 * n);
    out.full_cov.topLeftCorner(n, n) = d.full_cov.bottomRightCorner(n, n);
    out.full_cov.bottomRightCorner(n, n) = d.full_cov.topLeftCorner(n, n);
    out.full_cov.topRightCorner(n, n) = d.full_cov.bottomLeftCorner(n, n);
    out.full_cov.bottomLeftCorner(n, n) = d.full_cov.topRightCorner(n, n);
  } else {
    out.x_err = d.y_err;
    out.y_err = d.x_err;
  }
  return out;
}

namespace {

DirectionFit fit_direction(const Dataset& d, const ModelFunction& model,
                           const LikelihoodSpec& spec) {
  DirectionFit f;
  try {
    const FitResult fit = fit_mle(spec, d, model);
    f.params = fit.params;
    f.loglike = fit.loglike;

    const Linearised lin = linearise(model, d.x_obs, fit.params.theta);
    const double si2 = fit.params.sigma_int * fit.params.sigma_int;
    f.residuals.resize(d.n());
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      const double sx2 = d.x_err.size() ? d.x_err[i] * d.x_err[i] : 0.0;
      const double sy2 = d.y_err.size() ? d.y_err[i] * d.y_err[i] : 0.0;
      const double denom =
          std::sqrt(sy2 + si2 + lin.slope[i] * lin.slope[i] * sx2);
      f.residuals[i] =
          (d.y_obs[i] - lin.f[i]) / (denom > 0 ? denom : 1.0);
    }
    f.independent = d.x_obs;
    f.pearson = pearson_correlation(f.residuals, f.independent);
    f.spearman = spearman_correlation(f.residuals, f.independent);
    f.ok = true;
  } catch (const std::exception& e) {
    f.ok = false;
    f.error = e.what();
  }
  return f;
}

}  // namespace

CausalityReport assess_causality(const Dataset& d,
                                 const ModelFunction& model_fwd,
                                 const ModelFunction& model_inv,
                                 const LikelihoodSpec& spec) {
  CausalityReport rep;
  rep.forward = fit_direction(d, model_fwd, spec);
  rep.inverse = fit_direction(swap_axes(d), model_inv, spec);

  if (!rep.forward.ok || !rep.inverse.ok) {
    rep.recommendation = Direction::inconclusive;
    return rep;
  }
  const double fwd =
      std::max(std::abs(rep.forward.pearson), std::abs(rep.forward.spearman));
  const double inv =
      std::max(std::abs(rep.inverse.pearson), std::abs(rep.inverse.spearman));
  rep.margin = std::abs(fwd - inv);
  if (rep.margin <= 0.05)
    rep.recommendation = Direction::inconclusive;
  else
    rep.recommendation =
        fwd < inv ? Direction::x_independent : Direction::y_independent;
  return rep;
}

}  // namespace xyfit
