#include "xyfit/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xyfit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

void require_diag(const Dataset& d, const char* who) {
  if (d.has_full_cov())
    throw std::invalid_argument(std::string(who) +
                                ": diagonal kernel needs per-point errors");
}

// Per-point pieces of the mnr log-density and its partials. Everything is a
// function of (f, slope) at the observed x plus the hyperprior (mu, w).
struct MnrPoint {
  double value;
  double d_f, d_slope, d_s2, d_mu, d_w2;
};

inline MnrPoint mnr_point(double x, double y, double sx2, double s2, double f,
                          double slope, double mu, double w2,
                          bool want_grad) {
  const double T = slope * slope * w2 * sx2 + s2 * (w2 + sx2);
  if (T <= 0.0)
    throw std::domain_error("mnr kernel: non-positive per-point determinant");
  const double r1 = f - y;
  const double r3 = x - mu;
  const double r2 = r1 - slope * r3;  // f + slope*(mu - x) - y
  const double num = w2 * r1 * r1 + sx2 * r2 * r2 + s2 * r3 * r3;

  MnrPoint p{};
  p.value = -kLog2Pi - 0.5 * std::log(T) - 0.5 * num / T;
  if (!want_grad) return p;

  const double dT = 0.5 * (num / (T * T) - 1.0 / T);
  p.d_f = -(w2 * r1 + sx2 * r2) / T;
  p.d_slope = sx2 * r2 * r3 / T + dT * (2.0 * slope * w2 * sx2);
  p.d_s2 = -0.5 * r3 * r3 / T + dT * (w2 + sx2);
  p.d_mu = -(sx2 * r2 * slope - s2 * r3) / T;
  p.d_w2 = -0.5 * r1 * r1 / T + dT * (slope * slope * sx2 + s2);
  return p;
}

void check_components(std::span<const GmmComponent> comps, const char* who) {
  if (comps.empty())
    throw std::invalid_argument(std::string(who) + ": no mixture components");
  double wsum = 0.0;
  for (size_t k = 0; k < comps.size(); ++k) {
    if (!(comps[k].w > 0.0))
      throw std::invalid_argument(std::string(who) +
                                  ": component width must be positive");
    if (k > 0 && comps[k].mu < comps[k - 1].mu)
      throw std::invalid_argument(std::string(who) +
                                  ": component means must be non-decreasing");
    wsum += comps[k].weight;
  }
  if (std::abs(wsum - 1.0) > 1e-8)
    throw std::invalid_argument(std::string(who) +
                                ": component weights must sum to 1");
}

}  // namespace

double loglike_unif_diag(const Dataset& d, const ModelFunction& model,
                         const Eigen::VectorXd& theta, double sigma_int) {
  require_diag(d, "loglike_unif_diag");
  const Linearised lin = linearise(model, d.x_obs, theta);
  const double si2 = sigma_int * sigma_int;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double sx2 = d.x_err[i] * d.x_err[i];
    const double s2 = d.y_err[i] * d.y_err[i] + si2;
    const double V = lin.slope[i] * lin.slope[i] * sx2 + s2;
    if (V <= 0.0)
      throw std::domain_error("loglike_unif_diag: zero total variance");
    const double r = lin.f[i] - d.y_obs[i];
    ll += -0.5 * (kLog2Pi + std::log(V)) - 0.5 * r * r / V;
  }
  return ll;
}

double loglike_prof_diag(const Dataset& d, const ModelFunction& model,
                         const Eigen::VectorXd& theta, double sigma_int) {
  require_diag(d, "loglike_prof_diag");
  const Linearised lin = linearise(model, d.x_obs, theta);
  const double si2 = sigma_int * sigma_int;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double sx2 = d.x_err[i] * d.x_err[i];
    const double s2 = d.y_err[i] * d.y_err[i] + si2;
    if (s2 <= 0.0)
      throw std::domain_error("loglike_prof_diag: non-positive s_y^2");
    const double V = lin.slope[i] * lin.slope[i] * sx2 + s2;
    const double r = lin.f[i] - d.y_obs[i];
    ll += -0.5 * (kLog2Pi + std::log(s2)) - 0.5 * r * r / V;
  }
  return ll;
}

double loglike_mnr_diag(const Dataset& d, const ModelFunction& model,
                        const Eigen::VectorXd& theta, double sigma_int,
                        double mu, double w) {
  require_diag(d, "loglike_mnr_diag");
  if (!(w > 0.0))
    throw std::invalid_argument("loglike_mnr_diag: width must be positive");
  const Linearised lin = linearise(model, d.x_obs, theta);
  const double si2 = sigma_int * sigma_int;
  const double w2 = w * w;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double sx2 = d.x_err[i] * d.x_err[i];
    const double s2 = d.y_err[i] * d.y_err[i] + si2;
    ll += mnr_point(d.x_obs[i], d.y_obs[i], sx2, s2, lin.f[i], lin.slope[i],
                    mu, w2, false)
              .value;
  }
  return ll;
}

double loglike_gmm_diag(const Dataset& d, const ModelFunction& model,
                        const Eigen::VectorXd& theta, double sigma_int,
                        std::span<const GmmComponent> components) {
  require_diag(d, "loglike_gmm_diag");
  check_components(components, "loglike_gmm_diag");
  const Linearised lin = linearise(model, d.x_obs, theta);
  const double si2 = sigma_int * sigma_int;
  const size_t K = components.size();

  std::vector<double> terms(K);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double sx2 = d.x_err[i] * d.x_err[i];
    const double s2 = d.y_err[i] * d.y_err[i] + si2;
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < K; ++k) {
      const auto& c = components[k];
      terms[k] = std::log(c.weight) +
                 mnr_point(d.x_obs[i], d.y_obs[i], sx2, s2, lin.f[i],
                           lin.slope[i], c.mu, c.w * c.w, false)
                     .value;
      mx = std::max(mx, terms[k]);
    }
    double acc = 0.0;
    for (size_t k = 0; k < K; ++k) acc += std::exp(terms[k] - mx);
    ll += mx + std::log(acc);
  }
  return ll;
}

double log_scaled_inv_chi2(double x, double nu, double tau2) {
  if (!(x > 0.0) || !(tau2 > 0.0) || !(nu > 0.0))
    throw std::invalid_argument("log_scaled_inv_chi2: non-positive argument");
  const double h = 0.5 * nu;
  return h * std::log(tau2 * h) - std::lgamma(h) - (1.0 + h) * std::log(x) -
         nu * tau2 / (2.0 * x);
}

double hierarchical_hyperprior_logdensity(std::span<const GmmComponent> components,
                                          double mu_star, double u2_star,
                                          double w2_star) {
  if (!(u2_star > 0.0) || !(w2_star > 0.0))
    throw std::invalid_argument(
        "hierarchical hyperprior: scales must be positive");
  double lp = 0.0;
  for (const auto& c : components) {
    const double z = c.mu - mu_star;
    lp += -0.5 * (kLog2Pi + std::log(u2_star)) - 0.5 * z * z / u2_star;
    lp += log_scaled_inv_chi2(c.w * c.w, 1.0, w2_star);
  }
  lp += log_scaled_inv_chi2(u2_star, 1.0, w2_star);
  return lp;
}

double loglike_diag(const LikelihoodSpec& spec, const Dataset& d,
                    const ModelFunction& model, const ParamVector& pv) {
  switch (spec.method) {
    case Method::unif:
      return loglike_unif_diag(d, model, pv.theta, pv.sigma_int);
    case Method::prof:
      return loglike_prof_diag(d, model, pv.theta, pv.sigma_int);
    case Method::mnr:
      return loglike_mnr_diag(d, model, pv.theta, pv.sigma_int,
                              pv.components.at(0).mu, pv.components.at(0).w);
    case Method::gmm:
      return loglike_gmm_diag(d, model, pv.theta, pv.sigma_int, pv.components);
  }
  throw std::logic_error("loglike_diag: unknown method");
}

double loglike_diag_grad(const LikelihoodSpec& spec, const Dataset& d,
                         const ModelFunction& model, const ParamVector& pv,
                         ParamVector& grad) {
  require_diag(d, "loglike_diag_grad");
  if (!model.has_param_derivatives())
    throw std::invalid_argument(
        "loglike_diag_grad: model lacks parameter derivatives");

  const Eigen::Index n = d.n();
  const Linearised lin = linearise(model, d.x_obs, pv.theta);
  const Eigen::MatrixXd Jf = model.param_jac(d.x_obs, pv.theta);
  const Eigen::MatrixXd Js = model.slope_param_jac(d.x_obs, pv.theta);

  grad.theta = Eigen::VectorXd::Zero(pv.theta.size());
  grad.sigma_int = 0.0;
  grad.components.assign(pv.components.size(), GmmComponent{0.0, 0.0, 0.0});
  grad.hierarchy.reset();

  const double si2 = pv.sigma_int * pv.sigma_int;
  const size_t K = pv.components.size();
  double ll = 0.0;

  std::vector<MnrPoint> pts(K);
  std::vector<double> terms(K);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double sx2 = d.x_err[i] * d.x_err[i];
    const double s2 = d.y_err[i] * d.y_err[i] + si2;
    const double sl = lin.slope[i];
    double d_f = 0.0, d_slope = 0.0, d_s2 = 0.0;

    switch (spec.method) {
      case Method::unif: {
        const double V = sl * sl * sx2 + s2;
        if (V <= 0.0) throw std::domain_error("zero total variance");
        const double r = lin.f[i] - d.y_obs[i];
        ll += -0.5 * (kLog2Pi + std::log(V)) - 0.5 * r * r / V;
        const double dV = 0.5 * (r * r / (V * V) - 1.0 / V);
        d_f = -r / V;
        d_slope = dV * 2.0 * sl * sx2;
        d_s2 = dV;
        break;
      }
      case Method::prof: {
        const double V = sl * sl * sx2 + s2;
        if (s2 <= 0.0) throw std::domain_error("non-positive s_y^2");
        const double r = lin.f[i] - d.y_obs[i];
        ll += -0.5 * (kLog2Pi + std::log(s2)) - 0.5 * r * r / V;
        d_f = -r / V;
        d_slope = r * r * sl * sx2 / (V * V);
        d_s2 = -0.5 / s2 + 0.5 * r * r / (V * V);
        break;
      }
      case Method::mnr: {
        const auto& c = pv.components[0];
        const MnrPoint p = mnr_point(d.x_obs[i], d.y_obs[i], sx2, s2,
                                     lin.f[i], sl, c.mu, c.w * c.w, true);
        ll += p.value;
        d_f = p.d_f;
        d_slope = p.d_slope;
        d_s2 = p.d_s2;
        grad.components[0].mu += p.d_mu;
        grad.components[0].w += p.d_w2 * 2.0 * c.w;
        break;
      }
      case Method::gmm: {
        double mx = -std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < K; ++k) {
          const auto& c = pv.components[k];
          pts[k] = mnr_point(d.x_obs[i], d.y_obs[i], sx2, s2, lin.f[i], sl,
                             c.mu, c.w * c.w, true);
          terms[k] = std::log(c.weight) + pts[k].value;
          mx = std::max(mx, terms[k]);
        }
        double acc = 0.0;
        for (size_t k = 0; k < K; ++k) acc += std::exp(terms[k] - mx);
        const double lse = mx + std::log(acc);
        ll += lse;
        for (size_t k = 0; k < K; ++k) {
          const double resp = std::exp(terms[k] - lse);
          d_f += resp * pts[k].d_f;
          d_slope += resp * pts[k].d_slope;
          d_s2 += resp * pts[k].d_s2;
          grad.components[k].mu += resp * pts[k].d_mu;
          grad.components[k].w += resp * pts[k].d_w2 * 2.0 * pv.components[k].w;
          grad.components[k].weight +=
              std::exp(pts[k].value - lse);  // resp / weight
        }
        break;
      }
    }

    grad.theta.noalias() += d_f * Jf.row(i).transpose();
    grad.theta.noalias() += d_slope * Js.row(i).transpose();
    grad.sigma_int += d_s2;
  }
  grad.sigma_int *= 2.0 * pv.sigma_int;
  return ll;
}

}  // namespace xyfit
