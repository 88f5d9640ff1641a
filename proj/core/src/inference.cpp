#include "xyfit/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "xyfit/analytic.hpp"
#include "xyfit/nelder_mead.hpp"
#include "xyfit/nuts.hpp"
#include "xyfit/stats.hpp"

namespace xyfit {

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Objective (to maximise) in constrained space: likelihood plus the
// hierarchical hyperprior when active. The transform Jacobian is *not*
// included here; MLE/MAP live in constrained space.
double objective(const LikelihoodSpec& spec, const Dataset& d,
                 const ModelFunction& model, const ParamVector& pv) {
  double v;
  if (d.has_full_cov()) {
    std::optional<LatentPrior> lp;
    if (spec.method == Method::mnr) {
      LatentPrior p;
      p.mu = Eigen::VectorXd::Constant(1, pv.components.at(0).mu);
      p.W = Eigen::MatrixXd::Constant(
          1, 1, pv.components.at(0).w * pv.components.at(0).w);
      lp = p;
    }
    v = loglike_general(spec.method, d, model, pv.theta, pv.sigma_int, lp);
  } else {
    v = loglike_diag(spec, d, model, pv);
  }
  if (pv.hierarchy && spec.method == Method::gmm &&
      spec.hyperprior == HyperPrior::hierarchical) {
    v += hierarchical_hyperprior_logdensity(pv.components, pv.hierarchy->mu_star,
                                            pv.hierarchy->u2_star,
                                            pv.hierarchy->w2_star);
  }
  return v;
}

NelderMeadResult run_simplex(const LikelihoodSpec& spec, const Dataset& d,
                             const ModelFunction& model,
                             const ParameterSpace& ps, const ParamVector& init) {
  const Eigen::VectorXd z0 = ps.to_unconstrained(ps.pack(init));
  auto neg = [&](const Eigen::VectorXd& z) {
    return -objective(spec, d, model, ps.unpack(ps.to_constrained(z)));
  };
  Eigen::VectorXd step(z0.size());
  for (Eigen::Index i = 0; i < z0.size(); ++i)
    step[i] = std::max(0.05, 0.1 * std::abs(z0[i]));
  NelderMeadOptions opts;
  opts.f_tol = 1e-10;
  opts.max_evals_per_dim = 500;
  opts.restarts = 1;
  return nelder_mead(neg, z0, step, opts);
}

}  // namespace

void SamplerConfig::validate() const {
  if (n_warmup < 1 || n_samples < 1 || n_chains < 1)
    throw std::invalid_argument("sampler config: counts must be positive");
  for (const auto& [name, b] : prior_bounds)
    if (!(b.first < b.second))
      throw std::invalid_argument("sampler config: degenerate bounds for '" +
                                  name + "'");
}

int PosteriorResult::index_of(const std::string& name) const {
  for (size_t i = 0; i < param_names.size(); ++i)
    if (param_names[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("no parameter named '" + name + "'");
}

Eigen::VectorXd PosteriorResult::column(const std::string& name) const {
  return samples.col(index_of(name));
}

int param_count(const LikelihoodSpec& spec, const ModelFunction& model) {
  int k = model.n_params + (spec.include_intrinsic_scatter ? 1 : 0);
  switch (spec.method) {
    case Method::unif:
    case Method::prof:
      break;
    case Method::mnr:
      k += 2;
      break;
    case Method::gmm:
      k += 3 * spec.n_gauss - 1;
      if (spec.hyperprior == HyperPrior::hierarchical) k += 3;
      break;
  }
  return k;
}

ParamVector default_init(const LikelihoodSpec& spec, const Dataset& d,
                         const ModelFunction& model) {
  const SampleMoments m = moments(d);
  const double sd_x = std::sqrt(std::max(m.var_x, 1e-12));
  const double sd_y = std::sqrt(std::max(m.var_y, 1e-12));

  ParamVector pv;
  pv.theta = Eigen::VectorXd::Zero(model.n_params);
  if (model.n_params >= 1)
    pv.theta[0] = m.var_x > 0 ? m.cov_xy / m.var_x : 0.0;
  if (model.n_params >= 2) pv.theta[1] = m.mean_y - pv.theta[0] * m.mean_x;

  double mean_sy2 = 0.0, mean_sx = 0.0;
  if (!d.has_full_cov()) {
    mean_sy2 = d.y_err.array().square().mean();
    mean_sx = d.x_err.mean();
  } else {
    const Eigen::Index n = d.n();
    mean_sy2 = d.full_cov.bottomRightCorner(n, n).diagonal().mean();
    mean_sx = std::sqrt(
        std::max(d.full_cov.topLeftCorner(n, n).diagonal().mean(), 0.0));
  }
  if (spec.include_intrinsic_scatter) {
    double s2 = m.var_y;
    try {
      s2 = unif_mle(m, {mean_sx, std::sqrt(mean_sy2)}).s2;
    } catch (const std::exception&) {
    }
    pv.sigma_int = std::sqrt(std::max(s2 - mean_sy2, 1e-4 * sd_y * sd_y));
  }

  if (spec.method == Method::mnr) {
    pv.components = {GmmComponent{1.0, m.mean_x, std::max(sd_x, 1e-6)}};
  } else if (spec.method == Method::gmm) {
    const int K = spec.n_gauss;
    pv.components.clear();
    Eigen::VectorXd xs = d.x_obs;
    std::sort(xs.data(), xs.data() + xs.size());
    for (int k = 0; k < K; ++k) {
      GmmComponent g;
      g.weight = 1.0 / K;
      const double q = (k + 0.5) / K;
      g.mu = xs[static_cast<Eigen::Index>(q * (xs.size() - 1))];
      g.w = std::max(sd_x / K, 1e-6);
      pv.components.push_back(g);
    }
    std::sort(pv.components.begin(), pv.components.end(),
              [](const GmmComponent& a, const GmmComponent& b) {
                return a.mu < b.mu;
              });
    if (spec.hyperprior == HyperPrior::hierarchical) {
      Hierarchy h;
      h.mu_star = m.mean_x;
      h.u2_star = std::max(m.var_x, 1e-6);
      h.w2_star = std::max(m.var_x, 1e-6);
      pv.hierarchy = h;
    }
  }
  return pv;
}

FitResult fit_mle(const LikelihoodSpec& spec, const Dataset& d,
                  const ModelFunction& model,
                  const std::optional<ParamVector>& init,
                  const SamplerConfig& cfg) {
  spec.validate();
  cfg.validate();
  ParamVector start = init ? *init : default_init(spec, d, model);
  // keep log-transformed coordinates away from -inf
  const double y_scale = std::sqrt(std::max(moments(d).var_y, 1e-12));
  if (spec.include_intrinsic_scatter && start.sigma_int < 1e-8 * y_scale)
    start.sigma_int = 1e-2 * y_scale;
  for (auto& c : start.components) c.w = std::max(c.w, 1e-8);

  if (!std::isfinite(objective(spec, d, model, start)))
    throw std::runtime_error("fit_mle: non-finite likelihood at init");

  FitResult out;
  const ParameterSpace ps = ParameterSpace::create(spec, model, cfg.prior_bounds);
  const NelderMeadResult free_run = run_simplex(spec, d, model, ps, start);

  double best = -free_run.f;
  out.params = ps.unpack(ps.to_constrained(free_run.x));
  out.converged = free_run.converged;

  if (spec.include_intrinsic_scatter) {
    // boundary competitor: sigma_int pinned at exactly 0
    LikelihoodSpec s0 = spec;
    s0.include_intrinsic_scatter = false;
    ParamVector start0 = start;
    start0.sigma_int = 0.0;
    const ParameterSpace ps0 =
        ParameterSpace::create(s0, model, cfg.prior_bounds);
    const NelderMeadResult pinned = run_simplex(s0, d, model, ps0, start0);
    // prefer the boundary whenever the free search's advantage is below the
    // simplex convergence resolution, so boundary maxima report exactly 0
    const double snap_tol = 1e-8 + 1e-12 * std::abs(best);
    if (-pinned.f >= best - snap_tol) {
      best = -pinned.f;
      out.params = ps0.unpack(ps0.to_constrained(pinned.x));
      out.params.sigma_int = 0.0;
      out.converged = pinned.converged;
    }
  }

  out.loglike = best;
  if (!out.converged)
    out.warnings.push_back("simplex search hit its evaluation budget");
  return out;
}

namespace {

struct ChainOutput {
  Eigen::MatrixXd constrained;  // n_samples x constrained_dim
  int n_divergent = 0;
  double mean_accept = 0.0;
};

ChainOutput run_chain(const LikelihoodSpec& spec, const Dataset& d,
                      const ModelFunction& model, const ParameterSpace& ps,
                      const Eigen::VectorXd& z_init, const SamplerConfig& cfg,
                      int chain_index) {
  const bool analytic =
      !d.has_full_cov() && model.has_param_derivatives();

  LogProbFn lp = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    double logjac = 0.0;
    const Eigen::VectorXd c = ps.to_constrained(z, &logjac);
    const ParamVector pv = ps.unpack(c);
    double value;
    if (!grad) {
      try {
        value = objective(spec, d, model, pv);
      } catch (const std::domain_error&) {
        return -std::numeric_limits<double>::infinity();
      }
      return value + logjac;
    }
    if (analytic) {
      ParamVector g;
      try {
        value = loglike_diag_grad(spec, d, model, pv, g);
      } catch (const std::domain_error&) {
        return -std::numeric_limits<double>::infinity();
      }
      if (pv.hierarchy && spec.hyperprior == HyperPrior::hierarchical) {
        // hyperprior contributions for the mixture and hierarchy parameters
        const auto& h = *pv.hierarchy;
        value += hierarchical_hyperprior_logdensity(pv.components, h.mu_star,
                                                    h.u2_star, h.w2_star);
        Hierarchy hg{0.0, 0.0, 0.0};
        for (size_t k = 0; k < pv.components.size(); ++k) {
          const double dmu = pv.components[k].mu - h.mu_star;
          g.components[k].mu += -dmu / h.u2_star;
          hg.mu_star += dmu / h.u2_star;
          hg.u2_star += -0.5 / h.u2_star + 0.5 * dmu * dmu / (h.u2_star * h.u2_star);
          const double wk2 = pv.components[k].w * pv.components[k].w;
          // d/dx log sinvchi2(x; 1, tau2) = -1.5/x + tau2/(2 x^2)
          g.components[k].w +=
              (-1.5 / wk2 + h.w2_star / (2.0 * wk2 * wk2)) * 2.0 * pv.components[k].w;
          hg.w2_star += 0.5 / h.w2_star - 0.5 / wk2;
        }
        hg.u2_star += -1.5 / h.u2_star + h.w2_star / (2.0 * h.u2_star * h.u2_star);
        hg.w2_star += 0.5 / h.w2_star - 0.5 / h.u2_star;
        g.hierarchy = hg;
      }
      const Eigen::VectorXd grad_c = ps.pack(g);
      *grad = ps.grad_to_unconstrained(z, grad_c);
      return value + logjac;
    }
    // finite differences in the unconstrained space
    try {
      value = objective(spec, d, model, pv);
    } catch (const std::domain_error&) {
      return -std::numeric_limits<double>::infinity();
    }
    grad->resize(z.size());
    Eigen::VectorXd zp = z;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double h = 1e-6 * (1.0 + std::abs(z[i]));
      zp[i] = z[i] + h;
      double lj_p = 0.0;
      const double fp =
          objective(spec, d, model, ps.unpack(ps.to_constrained(zp, &lj_p))) +
          lj_p;
      zp[i] = z[i] - h;
      double lj_m = 0.0;
      const double fm =
          objective(spec, d, model, ps.unpack(ps.to_constrained(zp, &lj_m))) +
          lj_m;
      zp[i] = z[i];
      (*grad)[i] = (fp - fm) / (2.0 * h);
    }
    return value + logjac;
  };

  NutsOptions nopts;
  nopts.n_warmup = cfg.n_warmup;
  nopts.n_samples = cfg.n_samples;
  nopts.target_accept = cfg.target_accept;
  nopts.max_depth = cfg.max_depth;
  nopts.seed = mix_seed(cfg.seed, 1000 + chain_index);

  const NutsResult nr = nuts_sample(lp, z_init, nopts);

  ChainOutput out;
  out.n_divergent = nr.n_divergent;
  out.mean_accept = nr.mean_accept;
  out.constrained.resize(cfg.n_samples, ps.constrained_dim());
  for (int i = 0; i < cfg.n_samples; ++i)
    out.constrained.row(i) = ps.to_constrained(nr.draws.row(i).transpose());
  return out;
}

}  // namespace

PosteriorResult sample_posterior(const LikelihoodSpec& spec, const Dataset& d,
                                 const ModelFunction& model,
                                 const SamplerConfig& cfg) {
  spec.validate();
  cfg.validate();
  const ParameterSpace ps = ParameterSpace::create(spec, model, cfg.prior_bounds);

  PosteriorResult res;
  res.param_names = ps.names();
  res.n_chains = cfg.n_chains;
  res.n_samples_per_chain = cfg.n_samples;

  const FitResult fit = fit_mle(spec, d, model, {}, cfg);
  res.mle = fit.params;
  res.log_like_at_mle = fit.loglike;
  res.bic = bic(fit.loglike, param_count(spec, model), static_cast<int>(d.n()));

  // chains start from a jittered MLE point
  ParamVector mle_start = fit.params;
  if (spec.include_intrinsic_scatter && mle_start.sigma_int <= 0.0) {
    const double sd_y = std::sqrt(std::max(moments(d).var_y, 1e-10));
    mle_start.sigma_int = 1e-2 * sd_y;
  }
  const Eigen::VectorXd z_mle = ps.to_unconstrained(ps.pack(mle_start));

  std::vector<ChainOutput> chains(cfg.n_chains);
  std::vector<std::thread> workers;
  std::vector<std::string> chain_errors(cfg.n_chains);
  for (int c = 0; c < cfg.n_chains; ++c) {
    workers.emplace_back([&, c]() {
      try {
        std::mt19937_64 jrng(mix_seed(cfg.seed, 77 + c));
        std::normal_distribution<double> nd(0.0, 0.1);
        Eigen::VectorXd z = z_mle;
        if (c > 0)
          for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += nd(jrng);
        chains[c] = run_chain(spec, d, model, ps, z, cfg, c);
      } catch (const std::exception& e) {
        chain_errors[c] = e.what();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (int c = 0; c < cfg.n_chains; ++c)
    if (!chain_errors[c].empty())
      throw std::runtime_error("sample_posterior: chain " + std::to_string(c) +
                               " failed: " + chain_errors[c]);

  const int P = ps.constrained_dim();
  res.samples.resize(cfg.n_chains * cfg.n_samples, P);
  for (int c = 0; c < cfg.n_chains; ++c) {
    res.samples.middleRows(c * cfg.n_samples, cfg.n_samples) =
        chains[c].constrained;
    res.n_divergent += chains[c].n_divergent;
  }

  res.gelman_rubin.resize(P);
  res.ess.resize(P);
  for (int p = 0; p < P; ++p) {
    std::vector<Eigen::VectorXd> per_chain;
    for (int c = 0; c < cfg.n_chains; ++c)
      per_chain.push_back(chains[c].constrained.col(p));
    // the split statistic can dip below one by sampling noise; floor it
    res.gelman_rubin[p] = std::max(gelman_rubin(per_chain), 1.0 - 1e-6);
    res.ess[p] = effective_sample_size(per_chain);
  }

  res.warnings = emit_warnings(res, d, model, res.mle, cfg);
  return res;
}

std::pair<double, double> sigma_int_summary(const Eigen::VectorXd& samples) {
  const TruncatedNormalFit f = fit_truncated_normal(samples);
  return {f.mode, f.scale};
}

double bic(double log_like_hat, int k, int n) {
  if (n < 1) throw std::invalid_argument("bic: N must be >= 1");
  return k * std::log(static_cast<double>(n)) - 2.0 * log_like_hat;
}

NgSelection select_ngauss(const Dataset& d, const ModelFunction& model,
                          int max_ng, HyperPrior hyperprior,
                          const SamplerConfig& cfg) {
  if (max_ng < 1) throw std::invalid_argument("select_ngauss: max_ng >= 1");
  NgSelection sel;
  double best_bic = std::numeric_limits<double>::infinity();
  for (int ng = 1; ng <= max_ng; ++ng) {
    NgSelection::Row row;
    row.n_gauss = ng;
    LikelihoodSpec spec;
    spec.method = Method::gmm;
    spec.n_gauss = ng;
    spec.hyperprior = hyperprior;
    try {
      const FitResult fit = fit_mle(spec, d, model, {}, cfg);
      row.loglike = fit.loglike;
      row.bic = bic(fit.loglike, param_count(spec, model), static_cast<int>(d.n()));
      row.ok = true;
      if (row.bic < best_bic) {
        best_bic = row.bic;
        sel.best = ng;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    sel.table.push_back(row);
  }
  if (sel.best == 0)
    throw std::runtime_error("select_ngauss: every mixture size failed");
  return sel;
}

std::vector<std::string> emit_warnings(const PosteriorResult& result,
                                       const Dataset& d,
                                       const ModelFunction& model,
                                       const ParamVector& theta_hat,
                                       const SamplerConfig& cfg) {
  std::vector<std::string> out;

  for (size_t p = 0; p < result.param_names.size(); ++p) {
    if (result.ess.size() > static_cast<Eigen::Index>(p) &&
        result.ess[p] < 100.0) {
      std::ostringstream os;
      os << "effective sample size for " << result.param_names[p] << " is "
         << result.ess[p] << " (< 100)";
      out.push_back(os.str());
    }
    if (result.gelman_rubin.size() > static_cast<Eigen::Index>(p) &&
        result.gelman_rubin[p] - 1.0 > 0.01) {
      std::ostringstream os;
      os << "Gelman-Rubin statistic for " << result.param_names[p] << " is "
         << result.gelman_rubin[p] << " (r - 1 > 0.01)";
      out.push_back(os.str());
    }
  }

  // posterior peak within 1% of a user-set finite prior edge; the peak is the
  // densest bin of a histogram over the prior range
  for (size_t p = 0; p < result.param_names.size(); ++p) {
    const auto it = cfg.prior_bounds.find(result.param_names[p]);
    if (it == cfg.prior_bounds.end()) continue;
    const double lo = it->second.first, hi = it->second.second;
    constexpr int kBins = 100;
    std::array<int, kBins> counts{};
    for (Eigen::Index i = 0; i < result.samples.rows(); ++i) {
      const double v = result.samples(i, static_cast<Eigen::Index>(p));
      int b = static_cast<int>((v - lo) / (hi - lo) * kBins);
      b = std::clamp(b, 0, kBins - 1);
      ++counts[static_cast<size_t>(b)];
    }
    const int peak_bin = static_cast<int>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    const double peak = lo + (hi - lo) * (peak_bin + 0.5) / kBins;
    const double margin = 0.01 * (hi - lo);
    if (peak - lo <= margin || hi - peak <= margin) {
      std::ostringstream os;
      os << "posterior peak for " << result.param_names[p]
         << " is within 1% of its prior edge [" << lo << ", " << hi << "]";
      out.push_back(os.str());
    }
  }

  if (result.n_divergent > 0) {
    std::ostringstream os;
    os << result.n_divergent << " divergent transitions after warmup";
    out.push_back(os.str());
  }

  // first-order linearisation check: |f''| * sigma_x > |f'| anywhere
  if (!d.has_full_cov() && d.x_err.size() == d.n()) {
    const Eigen::VectorXd fp = model.deriv(d.x_obs, theta_hat.theta);
    int n_bad = 0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      const double h = 1e-4 * (1.0 + std::abs(d.x_obs[i]));
      Eigen::VectorXd xp(1), xm(1);
      xp[0] = d.x_obs[i] + h;
      xm[0] = d.x_obs[i] - h;
      const double fpp = (model.deriv(xp, theta_hat.theta)[0] -
                          model.deriv(xm, theta_hat.theta)[0]) /
                         (2.0 * h);
      if (std::abs(fpp) * d.x_err[i] > std::abs(fp[i])) ++n_bad;
    }
    if (n_bad > 0) {
      std::ostringstream os;
      os << "first-order expansion unreliable at " << n_bad
         << " points (|f''| * sigma_x exceeds |f'|)";
      out.push_back(os.str());
    }
  }
  return out;
}

}  // namespace xyfit
