#include "xyfit/nuts.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace xyfit {

namespace {

constexpr double kDivergenceThreshold = 1000.0;

struct Phase {
  Eigen::VectorXd z, p, grad;
  double logp = 0.0;
};

struct Tree {
  Phase minus, plus;     // trajectory endpoints
  Phase sample;          // multinomial draw from the subtree
  double log_weight;     // log sum of exp(-energy error) over leaves
  double sum_accept;     // sum of min(1, exp(H0 - H)) over leaves
  int n_leaves;
  bool divergent = false;
  bool turning = false;
};

class Nuts {
 public:
  Nuts(const LogProbFn& lp, Eigen::VectorXd init, const NutsOptions& opts)
      : lp_(lp), opts_(opts), rng_(opts.seed ^ 0x9e3779b97f4a7c15ull) {
    dim_ = static_cast<int>(init.size());
    inv_mass_ = Eigen::VectorXd::Ones(dim_);
    state_.z = std::move(init);
    state_.grad.resize(dim_);
    state_.logp = lp_(state_.z, &state_.grad);
    if (!std::isfinite(state_.logp))
      throw std::runtime_error("nuts: non-finite log-density at init");
  }

  NutsResult run() {
    NutsResult res;
    res.draws.resize(opts_.n_samples, dim_);

    init_step_size();
    setup_adaptation_windows();

    double mu = std::log(10.0 * step_);
    double log_eps_bar = 0.0, h_bar = 0.0;
    const double gamma = 0.05, t0 = 10.0, kappa = 0.75;
    int da_iter = 0;

    std::vector<Eigen::VectorXd> window_draws;
    double accept_accum = 0.0;
    int accept_count = 0;

    const int total = opts_.n_warmup + opts_.n_samples;
    for (int it = 0; it < total; ++it) {
      const bool warming = it < opts_.n_warmup;
      const double accept_stat = transition();

      if (warming) {
        // dual averaging toward the target acceptance statistic
        ++da_iter;
        const double eta = 1.0 / (da_iter + t0);
        h_bar = (1.0 - eta) * h_bar + eta * (opts_.target_accept - accept_stat);
        const double log_eps = mu - std::sqrt(da_iter) / gamma * h_bar;
        const double x_eta = std::pow(da_iter, -kappa);
        log_eps_bar = x_eta * log_eps + (1.0 - x_eta) * log_eps_bar;
        step_ = std::exp(log_eps);

        if (in_variance_window(it)) window_draws.push_back(state_.z);
        if (window_closes_at(it) && window_draws.size() >= 10) {
          update_metric(window_draws);
          window_draws.clear();
          // restart step-size adaptation around the current step
          init_step_size();
          mu = std::log(10.0 * step_);
          h_bar = 0.0;
          log_eps_bar = std::log(step_);
          da_iter = 0;
        }
        if (it + 1 == opts_.n_warmup) step_ = std::exp(log_eps_bar);
      } else {
        res.draws.row(it - opts_.n_warmup) = state_.z;
        if (last_divergent_) ++res.n_divergent;
        accept_accum += accept_stat;
        ++accept_count;
      }
    }
    res.step_size = step_;
    res.mean_accept = accept_count ? accept_accum / accept_count : 0.0;
    res.inv_mass = inv_mass_;
    return res;
  }

 private:
  double kinetic(const Eigen::VectorXd& p) const {
    return 0.5 * (p.array().square() * inv_mass_.array()).sum();
  }

  Eigen::VectorXd draw_momentum() {
    Eigen::VectorXd p(dim_);
    std::normal_distribution<double> nd;
    for (int i = 0; i < dim_; ++i) p[i] = nd(rng_) / std::sqrt(inv_mass_[i]);
    return p;
  }

  // One leapfrog step; returns false on a non-finite density.
  bool leapfrog(Phase& ph, double dir) {
    const double eps = dir * step_;
    ph.p += 0.5 * eps * ph.grad;
    ph.z.array() += eps * inv_mass_.array() * ph.p.array();
    ph.logp = lp_(ph.z, &ph.grad);
    if (!std::isfinite(ph.logp)) return false;
    ph.p += 0.5 * eps * ph.grad;
    return true;
  }

  bool uturn(const Phase& minus, const Phase& plus) const {
    const Eigen::VectorXd dz = plus.z - minus.z;
    return dz.dot((inv_mass_.array() * minus.p.array()).matrix()) < 0.0 ||
           dz.dot((inv_mass_.array() * plus.p.array()).matrix()) < 0.0;
  }

  Tree build_leaf(Phase ph, double dir, double h0) {
    Tree t;
    t.n_leaves = 1;
    t.sum_accept = 0.0;
    const bool ok = leapfrog(ph, dir);
    if (!ok) {
      t.divergent = true;
      t.log_weight = -std::numeric_limits<double>::infinity();
      t.minus = t.plus = t.sample = ph;
      return t;
    }
    const double h = -ph.logp + kinetic(ph.p);
    const double delta = h0 - h;  // > 0 when energy decreased
    t.divergent = (h - h0) > kDivergenceThreshold;
    t.log_weight = t.divergent ? -std::numeric_limits<double>::infinity() : delta;
    t.sum_accept = std::min(1.0, std::exp(delta));
    t.minus = t.plus = t.sample = std::move(ph);
    return t;
  }

  Tree build_tree(int depth, const Phase& from, double dir, double h0) {
    if (depth == 0) return build_leaf(from, dir, h0);

    Tree first = build_tree(depth - 1, from, dir, h0);
    if (first.divergent || first.turning) return first;

    const Phase& edge = (dir > 0) ? first.plus : first.minus;
    Tree second = build_tree(depth - 1, edge, dir, h0);

    Tree t;
    t.minus = (dir > 0) ? first.minus : second.minus;
    t.plus = (dir > 0) ? second.plus : first.plus;
    t.n_leaves = first.n_leaves + second.n_leaves;
    t.sum_accept = first.sum_accept + second.sum_accept;
    t.divergent = second.divergent;
    t.log_weight = log_sum_exp(first.log_weight, second.log_weight);
    // multinomial selection between the two halves
    const double u = uniform_(rng_);
    const double p_second = std::exp(second.log_weight - t.log_weight);
    t.sample = (u < p_second) ? second.sample : first.sample;
    t.turning = second.turning || uturn(t.minus, t.plus);
    return t;
  }

  static double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
  }

  // One NUTS transition; returns the mean acceptance statistic.
  double transition() {
    Phase ph = state_;
    ph.p = draw_momentum();
    const double h0 = -ph.logp + kinetic(ph.p);

    Tree traj;
    traj.minus = traj.plus = traj.sample = ph;
    traj.log_weight = 0.0;
    traj.sum_accept = 0.0;
    traj.n_leaves = 0;
    last_divergent_ = false;

    for (int depth = 0; depth < opts_.max_depth; ++depth) {
      const double dir = (uniform_(rng_) < 0.5) ? -1.0 : 1.0;
      const Phase& edge = (dir > 0) ? traj.plus : traj.minus;
      Tree sub = build_tree(depth, edge, dir, h0);

      traj.sum_accept += sub.sum_accept;
      traj.n_leaves += sub.n_leaves;
      if (sub.divergent) {
        last_divergent_ = true;
        break;
      }
      if (!sub.turning) {
        // biased progressive sampling: favour the newer half
        const double p_new = std::exp(sub.log_weight - traj.log_weight);
        if (uniform_(rng_) < p_new) traj.sample = sub.sample;
        traj.log_weight = log_sum_exp(traj.log_weight, sub.log_weight);
      }
      if (dir > 0)
        traj.plus = sub.plus;
      else
        traj.minus = sub.minus;
      if (sub.turning || uturn(traj.minus, traj.plus)) break;
    }

    state_ = traj.sample;
    return traj.n_leaves > 0 ? traj.sum_accept / traj.n_leaves : 0.0;
  }

  // Heuristic from Hoffman & Gelman: scale the step until the one-step
  // acceptance probability crosses 1/2.
  void init_step_size() {
    Phase ph = state_;
    ph.p = draw_momentum();
    const double h0 = -ph.logp + kinetic(ph.p);
    Phase trial = ph;
    if (!leapfrog(trial, 1.0)) {
      step_ *= 0.5;
      return;
    }
    double delta = h0 - (-trial.logp + kinetic(trial.p));
    const double dir = (delta > std::log(0.5)) ? 1.0 : -1.0;
    for (int iter = 0; iter < 50; ++iter) {
      step_ *= std::pow(2.0, dir);
      trial = ph;
      if (!leapfrog(trial, 1.0)) {
        if (dir > 0) {
          step_ *= 0.5;
          return;
        }
        continue;
      }
      delta = h0 - (-trial.logp + kinetic(trial.p));
      if (dir > 0 && delta <= std::log(0.5)) return;
      if (dir < 0 && delta >= std::log(0.5)) return;
    }
  }

  void setup_adaptation_windows() {
    const int w = opts_.n_warmup;
    if (w >= 150) {
      init_buffer_ = 75;
      term_buffer_ = 50;
    } else {
      init_buffer_ = std::max(1, w * 15 / 100);
      term_buffer_ = std::max(1, w * 10 / 100);
    }
    window_start_ = init_buffer_;
    window_size_ = std::max(25, (w - init_buffer_ - term_buffer_) / 8);
  }

  bool in_variance_window(int it) const {
    return it >= window_start_ && it < opts_.n_warmup - term_buffer_;
  }

  bool window_closes_at(int it) {
    const int end = window_start_ + window_size_;
    if (it + 1 == std::min(end, opts_.n_warmup - term_buffer_)) {
      window_start_ = end;
      window_size_ *= 2;
      return true;
    }
    return false;
  }

  void update_metric(const std::vector<Eigen::VectorXd>& draws) {
    const double n = static_cast<double>(draws.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim_);
    for (const auto& z : draws) mean += z;
    mean /= n;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(dim_);
    for (const auto& z : draws) var += (z - mean).array().square().matrix();
    var /= std::max(1.0, n - 1.0);
    // regularised toward a small diagonal, as is standard
    inv_mass_ = (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
  }

  const LogProbFn& lp_;
  NutsOptions opts_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  int dim_ = 0;
  double step_ = 1.0;
  Eigen::VectorXd inv_mass_;
  Phase state_;
  bool last_divergent_ = false;
  int init_buffer_ = 75, term_buffer_ = 50;
  int window_start_ = 75, window_size_ = 25;
};

}  // namespace

NutsResult nuts_sample(const LogProbFn& logprob, const Eigen::VectorXd& init,
                       const NutsOptions& opts) {
  if (opts.n_warmup < 1 || opts.n_samples < 1)
    throw std::invalid_argument("nuts: counts must be positive");
  Nuts sampler(logprob, init, opts);
  return sampler.run();
}

}  // namespace xyfit
