#include "xyfit/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xyfit {

namespace {

double logistic(double u) {
  double s;
  if (u >= 0) {
    s = 1.0 / (1.0 + std::exp(-u));
  } else {
    const double e = std::exp(u);
    s = e / (1.0 + e);
  }
  // keep interval-mapped values strictly interior
  return std::clamp(s, 1e-15, 1.0 - 1e-15);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace

ParameterSpace ParameterSpace::create(const LikelihoodSpec& spec,
                                      const ModelFunction& model,
                                      const Bounds& bounds) {
  spec.validate();
  ParameterSpace ps;
  ps.spec_ = spec;
  ps.n_theta_ = model.n_params;
  ps.has_sigma_int_ = spec.include_intrinsic_scatter;

  auto add_scalar = [&](const std::string& name, bool positive) {
    auto it = bounds.find(name);
    Block b;
    if (it != bounds.end()) {
      if (!(it->second.first < it->second.second))
        throw std::invalid_argument("prior bounds for '" + name +
                                    "' are degenerate");
      b.kind = Block::Kind::interval;
      b.lo = it->second.first;
      b.hi = it->second.second;
    } else {
      b.kind = positive ? Block::Kind::positive : Block::Kind::real;
    }
    ps.blocks_.push_back(b);
    ps.names_.push_back(name);
    ps.unconstrained_dim_ += 1;
  };

  for (int j = 0; j < model.n_params; ++j) {
    const std::string name = j < static_cast<int>(model.param_names.size())
                                 ? model.param_names[j]
                                 : "theta_" + std::to_string(j);
    add_scalar(name, false);
  }
  if (spec.include_intrinsic_scatter) add_scalar("sigma_int", true);

  if (spec.method == Method::mnr) {
    add_scalar("mu", false);
    add_scalar("w", true);
  } else if (spec.method == Method::gmm) {
    const int K = spec.n_gauss;
    if (K == 1) {
      add_scalar("mu_1", false);
    } else {
      Block b;
      b.kind = Block::Kind::ordered;
      b.size = K;
      ps.blocks_.push_back(b);
      for (int k = 1; k <= K; ++k)
        ps.names_.push_back("mu_" + std::to_string(k));
      ps.unconstrained_dim_ += K;
    }
    for (int k = 1; k <= K; ++k) add_scalar("w_" + std::to_string(k), true);
    if (K == 1) {
      // single component: weight fixed at 1, not sampled
    } else {
      Block b;
      b.kind = Block::Kind::simplex;
      b.size = K;
      ps.blocks_.push_back(b);
      for (int k = 1; k <= K; ++k)
        ps.names_.push_back("weight_" + std::to_string(k));
      ps.unconstrained_dim_ += K - 1;
    }
    if (spec.hyperprior == HyperPrior::hierarchical) {
      add_scalar("mu_star", false);
      add_scalar("u2_star", true);
      add_scalar("w2_star", true);
    }
  }
  return ps;
}

Eigen::VectorXd ParameterSpace::pack(const ParamVector& pv) const {
  Eigen::VectorXd c(constrained_dim());
  int i = 0;
  for (int j = 0; j < n_theta_; ++j) c[i++] = pv.theta[j];
  if (has_sigma_int_) c[i++] = pv.sigma_int;
  if (spec_.method == Method::mnr) {
    c[i++] = pv.components.at(0).mu;
    c[i++] = pv.components.at(0).w;
  } else if (spec_.method == Method::gmm) {
    const int K = spec_.n_gauss;
    for (int k = 0; k < K; ++k) c[i++] = pv.components.at(k).mu;
    for (int k = 0; k < K; ++k) c[i++] = pv.components.at(k).w;
    if (K > 1)
      for (int k = 0; k < K; ++k) c[i++] = pv.components.at(k).weight;
    if (spec_.hyperprior == HyperPrior::hierarchical) {
      const Hierarchy h = pv.hierarchy.value_or(Hierarchy{});
      c[i++] = h.mu_star;
      c[i++] = h.u2_star;
      c[i++] = h.w2_star;
    }
  }
  return c;
}

ParamVector ParameterSpace::unpack(const Eigen::VectorXd& c) const {
  if (c.size() != constrained_dim())
    throw std::invalid_argument("unpack: dimension mismatch");
  ParamVector pv;
  pv.theta.resize(n_theta_);
  int i = 0;
  for (int j = 0; j < n_theta_; ++j) pv.theta[j] = c[i++];
  pv.sigma_int = has_sigma_int_ ? c[i++] : 0.0;
  if (spec_.method == Method::mnr) {
    GmmComponent g;
    g.weight = 1.0;
    g.mu = c[i++];
    g.w = c[i++];
    pv.components = {g};
  } else if (spec_.method == Method::gmm) {
    const int K = spec_.n_gauss;
    pv.components.assign(K, GmmComponent{});
    for (int k = 0; k < K; ++k) pv.components[k].mu = c[i++];
    for (int k = 0; k < K; ++k) pv.components[k].w = c[i++];
    if (K > 1) {
      for (int k = 0; k < K; ++k) pv.components[k].weight = c[i++];
    } else {
      pv.components[0].weight = 1.0;
    }
    if (spec_.hyperprior == HyperPrior::hierarchical) {
      Hierarchy h;
      h.mu_star = c[i++];
      h.u2_star = c[i++];
      h.w2_star = c[i++];
      pv.hierarchy = h;
    }
  }
  return pv;
}

Eigen::VectorXd ParameterSpace::to_unconstrained(const Eigen::VectorXd& c) const {
  Eigen::VectorXd z(unconstrained_dim());
  int ci = 0, zi = 0;
  for (const Block& b : blocks_) {
    switch (b.kind) {
      case Block::Kind::real:
        z[zi++] = c[ci++];
        break;
      case Block::Kind::positive:
        z[zi++] = std::log(std::max(c[ci++], 1e-300));
        break;
      case Block::Kind::interval: {
        const double p = std::clamp((c[ci++] - b.lo) / (b.hi - b.lo), 1e-12,
                                    1.0 - 1e-12);
        z[zi++] = logit(p);
        break;
      }
      case Block::Kind::ordered: {
        z[zi++] = c[ci];
        for (int k = 1; k < b.size; ++k)
          z[zi++] = std::log(std::max(c[ci + k] - c[ci + k - 1], 1e-300));
        ci += b.size;
        break;
      }
      case Block::Kind::simplex: {
        double rem = 1.0;
        for (int k = 0; k < b.size - 1; ++k) {
          const double v =
              std::clamp(c[ci + k] / std::max(rem, 1e-300), 1e-12, 1.0 - 1e-12);
          z[zi++] = logit(v) + std::log(static_cast<double>(b.size - 1 - k));
          rem *= (1.0 - v);
        }
        ci += b.size;
        break;
      }
    }
  }
  return z;
}

Eigen::VectorXd ParameterSpace::to_constrained(const Eigen::VectorXd& z,
                                               double* log_jacobian) const {
  Eigen::VectorXd c(constrained_dim());
  double lj = 0.0;
  int ci = 0, zi = 0;
  for (const Block& b : blocks_) {
    switch (b.kind) {
      case Block::Kind::real:
        c[ci++] = z[zi++];
        break;
      case Block::Kind::positive:
        c[ci++] = std::exp(z[zi]);
        lj += z[zi++];
        break;
      case Block::Kind::interval: {
        const double s = logistic(z[zi]);
        c[ci++] = b.lo + (b.hi - b.lo) * s;
        lj += std::log(b.hi - b.lo) + std::log(s) + std::log1p(-s);
        ++zi;
        break;
      }
      case Block::Kind::ordered: {
        c[ci] = z[zi];
        ++zi;
        for (int k = 1; k < b.size; ++k) {
          c[ci + k] = c[ci + k - 1] + std::exp(z[zi]);
          lj += z[zi++];
        }
        ci += b.size;
        break;
      }
      case Block::Kind::simplex: {
        double rem = 1.0;
        for (int k = 0; k < b.size - 1; ++k) {
          const double u = z[zi++] - std::log(static_cast<double>(b.size - 1 - k));
          const double v = logistic(u);
          c[ci + k] = rem * v;
          lj += std::log(rem) + std::log(v) + std::log1p(-v);
          rem *= (1.0 - v);
        }
        c[ci + b.size - 1] = rem;
        ci += b.size;
        break;
      }
    }
  }
  if (log_jacobian) *log_jacobian = lj;
  return c;
}

Eigen::VectorXd ParameterSpace::grad_to_unconstrained(
    const Eigen::VectorXd& z, const Eigen::VectorXd& grad_c) const {
  Eigen::VectorXd gz(unconstrained_dim());
  int ci = 0, zi = 0;
  for (const Block& b : blocks_) {
    switch (b.kind) {
      case Block::Kind::real:
        gz[zi++] = grad_c[ci++];
        break;
      case Block::Kind::positive:
        gz[zi] = grad_c[ci++] * std::exp(z[zi]) + 1.0;
        ++zi;
        break;
      case Block::Kind::interval: {
        const double s = logistic(z[zi]);
        gz[zi] = grad_c[ci++] * (b.hi - b.lo) * s * (1.0 - s) + (1.0 - 2.0 * s);
        ++zi;
        break;
      }
      case Block::Kind::ordered: {
        // c_k = c_{k-1} + exp(z_k): suffix sums of grad_c drive each z.
        double suffix = 0.0;
        for (int k = b.size - 1; k >= 1; --k) {
          suffix += grad_c[ci + k];
          gz[zi + k] = suffix * std::exp(z[zi + k]) + 1.0;
        }
        suffix += grad_c[ci];
        gz[zi] = suffix;
        zi += b.size;
        ci += b.size;
        break;
      }
      case Block::Kind::simplex: {
        const int K = b.size;
        // forward pass
        std::vector<double> v(K - 1), rem(K, 1.0);
        for (int k = 0; k < K - 1; ++k) {
          const double u = z[zi + k] - std::log(static_cast<double>(K - 1 - k));
          v[k] = logistic(u);
          rem[k + 1] = rem[k] * (1.0 - v[k]);
        }
        // reverse pass; rbar[k] is the adjoint of rem[k]
        double rbar = grad_c[ci + K - 1];  // c_K = rem[K-1]
        for (int k = K - 2; k >= 0; --k) {
          const double vbar = grad_c[ci + k] * rem[k] - rbar * rem[k];
          gz[zi + k] = vbar * v[k] * (1.0 - v[k]) + (1.0 - 2.0 * v[k]);
          rbar = grad_c[ci + k] * v[k] + rbar * (1.0 - v[k]) + 1.0 / rem[k];
        }
        zi += K - 1;
        ci += K;
        break;
      }
    }
  }
  return gz;
}

std::pair<double, double> ParameterSpace::bound(int constrained_index) const {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  int ci = 0;
  for (const Block& b : blocks_) {
    if (constrained_index < ci + b.size) {
      switch (b.kind) {
        case Block::Kind::real:
        case Block::Kind::ordered:
          return {nan, nan};
        case Block::Kind::positive:
          return {0.0, nan};
        case Block::Kind::interval:
          return {b.lo, b.hi};
        case Block::Kind::simplex:
          return {0.0, 1.0};
      }
    }
    ci += b.size;
  }
  throw std::out_of_range("ParameterSpace::bound");
}

}  // namespace xyfit
