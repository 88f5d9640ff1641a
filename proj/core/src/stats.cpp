#include "xyfit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "xyfit/nelder_mead.hpp"

namespace xyfit {

double mean(const Eigen::VectorXd& v) { return v.mean(); }

double variance(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  if (n < 2) return 0.0;
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(n - 1);
}

double stddev(const Eigen::VectorXd& v) { return std::sqrt(variance(v)); }

double percentile(Eigen::VectorXd v, double p) {
  if (v.size() == 0) throw std::invalid_argument("percentile: empty vector");
  std::sort(v.data(), v.data() + v.size());
  const double idx = (p / 100.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(idx));
  const auto hi = static_cast<Eigen::Index>(std::ceil(idx));
  const double frac = idx - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

namespace {

// Split each chain in half so within-chain drift shows up as between-chain
// variance.
std::vector<Eigen::VectorXd> split_chains(
    const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& c : chains) {
    const Eigen::Index h = c.size() / 2;
    if (h < 2) return chains;
    out.push_back(c.head(h));
    out.push_back(c.segment(h, h));
  }
  return out;
}

}  // namespace

double gelman_rubin(const std::vector<Eigen::VectorXd>& chains) {
  const auto split = split_chains(chains);
  const size_t m = split.size();
  if (m < 2) return 1.0;
  const double n = static_cast<double>(split[0].size());

  double grand = 0.0;
  std::vector<double> means(m), vars(m);
  for (size_t j = 0; j < m; ++j) {
    means[j] = split[j].mean();
    vars[j] = variance(split[j]);
    grand += means[j];
  }
  grand /= static_cast<double>(m);

  double B = 0.0, W = 0.0;
  for (size_t j = 0; j < m; ++j) {
    B += (means[j] - grand) * (means[j] - grand);
    W += vars[j];
  }
  B *= n / static_cast<double>(m - 1);
  W /= static_cast<double>(m);
  if (W <= 0.0) return 1.0;
  const double var_plus = (n - 1.0) / n * W + B / n;
  return std::sqrt(var_plus / W);
}

double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
  const size_t m = chains.size();
  if (m == 0) return 0.0;
  const Eigen::Index n = chains[0].size();
  if (n < 4) return static_cast<double>(m * n);

  std::vector<double> means(m), vars(m);
  for (size_t j = 0; j < m; ++j) {
    means[j] = chains[j].mean();
    vars[j] = variance(chains[j]);
  }
  double W = std::accumulate(vars.begin(), vars.end(), 0.0) /
             static_cast<double>(m);
  double B = 0.0;
  if (m > 1) {
    double grand =
        std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
    for (size_t j = 0; j < m; ++j)
      B += (means[j] - grand) * (means[j] - grand);
    B *= static_cast<double>(n) / static_cast<double>(m - 1);
  }
  const double var_plus =
      (static_cast<double>(n) - 1.0) / static_cast<double>(n) * W +
      (m > 1 ? B / static_cast<double>(n) : 0.0);
  if (var_plus <= 0.0 || W <= 0.0) return static_cast<double>(m * n);

  auto autocov = [&](Eigen::Index t) {
    double acc = 0.0;
    for (size_t j = 0; j < m; ++j) {
      const auto& c = chains[j];
      double s = 0.0;
      for (Eigen::Index i = 0; i < n - t; ++i)
        s += (c[i] - means[j]) * (c[i + t] - means[j]);
      acc += s / static_cast<double>(n);
    }
    return acc / static_cast<double>(m);
  };

  // Geyer initial monotone positive sequence on paired autocorrelations.
  double tau = 1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 1; t + 1 < n; t += 2) {
    const double rho_a = 1.0 - (W - autocov(t)) / var_plus;
    const double rho_b = 1.0 - (W - autocov(t + 1)) / var_plus;
    double pair = rho_a + rho_b;
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
    if (t > n / 2) break;
  }
  const double ess = static_cast<double>(m * n) / tau;
  return std::min(ess, static_cast<double>(m * n));
}

double log_normal_cdf(double t) {
  if (t > -8.0) return std::log(0.5 * std::erfc(-t / std::numbers::sqrt2));
  // asymptotic expansion of Phi(t) for t << 0
  const double t2 = t * t;
  return -0.5 * t2 - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(-t) +
         std::log1p(-1.0 / t2 + 3.0 / (t2 * t2));
}

TruncatedNormalFit fit_truncated_normal(const Eigen::VectorXd& samples) {
  const Eigen::Index n = samples.size();
  if (n == 0)
    throw std::invalid_argument("fit_truncated_normal: empty sample vector");
  if ((samples.array() < 0).any())
    throw std::invalid_argument("fit_truncated_normal: negative sample");

  const double m0 = samples.mean();
  const double s0 = stddev(samples);
  if (s0 < 1e-12) return {m0, 0.0};  // degenerate spread

  auto negloglike = [&](const Eigen::VectorXd& p) {
    const double loc = p[0];
    const double sigma = std::exp(p[1]);
    const double lphi = log_normal_cdf(loc / sigma);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = (samples[i] - loc) / sigma;
      ll += -0.5 * z * z - p[1];
    }
    ll -= static_cast<double>(n) * lphi;
    return -ll;
  };

  // the (loc, sigma) surface has a shallow ridge when mass piles at zero, so
  // search from several starts and keep the best
  const double rms = std::sqrt(samples.array().square().mean());
  const std::vector<std::pair<double, double>> starts{
      {m0, std::max(s0, 1e-8)},
      {0.0, std::max(rms, 1e-8)},
      {-0.5 * rms, std::max(rms, 1e-8)},
      {m0 - s0, std::max(2.0 * s0, 1e-8)}};
  NelderMeadOptions opts;
  opts.f_tol = 1e-12;
  Eigen::VectorXd best(2);
  double best_f = std::numeric_limits<double>::infinity();
  for (const auto& [ms, ss] : starts) {
    Eigen::VectorXd start(2), step(2);
    start << ms, std::log(ss);
    step << 0.5 * s0, 0.25;
    const auto r = nelder_mead(negloglike, start, step, opts);
    if (r.f < best_f) {
      best_f = r.f;
      best = r.x;
    }
  }
  const double loc = best[0];
  const double sigma = std::exp(best[1]);
  return {std::max(loc, 0.0), sigma};
}

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("pearson: need matching vectors, N >= 2");
  const double ma = a.mean(), mb = b.mean();
  const Eigen::ArrayXd da = a.array() - ma, db = b.array() - mb;
  const double denom = std::sqrt(da.square().sum() * db.square().sum());
  if (denom == 0.0) return 0.0;
  return (da * db).sum() / denom;
}

namespace {

Eigen::VectorXd ranks_with_ties(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index i, Eigen::Index j) { return v[i] < v[j]; });
  Eigen::VectorXd r(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return pearson_correlation(ranks_with_ties(a), ranks_with_ties(b));
}

}  // namespace xyfit
