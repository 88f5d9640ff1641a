#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "xyfit/likelihood.hpp"
#include "xyfit/mock.hpp"

using namespace xyfit;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Dataset make_data(std::initializer_list<double> x, std::initializer_list<double> y,
                  std::initializer_list<double> sx,
                  std::initializer_list<double> sy) {
  auto vec = [](std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) out[i++] = d;
    return out;
  };
  Dataset d;
  d.x_obs = vec(x);
  d.y_obs = vec(y);
  d.x_err = vec(sx);
  d.y_err = vec(sy);
  return d;
}

Eigen::VectorXd theta(double a, double b) {
  Eigen::VectorXd t(2);
  t << a, b;
  return t;
}

struct RandomProblem {
  Dataset d;
  double A, B, sigma_int;
};

RandomProblem random_problem(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomProblem p;
  p.A = -4.0 + 8.0 * u(rng);
  p.B = -2.0 + 4.0 * u(rng);
  p.sigma_int = 2.0 * u(rng);
  Eigen::VectorXd x(n), y(n), sx(n), sy(n);
  for (int i = 0; i < n; ++i) {
    x[i] = -5.0 + 10.0 * u(rng);
    y[i] = p.A * x[i] + p.B + (u(rng) - 0.5) * 4.0;
    sx[i] = 0.2 + 1.5 * u(rng);
    sy[i] = 0.2 + 1.5 * u(rng);
  }
  p.d.x_obs = x;
  p.d.y_obs = y;
  p.d.x_err = sx;
  p.d.y_err = sy;
  return p;
}

}  // namespace

TEST_CASE("unif kernel: a single standard normal point") {
  const Dataset d = make_data({0, 100}, {0, 100}, {0, 0}, {1, 1});
  // restrict to one point by making the second exact: f(100)=100 with A=1,B=0
  const double ll = loglike_unif_diag(d, linear_model(), theta(1, 0), 0.0);
  // second point contributes -log sqrt(2pi); first the same (residual 0)
  CHECK(ll == doctest::Approx(-kLog2Pi));
  const Dataset one = make_data({0, 0}, {0, 0}, {0, 0}, {1, 1});
  const double ll0 = loglike_unif_diag(one, linear_model(), theta(0, 0), 0.0);
  CHECK(ll0 == doctest::Approx(2.0 * -0.5 * kLog2Pi));
}

TEST_CASE("unif kernel equals the heteroscedastic Gaussian at sigma_x = 0") {
  std::mt19937_64 rng(1);
  const RandomProblem p = [&] {
    RandomProblem q = random_problem(rng, 20);
    q.d.x_err.setZero();
    return q;
  }();
  const double ll =
      loglike_unif_diag(p.d, linear_model(), theta(p.A, p.B), p.sigma_int);
  double expect = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double s2 =
        p.d.y_err[i] * p.d.y_err[i] + p.sigma_int * p.sigma_int;
    const double r = p.A * p.d.x_obs[i] + p.B - p.d.y_obs[i];
    expect += -0.5 * std::log(2 * std::numbers::pi * s2) - 0.5 * r * r / s2;
  }
  CHECK(ll == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("unif kernel matches quadrature of the full likelihood") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const RandomProblem p = random_problem(rng, 1);
    const double ll =
        loglike_unif_diag(p.d, linear_model(), theta(p.A, p.B), p.sigma_int);
    const double sy2 =
        p.d.y_err[0] * p.d.y_err[0] + p.sigma_int * p.sigma_int;
    const double ref = oracle::marginal_point(p.d.x_obs[0], p.d.y_obs[0], p.A,
                                              p.B, p.d.x_err[0], sy2, {});
    CHECK(ll == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("prof kernel coincides with unif at sigma_x = 0") {
  std::mt19937_64 rng(2);
  RandomProblem p = random_problem(rng, 15);
  p.d.x_err.setZero();
  const double a = loglike_unif_diag(p.d, linear_model(), theta(p.A, p.B),
                                     p.sigma_int);
  const double b = loglike_prof_diag(p.d, linear_model(), theta(p.A, p.B),
                                     p.sigma_int);
  CHECK(a == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("prof kernel equals the inner maximum of the full likelihood") {
  // up to the constant sum_i log(sqrt(2 pi) sigma_x_i) that the profile form drops
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const RandomProblem p = random_problem(rng, 1);
    const double sy2 =
        p.d.y_err[0] * p.d.y_err[0] + p.sigma_int * p.sigma_int;
    const double kernel =
        loglike_prof_diag(p.d, linear_model(), theta(p.A, p.B), p.sigma_int);
    const double inner = oracle::profile_point(p.d.x_obs[0], p.d.y_obs[0], p.A,
                                               p.B, p.d.x_err[0], sy2);
    const double offset =
        std::log(std::sqrt(2 * std::numbers::pi) * p.d.x_err[0]);
    CHECK(kernel == doctest::Approx(inner + offset).epsilon(1e-8));

    // substitution identity: the closed-form x_t maximiser reproduces it
    const double xt = oracle::profile_xt_hat(p.d.x_obs[0], p.d.y_obs[0], p.A,
                                             p.B, p.d.x_err[0], sy2);
    const double full = oracle::full_loglike_point(
        xt, p.d.x_obs[0], p.d.y_obs[0], p.A, p.B, p.d.x_err[0], sy2);
    CHECK(kernel == doctest::Approx(full + offset).epsilon(1e-10));
  }
}

TEST_CASE("mnr kernel matches quadrature with the Gaussian prior") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const RandomProblem p = random_problem(rng, 1);
    const double mu = -3.0 + 6.0 * u(rng);
    const double w = 0.5 + 3.0 * u(rng);
    const double sy2 =
        p.d.y_err[0] * p.d.y_err[0] + p.sigma_int * p.sigma_int;
    const double kernel = loglike_mnr_diag(p.d, linear_model(),
                                           theta(p.A, p.B), p.sigma_int, mu, w);
    const double ref = oracle::marginal_point(p.d.x_obs[0], p.d.y_obs[0], p.A,
                                              p.B, p.d.x_err[0], sy2,
                                              {{1.0, mu, w}});
    CHECK(kernel == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("mnr kernel separates exactly at sigma_x = 0") {
  std::mt19937_64 rng(5);
  RandomProblem p = random_problem(rng, 10);
  p.d.x_err.setZero();
  const double mu = 0.7, w = 2.0;
  const double kernel = loglike_mnr_diag(p.d, linear_model(), theta(p.A, p.B),
                                         p.sigma_int, mu, w);
  double expect = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double s2 = p.d.y_err[i] * p.d.y_err[i] + p.sigma_int * p.sigma_int;
    const double ry = p.A * p.d.x_obs[i] + p.B - p.d.y_obs[i];
    const double rx = p.d.x_obs[i] - mu;
    expect += -0.5 * std::log(2 * std::numbers::pi * s2) - 0.5 * ry * ry / s2;
    expect += -0.5 * std::log(2 * std::numbers::pi * w * w) -
              0.5 * rx * rx / (w * w);
  }
  CHECK(kernel == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mnr kernel approaches unif plus the latent-x penalty as w grows") {
  std::mt19937_64 rng(6);
  const RandomProblem p = random_problem(rng, 8);
  const double mu = 1.0, w = 1e6;
  const double mnr = loglike_mnr_diag(p.d, linear_model(), theta(p.A, p.B),
                                      p.sigma_int, mu, w);
  double expect =
      loglike_unif_diag(p.d, linear_model(), theta(p.A, p.B), p.sigma_int);
  for (int i = 0; i < 8; ++i) {
    const double rx = p.d.x_obs[i] - mu;
    expect += -0.5 * std::log(2 * std::numbers::pi * w * w) -
              0.5 * rx * rx / (w * w);
  }
  CHECK(mnr == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("gmm kernel degenerates to mnr for one component") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomProblem p = random_problem(rng, 6);
    const std::vector<GmmComponent> c{{1.0, 0.5, 1.5}};
    const double g = loglike_gmm_diag(p.d, linear_model(), theta(p.A, p.B),
                                      p.sigma_int, c);
    const double m = loglike_mnr_diag(p.d, linear_model(), theta(p.A, p.B),
                                      p.sigma_int, 0.5, 1.5);
    CHECK(g == doctest::Approx(m).epsilon(1e-12));
  }
}

TEST_CASE("two identical components collapse to one") {
  std::mt19937_64 rng(8);
  const RandomProblem p = random_problem(rng, 6);
  const std::vector<GmmComponent> two{{0.3, 0.5, 1.5}, {0.7, 0.5, 1.5}};
  const std::vector<GmmComponent> one{{1.0, 0.5, 1.5}};
  const double a = loglike_gmm_diag(p.d, linear_model(), theta(p.A, p.B),
                                    p.sigma_int, two);
  const double b = loglike_gmm_diag(p.d, linear_model(), theta(p.A, p.B),
                                    p.sigma_int, one);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("gmm kernel matches quadrature with a mixture prior") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 15; ++trial) {
    const RandomProblem p = random_problem(rng, 1);
    const std::vector<GmmComponent> comps{{0.4, -4.0, 0.8}, {0.6, 5.0, 1.4}};
    const double sy2 =
        p.d.y_err[0] * p.d.y_err[0] + p.sigma_int * p.sigma_int;
    const double g = loglike_gmm_diag(p.d, linear_model(), theta(p.A, p.B),
                                      p.sigma_int, comps);
    const double ref = oracle::marginal_point(
        p.d.x_obs[0], p.d.y_obs[0], p.A, p.B, p.d.x_err[0], sy2,
        {comps.begin(), comps.end()});
    CHECK(g == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("gmm kernel rejects bad component sets") {
  std::mt19937_64 rng(10);
  const RandomProblem p = random_problem(rng, 4);
  CHECK_THROWS_AS(
      loglike_gmm_diag(p.d, linear_model(), theta(1, 0), 0.1,
                       std::vector<GmmComponent>{{1.0, 0.0, -1.0}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      loglike_gmm_diag(p.d, linear_model(), theta(1, 0), 0.1,
                       std::vector<GmmComponent>{{0.5, 1.0, 1.0}, {0.5, 0.0, 1.0}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      loglike_gmm_diag(p.d, linear_model(), theta(1, 0), 0.1,
                       std::vector<GmmComponent>{{0.4, 0.0, 1.0}, {0.4, 1.0, 1.0}}),
      std::invalid_argument);
}

TEST_CASE("hierarchical hyperprior pieces") {
  SUBCASE("normal term at its mode") {
    const std::vector<GmmComponent> c{{1.0, 2.5, 1.3}};
    const double lp = hierarchical_hyperprior_logdensity(c, 2.5, 1.0, 1.69);
    // mean term contributes -log sqrt(2 pi); the remaining pieces are the
    // two scaled-inv-chi2 factors
    const double expect = -0.5 * kLog2Pi + log_scaled_inv_chi2(1.69, 1, 1.69) +
                          log_scaled_inv_chi2(1.0, 1, 1.69);
    CHECK(lp == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("scaled-inv-chi2 closed form at x = s2") {
    // nu = 1: p(x; 1, s2) = s / (sqrt(2 pi)) * x^{-3/2} * exp(-s2 / (2x))
    const double s2 = 2.37;
    const double direct = std::log(std::sqrt(s2) / std::sqrt(2 * std::numbers::pi) *
                                   std::pow(s2, -1.5) * std::exp(-0.5));
    CHECK(log_scaled_inv_chi2(s2, 1.0, s2) == doctest::Approx(direct).epsilon(1e-12));
  }
  SUBCASE("density integrates to one over the variance") {
    const double tau2 = 1.7;
    double acc = 0.0;
    const int n = 400001;
    const double lo = 1e-8, hi = 1e9;
    // log-spaced trapezoid in log x
    double prev_x = lo, prev_f = std::exp(log_scaled_inv_chi2(lo, 1, tau2));
    for (int i = 1; i < n; ++i) {
      const double x =
          std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1.0));
      const double f = std::exp(log_scaled_inv_chi2(x, 1, tau2));
      acc += 0.5 * (f + prev_f) * (x - prev_x);
      prev_x = x;
      prev_f = f;
    }
    CHECK(acc == doctest::Approx(1.0).epsilon(2e-3));
  }
}

TEST_CASE("mnr stays finite when only some x-errors vanish") {
  Dataset d = make_data({0, 1, 2, 3}, {1, 3, 5, 7}, {0, 0.4, 0, 0.4},
                        {0.5, 0.5, 0.5, 0.5});
  const double ll =
      loglike_mnr_diag(d, linear_model(), theta(2, 1), 0.3, 1.5, 2.0);
  CHECK(std::isfinite(ll));
  // agrees with the quadrature oracle on the zero-sigma_x points too
  double ref = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double sy2 = 0.25 + 0.09;
    if (d.x_err[i] == 0.0) {
      // latent x pinned to x_obs: Gaussian in y residual times the prior
      const double ry = 2 * d.x_obs[i] + 1 - d.y_obs[i];
      const double rx = d.x_obs[i] - 1.5;
      ref += -0.5 * std::log(2 * std::numbers::pi * sy2) - 0.5 * ry * ry / sy2;
      ref += -0.5 * std::log(2 * std::numbers::pi * 4.0) - 0.5 * rx * rx / 4.0;
    } else {
      ref += oracle::marginal_point(d.x_obs[i], d.y_obs[i], 2, 1, d.x_err[i],
                                    sy2, {{1.0, 1.5, 2.0}});
    }
  }
  CHECK(ll == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("kernels are invariant under point permutation") {
  std::mt19937_64 rng(11);
  const RandomProblem p = random_problem(rng, 9);
  Dataset rev;
  rev.x_obs = p.d.x_obs.reverse();
  rev.y_obs = p.d.y_obs.reverse();
  rev.x_err = p.d.x_err.reverse();
  rev.y_err = p.d.y_err.reverse();
  const auto th = theta(p.A, p.B);
  CHECK(loglike_unif_diag(p.d, linear_model(), th, 0.3) ==
        doctest::Approx(loglike_unif_diag(rev, linear_model(), th, 0.3)));
  CHECK(loglike_prof_diag(p.d, linear_model(), th, 0.3) ==
        doctest::Approx(loglike_prof_diag(rev, linear_model(), th, 0.3)));
  CHECK(loglike_mnr_diag(p.d, linear_model(), th, 0.3, 1.0, 2.0) ==
        doctest::Approx(loglike_mnr_diag(rev, linear_model(), th, 0.3, 1.0, 2.0)));
}

TEST_CASE("translation covariance of the linear kernels") {
  std::mt19937_64 rng(12);
  const RandomProblem p = random_problem(rng, 9);
  const double c = 3.7;
  Dataset shifted = p.d;
  shifted.x_obs.array() += c;
  const auto th0 = theta(p.A, p.B);
  const auto th1 = theta(p.A, p.B - p.A * c);
  CHECK(loglike_unif_diag(p.d, linear_model(), th0, 0.4) ==
        doctest::Approx(loglike_unif_diag(shifted, linear_model(), th1, 0.4))
            .epsilon(1e-12));
  CHECK(loglike_prof_diag(p.d, linear_model(), th0, 0.4) ==
        doctest::Approx(loglike_prof_diag(shifted, linear_model(), th1, 0.4))
            .epsilon(1e-12));
  CHECK(
      loglike_mnr_diag(p.d, linear_model(), th0, 0.4, 1.0, 2.0) ==
      doctest::Approx(loglike_mnr_diag(shifted, linear_model(), th1, 0.4,
                                       1.0 + c, 2.0))
          .epsilon(1e-12));
}

TEST_CASE("analytic gradients agree with finite differences") {
  std::mt19937_64 rng(13);
  const RandomProblem p = random_problem(rng, 12);
  const ModelFunction model = linear_model();

  auto check_grad = [&](const LikelihoodSpec& spec, const ParamVector& pv) {
    ParamVector grad;
    const double base = loglike_diag_grad(spec, p.d, model, pv, grad);
    CHECK(base == doctest::Approx(loglike_diag(spec, p.d, model, pv)));

    auto fd = [&](auto setter, double v0) {
      const double h = 1e-6 * (1.0 + std::abs(v0));
      ParamVector hi = pv, lo = pv;
      setter(hi, v0 + h);
      setter(lo, v0 - h);
      return (loglike_diag(spec, p.d, model, hi) -
              loglike_diag(spec, p.d, model, lo)) /
             (2.0 * h);
    };
    auto close = [](double a, double b) {
      return std::abs(a - b) <= 1e-5 * std::max({std::abs(a), std::abs(b), 1.0});
    };

    for (int j = 0; j < 2; ++j) {
      const double g = fd([j](ParamVector& q, double v) { q.theta[j] = v; },
                          pv.theta[j]);
      CHECK_MESSAGE(close(grad.theta[j], g), "theta " << j << ": " << grad.theta[j]
                                                      << " vs " << g);
    }
    {
      const double g = fd([](ParamVector& q, double v) { q.sigma_int = v; },
                          pv.sigma_int);
      CHECK_MESSAGE(close(grad.sigma_int, g),
                    "sigma_int: " << grad.sigma_int << " vs " << g);
    }
    for (size_t k = 0; k < pv.components.size(); ++k) {
      const double gmu =
          fd([k](ParamVector& q, double v) { q.components[k].mu = v; },
             pv.components[k].mu);
      CHECK_MESSAGE(close(grad.components[k].mu, gmu),
                    "mu_" << k << ": " << grad.components[k].mu << " vs " << gmu);
      const double gw =
          fd([k](ParamVector& q, double v) { q.components[k].w = v; },
             pv.components[k].w);
      CHECK_MESSAGE(close(grad.components[k].w, gw),
                    "w_" << k << ": " << grad.components[k].w << " vs " << gw);
    }
  };

  LikelihoodSpec unif;
  unif.method = Method::unif;
  ParamVector pv;
  pv.theta = theta(p.A, p.B);
  pv.sigma_int = 0.8;
  check_grad(unif, pv);

  LikelihoodSpec prof;
  prof.method = Method::prof;
  check_grad(prof, pv);

  LikelihoodSpec mnr;
  mnr.method = Method::mnr;
  pv.components = {GmmComponent{1.0, 0.3, 2.2}};
  check_grad(mnr, pv);

  LikelihoodSpec gmm;
  gmm.method = Method::gmm;
  gmm.n_gauss = 2;
  pv.components = {GmmComponent{0.35, -1.0, 1.2}, GmmComponent{0.65, 2.0, 0.7}};
  check_grad(gmm, pv);

  // mixture weight gradient, differenced along the simplex direction
  // (w0 + h, w1 - h) so the sum-to-one constraint is preserved
  {
    ParamVector grad;
    loglike_diag_grad(gmm, p.d, linear_model(), pv, grad);
    const double h = 1e-7;
    ParamVector hi = pv, lo = pv;
    hi.components[0].weight += h;
    hi.components[1].weight -= h;
    lo.components[0].weight -= h;
    lo.components[1].weight += h;
    const double fd =
        (loglike_gmm_diag(p.d, linear_model(), pv.theta, pv.sigma_int,
                          hi.components) -
         loglike_gmm_diag(p.d, linear_model(), pv.theta, pv.sigma_int,
                          lo.components)) /
        (2.0 * h);
    const double directional =
        grad.components[0].weight - grad.components[1].weight;
    CHECK(directional == doctest::Approx(fd).epsilon(1e-4));
  }
}
