#include <doctest.h>

#include <cmath>
#include <random>

#include "xyfit/causality.hpp"
#include "xyfit/expression.hpp"
#include "xyfit/mock.hpp"

using namespace xyfit;

namespace {

LikelihoodSpec mnr_spec() {
  LikelihoodSpec s;
  s.method = Method::mnr;
  return s;
}

// y determined by x plus y-noise: the forward direction is the causal one.
Dataset additive_noise_data(uint64_t seed, int n = 400) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  Dataset d;
  d.x_obs.resize(n);
  d.y_obs.resize(n);
  d.x_err = Eigen::VectorXd::Constant(n, 0.05);
  d.y_err = Eigen::VectorXd::Constant(n, 0.1);
  for (int i = 0; i < n; ++i) {
    const double xt = ux(rng);
    d.x_obs[i] = xt + 0.05 * nd(rng);
    // curved relation; the inverse fit leaves structured residuals
    d.y_obs[i] = xt + 0.8 * xt * xt + 0.1 * nd(rng);
  }
  return d;
}

}  // namespace

TEST_CASE("swap_axes exchanges columns and blocks") {
  Dataset d;
  d.x_obs.resize(2);
  d.x_obs << 1, 2;
  d.y_obs.resize(2);
  d.y_obs << 3, 4;
  d.x_err.resize(2);
  d.x_err << 0.1, 0.2;
  d.y_err.resize(2);
  d.y_err << 0.3, 0.4;
  const Dataset s = swap_axes(d);
  CHECK(s.x_obs[0] == 3);
  CHECK(s.y_obs[1] == 2);
  CHECK(s.x_err[0] == 0.3);
  CHECK(s.y_err[1] == 0.2);

  Dataset f;
  f.x_obs = d.x_obs;
  f.y_obs = d.y_obs;
  f.full_cov = Eigen::MatrixXd::Zero(4, 4);
  f.full_cov << 1, 0, 5, 0,
                0, 2, 0, 6,
                5, 0, 3, 0,
                0, 6, 0, 4;
  const Dataset g = swap_axes(f);
  CHECK(g.full_cov(0, 0) == 3);   // yy -> xx
  CHECK(g.full_cov(2, 2) == 1);   // xx -> yy
  CHECK(g.full_cov(0, 2) == 5);   // yx -> xy
}

TEST_CASE("forward/inverse halves swap exactly when the input is swapped") {
  MockConfig cfg;
  cfg.n = 150;
  cfg.A = 2.0;
  cfg.sigma_int = 1.0;
  cfg.mean_sigma_x = 0.5;
  cfg.seed = 13;
  const MockData md = gen_mock(cfg);

  const CausalityReport a =
      assess_causality(md.data, linear_model(), linear_model(), mnr_spec());
  const CausalityReport b = assess_causality(swap_axes(md.data), linear_model(),
                                             linear_model(), mnr_spec());
  REQUIRE(a.forward.ok);
  REQUIRE(a.inverse.ok);
  CHECK(a.forward.pearson == doctest::Approx(b.inverse.pearson).epsilon(1e-10));
  CHECK(a.inverse.spearman ==
        doctest::Approx(b.forward.spearman).epsilon(1e-10));
}

TEST_CASE("recommendation is invariant under affine axis rescaling") {
  const Dataset d = additive_noise_data(17);
  const CausalityReport base =
      assess_causality(d, linear_model(), linear_model(), mnr_spec());

  Dataset scaled = d;
  scaled.y_obs = 3.0 * d.y_obs.array() + 2.0;
  scaled.y_err = 3.0 * d.y_err;
  const CausalityReport after =
      assess_causality(scaled, linear_model(), linear_model(), mnr_spec());
  CHECK(to_string(base.recommendation) == to_string(after.recommendation));
}

TEST_CASE("additive-noise construction recommends the generating direction") {
  // y = a exp(b x) + noise with tiny x-errors; fitting the same model class
  // in the inverse direction leaves strongly structured residuals
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ux(0.2, 2.5);
  const int n = 400;
  Dataset d;
  d.x_obs.resize(n);
  d.y_obs.resize(n);
  d.x_err = Eigen::VectorXd::Constant(n, 0.02);
  d.y_err = Eigen::VectorXd::Constant(n, 0.15);
  for (int i = 0; i < n; ++i) {
    const double xt = ux(rng);
    d.x_obs[i] = xt + 0.02 * nd(rng);
    d.y_obs[i] = 1.5 * std::exp(0.9 * xt) + 0.15 * nd(rng);
  }
  LikelihoodSpec unif;
  unif.method = Method::unif;
  const ModelFunction model = expression_model("a * exp(b * x)");
  const CausalityReport rep = assess_causality(d, model, model, unif);
  REQUIRE(rep.forward.ok);
  REQUIRE(rep.inverse.ok);
  const double fwd =
      std::max(std::abs(rep.forward.pearson), std::abs(rep.forward.spearman));
  const double inv =
      std::max(std::abs(rep.inverse.pearson), std::abs(rep.inverse.spearman));
  CHECK(fwd < inv);
  CHECK(rep.recommendation == Direction::x_independent);
}

TEST_CASE("symmetric joint Gaussian data is inconclusive") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  Dataset d;
  const int n = 500;
  d.x_obs.resize(n);
  d.y_obs.resize(n);
  d.x_err = Eigen::VectorXd::Constant(n, 0.2);
  d.y_err = Eigen::VectorXd::Constant(n, 0.2);
  for (int i = 0; i < n; ++i) {
    // exchangeable construction: correlated pair with symmetric roles
    const double common = nd(rng);
    d.x_obs[i] = common + 0.8 * nd(rng);
    d.y_obs[i] = common + 0.8 * nd(rng);
  }
  const CausalityReport rep =
      assess_causality(d, linear_model(), linear_model(), mnr_spec());
  CHECK(rep.recommendation == Direction::inconclusive);
}

TEST_CASE("fit failure in one direction yields a partial report") {
  // log model: fine forward, undefined on the inverse abscissa (negative y)
  Dataset d;
  const int n = 20;
  d.x_obs.resize(n);
  d.y_obs.resize(n);
  for (int i = 0; i < n; ++i) {
    d.x_obs[i] = 1.0 + 0.1 * i;
    d.y_obs[i] = std::log(d.x_obs[i]) - 0.5;  // negative near x = 1
  }
  d.x_err = Eigen::VectorXd::Constant(n, 0.05);
  d.y_err = Eigen::VectorXd::Constant(n, 0.05);
  const ModelFunction model = expression_model("K * log(x) + C");
  const CausalityReport rep =
      assess_causality(d, model, model, mnr_spec());
  CHECK(rep.forward.ok);
  CHECK_FALSE(rep.inverse.ok);
  CHECK_FALSE(rep.inverse.error.empty());
  CHECK(rep.recommendation == Direction::inconclusive);
}
