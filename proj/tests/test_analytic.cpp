#include <doctest.h>

#include <cmath>
#include <random>

#include "xyfit/analytic.hpp"
#include "xyfit/mock.hpp"

using namespace xyfit;

TEST_CASE("two-point moments") {
  Eigen::VectorXd x(2), y(2);
  x << 0, 2;
  y << 1, 5;
  const SampleMoments m = moments(x, y);
  CHECK(m.mean_x == doctest::Approx(1.0));
  CHECK(m.var_x == doctest::Approx(1.0));
  CHECK(m.cov_xy == doctest::Approx(2.0));
}

TEST_CASE("degenerate abscissa has zero variance and covariance") {
  Eigen::VectorXd x(3), y(3);
  x << 1, 1, 1;
  y << 4, -2, 0.5;
  const SampleMoments m = moments(x, y);
  CHECK(m.var_x == doctest::Approx(0.0));
  CHECK(m.cov_xy == doctest::Approx(0.0));
}

TEST_CASE("large-sample variance approaches 1 for standard normal draws") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  const int n = 100000;
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = nd(rng);
    y[i] = nd(rng);
  }
  CHECK(moments(x, y).var_x == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("unif MLE on a noiseless line") {
  Eigen::VectorXd x(4), y(4);
  x << 0, 1, 2, 5;
  y = 2.0 * x.array() + 1.0;
  const UnifMle r = unif_mle(moments(x, y), {0.0, 0.0});
  CHECK(r.A == doctest::Approx(2.0));
  CHECK(r.B == doctest::Approx(1.0));
  CHECK(r.s2 == doctest::Approx(0.0));
}

TEST_CASE("unif MLE exposes the negative-variance pathology") {
  Eigen::VectorXd x(4), y(4);
  x << 0, 1, 2, 5;
  y = 2.0 * x.array() + 1.0;
  const SampleMoments m = moments(x, y);
  const UnifMle r = unif_mle(m, {1.0, 0.0});
  CHECK(r.s2 == doctest::Approx(-r.A * r.A * 1.0));
  CHECK(r.s2 < 0.0);
}

TEST_CASE("unif MLE requires spread in x") {
  Eigen::VectorXd x(3), y(3);
  x << 1, 1, 1;
  y << 0, 1, 2;
  CHECK_THROWS_WITH_AS(unif_mle(moments(x, y), {0.0, 0.0}),
                       doctest::Contains("degenerate abscissa"),
                       std::invalid_argument);
}

TEST_CASE("asymptotic unif biases") {
  SUBCASE("no x-error, no bias") {
    const UnifBias b = unif_bias(5.0, 8.0, 64.0, 0.0);
    CHECK(b.dA == 0.0);
    CHECK(b.dB == 0.0);
    CHECK(b.ds2 == 0.0);
  }
  SUBCASE("zero slope, no bias") {
    const UnifBias b = unif_bias(0.0, 8.0, 64.0, 1.0);
    CHECK(b.dA == 0.0);
    CHECK(b.dB == 0.0);
    CHECK(b.ds2 == 0.0);
  }
  SUBCASE("worked values") {
    const UnifBias b = unif_bias(5.0, 8.0, 64.0, 1.0);
    CHECK(b.dA == doctest::Approx(-5.0 / 65.0));
    CHECK(b.dB == doctest::Approx(5.0 * 8.0 / 65.0));
    CHECK(b.ds2 == doctest::Approx(25.0 * 64.0 / (65.0 * 65.0)));
  }
}

TEST_CASE("mnr MLE reduces to unif at sigma_x = 0") {
  MockConfig cfg;
  cfg.n = 500;
  cfg.mean_sigma_x = 0.0;
  cfg.seed = 5;
  const MockData md = gen_mock(cfg);
  const SampleMoments m = moments(md.data);
  const UnifMle u = unif_mle(m, {0.0, 2.0});
  const MnrMle r = mnr_mle(m, {0.0, 2.0});
  CHECK(r.A == doctest::Approx(u.A));
  CHECK(r.B == doctest::Approx(u.B));
  CHECK(r.s2 == doctest::Approx(u.s2));
  CHECK(r.mu == doctest::Approx(m.mean_x));
  CHECK(r.w2 == doctest::Approx(m.var_x));
}

TEST_CASE("mnr MLE rejects var(x) below the x-error variance") {
  Eigen::VectorXd x(3), y(3);
  x << 0, 0.1, 0.2;
  y << 0, 1, 2;
  CHECK_THROWS_WITH_AS(mnr_mle(moments(x, y), {5.0, 1.0}),
                       doctest::Contains("not exceeding"),
                       std::invalid_argument);
}

TEST_CASE("prof MLE pins sigma_int to zero at the fiducial mock settings") {
  int boundary = 0;
  for (int trial = 0; trial < 10; ++trial) {
    MockConfig cfg;  // fiducial: A=5 B=1 sigma_int=2 sx=1 sy=2 exp(8) N=1000
    cfg.seed = 100 + trial;
    const MockData md = gen_mock(cfg);
    const ProfMle r = prof_mle(moments(md.data), {1.0, 2.0});
    if (r.report.boundary) {
      ++boundary;
      CHECK(r.s2 == doctest::Approx(4.0));
    }
  }
  CHECK(boundary >= 9);
}

TEST_CASE("prof MLE at sigma_x = 0 is ordinary least squares with scatter") {
  MockConfig cfg;
  cfg.n = 2000;
  cfg.mean_sigma_x = 0.0;
  cfg.sigma_int = 4.0;  // keep the root comfortably above sigma_y^2
  cfg.seed = 42;
  const MockData md = gen_mock(cfg);
  const SampleMoments m = moments(md.data);
  const ProfMle r = prof_mle(m, {0.0, 2.0});
  CHECK(r.A == doctest::Approx(m.cov_xy / m.var_x).epsilon(1e-10));
  CHECK(r.s2 ==
        doctest::Approx(m.var_y - m.cov_xy * m.cov_xy / m.var_x).epsilon(1e-10));
  CHECK(r.B == doctest::Approx(m.mean_y - r.A * m.mean_x));
}

TEST_CASE("prof MLE satisfies the stationarity conditions or sits on the boundary") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int interior_seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    MockConfig cfg;
    cfg.A = -8.0 + 16.0 * u01(rng);
    cfg.sigma_int = 12.0 * u01(rng);
    cfg.mean_sigma_x = 3.0 * u01(rng);
    cfg.n = 400;
    cfg.seed = 9000 + trial;
    const MockData md = gen_mock(cfg);
    const SampleMoments m = moments(md.data);
    const HomoscedasticErrors e{cfg.mean_sigma_x, 2.0};
    ProfMle r;
    try {
      r = prof_mle(m, e);
    } catch (const std::exception&) {
      continue;
    }
    if (r.report.boundary) {
      CHECK(r.s2 == doctest::Approx(e.sigma_y * e.sigma_y));
      continue;
    }
    ++interior_seen;
    // residuals of the two stationarity equations, normalised
    const double sx2 = e.sigma_x * e.sigma_x;
    const double quad = m.var_y + r.A * r.A * m.var_x - 2.0 * r.A * m.cov_xy;
    const double lhs_s = (r.s2 + r.A * r.A * sx2) * (r.s2 + r.A * r.A * sx2);
    const double rhs_s = r.s2 * quad;
    CHECK(std::abs(lhs_s - rhs_s) <= 1e-8 * std::max(std::abs(lhs_s), 1.0));
    const double lhs_a =
        (r.A * m.var_x - m.cov_xy) * (r.s2 + r.A * r.A * sx2);
    const double rhs_a = r.A * sx2 * quad;
    CHECK(std::abs(lhs_a - rhs_a) <=
          1e-8 * std::max({std::abs(lhs_a), std::abs(rhs_a), 1.0}));
  }
  CHECK(interior_seen > 0);  // the sweep must exercise the cubic branch
}

TEST_CASE("prof MLE argmax property against its own candidates") {
  std::mt19937_64 rng(512);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    MockConfig cfg;
    cfg.A = -5.0 + 10.0 * u01(rng);
    cfg.sigma_int = 10.0 * u01(rng);
    cfg.n = 300;
    cfg.seed = 777 + trial;
    const MockData md = gen_mock(cfg);
    const SampleMoments m = moments(md.data);
    const HomoscedasticErrors e{1.0, 2.0};
    const ProfMle r = prof_mle(m, e);
    const double best = prof_objective(r.A, r.s2, m, e.sigma_x);
    // no nearby perturbation of (A, s2 >= sigma_y^2) may beat the returned point
    for (double da : {-1e-4, 1e-4})
      for (double ds : {-1e-4, 0.0, 1e-4}) {
        const double s2 = r.s2 + ds;
        if (s2 < e.sigma_y * e.sigma_y) continue;
        CHECK(prof_objective(r.A + da, s2, m, e.sigma_x) <= best + 1e-9);
      }
  }
}
