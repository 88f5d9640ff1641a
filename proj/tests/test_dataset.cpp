#include <doctest.h>

#include "xyfit/dataset.hpp"

using namespace xyfit;

namespace {

Dataset two_points() {
  Dataset d;
  d.x_obs.resize(2);
  d.x_obs << 0, 1;
  d.y_obs.resize(2);
  d.y_obs << 1, 3;
  d.x_err.resize(2);
  d.x_err << 0.1, 0.1;
  d.y_err.resize(2);
  d.y_err << 0.2, 0.2;
  return d;
}

}  // namespace

TEST_CASE("minimal well-formed dataset validates") {
  const Dataset d = validate_dataset(two_points());
  CHECK(d.n() == 2);
  CHECK_FALSE(d.has_full_cov());
}

TEST_CASE("negative uncertainty is rejected") {
  Dataset d = two_points();
  d.x_err[1] = -0.1;
  CHECK_THROWS_WITH_AS(validate_dataset(d),
                       doctest::Contains("negative uncertainty"),
                       std::invalid_argument);
}

TEST_CASE("asymmetric covariance is rejected") {
  Dataset d = two_points();
  d.x_err.resize(0);
  d.y_err.resize(0);
  d.full_cov = Eigen::MatrixXd::Identity(4, 4);
  d.full_cov(0, 1) = 1e-3;  // no matching (1,0) entry
  CHECK_THROWS_WITH_AS(validate_dataset(d), doctest::Contains("not symmetric"),
                       std::invalid_argument);
}

TEST_CASE("non-PSD covariance reports the offending eigenvalue") {
  Dataset d = two_points();
  d.x_err.resize(0);
  d.y_err.resize(0);
  d.full_cov = Eigen::MatrixXd::Identity(4, 4);
  d.full_cov(0, 0) = -2.0;
  CHECK_THROWS_WITH_AS(validate_dataset(d), doctest::Contains("-2"),
                       std::invalid_argument);
}

TEST_CASE("one point is too few") {
  Dataset d;
  d.x_obs.resize(1);
  d.x_obs << 0;
  d.y_obs.resize(1);
  d.y_obs << 1;
  d.x_err = d.y_err = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(validate_dataset(d), std::invalid_argument);
}

TEST_CASE("both or neither error representation is rejected") {
  Dataset d = two_points();
  d.full_cov = Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(validate_dataset(d), std::invalid_argument);
  Dataset e = two_points();
  e.x_err.resize(0);
  e.y_err.resize(0);
  CHECK_THROWS_AS(validate_dataset(e), std::invalid_argument);
}

TEST_CASE("covariance assembly adds sigma_int^2 to the yy diagonal only") {
  Dataset d = two_points();
  d.y_err << 2, 2;
  d = validate_dataset(d);

  const CovarianceBlocks b0 = assemble_covariance(d, 0.0);
  CHECK(b0.yy(0, 0) == doctest::Approx(4.0));
  CHECK(b0.yy(1, 1) == doctest::Approx(4.0));

  const CovarianceBlocks b2 = assemble_covariance(d, 2.0);
  CHECK(b2.yy(0, 0) == doctest::Approx(8.0));
  CHECK(b2.yy(1, 1) == doctest::Approx(8.0));
  CHECK(b2.xy.isZero(0.0));
  CHECK(b2.xx(0, 0) == doctest::Approx(0.01));
}

TEST_CASE("full-matrix assembly leaves off-diagonals untouched") {
  Dataset d = two_points();
  d.x_err.resize(0);
  d.y_err.resize(0);
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(4, 4) * 2.0;
  S(2, 3) = S(3, 2) = 0.5;
  S(0, 2) = S(2, 0) = 0.3;
  d.full_cov = S;
  d = validate_dataset(d);

  const CovarianceBlocks b = assemble_covariance(d, 1.0);
  CHECK(b.yy(0, 0) == doctest::Approx(3.0));  // 2 + 1
  CHECK(b.yy(1, 1) == doctest::Approx(3.0));
  CHECK(b.yy(0, 1) == doctest::Approx(0.5));
  CHECK(b.xy(0, 0) == doctest::Approx(0.3));
  CHECK(b.xx(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("assembly is monotone in sigma_int and round-trips diagonals") {
  Dataset d = two_points();
  d = validate_dataset(d);
  double prev = -1.0;
  for (double s : {0.0, 0.5, 1.0, 3.0}) {
    const CovarianceBlocks b = assemble_covariance(d, s);
    CHECK(b.yy(0, 0) > prev);
    prev = b.yy(0, 0);
    // xx and xy untouched
    CHECK(b.xx(0, 0) == doctest::Approx(0.01));
    CHECK(b.xy.isZero(0.0));
  }
  // round-trip: extracted diagonals reproduce the inputs exactly
  const CovarianceBlocks b = assemble_covariance(d, 0.0);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::sqrt(b.xx(i, i)) == d.x_err[i]);
    CHECK(std::sqrt(b.yy(i, i)) == d.y_err[i]);
  }
}
