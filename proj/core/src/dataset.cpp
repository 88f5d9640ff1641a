#include "xyfit/dataset.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace xyfit {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("dataset: " + msg);
}

}  // namespace

Dataset validate_dataset(Dataset d) {
  const Eigen::Index n = d.x_obs.size();
  if (n < 2) fail("need at least 2 points, got " + std::to_string(n));
  if (d.y_obs.size() != n) fail("x/y length mismatch");
  if (!d.x_obs.allFinite() || !d.y_obs.allFinite()) fail("non-finite observation");

  const bool per_point = d.x_err.size() > 0 || d.y_err.size() > 0;
  if (per_point == d.has_full_cov())
    fail("exactly one of per-point errors or full covariance must be given");

  if (per_point) {
    if (d.x_err.size() != n || d.y_err.size() != n)
      fail("error array length mismatch");
    if (!d.x_err.allFinite() || !d.y_err.allFinite())
      fail("non-finite uncertainty");
    if ((d.x_err.array() < 0).any() || (d.y_err.array() < 0).any())
      fail("negative uncertainty");
    return d;
  }

  const Eigen::MatrixXd& S = d.full_cov;
  if (S.rows() != 2 * n || S.cols() != 2 * n)
    fail("full covariance must be 2N x 2N");
  if (!S.allFinite()) fail("non-finite covariance entry");

  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * scale) {
    std::ostringstream os;
    os << "covariance not symmetric (max asymmetry " << asym << ")";
    fail(os.str());
  }

  // PSD: symmetric factorisation with a small tolerance on the pivots.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(0.5 * (S + S.transpose()));
  const double min_pivot = ldlt.vectorD().minCoeff();
  if (ldlt.info() != Eigen::Success || min_pivot < -1e-10 * scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()),
                                                      Eigen::EigenvaluesOnly);
    std::ostringstream os;
    os << "covariance not positive semi-definite (smallest eigenvalue "
       << es.eigenvalues().minCoeff() << ")";
    fail(os.str());
  }
  return d;
}

CovarianceBlocks assemble_covariance(const Dataset& d, double sigma_int) {
  const Eigen::Index n = d.n();
  CovarianceBlocks b;
  if (d.has_full_cov()) {
    b.xx = d.full_cov.topLeftCorner(n, n);
    b.xy = d.full_cov.topRightCorner(n, n);
    b.yy = d.full_cov.bottomRightCorner(n, n);
  } else {
    b.xx = d.x_err.array().square().matrix().asDiagonal();
    b.xy = Eigen::MatrixXd::Zero(n, n);
    b.yy = d.y_err.array().square().matrix().asDiagonal();
  }
  b.yy.diagonal().array() += sigma_int * sigma_int;
  return b;
}

}  // namespace xyfit
