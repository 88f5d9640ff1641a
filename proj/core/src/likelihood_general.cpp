#include <cmath>
#include <sstream>
#include <stdexcept>

#include "xyfit/likelihood.hpp"

namespace xyfit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::LLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& M,
                                            const char* name) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    std::ostringstream os;
    os << "loglike_general: " << name
       << " is not positive definite (eigenvalue range [" << lo << ", " << hi
       << "])";
    throw std::runtime_error(os.str());
  }
  return llt;
}

double logdet(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

double loglike_general(Method method, const Dataset& d,
                       const ModelFunction& model, const Eigen::VectorXd& theta,
                       double sigma_int,
                       const std::optional<LatentPrior>& latent_prior) {
  const Eigen::Index n = d.n();
  const CovarianceBlocks blocks = assemble_covariance(d, sigma_int);

  const Eigen::VectorXd f = model.eval(d.x_obs, theta);
  Eigen::MatrixXd G;
  if (model.dense_jacobian) {
    G = model.dense_jacobian(d.x_obs, theta);
  } else {
    G = model.deriv(d.x_obs, theta).asDiagonal();
  }
  const Eigen::VectorXd r = f - d.y_obs;

  switch (method) {
    case Method::unif:
    case Method::prof: {
      const Eigen::MatrixXd GSxxGt = G * blocks.xx * G.transpose();
      const Eigen::MatrixXd SyxGt = blocks.xy.transpose() * G.transpose();
      const Eigen::MatrixXd D =
          blocks.yy + GSxxGt - SyxGt - SyxGt.transpose();
      const auto lltD = factor_or_throw(D, "D");
      const double quad = r.dot(lltD.solve(r));

      if (method == Method::unif)
        return -0.5 * (n * kLog2Pi + logdet(lltD) + quad);

      // prof normalisation: log det of the y-block Schur complement of the
      // (scatter-augmented) full covariance. For uncorrelated x/y blocks this
      // is just Sigma_yy, which keeps the reduction to the diagonal kernel
      // exact; the x-block determinant carries no fit parameters.
      Eigen::MatrixXd S;
      if (blocks.xy.isZero(0.0)) {
        S = blocks.yy;
      } else {
        const auto lltXX = factor_or_throw(blocks.xx, "Sigma_xx");
        S = blocks.yy - blocks.xy.transpose() * lltXX.solve(blocks.xy);
      }
      const auto lltS = factor_or_throw(S, "Sigma_yy Schur complement");
      return -0.5 * (n * kLog2Pi + logdet(lltS) + quad);
    }

    case Method::mnr: {
      if (!latent_prior)
        throw std::invalid_argument("loglike_general: mnr needs a latent prior");
      Eigen::VectorXd mu;
      if (latent_prior->mu.size() == 1)
        mu = Eigen::VectorXd::Constant(n, latent_prior->mu[0]);
      else if (latent_prior->mu.size() == n)
        mu = latent_prior->mu;
      else
        throw std::invalid_argument(
            "loglike_general: latent prior mean must be scalar or length N");

      Eigen::MatrixXd W;
      if (latent_prior->W.size() == 1)
        W = latent_prior->W(0, 0) * Eigen::MatrixXd::Identity(n, n);
      else if (latent_prior->W.rows() == n && latent_prior->W.cols() == n)
        W = latent_prior->W;
      else
        throw std::invalid_argument(
            "loglike_general: W must be 1x1 or N x N");

      const Eigen::MatrixXd GW = G * W;
      Eigen::MatrixXd M(2 * n, 2 * n);
      M.topLeftCorner(n, n) = blocks.xx + W;
      M.topRightCorner(n, n) = blocks.xy + GW.transpose();
      M.bottomLeftCorner(n, n) = blocks.xy.transpose() + GW;
      M.bottomRightCorner(n, n) = blocks.yy + GW * G.transpose();

      Eigen::VectorXd rho(2 * n);
      rho.head(n) = mu - d.x_obs;
      rho.tail(n) = f + G * (mu - d.x_obs) - d.y_obs;

      const auto lltM = factor_or_throw(M, "M");
      const double quad = rho.dot(lltM.solve(rho));
      return -0.5 * (2.0 * n * kLog2Pi + logdet(lltM) + quad);
    }

    case Method::gmm:
      throw std::invalid_argument(
          "loglike_general: gmm is only available on the diagonal path");
  }
  throw std::logic_error("loglike_general: unknown method");
}

}  // namespace xyfit
