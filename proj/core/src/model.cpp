#include "xyfit/model.hpp"

#include <stdexcept>

namespace xyfit {

ModelFunction linear_model() {
  ModelFunction m;
  m.n_params = 2;
  m.param_names = {"A", "B"};
  m.eval = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th) {
    return (th[0] * x.array() + th[1]).matrix().eval();
  };
  m.deriv = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th) {
    return Eigen::VectorXd::Constant(x.size(), th[0]).eval();
  };
  m.param_jac = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    Eigen::MatrixXd J(x.size(), 2);
    J.col(0) = x;
    J.col(1).setOnes();
    return J;
  };
  m.slope_param_jac = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(x.size(), 2);
    J.col(0).setOnes();
    return J;
  };
  return m;
}

Linearised linearise(const ModelFunction& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& theta) {
  if (theta.size() != model.n_params)
    throw std::invalid_argument("linearise: parameter count mismatch");
  Linearised lin;
  lin.f = model.eval(x, theta);
  lin.slope = model.deriv(x, theta);
  if (lin.f.size() != x.size() || lin.slope.size() != x.size())
    throw std::runtime_error("linearise: model returned wrong length");
  lin.intercept = lin.f - lin.slope.cwiseProduct(x);
  return lin;
}

}  // namespace xyfit
