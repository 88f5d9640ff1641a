#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace xyfit {

// Parametric curve f(x, theta) evaluated pointwise, plus its x-derivative
// (the diagonal of the Jacobian used to linearise the fit around x_obs).
//
// eval and deriv are required. The param_* members are optional; when present
// they enable analytic likelihood gradients, otherwise the samplers fall back
// to finite differences. dense_jacobian is only needed for coupled models
// where y_t^(i) depends on more than one x value.
struct ModelFunction {
  int n_params = 0;
  std::vector<std::string> param_names;

  using EvalFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& theta)>;
  using JacFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& theta)>;

  EvalFn eval;    // f(x_i, theta) per point
  EvalFn deriv;   // df/dx at x_i per point

  JacFn param_jac;        // N x n_params, df/dtheta_j at x_i
  JacFn slope_param_jac;  // N x n_params, d(df/dx)/dtheta_j at x_i
  JacFn dense_jacobian;   // N x N, full G for coupled models

  bool has_param_derivatives() const {
    return static_cast<bool>(param_jac) && static_cast<bool>(slope_param_jac);
  }
};

// f = A x + B with theta = (A, B).
ModelFunction linear_model();

// Pointwise linearisation f(x_t) ~ f(x_o) + slope * (x_t - x_o). The
// effective intercept is f(x_o) - slope * x_o, which reduces to B for the
// straight line.
struct Linearised {
  Eigen::VectorXd f;          // f(x_obs, theta)
  Eigen::VectorXd slope;      // df/dx at x_obs
  Eigen::VectorXd intercept;  // f - slope .* x_obs
};

Linearised linearise(const ModelFunction& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& theta);

}  // namespace xyfit
