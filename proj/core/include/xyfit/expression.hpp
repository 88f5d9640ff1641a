#pragma once

#include <memory>
#include <string>
#include <vector>

#include "xyfit/model.hpp"

namespace xyfit {

// Pointwise model compiled from an expression such as "A * exp(x / L) + C".
// Supported: + - * / ^, unary minus, exp(), log(), sqrt(), numeric literals,
// the abscissa variable 'x', and free parameter names (collected in order of
// first appearance). Derivatives with respect to x and every parameter are
// produced by symbolic differentiation of the expression tree; a
// finite-difference fallback covers models where that is disabled.
class Expression {
 public:
  static Expression parse(const std::string& source);

  const std::vector<std::string>& param_names() const { return params_; }

  double eval(double x, const Eigen::VectorXd& theta) const;
  // d/dx, d/dtheta_j, d^2/(dx dtheta_j) as compiled expressions
  Expression deriv_x() const;
  Expression deriv_param(int j) const;

  std::string to_string() const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::vector<std::string> params_;
};

// Builds a ModelFunction (with analytic parameter derivatives) from an
// expression string. With use_symbolic_derivatives = false the derivatives
// come from central finite differences instead.
ModelFunction expression_model(const std::string& source,
                               bool use_symbolic_derivatives = true);

}  // namespace xyfit
