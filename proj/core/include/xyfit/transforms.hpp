#pragma once

#include <map>
#include <string>
#include <vector>

#include "xyfit/model.hpp"
#include "xyfit/types.hpp"

namespace xyfit {

// Flat view of the sampled parameters for one (likelihood spec, model) pair,
// with the bijection to an unconstrained space used by the samplers:
//   - unbounded scalars: identity
//   - positive scalars (sigma_int, widths, hierarchy scales): log
//   - user-bounded scalars: scaled logistic
//   - gmm means: ordered transform (first free, increments log-positive)
//   - gmm weights: stick-breaking onto the simplex (K-1 free coordinates)
// to_constrained accumulates the log-Jacobian so that densities sampled in z
// correspond to the intended densities over the constrained parameters.
class ParameterSpace {
 public:
  using Bounds = std::map<std::string, std::pair<double, double>>;

  static ParameterSpace create(const LikelihoodSpec& spec,
                               const ModelFunction& model,
                               const Bounds& bounds = {});

  int constrained_dim() const { return static_cast<int>(names_.size()); }
  int unconstrained_dim() const { return unconstrained_dim_; }
  const std::vector<std::string>& names() const { return names_; }

  Eigen::VectorXd pack(const ParamVector& pv) const;
  ParamVector unpack(const Eigen::VectorXd& c) const;

  Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& c) const;
  Eigen::VectorXd to_constrained(const Eigen::VectorXd& z,
                                 double* log_jacobian = nullptr) const;

  // dlogp/dz given dlogp/dc at c = to_constrained(z), including the
  // log-Jacobian derivative.
  Eigen::VectorXd grad_to_unconstrained(const Eigen::VectorXd& z,
                                        const Eigen::VectorXd& grad_c) const;

  // Finite prior bounds per constrained coordinate (NaN when unbounded on
  // that side); used for the edge-of-prior warning.
  std::pair<double, double> bound(int constrained_index) const;

  const LikelihoodSpec& spec() const { return spec_; }

 private:
  struct Block {
    enum class Kind { real, positive, interval, ordered, simplex } kind;
    int size = 1;       // constrained coordinates
    double lo = 0, hi = 0;
  };

  LikelihoodSpec spec_;
  int n_theta_ = 0;
  bool has_sigma_int_ = true;
  std::vector<Block> blocks_;
  std::vector<std::string> names_;
  int unconstrained_dim_ = 0;
};

}  // namespace xyfit
