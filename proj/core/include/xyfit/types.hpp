#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace xyfit {

enum class Method { unif, prof, mnr, gmm };

enum class HyperPrior { uniform_ordered, hierarchical };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

// Which latent-x marginalisation to use, and the hyperprior configuration for
// the mixture case. n_gauss and hyperprior are only meaningful under gmm.
struct LikelihoodSpec {
  Method method = Method::mnr;
  int n_gauss = 1;
  HyperPrior hyperprior = HyperPrior::uniform_ordered;
  bool include_intrinsic_scatter = true;

  void validate() const;  // throws std::invalid_argument
};

// One Gaussian of the latent-x hyperprior.
struct GmmComponent {
  double weight = 1.0;
  double mu = 0.0;
  double w = 1.0;  // width (standard deviation), > 0
};

struct Hierarchy {
  double mu_star = 0.0;
  double u2_star = 1.0;  // variance of the prior on component means
  double w2_star = 1.0;  // scale of the scaled-inv-chi^2 on component widths
};

// Full parameter point. components holds the single (mu, w) pair for mnr and
// the N_g mixture for gmm; it is empty for unif/prof. Component weights sum
// to one and means are kept non-decreasing.
struct ParamVector {
  Eigen::VectorXd theta;
  double sigma_int = 0.0;
  std::vector<GmmComponent> components;
  std::optional<Hierarchy> hierarchy;

  void validate(const LikelihoodSpec& spec) const;
};

}  // namespace xyfit
