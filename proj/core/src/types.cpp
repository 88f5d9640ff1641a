#include "xyfit/types.hpp"

#include <cmath>
#include <stdexcept>

namespace xyfit {

std::string to_string(Method m) {
  switch (m) {
    case Method::unif: return "unif";
    case Method::prof: return "prof";
    case Method::mnr: return "mnr";
    case Method::gmm: return "gmm";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "unif") return Method::unif;
  if (s == "prof") return Method::prof;
  if (s == "mnr") return Method::mnr;
  if (s == "gmm") return Method::gmm;
  throw std::invalid_argument("unknown method '" + s +
                              "' (expected unif|prof|mnr|gmm)");
}

void LikelihoodSpec::validate() const {
  if (n_gauss < 1)
    throw std::invalid_argument("likelihood spec: n_gauss must be >= 1");
  if (method == Method::mnr && n_gauss != 1)
    throw std::invalid_argument("likelihood spec: mnr requires n_gauss = 1");
  if (method != Method::gmm && hyperprior == HyperPrior::hierarchical)
    throw std::invalid_argument(
        "likelihood spec: hierarchical hyperprior only valid for gmm");
}

void ParamVector::validate(const LikelihoodSpec& spec) const {
  if (!theta.allFinite() || !std::isfinite(sigma_int))
    throw std::invalid_argument("params: non-finite value");
  if (sigma_int < 0)
    throw std::invalid_argument("params: sigma_int must be >= 0");
  const bool wants_components =
      spec.method == Method::mnr || spec.method == Method::gmm;
  const size_t expect =
      spec.method == Method::gmm ? static_cast<size_t>(spec.n_gauss)
      : wants_components         ? 1u
                                 : 0u;
  if (components.size() != expect)
    throw std::invalid_argument("params: wrong number of mixture components");
  double wsum = 0.0;
  for (size_t k = 0; k < components.size(); ++k) {
    if (!(components[k].w > 0))
      throw std::invalid_argument("params: component width must be positive");
    if (k > 0 && components[k].mu < components[k - 1].mu)
      throw std::invalid_argument("params: component means must be ordered");
    wsum += components[k].weight;
  }
  if (!components.empty() && std::abs(wsum - 1.0) > 1e-8)
    throw std::invalid_argument("params: weights must sum to 1");
  if (hierarchy && (!(hierarchy->u2_star > 0) || !(hierarchy->w2_star > 0)))
    throw std::invalid_argument("params: hierarchy scales must be positive");
}

}  // namespace xyfit
