#pragma once

#include <string>

#include "xyfit/dataset.hpp"
#include "xyfit/inference.hpp"
#include "xyfit/model.hpp"
#include "xyfit/types.hpp"

namespace xyfit {

// Regression-direction assessment: fit the forward and inverse relations,
// correlate the normalised residuals of each against its independent
// variable, and recommend the direction with the weaker residual correlation.
// The recommendation is advisory; the correlations may be non-monotonic.
struct DirectionFit {
  bool ok = false;
  std::string error;
  ParamVector params;
  double loglike = 0.0;
  Eigen::VectorXd residuals;   // (y - f(x)) / sqrt(s_y^2 + slope^2 sx^2)
  Eigen::VectorXd independent; // the abscissa the residuals are tested against
  double pearson = 0.0;
  double spearman = 0.0;
};

enum class Direction { x_independent, y_independent, inconclusive };

std::string to_string(Direction d);

struct CausalityReport {
  DirectionFit forward;
  DirectionFit inverse;
  Direction recommendation = Direction::inconclusive;
  double margin = 0.0;  // gap between the two max |coefficients|
};

// The inverse dataset swaps the roles of the observed columns and their
// uncertainties. decision margin: recommend a direction only when the max
// |coefficient| gap exceeds 0.05.
Dataset swap_axes(const Dataset& d);

CausalityReport assess_causality(const Dataset& d,
                                 const ModelFunction& model_fwd,
                                 const ModelFunction& model_inv,
                                 const LikelihoodSpec& spec);

}  // namespace xyfit
