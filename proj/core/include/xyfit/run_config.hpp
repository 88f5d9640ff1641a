#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xyfit/dataset.hpp"
#include "xyfit/inference.hpp"
#include "xyfit/mock.hpp"
#include "xyfit/model.hpp"
#include "xyfit/types.hpp"

namespace xyfit {

// Declarative run description parsed from a key = value file ('#' comments).
// Command-line flags override individual keys.
struct RunConfig {
  // data
  std::string data_path;
  std::string x_col = "x", y_col = "y", sx_col = "sx", sy_col = "sy";
  std::string cov_path;  // optional 2N x 2N matrix CSV

  // model: "linear", "powerlaw-log" (linear in log-space with the intercept
  // also reported as 1 - b = 10^B), or any expression string
  std::string model = "linear";

  LikelihoodSpec likelihood;
  SamplerConfig sampler;
  std::string out_dir = ".";

  // bias-bench
  std::string bench;  // "sweep" | "grid" | "gmm-study"
  std::string sweep_param = "sigma_x";
  int grid_points = 0;  // 0 = default per bench kind
  int replicates = 30;
  std::vector<Method> bench_methods{Method::mnr, Method::unif, Method::prof};
  int ng_min = 1, ng_max = 3;
  MockConfig mock;  // cell/fiducial values for the benches

  std::map<std::string, std::string> raw;  // canonical key -> value

  uint64_t config_hash() const;
};

RunConfig parse_run_config(const std::string& path);

// Applies one "key=value" override (same grammar as the file).
void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value);

// Loads the dataset referenced by the config (CSV columns, optional matrix
// covariance file replacing the per-point error columns).
Dataset load_dataset(const RunConfig& cfg);

struct ResolvedModel {
  ModelFunction fn;
  bool report_one_minus_b = false;  // powerlaw-log: also derive 1-b = 10^B
};

ResolvedModel resolve_model(const RunConfig& cfg);

}  // namespace xyfit
