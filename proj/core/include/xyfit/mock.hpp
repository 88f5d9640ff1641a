#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xyfit/dataset.hpp"
#include "xyfit/inference.hpp"
#include "xyfit/types.hpp"

namespace xyfit {

enum class XtDist { uniform, triangular, exponential };

std::string to_string(XtDist d);
XtDist xt_dist_from_string(const std::string& s);

// Generating configuration for one synthetic dataset. Per-point error sizes
// are drawn as sigma_x ~ N(mean_sigma_x, mean_sigma_x/5) and
// sigma_y ~ N(mean_sigma_y, sigma_y_spread), negative draws rejected; a mean
// of exactly zero short-circuits to exact zeros.
struct MockConfig {
  double A = 5.0;
  double B = 1.0;
  double sigma_int = 2.0;
  int n = 1000;
  XtDist xt_dist = XtDist::exponential;
  double lambda_x = 8.0;           // exponential scale length
  double xt_range_hi = 30.0;       // upper end for uniform/triangular
  double mean_sigma_x = 1.0;
  double mean_sigma_y = 2.0;
  double sigma_y_spread = 0.2;
  uint64_t seed = 0;
};

struct MockTruth {
  Eigen::VectorXd x_t, y_t;
  MockConfig cfg;
};

struct MockData {
  Dataset data;
  MockTruth truth;
};

MockData gen_mock(const MockConfig& cfg);

// Normalised biases of one posterior against the generating truth:
// (posterior mean - truth) / posterior std for slope and intercept, and the
// zero-truncated-normal (mode - truth) / scale for the intrinsic scatter.
struct BiasSample {
  double A = 0.0, B = 0.0, sigma_int = 0.0;
  bool degenerate = false;  // zero posterior spread somewhere
};

BiasSample bias_of_fit(const PosteriorResult& posterior, const MockTruth& truth);

// Distribution of one parameter's bias over replicates.
struct BiasStat {
  std::vector<double> samples;
  double median = 0.0, p16 = 0.0, p84 = 0.0, mean = 0.0;
  int n_failed = 0;

  void finalize();
};

struct BiasReport {
  BiasStat A, B, sigma_int;
  int n_requested = 0;
};

BiasReport summarize_biases(const std::vector<BiasSample>& ok, int n_requested);

// Which generating parameter a 1D sweep varies.
enum class SweepParam { A, sigma_int, n_points, sigma_x, lambda_x };

std::string to_string(SweepParam p);
SweepParam sweep_param_from_string(const std::string& s);

// [lo, hi] sweep/grid ranges per parameter; n_points is stepped
// logarithmically.
std::pair<double, double> sweep_range(SweepParam p);

struct HarnessOptions {
  int replicates = 30;      // 150 restores the full-scale study
  SamplerConfig sampler;    // per-fit sampler settings
  int n_threads = 0;        // 0 = hardware concurrency
  uint64_t seed = 0;
};

struct SweepCell {
  SweepParam param;
  double value = 0.0;
  Method method;
  BiasReport report;
};

std::vector<SweepCell> run_1d_sweep(SweepParam param,
                                    const std::vector<Method>& methods,
                                    const HarnessOptions& opts,
                                    int grid_points = 20);

struct GridCell {
  // coordinates: [A, sigma_int, N, sigma_x, lambda_x]
  double A, sigma_int;
  int n;
  double sigma_x, lambda_x;
  Method method;
  BiasReport report;
};

struct GridResult {
  std::vector<GridCell> cells;
  // most extreme mean-bias cells per parameter and method
  struct Extremum {
    Method method;
    std::string parameter;  // "A" | "B" | "sigma_int"
    bool high;              // largest (true) or smallest (false) mean bias
    size_t cell_index;
    double mean_bias;
  };
  std::vector<Extremum> extrema;
};

GridResult run_5d_grid(const std::vector<Method>& methods,
                       const HarnessOptions& opts, int points_per_dim = 5);

struct GmmStudyCell {
  MockConfig cell;
  int n_gauss = 0;  // 0 marks the per-replicate BIC-selected column
  BiasReport report;
  std::vector<int> ng_histogram;  // filled on the BIC-selected row
};

std::vector<GmmStudyCell> run_gmm_study(const std::vector<MockConfig>& cells,
                                        int ng_min, int ng_max,
                                        const HarnessOptions& opts);

// CSV emission (bias tables consumable by any plotting tool).
void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& rows,
                     const std::string& header_comment = "");
void write_grid_csv(const std::string& path, const GridResult& grid,
                    const std::string& header_comment = "");
void write_gmm_study_csv(const std::string& path,
                         const std::vector<GmmStudyCell>& rows,
                         const std::string& header_comment = "");

}  // namespace xyfit
