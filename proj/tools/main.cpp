// Command-line front end: fit, sample, bias-bench, assess-causality.
// Exit codes: 0 success, 1 runtime failure, 2 validation failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "xyfit/causality.hpp"
#include "xyfit/csv.hpp"
#include "xyfit/inference.hpp"
#include "xyfit/mock.hpp"
#include "xyfit/run_config.hpp"
#include "xyfit/stats.hpp"
#include "xyfit/transforms.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xyfit;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int64_t seed = -1;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file")
      ->required();
  cmd->add_option("--seed", args.seed, "override the random seed");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--set", args.overrides,
                  "extra key=value overrides (repeatable)");
}

RunConfig load_config(const CommonArgs& args) {
  RunConfig cfg = parse_run_config(args.config_path);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed >= 0)
    apply_override(cfg, "seed", std::to_string(args.seed));
  if (!args.out_dir.empty()) apply_override(cfg, "out", args.out_dir);
  return cfg;
}

std::string hash_hex(const RunConfig& cfg) {
  char buf[32];
  snprintf(buf, sizeof(buf), "%016llx",
           static_cast<unsigned long long>(cfg.config_hash()));
  return buf;
}

json base_json(const RunConfig& cfg) {
  json j;
  j["config_hash"] = hash_hex(cfg);
  j["seed"] = cfg.sampler.seed;
  j["method"] = to_string(cfg.likelihood.method);
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f << j.dump(2) << "\n";
}

std::string csv_header_comment(const RunConfig& cfg) {
  return "config_hash=" + hash_hex(cfg) +
         " seed=" + std::to_string(cfg.sampler.seed);
}

int cmd_fit(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const Dataset d = load_dataset(cfg);
  const ResolvedModel model = resolve_model(cfg);
  fs::create_directories(cfg.out_dir);

  const FitResult fit = fit_mle(cfg.likelihood, d, model.fn, {}, cfg.sampler);
  const ParameterSpace ps =
      ParameterSpace::create(cfg.likelihood, model.fn, cfg.sampler.prior_bounds);
  const Eigen::VectorXd c = ps.pack(fit.params);

  json j = base_json(cfg);
  for (int i = 0; i < ps.constrained_dim(); ++i) j[ps.names()[i]] = c[i];
  j["loglike"] = fit.loglike;
  j["converged"] = fit.converged;
  j["warnings"] = fit.warnings;
  if (model.report_one_minus_b) {
    const int bi = 1;  // intercept of the log-space line
    j["one_minus_b"] = std::pow(10.0, c[bi]);
  }
  write_json(fs::path(cfg.out_dir) / "fit.json", j);
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "fit.json").string() << "\n";
  return 0;
}

int cmd_sample(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const Dataset d = load_dataset(cfg);
  const ResolvedModel model = resolve_model(cfg);
  fs::create_directories(cfg.out_dir);

  const PosteriorResult post =
      sample_posterior(cfg.likelihood, d, model.fn, cfg.sampler);

  // chains.csv: chain, draw, parameters
  {
    std::ofstream f(fs::path(cfg.out_dir) / "chains.csv");
    f << "# " << csv_header_comment(cfg) << "\n";
    f.precision(12);
    f << "chain,draw";
    for (const auto& n : post.param_names) f << "," << n;
    f << "\n";
    for (int c = 0; c < post.n_chains; ++c)
      for (int i = 0; i < post.n_samples_per_chain; ++i) {
        f << c << "," << i;
        const Eigen::Index row = c * post.n_samples_per_chain + i;
        for (int p = 0; p < post.samples.cols(); ++p)
          f << "," << post.samples(row, p);
        f << "\n";
      }
  }

  json j = base_json(cfg);
  json mean, sd, rhat, ess;
  for (size_t p = 0; p < post.param_names.size(); ++p) {
    const auto& name = post.param_names[p];
    mean[name] = post.samples.col(p).mean();
    sd[name] = stddev(post.samples.col(p));
    rhat[name] = post.gelman_rubin[p];
    ess[name] = post.ess[p];
  }
  j["mean"] = mean;
  j["std"] = sd;
  j["rhat"] = rhat;
  j["ess"] = ess;
  j["bic"] = post.bic;
  j["loglike_mle"] = post.log_like_at_mle;
  j["n_divergent"] = post.n_divergent;
  j["warnings"] = post.warnings;
  if (cfg.likelihood.include_intrinsic_scatter) {
    const auto [mode, scale] = sigma_int_summary(post.column("sigma_int"));
    j["sigma_int_truncated"] = {{"mode", mode}, {"scale", scale}};
  }
  if (model.report_one_minus_b) {
    const Eigen::VectorXd b = post.column(post.param_names[1]);
    const Eigen::ArrayXd omb = Eigen::pow(10.0, b.array());
    j["one_minus_b"] = {{"mean", omb.mean()},
                        {"std", stddev(Eigen::VectorXd(omb.matrix()))}};
  }
  write_json(fs::path(cfg.out_dir) / "summary.json", j);
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "summary.json").string()
            << "\n";
  return 0;
}

int cmd_bias_bench(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  fs::create_directories(cfg.out_dir);

  HarnessOptions opts;
  opts.replicates = cfg.replicates;
  opts.sampler = cfg.sampler;
  opts.seed = cfg.sampler.seed;

  if (cfg.bench == "sweep") {
    const SweepParam p = sweep_param_from_string(cfg.sweep_param);
    const int points = cfg.grid_points > 0 ? cfg.grid_points : 20;
    const auto rows = run_1d_sweep(p, cfg.bench_methods, opts, points);
    const auto path = fs::path(cfg.out_dir) / "sweep.csv";
    write_sweep_csv(path.string(), rows, csv_header_comment(cfg));
    std::cout << "wrote " << path.string() << "\n";
  } else if (cfg.bench == "grid") {
    const int points = cfg.grid_points > 0 ? cfg.grid_points : 5;
    const auto grid = run_5d_grid(cfg.bench_methods, opts, points);
    const auto path = fs::path(cfg.out_dir) / "grid.csv";
    write_grid_csv(path.string(), grid, csv_header_comment(cfg));
    std::cout << "wrote " << path.string() << "\n";
  } else if (cfg.bench == "gmm-study") {
    const auto rows =
        run_gmm_study({cfg.mock}, cfg.ng_min, cfg.ng_max, opts);
    const auto path = fs::path(cfg.out_dir) / "gmm_study.csv";
    write_gmm_study_csv(path.string(), rows, csv_header_comment(cfg));
    std::cout << "wrote " << path.string() << "\n";
  } else {
    throw std::invalid_argument(
        "config: bench must be sweep|grid|gmm-study, got '" + cfg.bench + "'");
  }
  return 0;
}

void write_residuals(const fs::path& path, const DirectionFit& fit,
                     const std::string& comment) {
  CsvTable t;
  t.comments = {comment};
  t.columns = {"independent", "residual"};
  t.data = {fit.independent, fit.residuals};
  write_csv(path.string(), t);
}

int cmd_assess_causality(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const Dataset d = load_dataset(cfg);
  const ResolvedModel model = resolve_model(cfg);
  fs::create_directories(cfg.out_dir);

  const CausalityReport rep =
      assess_causality(d, model.fn, model.fn, cfg.likelihood);

  auto dir_json = [](const DirectionFit& f) {
    json j;
    j["ok"] = f.ok;
    if (!f.ok) {
      j["error"] = f.error;
      return j;
    }
    j["pearson"] = f.pearson;
    j["spearman"] = f.spearman;
    j["loglike"] = f.loglike;
    json th = json::array();
    for (Eigen::Index i = 0; i < f.params.theta.size(); ++i)
      th.push_back(f.params.theta[i]);
    j["theta"] = th;
    j["sigma_int"] = f.params.sigma_int;
    return j;
  };

  json j = base_json(cfg);
  j["forward"] = dir_json(rep.forward);
  j["inverse"] = dir_json(rep.inverse);
  j["recommendation"] = to_string(rep.recommendation);
  j["margin"] = rep.margin;
  j["advisory"] = true;
  write_json(fs::path(cfg.out_dir) / "causality.json", j);

  const std::string comment = csv_header_comment(cfg);
  if (rep.forward.ok)
    write_residuals(fs::path(cfg.out_dir) / "residuals_forward.csv",
                    rep.forward, comment);
  if (rep.inverse.ok)
    write_residuals(fs::path(cfg.out_dir) / "residuals_inverse.csv",
                    rep.inverse, comment);
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "causality.json").string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regression with uncertainties on both axes"};
  app.require_subcommand(1);

  CommonArgs fit_args, sample_args, bench_args, causality_args;
  CLI::App* fit = app.add_subcommand("fit", "maximum-likelihood point fit");
  add_common(fit, fit_args);
  CLI::App* sample = app.add_subcommand("sample", "posterior sampling");
  add_common(sample, sample_args);
  CLI::App* bench =
      app.add_subcommand("bias-bench", "mock-data bias measurement");
  add_common(bench, bench_args);
  CLI::App* causality =
      app.add_subcommand("assess-causality", "regression direction check");
  add_common(causality, causality_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_args);
    if (sample->parsed()) return cmd_sample(sample_args);
    if (bench->parsed()) return cmd_bias_bench(bench_args);
    if (causality->parsed()) return cmd_assess_causality(causality_args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
