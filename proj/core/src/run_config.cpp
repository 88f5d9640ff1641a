#include "xyfit/run_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "xyfit/csv.hpp"
#include "xyfit/expression.hpp"

namespace xyfit {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::invalid_argument("config: expected boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

uint64_t RunConfig::config_hash() const {
  // FNV-1a over the canonicalised key=value pairs
  uint64_t h = 1469598103934665603ull;
  auto feed = [&](const std::string& s) {
    for (const unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [k, v] : raw) {
    if (k == "out") continue;  // destination, not semantics
    feed(k);
    feed("=");
    feed(v);
    feed(";");
  }
  return h;
}

void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value) {
  const std::string k = trim(key);
  const std::string v = trim(value);
  cfg.raw[k] = v;

  if (k == "data") cfg.data_path = v;
  else if (k == "x_col") cfg.x_col = v;
  else if (k == "y_col") cfg.y_col = v;
  else if (k == "sx_col") cfg.sx_col = v;
  else if (k == "sy_col") cfg.sy_col = v;
  else if (k == "cov") cfg.cov_path = v;
  else if (k == "model") cfg.model = v;
  else if (k == "method") cfg.likelihood.method = method_from_string(v);
  else if (k == "n_gauss") cfg.likelihood.n_gauss = std::stoi(v);
  else if (k == "hyperprior") {
    if (v == "uniform-ordered") cfg.likelihood.hyperprior = HyperPrior::uniform_ordered;
    else if (v == "hierarchical") cfg.likelihood.hyperprior = HyperPrior::hierarchical;
    else throw std::invalid_argument("config: unknown hyperprior '" + v + "'");
  }
  else if (k == "intrinsic_scatter") cfg.likelihood.include_intrinsic_scatter = parse_bool(v);
  else if (k == "n_warmup") cfg.sampler.n_warmup = std::stoi(v);
  else if (k == "n_samples") cfg.sampler.n_samples = std::stoi(v);
  else if (k == "n_chains") cfg.sampler.n_chains = std::stoi(v);
  else if (k == "seed") cfg.sampler.seed = std::stoull(v);
  else if (k == "target_accept") cfg.sampler.target_accept = std::stod(v);
  else if (k == "max_depth") cfg.sampler.max_depth = std::stoi(v);
  else if (k == "out") cfg.out_dir = v;
  else if (k.rfind("bounds.", 0) == 0) {
    const auto parts = split_list(v);
    if (parts.size() != 2)
      throw std::invalid_argument("config: bounds need 'lo,hi', got '" + v + "'");
    cfg.sampler.prior_bounds[k.substr(7)] = {std::stod(parts[0]),
                                             std::stod(parts[1])};
  }
  else if (k == "bench") cfg.bench = v;
  else if (k == "sweep_param") cfg.sweep_param = v;
  else if (k == "grid_points") cfg.grid_points = std::stoi(v);
  else if (k == "replicates") cfg.replicates = std::stoi(v);
  else if (k == "methods") {
    cfg.bench_methods.clear();
    for (const auto& s : split_list(v))
      cfg.bench_methods.push_back(method_from_string(s));
  }
  else if (k == "ng_min") cfg.ng_min = std::stoi(v);
  else if (k == "ng_max") cfg.ng_max = std::stoi(v);
  else if (k == "mock_A") cfg.mock.A = std::stod(v);
  else if (k == "mock_B") cfg.mock.B = std::stod(v);
  else if (k == "mock_sigma_int") cfg.mock.sigma_int = std::stod(v);
  else if (k == "mock_N") cfg.mock.n = std::stoi(v);
  else if (k == "mock_xt_dist") cfg.mock.xt_dist = xt_dist_from_string(v);
  else if (k == "mock_lambda_x") cfg.mock.lambda_x = std::stod(v);
  else if (k == "mock_sigma_x") cfg.mock.mean_sigma_x = std::stod(v);
  else if (k == "mock_sigma_y") cfg.mock.mean_sigma_y = std::stod(v);
  else throw std::invalid_argument("config: unknown key '" + k + "'");
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value'");
    apply_override(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

Dataset load_dataset(const RunConfig& cfg) {
  if (cfg.data_path.empty())
    throw std::invalid_argument("config: no data file given");
  const CsvTable t = read_csv(cfg.data_path);
  for (const std::string* col : {&cfg.x_col, &cfg.y_col})
    if (!t.has_column(*col))
      throw std::invalid_argument("data: missing column '" + *col + "'");

  Dataset d;
  d.x_obs = t.column(cfg.x_col);
  d.y_obs = t.column(cfg.y_col);
  if (!cfg.cov_path.empty()) {
    d.full_cov = read_matrix_csv(cfg.cov_path);
  } else {
    for (const std::string* col : {&cfg.sx_col, &cfg.sy_col})
      if (!t.has_column(*col))
        throw std::invalid_argument("data: missing column '" + *col + "'");
    d.x_err = t.column(cfg.sx_col);
    d.y_err = t.column(cfg.sy_col);
  }
  return validate_dataset(std::move(d));
}

ResolvedModel resolve_model(const RunConfig& cfg) {
  ResolvedModel out;
  if (cfg.model == "linear") {
    out.fn = linear_model();
  } else if (cfg.model == "powerlaw-log") {
    // y and x are already log-quantities; the fit itself is a straight line
    // with slope alpha and intercept log10(1 - b).
    out.fn = linear_model();
    out.fn.param_names = {"alpha", "B"};
    out.report_one_minus_b = true;
  } else {
    out.fn = expression_model(cfg.model);
  }
  return out;
}

}  // namespace xyfit
