#include "xyfit/mock.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <functional>
#include <fstream>
#include <random>
#include <stdexcept>
#include <thread>

#include "xyfit/stats.hpp"

namespace xyfit {

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Box-Muller without cached state keeps draw order deterministic and
// independent of the standard library's normal_distribution internals.
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(uint64_t seed) : eng(seed) {}

  double uniform() {
    return std::generate_canonical<double, 53>(eng);
  }
  double normal() {
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
  double positive_normal(double mu, double sd) {
    if (sd <= 0.0) return mu;
    double v;
    do {
      v = mu + sd * normal();
    } while (v < 0.0);
    return v;
  }
};

void run_parallel(int n_tasks, int n_threads,
                  const std::function<void(int)>& task) {
  if (n_threads <= 0)
    n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, n_tasks);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1))
        task(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::string to_string(XtDist d) {
  switch (d) {
    case XtDist::uniform: return "uniform";
    case XtDist::triangular: return "triangular";
    case XtDist::exponential: return "exponential";
  }
  return "?";
}

XtDist xt_dist_from_string(const std::string& s) {
  if (s == "uniform") return XtDist::uniform;
  if (s == "triangular") return XtDist::triangular;
  if (s == "exponential") return XtDist::exponential;
  throw std::invalid_argument("unknown x_t distribution '" + s + "'");
}

MockData gen_mock(const MockConfig& cfg) {
  if (cfg.n < 2) throw std::invalid_argument("gen_mock: n must be >= 2");
  if (cfg.mean_sigma_x < 0 || cfg.mean_sigma_y < 0)
    throw std::invalid_argument("gen_mock: error means must be >= 0");

  Rng rng(mix_seed(cfg.seed, 0));
  const int n = cfg.n;

  Eigen::VectorXd xt(n);
  for (int i = 0; i < n; ++i) {
    switch (cfg.xt_dist) {
      case XtDist::uniform:
        xt[i] = cfg.xt_range_hi * rng.uniform();
        break;
      case XtDist::triangular:
        // density rising linearly from 0: inverse CDF is range * sqrt(u)
        xt[i] = cfg.xt_range_hi * std::sqrt(rng.uniform());
        break;
      case XtDist::exponential: {
        double u = rng.uniform();
        while (u <= 1e-300) u = rng.uniform();
        xt[i] = -cfg.lambda_x * std::log(u);
        break;
      }
    }
  }

  Eigen::VectorXd yt = cfg.A * xt.array() + cfg.B;
  Eigen::VectorXd sx(n), sy(n);
  for (int i = 0; i < n; ++i)
    sx[i] = cfg.mean_sigma_x == 0.0
                ? 0.0
                : rng.positive_normal(cfg.mean_sigma_x, cfg.mean_sigma_x / 5.0);
  for (int i = 0; i < n; ++i)
    sy[i] = cfg.mean_sigma_y == 0.0
                ? 0.0
                : rng.positive_normal(cfg.mean_sigma_y, cfg.sigma_y_spread);

  Eigen::VectorXd xo(n), yo(n);
  for (int i = 0; i < n; ++i) xo[i] = xt[i] + sx[i] * rng.normal();
  const double si2 = cfg.sigma_int * cfg.sigma_int;
  for (int i = 0; i < n; ++i)
    yo[i] = yt[i] + std::sqrt(sy[i] * sy[i] + si2) * rng.normal();

  MockData out;
  out.data.x_obs = std::move(xo);
  out.data.y_obs = std::move(yo);
  out.data.x_err = std::move(sx);
  out.data.y_err = std::move(sy);
  out.data = validate_dataset(std::move(out.data));
  out.truth.x_t = std::move(xt);
  out.truth.y_t = std::move(yt);
  out.truth.cfg = cfg;
  return out;
}

BiasSample bias_of_fit(const PosteriorResult& posterior, const MockTruth& truth) {
  BiasSample b;
  const Eigen::VectorXd a = posterior.column("A");
  const Eigen::VectorXd bb = posterior.column("B");
  const double sa = stddev(a), sb = stddev(bb);
  if (sa <= 0.0 || sb <= 0.0) {
    b.degenerate = true;
    b.A = std::numeric_limits<double>::infinity();
    b.B = std::numeric_limits<double>::infinity();
    b.sigma_int = std::numeric_limits<double>::infinity();
    return b;
  }
  b.A = (a.mean() - truth.cfg.A) / sa;
  b.B = (bb.mean() - truth.cfg.B) / sb;

  const auto [mode, scale] = sigma_int_summary(posterior.column("sigma_int"));
  if (scale <= 0.0) {
    b.degenerate = true;
    b.sigma_int = std::numeric_limits<double>::infinity();
  } else {
    b.sigma_int = (mode - truth.cfg.sigma_int) / scale;
  }
  return b;
}

void BiasStat::finalize() {
  if (samples.empty()) return;
  Eigen::VectorXd v =
      Eigen::Map<const Eigen::VectorXd>(samples.data(), samples.size());
  median = percentile(v, 50.0);
  p16 = percentile(v, 16.0);
  p84 = percentile(v, 84.0);
  mean = v.mean();
}

BiasReport summarize_biases(const std::vector<BiasSample>& ok, int n_requested) {
  BiasReport r;
  r.n_requested = n_requested;
  for (const auto& b : ok) {
    if (b.degenerate || !std::isfinite(b.A) || !std::isfinite(b.B) ||
        !std::isfinite(b.sigma_int)) {
      ++r.A.n_failed;
      ++r.B.n_failed;
      ++r.sigma_int.n_failed;
      continue;
    }
    r.A.samples.push_back(b.A);
    r.B.samples.push_back(b.B);
    r.sigma_int.samples.push_back(b.sigma_int);
  }
  r.A.finalize();
  r.B.finalize();
  r.sigma_int.finalize();
  return r;
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::A: return "A";
    case SweepParam::sigma_int: return "sigma_int";
    case SweepParam::n_points: return "N";
    case SweepParam::sigma_x: return "sigma_x";
    case SweepParam::lambda_x: return "lambda_x";
  }
  return "?";
}

SweepParam sweep_param_from_string(const std::string& s) {
  if (s == "A") return SweepParam::A;
  if (s == "sigma_int") return SweepParam::sigma_int;
  if (s == "N") return SweepParam::n_points;
  if (s == "sigma_x") return SweepParam::sigma_x;
  if (s == "lambda_x") return SweepParam::lambda_x;
  throw std::invalid_argument("unknown sweep parameter '" + s + "'");
}

std::pair<double, double> sweep_range(SweepParam p) {
  switch (p) {
    case SweepParam::A: return {-30.0, 30.0};
    case SweepParam::sigma_int: return {0.0, 20.0};
    case SweepParam::n_points: return {10.0, 4000.0};
    case SweepParam::sigma_x: return {0.0, 20.0};
    case SweepParam::lambda_x: return {1.0, 15.0};
  }
  throw std::logic_error("sweep_range");
}

namespace {

void apply_sweep_value(MockConfig& cfg, SweepParam p, double v) {
  switch (p) {
    case SweepParam::A: cfg.A = v; break;
    case SweepParam::sigma_int: cfg.sigma_int = v; break;
    case SweepParam::n_points: cfg.n = std::max(2, static_cast<int>(std::lround(v))); break;
    case SweepParam::sigma_x: cfg.mean_sigma_x = v; break;
    case SweepParam::lambda_x: cfg.lambda_x = v; break;
  }
}

LikelihoodSpec spec_for(Method m) {
  LikelihoodSpec s;
  s.method = m;
  return s;
}

// One replicate: generate, sample the posterior, extract biases.
BiasSample run_replicate(const MockConfig& mock_cfg, Method method,
                         const SamplerConfig& sampler, bool* failed) {
  *failed = false;
  try {
    const MockData md = gen_mock(mock_cfg);
    const ModelFunction model = linear_model();
    const PosteriorResult post =
        sample_posterior(spec_for(method), md.data, model, sampler);
    return bias_of_fit(post, md.truth);
  } catch (const std::exception&) {
    *failed = true;
    return {};
  }
}

}  // namespace

std::vector<SweepCell> run_1d_sweep(SweepParam param,
                                    const std::vector<Method>& methods,
                                    const HarnessOptions& opts,
                                    int grid_points) {
  const auto [lo, hi] = sweep_range(param);
  std::vector<double> values(grid_points);
  for (int g = 0; g < grid_points; ++g) {
    if (param == SweepParam::n_points) {
      const double f = grid_points == 1 ? 0.0 : static_cast<double>(g) / (grid_points - 1);
      values[g] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
    } else {
      const double f = grid_points == 1 ? 0.0 : static_cast<double>(g) / (grid_points - 1);
      values[g] = lo + f * (hi - lo);
    }
  }

  struct Task {
    int cell;
    int replicate;
    MockConfig cfg;
    Method method;
  };
  std::vector<Task> tasks;
  std::vector<SweepCell> cells;
  for (size_t mi = 0; mi < methods.size(); ++mi) {
    for (int g = 0; g < grid_points; ++g) {
      SweepCell cell;
      cell.param = param;
      cell.value = values[g];
      cell.method = methods[mi];
      cells.push_back(cell);
      for (int r = 0; r < opts.replicates; ++r) {
        MockConfig mc;
        apply_sweep_value(mc, param, values[g]);
        mc.seed = mix_seed(opts.seed, (mi * grid_points + g) * 100000ull + r);
        tasks.push_back({static_cast<int>(cells.size() - 1), r, mc, methods[mi]});
      }
    }
  }

  std::vector<BiasSample> biases(tasks.size());
  std::vector<char> failed(tasks.size(), 0);
  run_parallel(static_cast<int>(tasks.size()), opts.n_threads, [&](int i) {
    SamplerConfig sc = opts.sampler;
    sc.seed = mix_seed(tasks[i].cfg.seed, 7);
    bool f = false;
    biases[i] = run_replicate(tasks[i].cfg, tasks[i].method, sc, &f);
    failed[i] = f ? 1 : 0;
  });

  std::vector<std::vector<BiasSample>> per_cell(cells.size());
  for (size_t i = 0; i < tasks.size(); ++i)
    if (!failed[i]) per_cell[tasks[i].cell].push_back(biases[i]);
  for (size_t c = 0; c < cells.size(); ++c) {
    cells[c].report = summarize_biases(per_cell[c], opts.replicates);
    const int got = static_cast<int>(per_cell[c].size());
    cells[c].report.A.n_failed += opts.replicates - got;
    cells[c].report.B.n_failed += opts.replicates - got;
    cells[c].report.sigma_int.n_failed += opts.replicates - got;
  }
  return cells;
}

GridResult run_5d_grid(const std::vector<Method>& methods,
                       const HarnessOptions& opts, int points_per_dim) {
  auto axis = [&](SweepParam p) {
    const auto [lo, hi] = sweep_range(p);
    std::vector<double> v(points_per_dim);
    for (int g = 0; g < points_per_dim; ++g) {
      const double f =
          points_per_dim == 1 ? 0.0 : static_cast<double>(g) / (points_per_dim - 1);
      if (p == SweepParam::n_points)
        v[g] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
      else
        v[g] = lo + f * (hi - lo);
    }
    return v;
  };
  const auto as = axis(SweepParam::A);
  const auto ss = axis(SweepParam::sigma_int);
  const auto ns = axis(SweepParam::n_points);
  const auto xs = axis(SweepParam::sigma_x);
  const auto ls = axis(SweepParam::lambda_x);

  GridResult out;
  struct Task {
    size_t cell;
    MockConfig cfg;
    Method method;
  };
  std::vector<Task> tasks;
  for (Method m : methods)
    for (double a : as)
      for (double s : ss)
        for (double n : ns)
          for (double sx : xs)
            for (double lx : ls) {
              GridCell cell;
              cell.A = a;
              cell.sigma_int = s;
              cell.n = std::max(2, static_cast<int>(std::lround(n)));
              cell.sigma_x = sx;
              cell.lambda_x = lx;
              cell.method = m;
              out.cells.push_back(cell);
              for (int r = 0; r < opts.replicates; ++r) {
                MockConfig mc;
                mc.A = a;
                mc.sigma_int = s;
                mc.n = cell.n;
                mc.mean_sigma_x = sx;
                mc.lambda_x = lx;
                mc.seed = mix_seed(opts.seed,
                                   (out.cells.size() - 1) * 1000003ull + r);
                tasks.push_back({out.cells.size() - 1, mc, m});
              }
            }

  std::vector<BiasSample> biases(tasks.size());
  std::vector<char> failed(tasks.size(), 0);
  run_parallel(static_cast<int>(tasks.size()), opts.n_threads, [&](int i) {
    SamplerConfig sc = opts.sampler;
    sc.seed = mix_seed(tasks[i].cfg.seed, 7);
    bool f = false;
    biases[i] = run_replicate(tasks[i].cfg, tasks[i].method, sc, &f);
    failed[i] = f ? 1 : 0;
  });

  std::vector<std::vector<BiasSample>> per_cell(out.cells.size());
  for (size_t i = 0; i < tasks.size(); ++i)
    if (!failed[i]) per_cell[tasks[i].cell].push_back(biases[i]);
  for (size_t c = 0; c < out.cells.size(); ++c)
    out.cells[c].report = summarize_biases(per_cell[c], opts.replicates);

  // locate extrema of the mean bias per parameter and method
  for (Method m : methods) {
    for (const std::string par : {"A", "B", "sigma_int"}) {
      size_t hi_idx = SIZE_MAX, lo_idx = SIZE_MAX;
      double hi_val = -std::numeric_limits<double>::infinity();
      double lo_val = std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < out.cells.size(); ++c) {
        if (out.cells[c].method != m) continue;
        const BiasStat& st = par == "A" ? out.cells[c].report.A
                             : par == "B" ? out.cells[c].report.B
                                          : out.cells[c].report.sigma_int;
        if (st.samples.empty()) continue;
        if (st.mean > hi_val) { hi_val = st.mean; hi_idx = c; }
        if (st.mean < lo_val) { lo_val = st.mean; lo_idx = c; }
      }
      if (hi_idx != SIZE_MAX)
        out.extrema.push_back({m, par, true, hi_idx, hi_val});
      if (lo_idx != SIZE_MAX)
        out.extrema.push_back({m, par, false, lo_idx, lo_val});
    }
  }
  return out;
}

std::vector<GmmStudyCell> run_gmm_study(const std::vector<MockConfig>& cells,
                                        int ng_min, int ng_max,
                                        const HarnessOptions& opts) {
  if (ng_min < 1 || ng_max < ng_min)
    throw std::invalid_argument("run_gmm_study: bad n_gauss range");
  const int n_ng = ng_max - ng_min + 1;
  std::vector<GmmStudyCell> out;

  for (size_t ci = 0; ci < cells.size(); ++ci) {
    // biases[r][ng_idx], bics[r][ng_idx]
    std::vector<std::vector<BiasSample>> biases(
        opts.replicates, std::vector<BiasSample>(n_ng));
    std::vector<std::vector<double>> bics(
        opts.replicates,
        std::vector<double>(n_ng, std::numeric_limits<double>::infinity()));
    std::vector<std::vector<char>> ok(opts.replicates,
                                      std::vector<char>(n_ng, 0));

    struct Task { int r; int gi; };
    std::vector<Task> tasks;
    for (int r = 0; r < opts.replicates; ++r)
      for (int gi = 0; gi < n_ng; ++gi) tasks.push_back({r, gi});

    run_parallel(static_cast<int>(tasks.size()), opts.n_threads, [&](int i) {
      const auto [r, gi] = tasks[i];
      MockConfig mc = cells[ci];
      mc.seed = mix_seed(opts.seed, ci * 1009ull + r);  // same data across ng
      try {
        const MockData md = gen_mock(mc);
        const ModelFunction model = linear_model();
        LikelihoodSpec spec;
        spec.method = Method::gmm;
        spec.n_gauss = ng_min + gi;
        SamplerConfig sc = opts.sampler;
        sc.seed = mix_seed(mc.seed, 31 + gi);
        const PosteriorResult post = sample_posterior(spec, md.data, model, sc);
        biases[r][gi] = bias_of_fit(post, md.truth);
        bics[r][gi] = post.bic;
        ok[r][gi] = 1;
      } catch (const std::exception&) {
        ok[r][gi] = 0;
      }
    });

    for (int gi = 0; gi < n_ng; ++gi) {
      GmmStudyCell cell;
      cell.cell = cells[ci];
      cell.n_gauss = ng_min + gi;
      std::vector<BiasSample> good;
      for (int r = 0; r < opts.replicates; ++r)
        if (ok[r][gi]) good.push_back(biases[r][gi]);
      cell.report = summarize_biases(good, opts.replicates);
      out.push_back(std::move(cell));
    }

    // per-replicate BIC-selected column
    GmmStudyCell sel;
    sel.cell = cells[ci];
    sel.n_gauss = 0;
    sel.ng_histogram.assign(ng_max + 1, 0);
    std::vector<BiasSample> good;
    for (int r = 0; r < opts.replicates; ++r) {
      int best_gi = -1;
      for (int gi = 0; gi < n_ng; ++gi)
        if (ok[r][gi] && (best_gi < 0 || bics[r][gi] < bics[r][best_gi]))
          best_gi = gi;
      if (best_gi >= 0) {
        good.push_back(biases[r][best_gi]);
        ++sel.ng_histogram[ng_min + best_gi];
      }
    }
    sel.report = summarize_biases(good, opts.replicates);
    out.push_back(std::move(sel));
  }
  return out;
}

namespace {

void write_bias_columns(std::ofstream& f, const BiasReport& r) {
  f << r.A.median << "," << r.A.p16 << "," << r.A.p84 << "," << r.A.mean << ","
    << r.B.median << "," << r.B.p16 << "," << r.B.p84 << "," << r.B.mean << ","
    << r.sigma_int.median << "," << r.sigma_int.p16 << "," << r.sigma_int.p84
    << "," << r.sigma_int.mean << "," << r.A.samples.size() << ","
    << r.A.n_failed;
}

}  // namespace

void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& rows,
                     const std::string& header_comment) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  if (!header_comment.empty()) f << "# " << header_comment << "\n";
  f << "param,value,method,bias_A_median,bias_A_p16,bias_A_p84,bias_A_mean,"
       "bias_B_median,bias_B_p16,bias_B_p84,bias_B_mean,"
       "bias_sigma_int_median,bias_sigma_int_p16,bias_sigma_int_p84,"
       "bias_sigma_int_mean,n_ok,n_failed\n";
  for (const auto& c : rows) {
    f << to_string(c.param) << "," << c.value << "," << to_string(c.method)
      << ",";
    write_bias_columns(f, c.report);
    f << "\n";
  }
}

void write_grid_csv(const std::string& path, const GridResult& grid,
                    const std::string& header_comment) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  if (!header_comment.empty()) f << "# " << header_comment << "\n";
  f << "A,sigma_int,N,sigma_x,lambda_x,method,bias_A_median,bias_A_p16,"
       "bias_A_p84,bias_A_mean,bias_B_median,bias_B_p16,bias_B_p84,"
       "bias_B_mean,bias_sigma_int_median,bias_sigma_int_p16,"
       "bias_sigma_int_p84,bias_sigma_int_mean,n_ok,n_failed\n";
  for (const auto& c : grid.cells) {
    f << c.A << "," << c.sigma_int << "," << c.n << "," << c.sigma_x << ","
      << c.lambda_x << "," << to_string(c.method) << ",";
    write_bias_columns(f, c.report);
    f << "\n";
  }
}

void write_gmm_study_csv(const std::string& path,
                         const std::vector<GmmStudyCell>& rows,
                         const std::string& header_comment) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  if (!header_comment.empty()) f << "# " << header_comment << "\n";
  f << "A,sigma_int,N,sigma_x,lambda_x,n_gauss,bias_A_median,bias_A_p16,"
       "bias_A_p84,bias_A_mean,bias_B_median,bias_B_p16,bias_B_p84,"
       "bias_B_mean,bias_sigma_int_median,bias_sigma_int_p16,"
       "bias_sigma_int_p84,bias_sigma_int_mean,n_ok,n_failed\n";
  for (const auto& c : rows) {
    f << c.cell.A << "," << c.cell.sigma_int << "," << c.cell.n << ","
      << c.cell.mean_sigma_x << "," << c.cell.lambda_x << ","
      << (c.n_gauss == 0 ? std::string("bic") : std::to_string(c.n_gauss))
      << ",";
    write_bias_columns(f, c.report);
    f << "\n";
  }
}

}  // namespace xyfit
