#include <benchmark/benchmark.h>

#include "xyfit/inference.hpp"
#include "xyfit/likelihood.hpp"
#include "xyfit/mock.hpp"

using namespace xyfit;

namespace {

MockData make_mock(int n) {
  MockConfig cfg;
  cfg.n = n;
  cfg.seed = 1234;
  return gen_mock(cfg);
}

Eigen::VectorXd fiducial_theta() {
  Eigen::VectorXd t(2);
  t << 5.0, 1.0;
  return t;
}

void BM_unif_kernel(benchmark::State& state) {
  const MockData md = make_mock(static_cast<int>(state.range(0)));
  const ModelFunction model = linear_model();
  const Eigen::VectorXd th = fiducial_theta();
  for (auto _ : state)
    benchmark::DoNotOptimize(loglike_unif_diag(md.data, model, th, 2.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_unif_kernel)->Arg(250)->Arg(1000)->Arg(4000);

void BM_mnr_kernel(benchmark::State& state) {
  const MockData md = make_mock(static_cast<int>(state.range(0)));
  const ModelFunction model = linear_model();
  const Eigen::VectorXd th = fiducial_theta();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        loglike_mnr_diag(md.data, model, th, 2.0, 8.0, 8.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_mnr_kernel)->Arg(250)->Arg(1000)->Arg(4000);

void BM_mnr_kernel_gradient(benchmark::State& state) {
  const MockData md = make_mock(static_cast<int>(state.range(0)));
  const ModelFunction model = linear_model();
  LikelihoodSpec spec;
  spec.method = Method::mnr;
  ParamVector pv;
  pv.theta = fiducial_theta();
  pv.sigma_int = 2.0;
  pv.components = {GmmComponent{1.0, 8.0, 8.0}};
  ParamVector grad;
  for (auto _ : state)
    benchmark::DoNotOptimize(loglike_diag_grad(spec, md.data, model, pv, grad));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_mnr_kernel_gradient)->Arg(250)->Arg(1000)->Arg(4000);

void BM_gmm_kernel(benchmark::State& state) {
  const MockData md = make_mock(1000);
  const ModelFunction model = linear_model();
  const Eigen::VectorXd th = fiducial_theta();
  const int k = static_cast<int>(state.range(0));
  std::vector<GmmComponent> comps;
  for (int i = 0; i < k; ++i)
    comps.push_back({1.0 / k, 2.0 * i, 4.0});
  for (auto _ : state)
    benchmark::DoNotOptimize(loglike_gmm_diag(md.data, model, th, 2.0, comps));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_gmm_kernel)->Arg(1)->Arg(3)->Arg(10);

void BM_fit_mle_mnr(benchmark::State& state) {
  const MockData md = make_mock(static_cast<int>(state.range(0)));
  LikelihoodSpec spec;
  spec.method = Method::mnr;
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_mle(spec, md.data, linear_model()));
}
BENCHMARK(BM_fit_mle_mnr)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_sample_posterior_mnr(benchmark::State& state) {
  const MockData md = make_mock(250);
  LikelihoodSpec spec;
  spec.method = Method::mnr;
  SamplerConfig cfg;
  cfg.n_warmup = 700;
  cfg.n_samples = static_cast<int>(state.range(0));
  cfg.n_chains = 1;
  cfg.seed = 99;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        sample_posterior(spec, md.data, linear_model(), cfg));
  state.SetItemsProcessed(state.iterations() *
                          (cfg.n_warmup + cfg.n_samples));
}
BENCHMARK(BM_sample_posterior_mnr)
    ->Arg(1000)
    ->Arg(5000)
    ->Unit(benchmark::kMillisecond)
    ->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
