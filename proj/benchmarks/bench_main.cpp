#include <benchmark/benchmark.h>

#include <random>

#include "lagcast/basis.hpp"
#include "lagcast/forest.hpp"
#include "lagcast/gamlss.hpp"
#include "lagcast/parallel.hpp"
#include "lagcast/pipeline.hpp"
#include "lagcast/random.hpp"
#include "lagcast/simulate.hpp"
#include "lagcast/var.hpp"
#include "lagcast/zadist.hpp"

namespace {

using namespace lagcast;

struct Data {
  DesignMatrix design;
  Eigen::VectorXd y;
};

Data zaga_data(int n, int p) {
  Rng rng(42);
  std::normal_distribution<double> z(0.0, 1.0);
  Data d;
  d.design.x.resize(n, p);
  for (int j = 0; j < p; ++j) d.design.names.push_back(j == 0 ? "(Intercept)" : "x" + std::to_string(j));
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.design.x(i, 0) = 1.0;
    double eta = 0.2;
    for (int j = 1; j < p; ++j) {
      d.design.x(i, j) = 0.5 * z(rng);
      eta += 0.1 * d.design.x(i, j);
    }
    d.y(i) = zaga_draw({std::exp(eta), 0.5, 0.16}, rng);
  }
  return d;
}

void BM_FitZaga(benchmark::State& state) {
  const Data d = zaga_data(static_cast<int>(state.range(0)), 31);
  for (auto _ : state) benchmark::DoNotOptimize(fit_zaga(d.design, d.y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitZaga)->Arg(233)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_FitForest(benchmark::State& state) {
  const Data d = zaga_data(233, 31);
  ForestConfig cfg;
  cfg.n_trees = static_cast<int>(state.range(0));
  set_thread_count(1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_forest(d.design, d.y, cfg));
}
BENCHMARK(BM_FitForest)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_CrossBasis(benchmark::State& state) {
  Rng rng(7);
  std::gamma_distribution<double> g(2.0, 50.0);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(cross_basis(x, 18, BasisSpec::bspline(3, 4), BasisSpec::linear()));
}
BENCHMARK(BM_CrossBasis)->Arg(252)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_SelectLagBic(benchmark::State& state) {
  Rng rng(9);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd y(249, 5);
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    for (Eigen::Index j = 0; j < 5; ++j) y(t, j) = (t > 0 ? 0.5 * y(t - 1, j) : 0.0) + z(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(select_lag_bic(y, MonthIndex{2000, 1}, 13));
}
BENCHMARK(BM_SelectLagBic)->Unit(benchmark::kMillisecond);

// One canton through fit, climate forecast and bootstrap intervals.
void BM_CantonPipeline(benchmark::State& state) {
  SimConfig sim;
  sim.cantons = 2;
  const SimulatedPanel data = simulate_panel(sim, 3);
  CantonSpec spec;
  spec.train_end = MonthIndex{2020, 9};
  spec.methods = state.range(0) == 0 ? std::vector<Method>{Method::gamlss} : std::vector<Method>{Method::rf};
  spec.forest.n_trees = 100;
  set_thread_count(1);
  const std::string id = data.panel.cantons.begin()->first;
  for (auto _ : state) {
    const CantonFit fit = fit_canton(data.panel, id, spec);
    const ClimateForecast climate = forecast_climate(fit, spec);
    benchmark::DoNotOptimize(forecast_method(fit, fit.methods.front(), climate, spec));
  }
}
BENCHMARK(BM_CantonPipeline)->Arg(0)->Arg(1)->ArgName("rf")->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
