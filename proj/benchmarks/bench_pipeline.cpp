#include <benchmark/benchmark.h>

#include "ximpact/gof.hpp"
#include "ximpact/simulate.hpp"

using namespace ximpact;

namespace {

void BM_Simulate(benchmark::State& st) {
  const SimSpec s = make_correlated_scenario(st.range(0), 0.3, 10, 390, 1);
  for (auto _ : st) benchmark::DoNotOptimize(simulate_panel(s));
}
BENCHMARK(BM_Simulate)->Arg(5)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Correlations(benchmark::State& st) {
  const Simulation sim = simulate_panel(make_correlated_scenario(st.range(0), 0.3, 20, 390, 2));
  std::vector<std::size_t> days(sim.panel.days.size());
  for (std::size_t i = 0; i < days.size(); ++i) days[i] = i;
  for (auto _ : st) benchmark::DoNotOptimize(stationary_correlations(sim.panel, days));
}
BENCHMARK(BM_Correlations)->Arg(5)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Score(benchmark::State& st) {
  const Simulation sim = simulate_panel(make_correlated_scenario(st.range(0), 0.3, 20, 390, 3));
  const Split split = year_split(sim.panel);
  const std::vector<ModelId> models = table_models();
  const std::vector<WeightSpec> w{WeightSpec::parse("idio"), WeightSpec::parse("modes")};
  for (auto _ : st) benchmark::DoNotOptimize(score_models(sim.panel, models, w, split));
}
BENCHMARK(BM_Score)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
