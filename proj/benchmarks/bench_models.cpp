#include <benchmark/benchmark.h>

#include "ximpact/axioms.hpp"
#include "ximpact/models.hpp"

using namespace ximpact;

namespace {

void BM_SymEig(benchmark::State& st) {
  const CovarianceTriple t = gen_triple(st.range(0), 1, Profile::Well);
  for (auto _ : st) benchmark::DoNotOptimize(sym_eig(t.sigma));
}
BENCHMARK(BM_SymEig)->RangeMultiplier(4)->Range(4, 256);

void BM_Model(benchmark::State& st, const char* name) {
  const ModelId m = ModelId::parse(name);
  const CovarianceTriple t = gen_triple(st.range(0), 2, Profile::Well);
  for (auto _ : st) benchmark::DoNotOptimize(impact(m, t));
}
BENCHMARK_CAPTURE(BM_Model, direct, "direct")->RangeMultiplier(4)->Range(4, 256);
BENCHMARK_CAPTURE(BM_Model, el, "el")->RangeMultiplier(4)->Range(4, 256);
BENCHMARK_CAPTURE(BM_Model, kyle, "kyle")->RangeMultiplier(4)->Range(4, 256);
BENCHMARK_CAPTURE(BM_Model, ml, "ml")->RangeMultiplier(4)->Range(4, 256);
BENCHMARK_CAPTURE(BM_Model, r_kyle, "r-kyle")->RangeMultiplier(4)->Range(4, 256);
BENCHMARK_CAPTURE(BM_Model, el_star, "el*")->RangeMultiplier(4)->Range(4, 256);

void BM_AxiomCell(benchmark::State& st) {
  TrialConfig c;
  c.n = 4;
  c.trials = 10;
  const ModelId m = ModelId::parse("kyle");
  for (auto _ : st) benchmark::DoNotOptimize(check_axiom(m, static_cast<Axiom>(st.range(0)), c));
}
BENCHMARK(BM_AxiomCell)->DenseRange(0, 13)->Unit(benchmark::kMicrosecond);

}  // namespace
