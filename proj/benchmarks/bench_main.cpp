#include <benchmark/benchmark.h>

#include <random>

#include "genesel/boosting.hpp"
#include "genesel/ga.hpp"
#include "genesel/metrics.hpp"
#include "genesel/synth.hpp"

using namespace genesel;

namespace {

Dataset planted(std::size_t genes) {
  synth::SynthSpec spec;
  spec.n_genes = genes;
  return normalize_minmax(synth::generate_synth(spec).dataset);
}

void BM_BoostFit(benchmark::State& state) {
  const auto ds = planted(static_cast<std::size_t>(state.range(0)));
  boosting::BoostParams p;
  p.n_estimators = 50;
  for (auto _ : state) benchmark::DoNotOptimize(boosting::fit(ds, p));
}
BENCHMARK(BM_BoostFit)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_GaFitness(benchmark::State& state) {
  const auto ds = planted(static_cast<std::size_t>(state.range(0)));
  ga::GaConfig cfg;
  ga::Rng rng(1);
  const auto pop = ga::init_population(ds.n_genes(), cfg, rng);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ga::evaluate_fitness(pop[i++ % pop.size()], ds, cfg));
}
BENCHMARK(BM_GaFitness)->Arg(40)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_WilcoxonExact(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.2, 1.0);
  std::vector<double> x(static_cast<std::size_t>(state.range(0))), y(x.size(), 0.0);
  for (auto& v : x) v = z(rng);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::wilcoxon_signed_rank(x, y));
}
BENCHMARK(BM_WilcoxonExact)->Arg(10)->Arg(25);

}  // namespace

BENCHMARK_MAIN();
