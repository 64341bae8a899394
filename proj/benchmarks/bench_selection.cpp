#include <benchmark/benchmark.h>

#include "racetune/diversity.hpp"
#include "racetune/sampler.hpp"
#include "racetune/selector.hpp"
#include "racetune/targets.hpp"

using namespace racetune;

namespace {

std::vector<Configuration> survivors(std::size_t n) {
  const auto space = parse_parameter_file(aco_space_text());
  Rng rng(17);
  return initial_sample(space, n, rng, 1);
}

void BM_EntropySelect(benchmark::State& state) {
  const auto space = parse_parameter_file(aco_space_text());
  const auto ranked = survivors(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(select_entropy(ranked, 5, space).members.size());
  state.SetLabel(choose(ranked.size() - 1, 4) > 100000 ? "greedy" : "exhaustive");
}
BENCHMARK(BM_EntropySelect)->Arg(10)->Arg(20)->Arg(40)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_GowerSelect(benchmark::State& state) {
  const auto space = parse_parameter_file(aco_space_text());
  const auto ranked = survivors(static_cast<std::size_t>(state.range(0)));
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(select_gower(ranked, 5, space, rng).members.size());
}
BENCHMARK(BM_GowerSelect)->Arg(20)->Arg(250)->Unit(benchmark::kMicrosecond);

void BM_PopulationDiversity(benchmark::State& state) {
  const auto space = parse_parameter_file(aco_space_text());
  const auto pop = survivors(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(population_diversity(pop, space).diversity);
}
BENCHMARK(BM_PopulationDiversity)->Arg(5)->Arg(100)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
