#include <benchmark/benchmark.h>

#include "racetune/aco.hpp"
#include "racetune/rng.hpp"
#include "racetune/sampler.hpp"
#include "racetune/targets.hpp"

using namespace racetune;

namespace {

void BM_AcoVariant(benchmark::State& state) {
  const auto inst = generate_tsp(100, 7);
  AcoParams p;
  p.variant = static_cast<AcoVariant>(state.range(0));
  p.local_search = state.range(1) != 0;
  p.dont_look_bits = p.local_search;
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_aco(inst, p, seed++, 2000).best_length);
  state.SetLabel(std::string(p.variant == AcoVariant::as     ? "as"
                             : p.variant == AcoVariant::mmas ? "mmas"
                             : p.variant == AcoVariant::acs  ? "acs"
                                                             : "ras") +
                 (p.local_search ? "+2opt" : ""));
}
BENCHMARK(BM_AcoVariant)->ArgsProduct({{0, 1, 2, 3}, {0, 1}})->Unit(benchmark::kMillisecond);

// One tuning-time evaluation of a uniformly random configuration.
void BM_AcoRandomConfig(benchmark::State& state) {
  const auto space = parse_parameter_file(aco_space_text());
  AcoTspTarget target(space, 2000);
  const auto insts = generated_instances(100, 4, 1);
  target.prepare(insts);
  Rng rng(3);
  std::uint64_t k = 0;
  for (auto _ : state) {
    state.PauseTiming();
    const Configuration c{k, sample_uniform_values(space, rng), {}};
    state.ResumeTiming();
    benchmark::DoNotOptimize(target.evaluate(c, insts[k % insts.size()], k).cost);
    ++k;
  }
}
BENCHMARK(BM_AcoRandomConfig)->Unit(benchmark::kMillisecond)->Iterations(40);

void BM_TwoOpt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto inst = generate_tsp(n, 3);
  const auto nb = inst.neighbor_lists(20);
  Rng rng(5);
  for (auto _ : state) {
    state.PauseTiming();
    std::vector<int> tour(n);
    for (std::size_t i = 0; i < n; ++i) tour[i] = static_cast<int>(i);
    for (std::size_t i = n; i > 1; --i) std::swap(tour[i - 1], tour[rng.below(i)]);
    state.ResumeTiming();
    benchmark::DoNotOptimize(two_opt(inst, tour, nb, true, rng.next()));
  }
}
BENCHMARK(BM_TwoOpt)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

}  // namespace
