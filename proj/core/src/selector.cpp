#include "racetune/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace racetune {

namespace {

// Scores closer than this are ties, so the better-ranked choice stays.
constexpr double kTieTolerance = 1e-12;

}  // namespace

std::string_view to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::greedy: return "greedy";
    case SelectionStrategy::rand: return "rand";
    case SelectionStrategy::entropy: return "entropy";
    case SelectionStrategy::gower: return "gower";
  }
  return "greedy";
}

SelectionStrategy parse_strategy(std::string_view name) {
  if (name == "greedy") return SelectionStrategy::greedy;
  if (name == "rand") return SelectionStrategy::rand;
  if (name == "entropy") return SelectionStrategy::entropy;
  if (name == "gower") return SelectionStrategy::gower;
  throw std::invalid_argument("unknown selection strategy '" + std::string(name) +
                              "' (expected greedy, rand, entropy, or gower)");
}

std::size_t choose(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = n - k + i;
    // r * num / i is exact at every step; guard the multiplication.
    if (r > std::numeric_limits<std::size_t>::max() / num) return std::numeric_limits<std::size_t>::max();
    r = r * num / i;
  }
  return r;
}

namespace {

EliteSet from_indices(std::span<const Configuration> ranked, std::vector<std::size_t> idx,
                      SelectionStrategy strategy) {
  std::sort(idx.begin(), idx.end());
  EliteSet out;
  out.strategy = strategy;
  for (auto i : idx) out.members.push_back(ranked[i]);
  return out;
}

EliteSet all_of(std::span<const Configuration> ranked, SelectionStrategy strategy) {
  EliteSet out;
  out.strategy = strategy;
  out.members.assign(ranked.begin(), ranked.end());
  return out;
}

}  // namespace

EliteSet select_greedy(std::span<const Configuration> ranked, std::size_t n_min) {
  EliteSet out;
  out.strategy = SelectionStrategy::greedy;
  const auto n = std::min(n_min, ranked.size());
  out.members.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

EliteSet select_rand(std::span<const Configuration> ranked, std::size_t n_min, double pool_factor,
                     Rng& rng) {
  if (ranked.size() <= n_min) return all_of(ranked, SelectionStrategy::rand);
  std::size_t pool = ranked.size();
  if (std::isfinite(pool_factor)) {
    const double cap = std::ceil(pool_factor * static_cast<double>(n_min));
    pool = std::min(pool, static_cast<std::size_t>(std::max(1.0, cap)));
  }
  std::vector<std::size_t> candidates(pool - 1);
  std::iota(candidates.begin(), candidates.end(), 1);
  std::vector<std::size_t> chosen{0};
  const std::size_t draws = std::min(n_min - 1, candidates.size());
  // Partial Fisher-Yates.
  for (std::size_t k = 0; k < draws; ++k) {
    const std::size_t pick = k + rng.below(candidates.size() - k);
    std::swap(candidates[k], candidates[pick]);
    chosen.push_back(candidates[k]);
  }
  return from_indices(ranked, std::move(chosen), SelectionStrategy::rand);
}

EliteSet select_entropy(std::span<const Configuration> ranked, std::size_t n_min,
                        const ParameterSpace& space, const EntropySelectOptions& options) {
  if (ranked.size() <= n_min) return all_of(ranked, SelectionStrategy::entropy);
  const std::size_t others = ranked.size() - 1;
  const std::size_t pick = n_min - 1;
  std::vector<const Configuration*> subset{&ranked[0]};

  if (choose(others, pick) <= options.exhaustive_limit) {
    // Lexicographic enumeration of index combinations over ranks 1..others;
    // a strict improvement test keeps the best-ranked maximizer on ties.
    std::vector<std::size_t> comb(pick);
    std::iota(comb.begin(), comb.end(), 1);
    std::vector<std::size_t> best = comb;
    double best_d = -1.0;
    subset.resize(n_min);
    while (true) {
      for (std::size_t t = 0; t < pick; ++t) subset[t + 1] = &ranked[comb[t]];
      const double d = diversity_of(subset, space, options.entropy);
      if (d > best_d + kTieTolerance) best_d = d, best = comb;
      // Advance to the next combination.
      std::size_t t = pick;
      while (t > 0 && comb[t - 1] == others - pick + t) --t;
      if (t == 0) break;
      ++comb[t - 1];
      for (std::size_t u = t; u < pick; ++u) comb[u] = comb[u - 1] + 1;
    }
    best.insert(best.begin(), 0);
    auto out = from_indices(ranked, std::move(best), SelectionStrategy::entropy);
    out.exhaustive = true;
    return out;
  }

  std::vector<std::size_t> chosen{0};
  std::vector<bool> used(ranked.size(), false);
  used[0] = true;
  while (chosen.size() < n_min) {
    std::size_t best_i = 0;
    double best_d = -1.0;
    subset.push_back(nullptr);
    for (std::size_t i = 1; i < ranked.size(); ++i) {
      if (used[i]) continue;
      subset.back() = &ranked[i];
      const double d = diversity_of(subset, space, options.entropy);
      if (d > best_d + kTieTolerance) best_d = d, best_i = i;
    }
    subset.back() = &ranked[best_i];
    used[best_i] = true;
    chosen.push_back(best_i);
  }
  auto out = from_indices(ranked, std::move(chosen), SelectionStrategy::entropy);
  out.exhaustive = false;
  return out;
}

EliteSet select_gower(std::span<const Configuration> ranked, std::size_t n_min,
                      const ParameterSpace& space, Rng& rng, std::vector<GowerStep>* trace) {
  if (ranked.size() <= n_min) return all_of(ranked, SelectionStrategy::gower);
  std::vector<std::size_t> chosen{0};
  std::vector<const Configuration*> elites{&ranked[0]};
  std::vector<std::size_t> remaining(ranked.size() - 1);
  std::iota(remaining.begin(), remaining.end(), 1);
  while (chosen.size() < n_min) {
    GowerStep step;
    step.anchor = mean_configuration(elites, space, rng);
    std::size_t best_k = 0;
    double best_d = -1.0;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      const double d = gower_distance(step.anchor, ranked[remaining[k]].values, space);
      step.distances.push_back(d);
      if (d > best_d + kTieTolerance) best_d = d, best_k = k;
    }
    step.remaining = remaining;
    step.chosen = remaining[best_k];
    chosen.push_back(step.chosen);
    elites.push_back(&ranked[step.chosen]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_k));
    if (trace) trace->push_back(std::move(step));
  }
  return from_indices(ranked, std::move(chosen), SelectionStrategy::gower);
}

}  // namespace racetune
