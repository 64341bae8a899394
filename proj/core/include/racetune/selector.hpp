#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "racetune/diversity.hpp"
#include "racetune/rng.hpp"
#include "racetune/space.hpp"

namespace racetune {

enum class SelectionStrategy { greedy, rand, entropy, gower };

std::string_view to_string(SelectionStrategy s);
/// Throws std::invalid_argument for an unknown name.
SelectionStrategy parse_strategy(std::string_view name);

struct EliteSet {
  std::vector<Configuration> members;  // best-ranked first
  SelectionStrategy strategy = SelectionStrategy::greedy;
  /// For entropy selection: whether the subset search was exhaustive.
  bool exhaustive = true;
};

/// The first min(n_min, |ranked|) survivors.
EliteSet select_greedy(std::span<const Configuration> ranked, std::size_t n_min);

/// Keeps the best survivor and draws n_min - 1 more uniformly without
/// replacement from the best ceil(pool_factor * n_min) survivors. An
/// infinite pool factor draws from all survivors.
EliteSet select_rand(std::span<const Configuration> ranked, std::size_t n_min, double pool_factor,
                     Rng& rng);

struct EntropySelectOptions {
  EntropyOptions entropy;
  /// Subset counts above this switch to greedy forward selection.
  std::size_t exhaustive_limit = 100000;
};

/// Keeps the best survivor and adds the n_min - 1 others maximizing the
/// population diversity of the result.
EliteSet select_entropy(std::span<const Configuration> ranked, std::size_t n_min,
                        const ParameterSpace& space, const EntropySelectOptions& options = {});

/// One greedy step of Gower selection, for inspection.
struct GowerStep {
  std::vector<Value> anchor;       // mean configuration of the elites so far
  std::vector<double> distances;   // per remaining candidate, in rank order
  std::vector<std::size_t> remaining;  // ranked indices still available
  std::size_t chosen = 0;          // ranked index added
};

/// Keeps the best survivor, then repeatedly adds the survivor farthest (in
/// Gower distance) from the mean configuration of the elites so far.
EliteSet select_gower(std::span<const Configuration> ranked, std::size_t n_min,
                      const ParameterSpace& space, Rng& rng, std::vector<GowerStep>* trace = nullptr);

/// Binomial coefficient saturating at the max of std::size_t.
std::size_t choose(std::size_t n, std::size_t k);

}  // namespace racetune
