#pragma once

#include <optional>
#include <span>
#include <vector>

#include "racetune/rng.hpp"
#include "racetune/space.hpp"

namespace racetune {

/// How normalized entropy picks its log denominator.
enum class EntropyNormalization {
  /// Number of cells the parameter can occupy: categories, distinct
  /// integers capped at the sample size, or bins; +1 for INACTIVE when the
  /// parameter is conditional.
  cells,
  /// log(number of observations) for every kind.
  observations,
};

struct EntropyOptions {
  EntropyNormalization normalization = EntropyNormalization::cells;
  /// Bins for real parameters; 0 means one bin per observation.
  std::size_t bins = 0;
};

struct DiversityReport {
  std::vector<double> entropy;  // per parameter, in space order
  double diversity = 0.0;       // mean of `entropy`
  std::size_t n = 0;
  std::size_t p = 0;
};

/// Normalized Shannon entropy of one parameter's values in [0, 1].
double normalized_entropy(std::span<const Value> values, const ParameterSpec& spec,
                          const EntropyOptions& options = {});

/// Mean normalized entropy over all parameters of the space.
DiversityReport population_diversity(std::span<const Configuration> population,
                                     const ParameterSpace& space, const EntropyOptions& options = {});

/// Convenience: D only, over pointers (used by subset searches).
double diversity_of(std::span<const Configuration* const> population, const ParameterSpace& space,
                    const EntropyOptions& options = {});

/// Gower dissimilarity over mutually active parameters; 1 when none are.
double gower_distance(const Configuration& a, const Configuration& b, const ParameterSpace& space);
double gower_distance(std::span<const Value> a, std::span<const Value> b, const ParameterSpace& space);

/// Per-parameter modes (categorical, uniform random tie-break) and means
/// (numeric, integers rounded) over the members where each parameter is
/// active; activation is then re-derived. Only meant as a distance anchor.
std::vector<Value> mean_configuration(std::span<const Configuration* const> population,
                                      const ParameterSpace& space, Rng& rng);
std::vector<Value> mean_configuration(std::span<const Configuration> population,
                                      const ParameterSpace& space, Rng& rng);

/// Gower distance between the population's mean configuration and `candidate`.
double set_distance(std::span<const Configuration> population, const Configuration& candidate,
                    const ParameterSpace& space, Rng& rng);

}  // namespace racetune
