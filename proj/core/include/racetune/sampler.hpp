#pragma once

#include <map>
#include <span>
#include <vector>

#include "racetune/rng.hpp"
#include "racetune/space.hpp"

namespace racetune {

struct SamplerSettings {
  /// Numeric spread at the last scheduled iteration, as a fraction of the range.
  double decay_final_fraction = 0.01;
  /// Resampling attempts for a duplicate before it is accepted.
  int retry_limit = 10;
};

/// Per-elite sampling distributions.
///
/// Numeric parameters are sampled around the parent's value with a spread
/// that depends only on the iteration; categorical parameters keep one
/// probability vector per elite.
class SamplingModel {
 public:
  SamplingModel() = default;
  SamplingModel(const ParameterSpace& space, int n_iterations, SamplerSettings settings = {});

  int iteration() const noexcept { return iteration_; }
  int n_iterations() const noexcept { return n_iterations_; }
  const SamplerSettings& settings() const noexcept { return settings_; }

  /// Standard deviation for parameter `param` in domain units (log units
  /// for log-scaled parameters).
  double spread(std::size_t param) const { return spreads_.at(param); }

  /// Probability vector of `elite` for categorical `param`; uniform when the
  /// elite is unknown to the model.
  std::vector<double> probabilities(ConfigId elite, std::size_t param) const;

  bool knows(ConfigId elite) const { return categorical_.count(elite) > 0; }

  /// Spread formula: 0.5 * range * decay^(j-1), decay chosen so the
  /// spread at j = n_iterations is decay_final_fraction * range.
  static double spread_at(double range, int j, int n_iterations, double final_fraction);

  friend SamplingModel update_model(SamplingModel model, std::span<const Configuration> elites,
                                    int iteration);

  // Serialization access.
  const std::map<ConfigId, std::vector<std::vector<double>>>& categorical() const noexcept {
    return categorical_;
  }
  static SamplingModel restore(const ParameterSpace& space, int n_iterations,
                               SamplerSettings settings, int iteration,
                               std::map<ConfigId, std::vector<std::vector<double>>> categorical);

 private:
  void recompute_spreads();

  SamplerSettings settings_;
  int n_iterations_ = 2;
  int iteration_ = 1;
  std::vector<ParamKind> kinds_;
  std::vector<std::size_t> level_counts_;
  std::vector<double> ranges_;  // log-space width for log-scaled parameters
  std::vector<double> spreads_;
  // elite id -> per-parameter probability vector (empty for numeric params)
  std::map<ConfigId, std::vector<std::vector<double>>> categorical_;
};

/// Moves the model to iteration `iteration`: refreshes spreads and blends
/// each elite's categorical vectors toward its own values with weight
/// iteration / n_iterations. Elites new to the model start from their
/// parent's vectors when known, otherwise uniform. Models of configurations
/// that are no longer elites are dropped.
SamplingModel update_model(SamplingModel model, std::span<const Configuration> elites, int iteration);

/// Draws from N(mean, sd) truncated to [lo, hi] by inverse-CDF sampling.
/// Returns `mean` clamped to the interval when sd is zero.
double sample_truncated_normal(Rng& rng, double mean, double sd, double lo, double hi);

/// Round half away from zero, then clamp to [lo, hi].
double round_and_clamp(double x, double lo, double hi);

/// One uniform random configuration (log-uniform for log-scaled parameters).
std::vector<Value> sample_uniform_values(const ParameterSpace& space, Rng& rng);

/// `n` uniformly sampled configurations with ids first_id, first_id+1, ...
/// Duplicates of each other or of `existing` are resampled up to
/// retry_limit times, then accepted.
std::vector<Configuration> initial_sample(const ParameterSpace& space, std::size_t n, Rng& rng,
                                          ConfigId first_id, SamplerSettings settings = {},
                                          std::span<const Configuration> existing = {});

/// One offspring of `elite` under `model`.
Configuration sample_from_elite(const SamplingModel& model, const Configuration& elite,
                                const ParameterSpace& space, Rng& rng, ConfigId id);

/// `n` offspring, each from a parent drawn uniformly among `elites`.
std::vector<Configuration> sample_offspring(const SamplingModel& model,
                                            std::span<const Configuration> elites,
                                            const ParameterSpace& space, std::size_t n, Rng& rng,
                                            ConfigId first_id,
                                            std::span<const Configuration> existing = {});

}  // namespace racetune
