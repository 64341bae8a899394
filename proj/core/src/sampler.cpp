#include "racetune/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/special_functions/erf.hpp>

namespace racetune {

namespace {

double scaled(const ParameterSpec& p, double x) { return p.scale == Scale::log ? std::log(x) : x; }
double unscaled(const ParameterSpec& p, double x) { return p.scale == Scale::log ? std::exp(x) : x; }

std::vector<double> uniform_vector(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

double draw_numeric_uniform(const ParameterSpec& p, Rng& rng) {
  if (p.kind == ParamKind::integer && p.scale == Scale::linear) {
    const auto count = static_cast<std::size_t>(p.upper - p.lower) + 1;
    return p.lower + static_cast<double>(rng.below(count));
  }
  double x = unscaled(p, rng.uniform(scaled(p, p.lower), scaled(p, p.upper)));
  if (p.kind == ParamKind::integer) return round_and_clamp(x, p.lower, p.upper);
  return std::clamp(x, p.lower, p.upper);
}

std::size_t draw_index(const std::vector<double>& probs, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left u above the cumulative sum; take the last nonzero cell.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double round_and_clamp(double x, double lo, double hi) { return std::clamp(std::round(x), lo, hi); }

double sample_truncated_normal(Rng& rng, double mean, double sd, double lo, double hi) {
  const double u = rng.uniform();
  if (!(sd > 0.0) || lo == hi) return std::clamp(mean, lo, hi);
  double a = (lo - mean) / sd;
  double b = (hi - mean) / sd;
  // Work in the left tail where the CDF keeps its relative precision.
  const bool flip = a > 0.0;
  if (flip) {
    std::swap(a, b);
    a = -a;
    b = -b;
  }
  const double pa = std_normal_cdf(a);
  const double pb = std_normal_cdf(b);
  double z;
  if (!(pb > pa)) {
    z = std::abs(a) < std::abs(b) ? a : b;
  } else {
    const double p = pa + u * (pb - pa);
    z = p <= 0.0 ? a : -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
    z = std::clamp(z, a, b);
  }
  if (flip) z = -z;
  return std::clamp(mean + sd * z, lo, hi);
}

double SamplingModel::spread_at(double range, int j, int n_iterations, double final_fraction) {
  const int steps = std::max(1, n_iterations - 1);
  const double decay = std::pow(2.0 * final_fraction, 1.0 / steps);
  return 0.5 * range * std::pow(decay, std::clamp(j, 1, std::max(1, n_iterations)) - 1);
}

SamplingModel::SamplingModel(const ParameterSpace& space, int n_iterations, SamplerSettings settings)
    : settings_(settings), n_iterations_(n_iterations) {
  for (const auto& p : space.params()) {
    kinds_.push_back(p.kind);
    level_counts_.push_back(p.levels.size());
    ranges_.push_back(p.is_numeric() ? scaled(p, p.upper) - scaled(p, p.lower) : 0.0);
  }
  recompute_spreads();
}

void SamplingModel::recompute_spreads() {
  spreads_.assign(ranges_.size(), 0.0);
  for (std::size_t i = 0; i < ranges_.size(); ++i)
    if (kinds_[i] != ParamKind::categorical)
      spreads_[i] = spread_at(ranges_[i], iteration_, n_iterations_, settings_.decay_final_fraction);
}

std::vector<double> SamplingModel::probabilities(ConfigId elite, std::size_t param) const {
  auto it = categorical_.find(elite);
  if (it != categorical_.end() && !it->second[param].empty()) return it->second[param];
  return uniform_vector(level_counts_.at(param));
}

SamplingModel SamplingModel::restore(const ParameterSpace& space, int n_iterations,
                                     SamplerSettings settings, int iteration,
                                     std::map<ConfigId, std::vector<std::vector<double>>> categorical) {
  SamplingModel m(space, n_iterations, settings);
  m.iteration_ = iteration;
  m.categorical_ = std::move(categorical);
  m.recompute_spreads();
  return m;
}

SamplingModel update_model(SamplingModel model, std::span<const Configuration> elites, int iteration) {
  model.iteration_ = iteration;
  model.recompute_spreads();
  const double weight =
      std::min(1.0, static_cast<double>(iteration) / static_cast<double>(model.n_iterations_));

  std::map<ConfigId, std::vector<std::vector<double>>> next;
  for (const auto& elite : elites) {
    std::vector<std::vector<double>> vectors;
    if (auto it = model.categorical_.find(elite.id); it != model.categorical_.end()) {
      vectors = it->second;
    } else if (auto pit = elite.origin.parent ? model.categorical_.find(*elite.origin.parent)
                                               : model.categorical_.end();
               pit != model.categorical_.end()) {
      vectors = pit->second;
    } else {
      vectors.resize(model.kinds_.size());
      for (std::size_t i = 0; i < model.kinds_.size(); ++i)
        if (model.kinds_[i] == ParamKind::categorical) vectors[i] = uniform_vector(model.level_counts_[i]);
    }
    for (std::size_t i = 0; i < model.kinds_.size(); ++i) {
      if (model.kinds_[i] != ParamKind::categorical) continue;
      const auto* level = std::get_if<Level>(&elite.values.at(i));
      if (!level) continue;  // inactive in this elite: keep the current vector
      auto& p = vectors[i];
      for (auto& x : p) x *= (1.0 - weight);
      p[level->index] += weight;
    }
    next.emplace(elite.id, std::move(vectors));
  }
  model.categorical_ = std::move(next);
  return model;
}

std::vector<Value> sample_uniform_values(const ParameterSpace& space, Rng& rng) {
  std::vector<Value> values(space.size(), Inactive{});
  for (auto i : space.evaluation_order()) {
    if (!space.condition_holds(i, values)) continue;
    const auto& p = space[i];
    if (p.is_numeric()) {
      values[i] = draw_numeric_uniform(p, rng);
    } else {
      values[i] = Level{rng.below(p.levels.size())};
    }
  }
  return values;
}

namespace {

template <typename Draw>
std::vector<Configuration> sample_distinct(std::size_t n, int retry_limit, ConfigId first_id,
                                           std::span<const Configuration> existing, Draw draw) {
  std::set<std::vector<Value>> seen;
  for (const auto& c : existing) seen.insert(c.values);
  std::vector<Configuration> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Configuration c = draw(first_id + k);
    for (int attempt = 0; attempt < retry_limit && seen.count(c.values); ++attempt)
      c = draw(first_id + k);
    seen.insert(c.values);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

std::vector<Configuration> initial_sample(const ParameterSpace& space, std::size_t n, Rng& rng,
                                          ConfigId first_id, SamplerSettings settings,
                                          std::span<const Configuration> existing) {
  return sample_distinct(n, settings.retry_limit, first_id, existing, [&](ConfigId id) {
    return Configuration{id, sample_uniform_values(space, rng), Origin{std::nullopt, 1}};
  });
}

Configuration sample_from_elite(const SamplingModel& model, const Configuration& elite,
                                const ParameterSpace& space, Rng& rng, ConfigId id) {
  std::vector<Value> values(space.size(), Inactive{});
  for (auto i : space.evaluation_order()) {
    if (!space.condition_holds(i, values)) continue;
    const auto& p = space[i];
    const auto& parent_value = elite.values.at(i);
    if (p.is_numeric()) {
      const auto* loc = std::get_if<double>(&parent_value);
      if (!loc) {
        values[i] = draw_numeric_uniform(p, rng);
        continue;
      }
      double x = unscaled(p, sample_truncated_normal(rng, scaled(p, *loc), model.spread(i),
                                                     scaled(p, p.lower), scaled(p, p.upper)));
      values[i] = p.kind == ParamKind::integer ? round_and_clamp(x, p.lower, p.upper)
                                               : std::clamp(x, p.lower, p.upper);
    } else {
      values[i] = Level{draw_index(model.probabilities(elite.id, i), rng)};
    }
  }
  return Configuration{id, std::move(values), Origin{elite.id, model.iteration()}};
}

std::vector<Configuration> sample_offspring(const SamplingModel& model,
                                            std::span<const Configuration> elites,
                                            const ParameterSpace& space, std::size_t n, Rng& rng,
                                            ConfigId first_id,
                                            std::span<const Configuration> existing) {
  return sample_distinct(n, model.settings().retry_limit, first_id, existing, [&](ConfigId id) {
    const auto& parent = elites[rng.below(elites.size())];
    return sample_from_elite(model, parent, space, rng, id);
  });
}

}  // namespace racetune
