#include "racetune/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace racetune {

namespace {

/// Cell index of one value; std::nullopt marks INACTIVE.
std::optional<std::size_t> cell_of(const Value& v, const ParameterSpec& spec, std::size_t bins) {
  if (const auto* l = std::get_if<Level>(&v)) return l->index;
  if (const auto* d = std::get_if<double>(&v)) {
    if (spec.kind == ParamKind::integer) return static_cast<std::size_t>(std::llround(*d - spec.lower));
    const double t = (*d - spec.lower) / spec.range() * static_cast<double>(bins);
    if (!(t > 0.0)) return 0;
    return std::min(bins - 1, static_cast<std::size_t>(t));
  }
  return std::nullopt;
}

double entropy_from_counts(std::vector<std::size_t> counts, std::size_t total, std::size_t cells) {
  if (cells <= 1 || total == 0) return 0.0;
  // Sorting makes the sum independent of which cells hold the counts.
  std::sort(counts.begin(), counts.end());
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return std::max(0.0, h / std::log(static_cast<double>(cells)));
}

template <typename Get>
double entropy_impl(std::size_t n, Get get, const ParameterSpec& spec, const EntropyOptions& options) {
  if (n == 0) return 0.0;
  const std::size_t bins = options.bins > 0 ? options.bins : n;
  std::map<std::size_t, std::size_t> hist;
  std::size_t inactive = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = cell_of(get(i), spec, bins)) ++hist[*c];
    else ++inactive;
  }
  std::vector<std::size_t> counts;
  for (const auto& [cell, count] : hist) counts.push_back(count);
  if (inactive) counts.push_back(inactive);

  std::size_t cells = 0;
  if (options.normalization == EntropyNormalization::observations) {
    cells = n;
  } else {
    const std::size_t extra = spec.is_conditional() ? 1 : 0;
    switch (spec.kind) {
      case ParamKind::categorical: cells = spec.levels.size() + extra; break;
      case ParamKind::integer: cells = std::min(spec.cardinality() + extra, n); break;
      case ParamKind::real: cells = bins + extra; break;
    }
  }
  return entropy_from_counts(std::move(counts), n, cells);
}

}  // namespace

double normalized_entropy(std::span<const Value> values, const ParameterSpec& spec,
                          const EntropyOptions& options) {
  return entropy_impl(values.size(), [&](std::size_t i) -> const Value& { return values[i]; }, spec,
                      options);
}

double diversity_of(std::span<const Configuration* const> population, const ParameterSpace& space,
                    const EntropyOptions& options) {
  if (space.size() == 0 || population.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < space.size(); ++j)
    sum += entropy_impl(
        population.size(), [&](std::size_t i) -> const Value& { return population[i]->values[j]; },
        space[j], options);
  return sum / static_cast<double>(space.size());
}

DiversityReport population_diversity(std::span<const Configuration> population,
                                     const ParameterSpace& space, const EntropyOptions& options) {
  DiversityReport r;
  r.n = population.size();
  r.p = space.size();
  for (std::size_t j = 0; j < space.size(); ++j)
    r.entropy.push_back(entropy_impl(
        population.size(), [&](std::size_t i) -> const Value& { return population[i].values[j]; },
        space[j], options));
  if (r.p > 0) r.diversity = std::accumulate(r.entropy.begin(), r.entropy.end(), 0.0) / static_cast<double>(r.p);
  return r;
}

double gower_distance(std::span<const Value> a, std::span<const Value> b, const ParameterSpace& space) {
  double sum = 0.0;
  std::size_t comparable = 0;
  for (std::size_t j = 0; j < space.size(); ++j) {
    const auto& va = a[j];
    const auto& vb = b[j];
    if (!is_active(va) || !is_active(vb)) continue;
    ++comparable;
    if (space[j].is_numeric()) {
      sum += std::abs(std::get<double>(va) - std::get<double>(vb)) / space[j].range();
    } else {
      sum += std::get<Level>(va) == std::get<Level>(vb) ? 0.0 : 1.0;
    }
  }
  return comparable == 0 ? 1.0 : sum / static_cast<double>(comparable);
}

double gower_distance(const Configuration& a, const Configuration& b, const ParameterSpace& space) {
  return gower_distance(a.values, b.values, space);
}

std::vector<Value> mean_configuration(std::span<const Configuration* const> population,
                                      const ParameterSpace& space, Rng& rng) {
  std::vector<Value> out(space.size(), Inactive{});
  for (std::size_t j = 0; j < space.size(); ++j) {
    const auto& spec = space[j];
    if (spec.is_numeric()) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto* c : population)
        if (const auto* d = std::get_if<double>(&c->values[j])) sum += *d, ++n;
      if (n == 0) continue;
      double mean = sum / static_cast<double>(n);
      if (spec.kind == ParamKind::integer) mean = std::clamp(std::round(mean), spec.lower, spec.upper);
      out[j] = mean;
    } else {
      std::vector<std::size_t> counts(spec.levels.size(), 0);
      for (const auto* c : population)
        if (const auto* l = std::get_if<Level>(&c->values[j])) ++counts[l->index];
      const auto top = *std::max_element(counts.begin(), counts.end());
      if (top == 0) continue;
      std::vector<std::size_t> modes;
      for (std::size_t k = 0; k < counts.size(); ++k)
        if (counts[k] == top) modes.push_back(k);
      out[j] = Level{modes.size() == 1 ? modes.front() : modes[rng.below(modes.size())]};
    }
  }
  rederive_activation(space, out);
  return out;
}

std::vector<Value> mean_configuration(std::span<const Configuration> population,
                                      const ParameterSpace& space, Rng& rng) {
  std::vector<const Configuration*> ptrs;
  for (const auto& c : population) ptrs.push_back(&c);
  return mean_configuration(std::span<const Configuration* const>(ptrs), space, rng);
}

double set_distance(std::span<const Configuration> population, const Configuration& candidate,
                    const ParameterSpace& space, Rng& rng) {
  const auto anchor = mean_configuration(population, space, rng);
  return gower_distance(anchor, candidate.values, space);
}

}  // namespace racetune
