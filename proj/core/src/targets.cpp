#include "racetune/targets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "racetune/aco.hpp"
#include "racetune/rng.hpp"

namespace racetune {

EvalResult MemoTarget::evaluate(const Configuration& config, const Instance& instance,
                                std::uint64_t seed) const {
  Key key{config.values, instance.id, instance.path, seed};
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  // Evaluated unlocked; concurrent misses on one key compute the same result.
  auto result = inner_.evaluate(config, instance, seed);
  std::lock_guard lock(mutex_);
  cache_.emplace(std::move(key), result);
  return result;
}

std::size_t MemoTarget::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t MemoTarget::misses() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

Observation resolve(const EvalResult& result, const CrashPolicy& policy) {
  if (result.status == EvalStatus::ok && std::isfinite(result.cost)) return {result.cost, result.runtime_s};
  if (policy.crash_cost) return {*policy.crash_cost, result.runtime_s};
  const char* what = result.status == EvalStatus::timeout ? "timed out" : "failed";
  throw TargetFailure(std::string("target run ") + what +
                      (result.message.empty() ? "" : ": " + result.message));
}

// ---------------------------------------------------------------------------

std::string_view synthetic_space_text() {
  return "# Synthetic mixed-space target with a known optimum of 0.\n"
         "x1 r (-5, 5)\n"
         "x2 r (-5, 5)\n"
         "x3 r (-5, 5)\n"
         "i1 i (-5, 5)\n"
         "c1 c {a, b, c}\n"
         "y  r (0, 1) | c1 == \"a\"\n";
}

SyntheticTarget::SyntheticTarget(ParameterSpace space, std::uint64_t key)
    : space_(std::move(space)),
      i_idx_(space_.at("i1")),
      c_idx_(space_.at("c1")),
      y_idx_(space_.at("y")) {
  for (const char* name : {"x1", "x2", "x3"}) x_idx_.push_back(space_.at(name));
  for (std::uint64_t k = 0; k < x_idx_.size(); ++k)
    x_targets_.push_back(-4.0 + 8.0 * hash_to_unit(derive_seed({key, 0x78ULL, k})));
  i_target_ = std::round(-4.0 + 8.0 * hash_to_unit(derive_seed({key, 0x69ULL})));
}

double SyntheticTarget::noise_free_cost(const Configuration& config) const {
  double cost = 0.0;
  for (std::size_t k = 0; k < x_idx_.size(); ++k) {
    const double d = std::get<double>(config.values.at(x_idx_[k])) - x_targets_[k];
    cost += d * d;
  }
  const double di = std::get<double>(config.values.at(i_idx_)) - i_target_;
  cost += di * di;
  static constexpr double penalty[] = {0.0, 0.5, 1.0};
  cost += penalty[std::get<Level>(config.values.at(c_idx_)).index];
  if (const auto* y = std::get_if<double>(&config.values.at(y_idx_))) {
    cost += (*y - 0.5) * (*y - 0.5);
  } else {
    cost += 0.25;
  }
  return cost;
}

EvalResult SyntheticTarget::evaluate(const Configuration& config, const Instance& instance,
                                     std::uint64_t seed) const {
  const double noise = 0.1 * hash_to_unit(derive_seed({instance.base_seed, seed, 0x6e6f697365ULL}));
  return EvalResult{noise_free_cost(config) + noise, 0.0, EvalStatus::ok, {}};
}

std::vector<Value> SyntheticTarget::optimum() const {
  std::vector<Value> v(space_.size(), Inactive{});
  for (std::size_t k = 0; k < x_idx_.size(); ++k) v[x_idx_[k]] = x_targets_[k];
  v[i_idx_] = i_target_;
  v[c_idx_] = Level{0};
  v[y_idx_] = 0.5;
  return v;
}

// ---------------------------------------------------------------------------

std::string_view aco_space_text() {
  return "# Miniature ACO for the symmetric TSP.\n"
         "algorithm   c {as, mmas, acs, ras}\n"
         "alpha       r (0, 5)\n"
         "beta        r (0, 10)\n"
         "rho         r (0.01, 1)\n"
         "ants        i (5, 100)\n"
         "nnls        i (5, 50)\n"
         "q0          r (0, 1)     | algorithm == \"acs\"\n"
         "rasrank     i (1, 100)   | algorithm == \"ras\"\n"
         "localsearch c {0, 1}\n"
         "dlb         c {0, 1}     | localsearch == \"1\"\n";
}

TspInstance instantiate_tsp(const Instance& instance) {
  if (!instance.path.empty()) return load_tsp(instance.path);
  if (instance.n_cities < 3)
    throw std::invalid_argument("instance '" + instance.id + "' has neither a file nor a city count");
  return generate_tsp(instance.n_cities, instance.base_seed);
}

AcoTspTarget::AcoTspTarget(ParameterSpace space, std::size_t tour_budget)
    : space_(std::move(space)), tour_budget_(tour_budget) {
  if (tour_budget_ == 0) throw std::invalid_argument("aco-tsp: tour budget must be positive");
}

namespace {

std::string cache_key(const Instance& inst) {
  return inst.id + '|' + inst.path + '|' + std::to_string(inst.base_seed) + '|' + std::to_string(inst.n_cities);
}

}  // namespace

void AcoTspTarget::prepare(std::span<const Instance> instances) {
  for (const auto& inst : instances) {
    auto key = cache_key(inst);
    if (!cache_.count(key)) cache_.emplace(key, std::make_shared<const TspInstance>(instantiate_tsp(inst)));
  }
}

std::shared_ptr<const TspInstance> AcoTspTarget::lookup(const Instance& instance) const {
  if (auto it = cache_.find(cache_key(instance)); it != cache_.end()) return it->second;
  return std::make_shared<const TspInstance>(instantiate_tsp(instance));
}

EvalResult AcoTspTarget::evaluate(const Configuration& config, const Instance& instance,
                                  std::uint64_t seed) const {
  const auto tsp = lookup(instance);
  const auto result = run_aco(*tsp, aco_params_from(space_, config), seed, tour_budget_);
  return EvalResult{static_cast<double>(result.best_length), 0.0, EvalStatus::ok, {}};
}

std::vector<Value> default_configuration(const ParameterSpace& space) {
  std::vector<Value> v(space.size(), Inactive{});
  for (auto i : space.evaluation_order()) {
    if (!space.condition_holds(i, v)) continue;
    const auto& p = space[i];
    if (p.kind == ParamKind::categorical) {
      v[i] = Level{0};
    } else {
      const double mid = 0.5 * (p.lower + p.upper);
      v[i] = p.kind == ParamKind::integer ? std::clamp(std::round(mid), p.lower, p.upper) : mid;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

}  // namespace

std::vector<Instance> load_instance_list(const std::string& path, std::size_t n_cities) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance list '" + path + "'");
  const auto dir = std::filesystem::path(path).parent_path();
  std::vector<Instance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) ++start;
    line.erase(0, start);
    if (line.empty()) continue;
    Instance inst;
    if (line.rfind("seed:", 0) == 0) {
      inst.base_seed = std::stoull(line.substr(5));
      inst.id = "seed-" + line.substr(5);
      inst.n_cities = n_cities;
    } else {
      auto p = std::filesystem::path(line);
      if (p.is_relative()) p = dir / p;
      inst.path = p.lexically_normal().string();
      inst.id = p.stem().string();
      inst.base_seed = derive_seed({fnv1a(inst.id)});
    }
    for (const auto& other : out)
      if (other.id == inst.id) throw std::runtime_error("instance list '" + path + "': duplicate id '" + inst.id + "'");
    out.push_back(std::move(inst));
  }
  if (out.empty()) throw std::runtime_error("instance list '" + path + "' is empty");
  return out;
}

std::vector<Instance> generated_instances(std::size_t n_cities, std::size_t count, std::uint64_t seed) {
  std::vector<Instance> out;
  for (std::size_t k = 0; k < count; ++k) {
    Instance inst;
    inst.id = std::to_string(n_cities) + "-" + std::to_string(k);
    inst.base_seed = derive_seed({seed, 0x696e7374ULL, k});
    inst.n_cities = n_cities;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace racetune
