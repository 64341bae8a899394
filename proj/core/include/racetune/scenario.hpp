#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "racetune/diversity.hpp"
#include "racetune/racer.hpp"
#include "racetune/sampler.hpp"
#include "racetune/selector.hpp"
#include "racetune/space.hpp"
#include "racetune/targets.hpp"

namespace racetune {

struct TargetSpec {
  std::string builtin;  // "synthetic" or "aco-tsp"; empty selects `command`
  std::string command;
  double timeout_s = 0.0;
  std::optional<double> crash_cost;
  std::size_t tour_budget = 2000;
  std::uint64_t key = 0;  // synthetic optimum placement
};

/// Either an instance list file or a generator: `count` instances of
/// `n_cities` cities (0 for targets that ignore city counts).
struct InstanceSpec {
  std::string list;
  std::size_t n_cities = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

/// A tuning run's inputs. Paths are kept as written; `base_dir` resolves
/// relative ones.
struct Scenario {
  std::string parameters = "builtin:synthetic";  // file path or builtin:<name>
  TargetSpec target;
  InstanceSpec instances;
  std::size_t budget = 1000;
  std::size_t n_min = 5;
  SelectionStrategy strategy = SelectionStrategy::greedy;
  double pool_factor = std::numeric_limits<double>::infinity();
  TestKind test = TestKind::friedman;
  double alpha = 0.05;
  int first_test = 5;
  int each_test = 1;
  int elite_test = 1;
  bool elitist = true;
  SamplerSettings sampler;
  EntropyOptions entropy;
  std::size_t exhaustive_limit = 100000;
  std::uint64_t seed = 1;
  std::string output;
  std::size_t workers = 0;  // 0: hardware concurrency

  std::string base_dir;  // not serialized
};

/// Parses a scenario from JSON text. Unknown keys are rejected.
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);
/// Canonical JSON echo (stable key order, 2-space indent, trailing newline).
std::string scenario_to_json(const Scenario& scenario);
/// Throws std::invalid_argument on inconsistent settings.
void check_scenario(const Scenario& scenario);

std::string resolve_path(const Scenario& scenario, const std::string& path);
ParameterSpace load_space(const Scenario& scenario);
std::unique_ptr<Target> make_target(const Scenario& scenario, const ParameterSpace& space);
std::vector<Instance> training_instances(const Scenario& scenario);
RaceSettings race_settings(const Scenario& scenario);
/// Scenario workers, capped by RACETUNE_WORKERS when set.
std::size_t effective_workers(const Scenario& scenario);

}  // namespace racetune
