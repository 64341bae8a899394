#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "racetune/racer.hpp"
#include "racetune/space.hpp"
#include "racetune/tsp.hpp"

namespace racetune {

struct Instance {
  std::string id;
  std::string path;             // file-backed instances; empty for generated ones
  std::uint64_t base_seed = 0;  // generator seed
  std::size_t n_cities = 0;     // generated TSP instances

  friend bool operator==(const Instance&, const Instance&) = default;
};

enum class EvalStatus { ok, crashed, timeout };

struct EvalResult {
  double cost = 0.0;
  double runtime_s = 0.0;
  EvalStatus status = EvalStatus::ok;
  std::string message;
};

/// Raised when a target run fails and no crash cost is configured.
class TargetFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps (configuration, instance, seed) to a cost. Implementations hold no
/// mutable state across calls and may be invoked concurrently.
class Target {
 public:
  virtual ~Target() = default;
  virtual std::string name() const = 0;
  /// Called once before evaluations start; may cache per-instance data.
  virtual void prepare(std::span<const Instance> /*instances*/) {}
  virtual EvalResult evaluate(const Configuration& config, const Instance& instance,
                              std::uint64_t seed) const = 0;
};

/// Caches results of a deterministic target by (values, instance, seed).
/// Configuration ids are not part of the key, so a configuration sampled
/// again under a new id reuses earlier results. Only sound for targets whose
/// cost is a pure function of those inputs.
class MemoTarget final : public Target {
 public:
  explicit MemoTarget(Target& inner) : inner_(inner) {}
  std::string name() const override { return inner_.name(); }
  void prepare(std::span<const Instance> instances) override { inner_.prepare(instances); }
  EvalResult evaluate(const Configuration& config, const Instance& instance,
                      std::uint64_t seed) const override;

  std::size_t hits() const;
  std::size_t misses() const;

 private:
  using Key = std::tuple<std::vector<Value>, std::string, std::string, std::uint64_t>;
  Target& inner_;
  mutable std::mutex mutex_;
  mutable std::map<Key, EvalResult> cache_;
  mutable std::size_t hits_ = 0;
};

struct CrashPolicy {
  std::optional<double> crash_cost;  // empty: abort the run
};

/// Converts a result into an observation, substituting the crash cost for
/// failed runs or throwing TargetFailure when none is configured.
Observation resolve(const EvalResult& result, const CrashPolicy& policy);

// --- synthetic target -----------------------------------------------------

std::string_view synthetic_space_text();

/// Mixed-space test function with a known optimum of 0. Optimum locations
/// come from `key`; instances only contribute the additive noise term.
class SyntheticTarget final : public Target {
 public:
  SyntheticTarget(ParameterSpace space, std::uint64_t key = 0);
  std::string name() const override { return "synthetic"; }
  EvalResult evaluate(const Configuration& config, const Instance& instance,
                      std::uint64_t seed) const override;

  /// Cost without the instance noise term.
  double noise_free_cost(const Configuration& config) const;
  /// The optimal configuration (c1 = a, y = 0.5).
  std::vector<Value> optimum() const;
  std::vector<double> real_targets() const { return x_targets_; }
  double integer_target() const { return i_target_; }

 private:
  ParameterSpace space_;
  std::vector<std::size_t> x_idx_;
  std::size_t i_idx_, c_idx_, y_idx_;
  std::vector<double> x_targets_;
  double i_target_;
};

// --- ACO / TSP target -----------------------------------------------------

std::string_view aco_space_text();

class AcoTspTarget final : public Target {
 public:
  AcoTspTarget(ParameterSpace space, std::size_t tour_budget);
  std::string name() const override { return "aco-tsp"; }
  void prepare(std::span<const Instance> instances) override;
  EvalResult evaluate(const Configuration& config, const Instance& instance,
                      std::uint64_t seed) const override;
  std::size_t tour_budget() const noexcept { return tour_budget_; }

 private:
  std::shared_ptr<const TspInstance> lookup(const Instance& instance) const;

  ParameterSpace space_;
  std::size_t tour_budget_;
  std::map<std::string, std::shared_ptr<const TspInstance>> cache_;
};

/// Materializes a TSP instance from its file or generator parameters.
TspInstance instantiate_tsp(const Instance& instance);

/// Mid-domain default of a space: numeric midpoints (integers rounded half
/// away from zero), the first categorical value, conditionals by activation.
std::vector<Value> default_configuration(const ParameterSpace& space);

// --- external target --------------------------------------------------------

/// Runs `<command...> <instance-path> <seed> --<name> <value> ...` with the
/// active parameters in space order and reads the cost from the last token
/// of the last non-empty stdout line.
class ExternalTarget final : public Target {
 public:
  ExternalTarget(ParameterSpace space, std::string command, double timeout_s);
  std::string name() const override { return "external"; }
  EvalResult evaluate(const Configuration& config, const Instance& instance,
                      std::uint64_t seed) const override;

  /// The argument vector that evaluate() would execute.
  std::vector<std::string> command_line(const Configuration& config, const Instance& instance,
                                        std::uint64_t seed) const;

 private:
  ParameterSpace space_;
  std::vector<std::string> command_;
  double timeout_s_;
};

/// Parses the cost from a target's standard output; nullopt when the last
/// non-empty line does not end in a number.
std::optional<double> parse_cost_output(std::string_view output);

struct ProcessResult {
  int exit_code = 0;
  bool timed_out = false;
  std::string stdout_text;
  double runtime_s = 0.0;
};

/// Runs argv[0] (PATH lookup) with stdout captured; kills the process group
/// when `timeout_s` (> 0) elapses.
ProcessResult run_process(const std::vector<std::string>& argv, double timeout_s);

// --- instance lists ---------------------------------------------------------

/// One instance per line: a file path (relative to the list's directory),
/// or `seed:<n>` for a generated instance. `#` starts a comment.
std::vector<Instance> load_instance_list(const std::string& path, std::size_t n_cities = 0);

/// Generated TSP instances with ids `<n>-<k>`, k = 0..count-1.
std::vector<Instance> generated_instances(std::size_t n_cities, std::size_t count, std::uint64_t seed);

}  // namespace racetune
