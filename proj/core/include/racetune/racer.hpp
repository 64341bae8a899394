#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "racetune/space.hpp"
#include "racetune/stats.hpp"

namespace racetune {

struct Schedule {
  int n_iterations = 2;
  std::size_t budget = 0;

  /// Budget of race `j` (1-based) given `used` evaluations so far. Races
  /// beyond n_iterations share what is left as if they were the last.
  std::size_t race_budget(int j, std::size_t used) const;
};

/// n_iterations = floor(2 + log2(n_params)). Throws std::invalid_argument
/// when n_params or budget is zero, or when the first race would receive
/// fewer than `min_race_need` evaluations.
Schedule compute_schedule(std::size_t n_params, std::size_t budget, std::size_t min_race_need = 1);

/// Candidates to sample for race j: max(n_min + 1, floor(B_j / (first_test
/// + min(j, 5)))) minus the carried elites.
std::size_t new_candidate_count(std::size_t race_budget, int j, std::size_t n_min, int first_test,
                                std::size_t n_elites);

/// One slot of the tuning instance stream: which instance, which seed.
struct Experiment {
  std::uint64_t position = 0;
  std::size_t instance = 0;  // index into the training instance list
  std::uint64_t seed = 0;
};

/// Deterministic, unbounded sequence of (instance, seed) pairs. Instances
/// cycle through the training set, reshuffled every pass.
class InstanceStream {
 public:
  InstanceStream(std::size_t n_instances, std::uint64_t master_seed);
  Experiment at(std::uint64_t position) const;
  std::size_t n_instances() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::uint64_t master_seed_;
};

struct Record {
  std::size_t instance = 0;
  std::uint64_t seed = 0;
  double cost = 0.0;
  double runtime_s = 0.0;
};

/// Cost records keyed by (configuration, stream position). A stream
/// position fixes the instance and seed, so at most one record exists per
/// (configuration, instance, seed).
class ResultsMatrix {
 public:
  /// Throws std::invalid_argument on a duplicate key or non-finite cost.
  void add(ConfigId config, std::uint64_t position, const Record& record);
  bool has(ConfigId config, std::uint64_t position) const;
  const Record& get(ConfigId config, std::uint64_t position) const;
  /// Positions with a record for `config`, ascending.
  std::vector<std::uint64_t> positions(ConfigId config) const;
  /// Positions where every config in `ids` has a record, ascending.
  std::vector<std::uint64_t> common_positions(std::span<const ConfigId> ids) const;
  CostTable table(std::span<const ConfigId> ids, std::span<const std::uint64_t> positions) const;
  double mean_cost(ConfigId config) const;
  std::size_t size() const noexcept { return count_; }
  /// Drops the records of configurations not in `keep`.
  void retain(std::span<const ConfigId> keep);

  const std::map<ConfigId, std::map<std::uint64_t, Record>>& data() const noexcept { return data_; }

 private:
  std::map<ConfigId, std::map<std::uint64_t, Record>> data_;
  std::size_t count_ = 0;
};

enum class TestKind { friedman, t_test };

struct RaceSettings {
  TestKind test = TestKind::friedman;
  double alpha = 0.05;
  int first_test = 5;  // T_first
  int each_test = 1;   // T_each
  int elite_test = 1;  // T_new: fresh instances an elite must see before it can be eliminated
  std::size_t n_min = 5;
  bool elitist = true;
};

struct Elimination {
  ConfigId config = 0;
  std::size_t after_instance = 0;  // 1-based index of the race step
  double statistic = 0.0;          // Friedman T or the t-test p-value
  bool elite = false;
  std::size_t fresh_seen = 0;      // fresh instances the race had completed
};

struct RaceOutcome {
  std::vector<Configuration> survivors;  // best first
  std::vector<Elimination> eliminations;
  std::size_t evaluations = 0;
  std::size_t steps = 0;
  std::uint64_t next_fresh = 0;  // first stream position no race has used yet
};

struct Observation {
  double cost = 0.0;
  double runtime_s = 0.0;
};

using Evaluator = std::function<Observation(const Configuration&, const Experiment&)>;

/// Evaluation log writer, CSV header
/// `race,instance_pos,instance_id,config_id,seed,cost,runtime_s`.
class EvalLog {
 public:
  explicit EvalLog(std::ostream* out, std::vector<std::string> instance_ids)
      : out_(out), ids_(std::move(instance_ids)) {}
  static const char* header();
  /// Writes all rows of one instance step with a single write + flush.
  void write_step(int race, const std::vector<std::pair<ConfigId, Record>>& rows,
                  std::uint64_t position);

 private:
  std::ostream* out_;
  std::vector<std::string> ids_;
};

struct RaceContext {
  Evaluator evaluate;
  std::size_t workers = 1;
  EvalLog* log = nullptr;
  int race_index = 1;
};

/// Runs one race. Elites reuse cached results: the stream first replays
/// every position an elite has seen, then continues from `next_fresh`.
/// Only evaluations that are not already cached consume `budget`.
RaceOutcome race(std::span<const Configuration> candidates, std::span<const Configuration> elites,
                 const InstanceStream& stream, std::uint64_t next_fresh, std::size_t budget,
                 ResultsMatrix& results, const RaceSettings& settings, RaceContext& context);

/// Ids whose rows the Friedman/Conover procedure eliminates.
std::vector<ConfigId> friedman_eliminate(const CostTable& table, std::span<const ConfigId> ids,
                                         double alpha);
/// Ids the paired t-test against the best eliminates.
std::vector<ConfigId> t_test_eliminate(const CostTable& table, std::span<const ConfigId> ids,
                                       double alpha);

/// Orders `alive` by ascending rank sum over their common positions, then
/// ascending mean cost on those positions, then ascending id.
std::vector<ConfigId> rank_survivors(const ResultsMatrix& results, std::span<const ConfigId> alive);

/// Runs `task(i)` for i in [0, n) on up to `workers` threads. The first
/// exception thrown is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task);

}  // namespace racetune
