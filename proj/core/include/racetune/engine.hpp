#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "racetune/diversity.hpp"
#include "racetune/scenario.hpp"
#include "racetune/selector.hpp"
#include "racetune/targets.hpp"

namespace racetune {

struct RaceSummary {
  int race = 0;
  std::size_t budget = 0;  // B_j
  std::size_t candidates = 0;
  std::size_t evaluations = 0;
  std::size_t steps = 0;
  std::size_t survivors = 0;
  std::size_t elites = 0;
  double diversity = 0.0;  // D of the elites selected after the race
};

struct TuneOptions {
  /// Stop (resumably) once this many races have completed.
  std::optional<int> stop_after_race;
  /// One line per race when set.
  std::ostream* progress = nullptr;
  /// Use this target instead of building one from the scenario. Not owned.
  Target* target = nullptr;
};

struct TuneResult {
  EliteSet elites;
  std::vector<double> elite_mean_costs;  // training mean, parallel to elites.members
  std::size_t evaluations = 0;           // B_used
  int races = 0;
  bool complete = false;
  std::vector<RaceSummary> history;
  std::vector<DiversityReport> diversity;  // per race, of the selected elites
};

/// Runs the iterated race. With `scenario.output` set, writes scenario.json,
/// evals.csv, diversity.csv, elites.json, and state.bin into that directory.
TuneResult tune(const Scenario& scenario, const TuneOptions& options = {});

/// Continues a run from `<run_dir>/state.bin`, truncating the logs to the
/// state's recorded sizes first.
TuneResult resume(const std::string& run_dir, const TuneOptions& options = {});

// --- elites file ------------------------------------------------------------

std::string elites_to_json(const ParameterSpace& space, const TuneResult& result, std::size_t budget);
std::vector<Configuration> parse_elites_json(const ParameterSpace& space, const std::string& text);
std::vector<Configuration> load_elites(const ParameterSpace& space, const std::string& path);

// --- validation ---------------------------------------------------------------

/// Configs x instances mean costs over repeated validation runs.
struct ValidationMatrix {
  std::vector<ConfigId> configs;
  std::vector<std::string> instances;
  std::vector<std::vector<double>> mean;  // [config][instance]

  double row_mean(std::size_t config) const;
};

/// Evaluates each configuration `repetitions` times per instance. Seeds depend
/// only on `seed`, the instance index, and the repetition, so every
/// configuration sees the same seeds.
ValidationMatrix validate(Target& target, std::span<const Configuration> configs,
                          std::span<const Instance> instances, std::size_t repetitions,
                          std::uint64_t seed = 0, std::size_t workers = 1, const CrashPolicy& policy = {});

void write_validation_csv(std::ostream& out, const ValidationMatrix& m);
ValidationMatrix read_validation_csv(std::istream& in);

}  // namespace racetune
