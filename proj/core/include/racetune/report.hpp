#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "racetune/csv.hpp"
#include "racetune/engine.hpp"
#include "racetune/space.hpp"

namespace racetune {

/// One tuning run's elites with their validation results.
struct RunOutput {
  std::string name;
  std::string variant;  // e.g. the selection strategy
  std::vector<Configuration> elites;
  ValidationMatrix validation;  // rows parallel to `elites`
};

struct DeviationRow {
  std::size_t run = 0;  // index into the run list
  std::string variant;
  ConfigId config = 0;
  bool run_best = false;  // lowest mean test cost within its run
  double mean_cost = 0.0;
  double deviation_pct = 0.0;  // (f - f*) / f* * 100
};

struct BestCount {
  std::string variant;
  std::size_t configs = 0;  // elites over all runs of the variant
  std::size_t best = 0;     // test instances this variant won
};

struct CompareReport {
  std::vector<std::string> instances;
  double best_mean = 0.0;                  // f*
  std::vector<DeviationRow> deviations;
  std::vector<std::size_t> instance_winner;  // run index per test instance
  std::vector<BestCount> best_counts;      // variants in first-appearance order
};

/// Per-run elite deviations from the cross-run best mean cost and per-instance
/// winner counts. An instance goes to the run holding the lowest mean cost;
/// ties go to the lowest run index. Throws on mismatched test sets.
CompareReport compare(std::span<const RunOutput> runs);

void write_deviation_csv(std::ostream& out, const CompareReport& report, std::span<const RunOutput> runs);
void write_best_counts_csv(std::ostream& out, const CompareReport& report);

/// (f - f*) / f* * 100.
double deviation_percent(double f, double f_best);

struct HistogramRow {
  std::string param;
  std::string bin_lo;  // "NA" for the INACTIVE row; the level name for categorical rows
  std::string bin_hi;
  std::size_t count = 0;
};

/// Per-parameter counts: `bins` equal-width bins over the declared domain for
/// numeric parameters (log-scaled ones bin in log space), one row per value for
/// categorical ones, and an `NA,NA` row for conditional parameters.
std::vector<HistogramRow> param_distributions(std::span<const Configuration> configs,
                                              const ParameterSpace& space, std::size_t bins = 20);
void write_histogram_csv(std::ostream& out, std::span<const HistogramRow> rows);

/// One row per configuration: a label, parameter values (INACTIVE as 0,
/// categorical as the level index), and the deviation of its mean cost from
/// the best one.
void write_parallel_coordinates_csv(std::ostream& out, std::span<const std::string> labels,
                                    std::span<const Configuration> configs, std::span<const double> mean_costs,
                                    const ParameterSpace& space);

/// Population CSV: header = parameter names, one configuration per row,
/// INACTIVE as an empty field. Rows get ids 1..n and must be valid.
std::vector<Configuration> read_population_csv(const ParameterSpace& space, const CsvTable& table);
void write_population_csv(std::ostream& out, const ParameterSpace& space, std::span<const Configuration> configs);

/// {"n", "p", "D", "H": {param: entropy}} with a trailing newline.
std::string diversity_report_json(const ParameterSpace& space, const DiversityReport& report);

}  // namespace racetune
