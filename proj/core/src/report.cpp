#include "racetune/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace racetune {

double deviation_percent(double f, double f_best) { return (f - f_best) / f_best * 100.0; }

CompareReport compare(std::span<const RunOutput> runs) {
  if (runs.size() < 2) throw std::invalid_argument("compare: need at least two runs");
  CompareReport rep;
  rep.instances = runs[0].validation.instances;
  for (const auto& run : runs) {
    if (run.validation.instances != rep.instances)
      throw std::invalid_argument("compare: run '" + run.name + "' was validated on a different test set");
    if (run.validation.mean.size() != run.elites.size())
      throw std::invalid_argument("compare: run '" + run.name + "' has validation rows for " +
                                  std::to_string(run.validation.mean.size()) + " of " +
                                  std::to_string(run.elites.size()) + " elites");
  }

  rep.best_mean = std::numeric_limits<double>::infinity();
  for (const auto& run : runs)
    for (std::size_t c = 0; c < run.elites.size(); ++c)
      rep.best_mean = std::min(rep.best_mean, run.validation.row_mean(c));

  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    std::size_t best = 0;
    for (std::size_t c = 1; c < run.elites.size(); ++c)
      if (run.validation.row_mean(c) < run.validation.row_mean(best)) best = c;
    for (std::size_t c = 0; c < run.elites.size(); ++c) {
      const double f = run.validation.row_mean(c);
      rep.deviations.push_back({r, run.variant, run.elites[c].id, c == best, f, deviation_percent(f, rep.best_mean)});
    }
  }

  for (const auto& run : runs) {
    auto it = std::find_if(rep.best_counts.begin(), rep.best_counts.end(),
                           [&](const BestCount& b) { return b.variant == run.variant; });
    if (it == rep.best_counts.end()) {
      rep.best_counts.push_back({run.variant, 0, 0});
      it = rep.best_counts.end() - 1;
    }
    it->configs += run.elites.size();
  }

  for (std::size_t i = 0; i < rep.instances.size(); ++i) {
    std::size_t winner = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < runs.size(); ++r)
      for (const auto& row : runs[r].validation.mean)
        if (row[i] < best) {  // strict: earlier runs keep ties
          best = row[i];
          winner = r;
        }
    rep.instance_winner.push_back(winner);
    for (auto& b : rep.best_counts)
      if (b.variant == runs[winner].variant) ++b.best;
  }
  return rep;
}

void write_deviation_csv(std::ostream& out, const CompareReport& report, std::span<const RunOutput> runs) {
  const std::vector<std::string> header{"run", "variant", "config_id", "run_best", "mean_cost", "deviation_pct"};
  write_csv_row(out, header);
  for (const auto& d : report.deviations) {
    const std::vector<std::string> row{runs[d.run].name, d.variant, std::to_string(d.config), d.run_best ? "1" : "0",
                                       format_real(d.mean_cost), format_real(d.deviation_pct)};
    write_csv_row(out, row);
  }
}

void write_best_counts_csv(std::ostream& out, const CompareReport& report) {
  std::vector<std::string> header{"row"};
  std::vector<std::string> configs{"# configs"};
  std::vector<std::string> best{"# best"};
  for (const auto& b : report.best_counts) {
    header.push_back(b.variant);
    configs.push_back(std::to_string(b.configs));
    best.push_back(std::to_string(b.best));
  }
  write_csv_row(out, header);
  write_csv_row(out, configs);
  write_csv_row(out, best);
}

std::vector<HistogramRow> param_distributions(std::span<const Configuration> configs, const ParameterSpace& space,
                                              std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram: need at least one bin");
  std::vector<HistogramRow> rows;
  for (std::size_t p = 0; p < space.size(); ++p) {
    const auto& spec = space[p];
    std::size_t inactive = 0;
    if (spec.kind == ParamKind::categorical) {
      std::vector<std::size_t> counts(spec.levels.size(), 0);
      for (const auto& c : configs) {
        if (auto* l = std::get_if<Level>(&c.values[p])) ++counts.at(l->index);
        else ++inactive;
      }
      for (std::size_t l = 0; l < counts.size(); ++l) rows.push_back({spec.name, spec.levels[l], spec.levels[l], counts[l]});
    } else {
      const bool log = spec.scale == Scale::log;
      const double lo = log ? std::log(spec.lower) : spec.lower;
      const double hi = log ? std::log(spec.upper) : spec.upper;
      const double width = (hi - lo) / static_cast<double>(bins);
      std::vector<std::size_t> counts(bins, 0);
      for (const auto& c : configs) {
        auto* x = std::get_if<double>(&c.values[p]);
        if (!x) {
          ++inactive;
          continue;
        }
        const double t = log ? std::log(*x) : *x;
        auto b = width > 0 ? static_cast<std::ptrdiff_t>(std::floor((t - lo) / width)) : 0;
        b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
        ++counts[static_cast<std::size_t>(b)];
      }
      for (std::size_t b = 0; b < bins; ++b) {
        double a = lo + width * static_cast<double>(b);
        double z = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
        if (log) a = std::exp(a), z = std::exp(z);
        rows.push_back({spec.name, format_real(a), format_real(z), counts[b]});
      }
    }
    if (spec.is_conditional()) rows.push_back({spec.name, "NA", "NA", inactive});
  }
  return rows;
}

void write_histogram_csv(std::ostream& out, std::span<const HistogramRow> rows) {
  const std::vector<std::string> header{"param", "bin_lo", "bin_hi", "count"};
  write_csv_row(out, header);
  for (const auto& r : rows) {
    const std::vector<std::string> row{r.param, r.bin_lo, r.bin_hi, std::to_string(r.count)};
    write_csv_row(out, row);
  }
}

void write_parallel_coordinates_csv(std::ostream& out, std::span<const std::string> labels,
                                    std::span<const Configuration> configs, std::span<const double> mean_costs,
                                    const ParameterSpace& space) {
  if (configs.size() != mean_costs.size() || configs.size() != labels.size())
    throw std::invalid_argument("parallel coordinates: one label and mean cost per configuration required");
  std::vector<std::string> header{"label"};
  for (const auto& p : space.params()) header.push_back(p.name);
  header.push_back("mean_cost");
  header.push_back("deviation_pct");
  write_csv_row(out, header);
  double best = std::numeric_limits<double>::infinity();
  for (double f : mean_costs) best = std::min(best, f);
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<std::string> row{labels[c]};
    for (const auto& v : configs[c].values) {
      if (auto* d = std::get_if<double>(&v)) row.push_back(format_real(*d));
      else if (auto* l = std::get_if<Level>(&v)) row.push_back(std::to_string(l->index));
      else row.push_back("0");
    }
    row.push_back(format_real(mean_costs[c]));
    row.push_back(format_real(deviation_percent(mean_costs[c], best)));
    write_csv_row(out, row);
  }
}

std::vector<Configuration> read_population_csv(const ParameterSpace& space, const CsvTable& table) {
  std::vector<std::size_t> column(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    auto c = table.column(space[i].name);
    if (!c) throw std::invalid_argument("population CSV: missing column '" + space[i].name + "'");
    column[i] = *c;
  }
  std::vector<Configuration> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    Configuration c;
    c.id = r + 1;
    for (std::size_t i = 0; i < space.size(); ++i) c.values.push_back(parse_value(space[i], table.rows[r][column[i]]));
    if (auto bad = validate_configuration(space, c); !bad.empty())
      throw std::invalid_argument("population CSV: row " + std::to_string(r + 1) + ": " + bad.front().message);
    out.push_back(std::move(c));
  }
  if (out.empty()) throw std::invalid_argument("population CSV: no rows");
  return out;
}

void write_population_csv(std::ostream& out, const ParameterSpace& space, std::span<const Configuration> configs) {
  std::vector<std::string> header;
  for (const auto& p : space.params()) header.push_back(p.name);
  write_csv_row(out, header);
  for (const auto& c : configs) {
    std::vector<std::string> row;
    for (std::size_t i = 0; i < space.size(); ++i) row.push_back(format_value(space[i], c.values[i]));
    write_csv_row(out, row);
  }
}

std::string diversity_report_json(const ParameterSpace& space, const DiversityReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["p"] = report.p;
  j["D"] = report.diversity;
  nlohmann::ordered_json h = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < space.size(); ++i) h[space[i].name] = report.entropy.at(i);
  j["H"] = h;
  return j.dump(2) + "\n";
}

}  // namespace racetune
