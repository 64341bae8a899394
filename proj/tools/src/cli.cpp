#include "racetune/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "racetune/csv.hpp"
#include "racetune/engine.hpp"
#include "racetune/report.hpp"
#include "racetune/scenario.hpp"
#include "racetune/tsp.hpp"

namespace racetune {

namespace fs = std::filesystem;

namespace {

/// Raised for bad flag values found after parsing (exit code 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_pool_factor(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw UsageError("--pool-factor: expected a number or 'inf', got '" + text + "'");
  return v;
}

struct TestSet {
  std::string list;
  std::size_t n = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--test-instances", list, "Test instance list file")->check(CLI::ExistingFile);
    cmd->add_option("--test-n", n, "Cities per generated test instance");
    cmd->add_option("--test-count", count, "Number of generated test instances");
    cmd->add_option("--test-seed", seed, "Generator seed for test instances");
  }
  bool given() const { return !list.empty() || count > 0; }
  std::vector<Instance> load() const {
    if (!list.empty()) return load_instance_list(list, n);
    if (count == 0) throw UsageError("need --test-instances or --test-count");
    return generated_instances(n, count, seed);
  }
};

struct RunDir {
  std::string dir;
  Scenario scenario;
  ParameterSpace space;
  std::vector<Configuration> elites;
};

RunDir open_run(const std::string& dir) {
  RunDir r;
  r.dir = dir;
  r.scenario = load_scenario((fs::path(dir) / "scenario.json").string());
  r.space = load_space(r.scenario);
  r.elites = load_elites(r.space, (fs::path(dir) / "elites.json").string());
  return r;
}

std::optional<ValidationMatrix> cached_validation(const RunDir& run, const std::vector<Instance>& instances) {
  const auto path = fs::path(run.dir) / "validation.csv";
  if (!fs::exists(path)) return std::nullopt;
  std::ifstream in(path);
  auto m = read_validation_csv(in);
  std::vector<std::string> ids;
  for (const auto& i : instances) ids.push_back(i.id);
  std::vector<ConfigId> configs;
  for (const auto& e : run.elites) configs.push_back(e.id);
  if (m.instances != ids || m.configs != configs) return std::nullopt;
  return m;
}

ValidationMatrix run_validation(const RunDir& run, const std::vector<Instance>& instances, std::size_t reps,
                                std::uint64_t seed) {
  auto target = make_target(run.scenario, run.space);
  auto m = validate(*target, run.elites, instances, reps, seed, effective_workers(run.scenario),
                    CrashPolicy{run.scenario.target.crash_cost});
  std::ofstream out(fs::path(run.dir) / "validation.csv", std::ios::binary);
  write_validation_csv(out, m);
  return m;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Iterated racing for automatic algorithm configuration", "racetune"};
  app.require_subcommand(1);

  // tune
  auto* tune_cmd = app.add_subcommand("tune", "Run a tuning scenario");
  std::string scenario_path, output_dir, resume_dir, pool_factor_text;
  std::optional<std::uint64_t> o_seed;
  std::optional<std::size_t> o_budget, o_n_min;
  std::optional<std::string> o_strategy, o_test;
  std::optional<double> o_alpha;
  std::optional<int> stop_after;
  bool quiet = false;
  tune_cmd->add_option("--scenario", scenario_path, "Scenario JSON file")->check(CLI::ExistingFile);
  tune_cmd->add_option("--output", output_dir, "Run directory (overrides the scenario)");
  tune_cmd->add_option("--resume", resume_dir, "Continue the run in this directory")->check(CLI::ExistingDirectory);
  tune_cmd->add_option("--seed", o_seed, "Master seed");
  tune_cmd->add_option("--budget", o_budget, "Total evaluation budget")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--strategy", o_strategy, "Elite selection strategy")
      ->check(CLI::IsMember({"greedy", "rand", "entropy", "gower"}));
  tune_cmd->add_option("--n-min", o_n_min, "Elite count")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--test", o_test, "Elimination test")->check(CLI::IsMember({"F", "t"}));
  tune_cmd->add_option("--alpha", o_alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  tune_cmd->add_option("--pool-factor", pool_factor_text, "rand pool factor (number or inf)");
  tune_cmd->add_option("--stop-after", stop_after, "Stop after this many races (resumable)")
      ->check(CLI::PositiveNumber);
  tune_cmd->add_flag("--quiet", quiet, "No per-race progress");

  // validate
  auto* val_cmd = app.add_subcommand("validate", "Evaluate a run's elites on test instances");
  std::string val_run;
  std::size_t reps = 10;
  std::uint64_t val_seed = 0;
  TestSet val_tests;
  val_cmd->add_option("run", val_run, "Run directory")->required()->check(CLI::ExistingDirectory);
  val_cmd->add_option("--repetitions", reps, "Runs per instance")->check(CLI::PositiveNumber);
  val_cmd->add_option("--validation-seed", val_seed, "Seed for validation runs");
  val_tests.add_flags(val_cmd);

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Compare validated runs");
  std::vector<std::string> cmp_runs;
  std::string cmp_out = ".";
  std::size_t cmp_reps = 10;
  std::uint64_t cmp_seed = 0;
  std::size_t bins = 20;
  TestSet cmp_tests;
  cmp_cmd->add_option("runs", cmp_runs, "Run directories")->required()->expected(2, -1)->check(CLI::ExistingDirectory);
  cmp_cmd->add_option("--out", cmp_out, "Directory for the report CSVs");
  cmp_cmd->add_option("--repetitions", cmp_reps, "Validation runs per instance")->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--validation-seed", cmp_seed, "Seed for validation runs");
  cmp_cmd->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  cmp_tests.add_flags(cmp_cmd);

  // divcheck
  auto* div_cmd = app.add_subcommand("divcheck", "Report the diversity of a population CSV as JSON");
  std::string div_csv, div_space;
  std::string normalization = "cells";
  std::size_t div_bins = 0;
  div_cmd->add_option("population", div_csv, "CSV: header = parameter names, one configuration per row")
      ->required()
      ->check(CLI::ExistingFile);
  div_cmd->add_option("--space", div_space, "Parameter file or builtin:<name>")->required();
  div_cmd->add_option("--normalization", normalization, "Entropy denominator")
      ->check(CLI::IsMember({"cells", "observations"}));
  div_cmd->add_option("--bins", div_bins, "Bins for real parameters (0: one per observation)");

  // gen-instances
  auto* gen_cmd = app.add_subcommand("gen-instances", "Write random uniform TSP instances");
  std::size_t gen_n = 0, gen_count = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out = ".";
  gen_cmd->add_option("--n", gen_n, "Cities per instance")->required()->check(CLI::Range(3, 1000000));
  gen_cmd->add_option("--count", gen_count, "Number of instances")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen_seed, "Generator seed");
  gen_cmd->add_option("--out", gen_out, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*tune_cmd) {
      TuneOptions options;
      if (!quiet) options.progress = &out;
      options.stop_after_race = stop_after;
      TuneResult result;
      std::string dir;
      if (!resume_dir.empty()) {
        if (!scenario_path.empty()) throw UsageError("--resume and --scenario are mutually exclusive");
        dir = resume_dir;
        result = resume(resume_dir, options);
      } else {
        if (scenario_path.empty()) throw UsageError("tune: need --scenario or --resume");
        Scenario sc;
        try {
          sc = load_scenario(scenario_path);
          if (o_seed) sc.seed = *o_seed;
          if (o_budget) sc.budget = *o_budget;
          if (o_strategy) sc.strategy = parse_strategy(*o_strategy);
          if (o_n_min) sc.n_min = *o_n_min;
          if (o_test) sc.test = *o_test == "F" ? TestKind::friedman : TestKind::t_test;
          if (o_alpha) sc.alpha = *o_alpha;
          if (!pool_factor_text.empty()) sc.pool_factor = parse_pool_factor(pool_factor_text);
          if (!output_dir.empty()) sc.output = fs::absolute(output_dir).string();
          if (sc.output.empty()) throw UsageError("tune: no output directory (set \"output\" or --output)");
          check_scenario(sc);
          (void)load_space(sc);
          (void)training_instances(sc);
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());
        } catch (const ParseError& e) {
          throw UsageError(e.what());
        }
        dir = resolve_path(sc, sc.output);
        result = tune(sc, options);
      }
      out << (result.complete ? "finished" : "stopped") << " after " << result.races << " races, "
          << result.evaluations << " evaluations; elites in " << dir << "\n";
      if (!result.elites.members.empty())
        out << "best: id " << result.elites.members.front().id << ", training mean cost "
            << format_real(result.elite_mean_costs.front()) << "\n";
      return exit_ok;
    }

    if (*val_cmd) {
      auto run = open_run(val_run);
      auto instances = val_tests.load();
      auto m = run_validation(run, instances, reps, val_seed);
      out << "validated " << m.configs.size() << " elites on " << m.instances.size() << " instances x " << reps
          << " runs\n";
      for (std::size_t c = 0; c < m.configs.size(); ++c)
        out << "  id " << m.configs[c] << ": mean " << format_real(m.row_mean(c)) << "\n";
      return exit_ok;
    }

    if (*cmp_cmd) {
      std::vector<RunOutput> outputs;
      std::optional<std::vector<Instance>> instances;
      if (cmp_tests.given()) instances = cmp_tests.load();
      std::optional<ParameterSpace> space;
      for (const auto& dir : cmp_runs) {
        auto run = open_run(dir);
        if (space && !(*space == run.space)) throw UsageError("compare: runs use different parameter spaces");
        space = run.space;
        RunOutput o;
        o.name = fs::path(dir).lexically_normal().filename().string();
        if (o.name.empty() || o.name == ".") o.name = fs::absolute(dir).parent_path().filename().string();
        o.variant = std::string(to_string(run.scenario.strategy));
        o.elites = run.elites;
        if (instances) {
          auto cached = cached_validation(run, *instances);
          o.validation = cached ? *cached : run_validation(run, *instances, cmp_reps, cmp_seed);
        } else {
          std::ifstream in(fs::path(dir) / "validation.csv");
          if (!in) throw UsageError("compare: " + dir + " has no validation.csv; pass --test-instances");
          o.validation = read_validation_csv(in);
        }
        outputs.push_back(std::move(o));
      }
      const auto report = compare(outputs);
      fs::create_directories(cmp_out);
      std::ostringstream dev, best, hist, par;
      write_deviation_csv(dev, report, outputs);
      write_best_counts_csv(best, report);
      std::vector<Configuration> all;
      std::vector<std::string> labels;
      std::vector<double> means;
      for (const auto& o : outputs)
        for (std::size_t c = 0; c < o.elites.size(); ++c) {
          all.push_back(o.elites[c]);
          labels.push_back(o.name + ":" + std::to_string(o.elites[c].id));
          means.push_back(o.validation.row_mean(c));
        }
      write_histogram_csv(hist, param_distributions(all, *space, bins));
      write_parallel_coordinates_csv(par, labels, all, means, *space);
      write_file(fs::path(cmp_out) / "deviation.csv", dev.str());
      write_file(fs::path(cmp_out) / "best_counts.csv", best.str());
      write_file(fs::path(cmp_out) / "distributions.csv", hist.str());
      write_file(fs::path(cmp_out) / "parallel_coordinates.csv", par.str());
      out << best.str();
      return exit_ok;
    }

    if (*div_cmd) {
      EntropyOptions opts;
      opts.normalization =
          normalization == "cells" ? EntropyNormalization::cells : EntropyNormalization::observations;
      opts.bins = div_bins;
      Scenario holder;
      holder.parameters = div_space;
      holder.base_dir.clear();
      ParameterSpace space;
      std::vector<Configuration> pop;
      try {
        space = load_space(holder);
        pop = read_population_csv(space, load_csv(div_csv));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      } catch (const ParseError& e) {
        throw UsageError(e.what());
      }
      out << diversity_report_json(space, population_diversity(pop, space, opts));
      return exit_ok;
    }

    if (*gen_cmd) {
      fs::create_directories(gen_out);
      std::ofstream list(fs::path(gen_out) / "instances.list", std::ios::binary);
      for (const auto& inst : generated_instances(gen_n, gen_count, gen_seed)) {
        const auto name = inst.id + ".tsp";
        save_tsp((fs::path(gen_out) / name).string(), instantiate_tsp(inst));
        list << name << "\n";
      }
      out << "wrote " << gen_count << " instances to " << gen_out << "\n";
      return exit_ok;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
  return exit_usage;
}

}  // namespace racetune
