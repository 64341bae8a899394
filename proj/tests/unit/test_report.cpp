#include <doctest.h>

#include <numeric>
#include <sstream>

#include "racetune/report.hpp"
#include "racetune/targets.hpp"

using namespace racetune;

namespace {

RunOutput run_of(const std::string& name, const std::string& variant, std::vector<std::vector<double>> mean,
                 ConfigId first_id = 1) {
  RunOutput r;
  r.name = name;
  r.variant = variant;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    r.elites.push_back({first_id + i, {0.5}, {}});
    r.validation.configs.push_back(first_id + i);
  }
  for (std::size_t j = 0; j < mean.at(0).size(); ++j) r.validation.instances.push_back("t" + std::to_string(j));
  r.validation.mean = std::move(mean);
  return r;
}

}  // namespace

TEST_CASE("deviation formula") {
  CHECK(deviation_percent(102.0, 100.0) == doctest::Approx(2.0));
  CHECK(deviation_percent(100.0, 100.0) == 0.0);
}

TEST_CASE("identical runs tie toward the first") {
  const std::vector<RunOutput> runs{run_of("a", "greedy", {{1, 2, 3}}), run_of("b", "rand", {{1, 2, 3}})};
  const auto rep = compare(runs);
  for (const auto& d : rep.deviations) CHECK(d.deviation_pct == 0.0);
  CHECK(rep.instance_winner == std::vector<std::size_t>{0, 0, 0});
  REQUIRE(rep.best_counts.size() == 2);
  CHECK(rep.best_counts[0].best == 3);
  CHECK(rep.best_counts[1].best == 0);
}

TEST_CASE("best counts sum to the instance count") {
  std::vector<RunOutput> runs;
  const char* variants[] = {"greedy", "rand", "entropy", "gower"};
  for (int v = 0; v < 4; ++v)
    for (int k = 0; k < 5; ++k) {
      std::vector<std::vector<double>> m(2, std::vector<double>(12));
      for (int c = 0; c < 2; ++c)
        for (int j = 0; j < 12; ++j) m[c][j] = 100.0 + ((v * 31 + k * 17 + c * 7 + j * 13) % 23);
      runs.push_back(run_of(std::string(variants[v]) + std::to_string(k), variants[v], m,
                            static_cast<ConfigId>(100 * (v * 5 + k))));
    }
  const auto rep = compare(runs);
  std::size_t total = 0, configs = 0;
  for (const auto& b : rep.best_counts) total += b.best, configs += b.configs;
  CHECK(total == 12);
  CHECK(configs == 40);

  std::size_t zero = 0;
  for (const auto& d : rep.deviations) {
    CHECK(d.deviation_pct >= 0.0);
    if (d.deviation_pct == 0.0) ++zero;
  }
  CHECK(zero >= 1);

  std::ostringstream dev, best;
  write_deviation_csv(dev, rep, runs);
  write_best_counts_csv(best, rep);
  CHECK(dev.str().rfind("run,variant,config_id,run_best,mean_cost,deviation_pct\n", 0) == 0);
  CHECK(best.str().find("# best") != std::string::npos);
}

TEST_CASE("mismatched test sets are rejected") {
  auto a = run_of("a", "x", {{1, 2}});
  auto b = run_of("b", "x", {{1, 2, 3}});
  const std::vector<RunOutput> runs{a, b};
  CHECK_THROWS(compare(runs));
}

TEST_CASE("histograms") {
  const auto space = parse_parameter_file(aco_space_text());
  std::vector<Configuration> configs;
  Configuration c{1, default_configuration(space), {}};
  configs.push_back(c);
  const auto rows = param_distributions(configs, space, 10);
  std::size_t beta_total = 0, beta_nonzero = 0;
  for (const auto& r : rows)
    if (r.param == "beta") {
      beta_total += r.count;
      if (r.count) ++beta_nonzero;
    }
  CHECK(beta_total == 1);
  CHECK(beta_nonzero == 1);

  bool q0_na = false;
  for (const auto& r : rows)
    if (r.param == "q0" && r.bin_lo == "NA") q0_na = r.count == 1;
  CHECK(q0_na);
}

TEST_CASE("histogram counts equal the active configurations") {
  const auto space = parse_parameter_file(aco_space_text());
  Rng rng(314);
  std::vector<Configuration> configs;
  for (ConfigId i = 1; i <= 314; ++i) configs.push_back({i, sample_uniform_values(space, rng), {}});
  std::size_t active_q0 = 0;
  for (const auto& c : configs) active_q0 += is_active(c.values[space.at("q0")]);
  std::size_t binned = 0;
  for (const auto& r : param_distributions(configs, space))
    if (r.param == "q0" && r.bin_lo != "NA") binned += r.count;
  CHECK(binned == active_q0);
}

TEST_CASE("parallel coordinates") {
  const auto space = parse_parameter_file(aco_space_text());
  Configuration c{1, default_configuration(space), {}};
  Configuration d = c;
  d.id = 2;
  const std::vector<Configuration> configs{c, d};
  const std::vector<std::string> labels{"best", "other"};
  const std::vector<double> costs{100.0, 102.0};
  std::ostringstream out;
  write_parallel_coordinates_csv(out, labels, configs, costs, space);
  std::istringstream in(out.str());
  const auto table = read_csv(in);
  const auto dev = table.column("deviation_pct").value();
  CHECK(std::stod(table.rows.at(0).at(dev)) == 0.0);
  CHECK(std::stod(table.rows.at(1).at(dev)) == doctest::Approx(2.0));
  CHECK(table.rows.at(0).at(table.column("rasrank").value()) == "0");
}

TEST_CASE("population csv round-trip and diversity json") {
  const auto space = parse_parameter_file(aco_space_text());
  Rng rng(2);
  std::vector<Configuration> pop;
  for (ConfigId i = 1; i <= 6; ++i) pop.push_back({i, sample_uniform_values(space, rng), {}});
  std::ostringstream out;
  write_population_csv(out, space, pop);
  std::istringstream in(out.str());
  const auto back = read_population_csv(space, read_csv(in));
  REQUIRE(back.size() == pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) CHECK(back[i].values == pop[i].values);

  const auto json = diversity_report_json(space, population_diversity(back, space));
  CHECK(json.find("\"D\"") != std::string::npos);
  CHECK(json.back() == '\n');
}
