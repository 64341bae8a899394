#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "racetune/csv.hpp"
#include "racetune/engine.hpp"

using namespace racetune;
namespace fs = std::filesystem;

namespace {

Scenario synthetic(std::size_t budget = 600, std::uint64_t seed = 3) {
  Scenario sc;
  sc.target.builtin = "synthetic";
  sc.instances.count = 8;
  sc.instances.seed = 5;
  sc.budget = budget;
  sc.seed = seed;
  sc.workers = 1;
  return sc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("in-memory run respects the budget") {
  const auto sc = synthetic();
  const auto r = tune(sc);
  CHECK(r.complete);
  CHECK(r.evaluations <= sc.budget);
  CHECK(r.races >= 1);
  CHECK_FALSE(r.elites.members.empty());
  CHECK(r.elites.members.size() <= sc.n_min);
  CHECK(r.elite_mean_costs.size() == r.elites.members.size());
  const auto space = load_space(sc);
  for (const auto& e : r.elites.members) CHECK(validate_configuration(space, e).empty());
  std::size_t sum = 0;
  for (const auto& h : r.history) sum += h.evaluations;
  CHECK(sum == r.evaluations);
  CHECK(r.diversity.size() == r.history.size());
}

TEST_CASE("runs are reproducible") {
  for (auto strategy : {SelectionStrategy::greedy, SelectionStrategy::rand, SelectionStrategy::entropy,
                        SelectionStrategy::gower}) {
    auto sc = synthetic();
    sc.strategy = strategy;
    const auto a = tune(sc);
    const auto b = tune(sc);
    CHECK(a.elites.members == b.elites.members);
    CHECK(a.evaluations == b.evaluations);
  }
}

TEST_CASE("budget below one race is rejected") {
  auto sc = synthetic(10);
  CHECK_THROWS_AS(tune(sc), std::invalid_argument);
}

TEST_CASE("run directory and resume") {
  TempDir full("racetune_engine_full");
  TempDir part("racetune_engine_part");
  auto sc = synthetic(800, 9);
  sc.strategy = SelectionStrategy::entropy;
  sc.output = full.path.string();
  const auto whole = tune(sc);

  sc.output = part.path.string();
  TuneOptions stop;
  stop.stop_after_race = 2;
  const auto first = tune(sc, stop);
  CHECK_FALSE(first.complete);
  CHECK(first.races == 2);
  const auto rest = resume(part.path.string());
  CHECK(rest.complete);
  CHECK(rest.elites.members == whole.elites.members);

  for (const char* f : {"evals.csv", "diversity.csv", "elites.json"})
    CHECK_MESSAGE(slurp(full.path / f) == slurp(part.path / f), f);

  const auto evals = load_csv((full.path / "evals.csv").string());
  CHECK(evals.header == std::vector<std::string>{"race", "instance_pos", "instance_id", "config_id", "seed", "cost",
                                                 "runtime_s"});
  CHECK(evals.rows.size() == whole.evaluations);
  const auto div = load_csv((full.path / "diversity.csv").string());
  CHECK(div.header.at(1) == "D");
  CHECK(div.rows.size() == static_cast<std::size_t>(whole.races));

  const auto echoed = load_scenario((full.path / "scenario.json").string());
  CHECK(echoed.budget == 800);
  CHECK(echoed.strategy == SelectionStrategy::entropy);
}

TEST_CASE("elites file round-trips") {
  const auto sc = synthetic();
  const auto r = tune(sc);
  const auto space = load_space(sc);
  const auto text = elites_to_json(space, r, sc.budget);
  CHECK(parse_elites_json(space, text) == r.elites.members);
}

TEST_CASE("scenario json") {
  const auto sc = parse_scenario(R"({"target": {"builtin": "synthetic"}, "instances": {"count": 4}, "budget": 300, "selection": {"strategy": "rand", "pool_factor": 2},
                                     "test": {"type": "t", "alpha": 0.1}, "seed": 4})");
  CHECK(sc.budget == 300);
  CHECK(sc.strategy == SelectionStrategy::rand);
  CHECK(sc.pool_factor == 2.0);
  CHECK(sc.test == TestKind::t_test);
  CHECK(sc.alpha == 0.1);
  const auto again = parse_scenario(scenario_to_json(sc));
  CHECK(scenario_to_json(again) == scenario_to_json(sc));
  CHECK(std::isinf(parse_scenario(R"({"target": {"builtin": "synthetic"}, "instances": {"count": 1}})").pool_factor));

  CHECK_THROWS(parse_scenario(R"({"budjet": 3})"));
  CHECK_NOTHROW(check_scenario(sc));
  CHECK_THROWS(check_scenario(parse_scenario(R"({"target": {"builtin": "synthetic"}, "instances": {"count": 4}, "selection": {"pool_factor": 1}})")));
  CHECK_THROWS(check_scenario(parse_scenario(R"({"target": {"builtin": "synthetic"}, "instances": {"count": 4}, "test": {"alpha": 1.5}})")));
  CHECK_THROWS(check_scenario(parse_scenario("{}")));  // no target
}

TEST_CASE("worker cap from the environment") {
  auto sc = synthetic();
  sc.workers = 8;
  ::setenv("RACETUNE_WORKERS", "2", 1);
  CHECK(effective_workers(sc) == 2);
  ::unsetenv("RACETUNE_WORKERS");
  CHECK(effective_workers(sc) == 8);
}

TEST_CASE("validation matrix") {
  const auto sc = synthetic();
  const auto space = load_space(sc);
  auto target = make_target(sc, space);
  const auto r = tune(sc);
  const auto test = generated_instances(0, 200, 99);
  const auto m = validate(*target, r.elites.members, test, 10, 1);
  CHECK(m.instances.size() == 200);
  CHECK(m.mean.size() == r.elites.members.size());
  CHECK(m.mean.at(0).size() == 200);
  CHECK(validate(*target, r.elites.members, test, 10, 1).mean == m.mean);

  struct Fixed final : Target {
    std::string name() const override { return "fixed"; }
    EvalResult evaluate(const Configuration& c, const Instance& i, std::uint64_t) const override {
      return {static_cast<double>(c.id) + 0.5 * static_cast<double>(i.base_seed), 0.0, EvalStatus::ok, {}};
    }
  } fixed;
  const Configuration one = r.elites.members.front();
  const auto single = validate(fixed, std::span(&one, 1), std::span(test.data(), 1), 1, 1);
  CHECK(single.mean.at(0).at(0) == fixed.evaluate(one, test[0], 0).cost);

  std::stringstream csv;
  write_validation_csv(csv, m);
  const auto back = read_validation_csv(csv);
  CHECK(back.configs == m.configs);
  CHECK(back.instances == m.instances);
  for (std::size_t i = 0; i < m.mean.size(); ++i)
    for (std::size_t j = 0; j < m.mean[i].size(); ++j) CHECK(back.mean[i][j] == m.mean[i][j]);
}
