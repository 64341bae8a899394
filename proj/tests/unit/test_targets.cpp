#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "racetune/sampler.hpp"
#include "racetune/targets.hpp"

using namespace racetune;
namespace fs = std::filesystem;

namespace {

const ParameterSpace& aco() {
  static const auto s = parse_parameter_file(aco_space_text());
  return s;
}

Configuration ras_config() {
  const auto& s = aco();
  auto v = default_configuration(s);
  v[s.at("algorithm")] = Level{3};
  rederive_activation(s, v);
  v[s.at("rasrank")] = 6.0;
  return {1, v, {}};
}

ExternalTarget stub(const std::string& mode, double timeout = 0.0) {
  return ExternalTarget(aco(), std::string(STUB_TARGET) + " " + mode, timeout);
}

}  // namespace

TEST_CASE("crash policy") {
  EvalResult crashed{0.0, 0.1, EvalStatus::crashed, "exit code 1"};
  CHECK_THROWS_AS(resolve(crashed, {}), TargetFailure);
  CHECK(resolve(crashed, {1e9}).cost == 1e9);
  EvalResult ok{3.5, 0.0, EvalStatus::ok, {}};
  CHECK(resolve(ok, {}).cost == 3.5);
}

TEST_CASE("cost output parsing") {
  CHECK(parse_cost_output("42.5\n") == std::optional<double>(42.5));
  CHECK(parse_cost_output("log line\nbest 17\n\n") == std::optional<double>(17.0));
  CHECK_FALSE(parse_cost_output("done\n").has_value());
  CHECK_FALSE(parse_cost_output("").has_value());
}

TEST_CASE("external target protocol") {
  const Instance inst{"i0", "/tmp/none.tsp", 0, 0};
  const auto r = stub("ok").evaluate(ras_config(), inst, 3);
  CHECK(r.status == EvalStatus::ok);
  CHECK(r.cost == 42.5);

  const auto bad = stub("fail").evaluate(ras_config(), inst, 3);
  CHECK(bad.status == EvalStatus::crashed);
  CHECK(resolve(bad, {1e9}).cost == 1e9);

  CHECK(stub("garbage").evaluate(ras_config(), inst, 3).status == EvalStatus::crashed);
  const auto slow = stub("slow", 0.3).evaluate(ras_config(), inst, 3);
  CHECK(slow.status == EvalStatus::timeout);
  CHECK(slow.runtime_s < 3.0);
}

TEST_CASE("external command line follows activation") {
  const Instance inst{"i0", "/data/a.tsp", 0, 0};
  const auto argv = stub("args").command_line(ras_config(), inst, 17);
  CHECK(argv[1] == "args");
  CHECK(argv[2] == "/data/a.tsp");
  CHECK(argv[3] == "17");
  CHECK(std::find(argv.begin(), argv.end(), "--rasrank") != argv.end());
  CHECK(std::find(argv.begin(), argv.end(), "--q0") == argv.end());
  CHECK(std::find(argv.begin(), argv.end(), "--algorithm") != argv.end());
}

TEST_CASE("synthetic target") {
  const auto space = parse_parameter_file(synthetic_space_text());
  const SyntheticTarget t(space);
  const Configuration best{1, t.optimum(), {}};
  CHECK(t.noise_free_cost(best) == 0.0);
  CHECK(validate_configuration(space, best).empty());

  auto b = best;
  b.values[space.at("c1")] = Level{1};
  rederive_activation(space, b.values);
  CHECK(t.noise_free_cost(b) == doctest::Approx(0.75));

  const Instance inst{"s0", "", 5, 0};
  CHECK(t.evaluate(best, inst, 9).cost == t.evaluate(best, inst, 9).cost);
  const double noise = t.evaluate(best, inst, 9).cost;
  CHECK(noise >= 0.0);
  CHECK(noise < 0.1);
  CHECK(SyntheticTarget(space, 1).real_targets() != t.real_targets());
}

TEST_CASE("tsp generation and ids") {
  CHECK(generate_tsp(30, 4).cities() == generate_tsp(30, 4).cities());
  CHECK(generate_tsp(30, 4).cities() != generate_tsp(30, 5).cities());
  const auto insts = generated_instances(50, 200, 1);
  std::set<std::string> ids;
  for (const auto& i : insts) ids.insert(i.id);
  CHECK(ids.size() == 200);
  CHECK(insts[7].id == "50-7");
}

TEST_CASE("aco target is deterministic and bounded below by the optimum") {
  AcoTspTarget t(aco(), 200);
  const auto dir = fs::temp_directory_path() / "racetune_targets_square";
  fs::create_directories(dir);
  const auto path = (dir / "sq.tsp").string();
  save_tsp(path, TspInstance({{0, 0}, {0, 1000}, {1000, 1000}, {1000, 0}}));
  const Instance file{"sq", path, 0, 0};
  t.prepare(std::span(&file, 1));
  const Configuration def{1, default_configuration(aco()), {}};
  const auto a = t.evaluate(def, file, 3);
  CHECK(a.cost == 4000.0);
  CHECK(t.evaluate(def, file, 3).cost == a.cost);
  fs::remove_all(dir);
}

TEST_CASE("instance lists") {
  const auto dir = fs::temp_directory_path() / "racetune_targets_list";
  fs::create_directories(dir);
  save_tsp((dir / "a.tsp").string(), generate_tsp(10, 1));
  {
    std::ofstream out(dir / "list.txt");
    out << "# training set\na.tsp\nseed:42\n\n";
  }
  const auto insts = load_instance_list((dir / "list.txt").string(), 20);
  REQUIRE(insts.size() == 2);
  CHECK(insts[0].path == (dir / "a.tsp").string());
  CHECK(insts[1].path.empty());
  CHECK(insts[1].base_seed == 42);
  CHECK(instantiate_tsp(insts[1]).size() == 20);
  CHECK(instantiate_tsp(insts[0]).size() == 10);
  fs::remove_all(dir);
}

TEST_CASE("default configuration is mid-domain") {
  const auto& s = aco();
  const auto d = default_configuration(s);
  CHECK(std::get<double>(d[s.at("beta")]) == 5.0);
  CHECK(std::get<double>(d[s.at("ants")]) == 53.0);
  CHECK(d[s.at("algorithm")] == Value{Level{0}});
  CHECK_FALSE(is_active(d[s.at("q0")]));
  CHECK(validate_configuration(s, {1, d, {}}).empty());
}

TEST_CASE("memo target returns the inner results") {
  const auto space = parse_parameter_file(synthetic_space_text());
  SyntheticTarget inner(space);
  MemoTarget memo(inner);
  Rng rng(4);
  const Configuration a{1, sample_uniform_values(space, rng), {}};
  Configuration again = a;
  again.id = 9;
  const Instance i0{"s0", "", 5, 0}, i1{"s1", "", 6, 0};
  CHECK(memo.evaluate(a, i0, 3).cost == inner.evaluate(a, i0, 3).cost);
  CHECK(memo.evaluate(again, i0, 3).cost == inner.evaluate(a, i0, 3).cost);
  CHECK(memo.evaluate(a, i1, 3).cost == inner.evaluate(a, i1, 3).cost);
  CHECK(memo.evaluate(a, i0, 4).cost == inner.evaluate(a, i0, 4).cost);
  CHECK(memo.hits() == 1);
  CHECK(memo.misses() == 3);
}
