#include "racetune/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace racetune {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const ordered_json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!known.count(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

template <class T>
void read(const ordered_json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

double read_factor(const ordered_json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("pool_factor: expected a number or \"inf\"");
  }
  return v.get<double>();
}

TestKind parse_test(const std::string& s) {
  if (s == "F" || s == "friedman") return TestKind::friedman;
  if (s == "t" || s == "t-test") return TestKind::t_test;
  throw std::invalid_argument("unknown test '" + s + "' (expected F or t)");
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
  reject_unknown(j,
                 {"parameters", "target", "instances", "budget", "n_min", "selection", "test", "race",
                  "sampler", "entropy", "seed", "output", "workers"},
                 "scenario");
  Scenario s;
  s.base_dir = base_dir;
  try {
    read(j, "parameters", s.parameters);
    if (auto it = j.find("target"); it != j.end()) {
      reject_unknown(*it, {"builtin", "command", "timeout", "crash_cost", "tour_budget", "key"}, "target");
      read(*it, "builtin", s.target.builtin);
      read(*it, "command", s.target.command);
      read(*it, "timeout", s.target.timeout_s);
      if (auto c = it->find("crash_cost"); c != it->end() && !c->is_null()) s.target.crash_cost = c->get<double>();
      read(*it, "tour_budget", s.target.tour_budget);
      read(*it, "key", s.target.key);
    }
    if (auto it = j.find("instances"); it != j.end()) {
      reject_unknown(*it, {"list", "n", "count", "seed"}, "instances");
      read(*it, "list", s.instances.list);
      read(*it, "n", s.instances.n_cities);
      read(*it, "count", s.instances.count);
      read(*it, "seed", s.instances.seed);
    }
    read(j, "budget", s.budget);
    read(j, "n_min", s.n_min);
    if (auto it = j.find("selection"); it != j.end()) {
      reject_unknown(*it, {"strategy", "pool_factor", "exhaustive_limit"}, "selection");
      if (auto st = it->find("strategy"); st != it->end()) s.strategy = parse_strategy(st->get<std::string>());
      if (auto pf = it->find("pool_factor"); pf != it->end()) s.pool_factor = read_factor(*pf);
      read(*it, "exhaustive_limit", s.exhaustive_limit);
    }
    if (auto it = j.find("test"); it != j.end()) {
      reject_unknown(*it, {"type", "alpha"}, "test");
      if (auto t = it->find("type"); t != it->end()) s.test = parse_test(t->get<std::string>());
      read(*it, "alpha", s.alpha);
    }
    if (auto it = j.find("race"); it != j.end()) {
      reject_unknown(*it, {"t_first", "t_each", "t_new", "elitist"}, "race");
      read(*it, "t_first", s.first_test);
      read(*it, "t_each", s.each_test);
      read(*it, "t_new", s.elite_test);
      read(*it, "elitist", s.elitist);
    }
    if (auto it = j.find("sampler"); it != j.end()) {
      reject_unknown(*it, {"final_fraction", "retry_limit"}, "sampler");
      read(*it, "final_fraction", s.sampler.decay_final_fraction);
      read(*it, "retry_limit", s.sampler.retry_limit);
    }
    if (auto it = j.find("entropy"); it != j.end()) {
      reject_unknown(*it, {"normalization", "bins"}, "entropy");
      if (auto n = it->find("normalization"); n != it->end()) {
        auto v = n->get<std::string>();
        if (v == "cells") s.entropy.normalization = EntropyNormalization::cells;
        else if (v == "observations") s.entropy.normalization = EntropyNormalization::observations;
        else throw std::invalid_argument("entropy.normalization: unknown value '" + v + "'");
      }
      read(*it, "bins", s.entropy.bins);
    }
    read(j, "seed", s.seed);
    read(j, "output", s.output);
    read(j, "workers", s.workers);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
  check_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto dir = fs::path(path).parent_path();
  return parse_scenario(ss.str(), dir.empty() ? "." : dir.string());
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["parameters"] = s.parameters;
  ordered_json t;
  if (!s.target.builtin.empty()) t["builtin"] = s.target.builtin;
  if (!s.target.command.empty()) t["command"] = s.target.command;
  if (s.target.timeout_s > 0) t["timeout"] = s.target.timeout_s;
  if (s.target.crash_cost) t["crash_cost"] = *s.target.crash_cost;
  t["tour_budget"] = s.target.tour_budget;
  t["key"] = s.target.key;
  j["target"] = t;
  ordered_json inst;
  if (!s.instances.list.empty()) inst["list"] = s.instances.list;
  inst["n"] = s.instances.n_cities;
  if (s.instances.list.empty()) {
    inst["count"] = s.instances.count;
    inst["seed"] = s.instances.seed;
  }
  j["instances"] = inst;
  j["budget"] = s.budget;
  j["n_min"] = s.n_min;
  ordered_json sel;
  sel["strategy"] = std::string(to_string(s.strategy));
  if (std::isinf(s.pool_factor)) sel["pool_factor"] = "inf";
  else sel["pool_factor"] = s.pool_factor;
  sel["exhaustive_limit"] = s.exhaustive_limit;
  j["selection"] = sel;
  j["test"] = {{"type", s.test == TestKind::friedman ? "F" : "t"}, {"alpha", s.alpha}};
  j["race"] = {{"t_first", s.first_test}, {"t_each", s.each_test}, {"t_new", s.elite_test}, {"elitist", s.elitist}};
  j["sampler"] = {{"final_fraction", s.sampler.decay_final_fraction}, {"retry_limit", s.sampler.retry_limit}};
  j["entropy"] = {{"normalization", s.entropy.normalization == EntropyNormalization::cells ? "cells" : "observations"},
                  {"bins", s.entropy.bins}};
  j["seed"] = s.seed;
  j["output"] = s.output;
  j["workers"] = s.workers;
  return j.dump(2) + "\n";
}

void check_scenario(const Scenario& s) {
  if (s.n_min < 1) throw std::invalid_argument("n_min must be at least 1");
  if (s.budget < 1) throw std::invalid_argument("budget must be positive");
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (s.first_test < 2) throw std::invalid_argument("race.t_first must be at least 2");
  if (s.each_test < 1) throw std::invalid_argument("race.t_each must be at least 1");
  if (s.elite_test < 0) throw std::invalid_argument("race.t_new must be non-negative");
  if (!(s.pool_factor > 1.0)) throw std::invalid_argument("selection.pool_factor must be > 1");
  if (!(s.sampler.decay_final_fraction > 0.0 && s.sampler.decay_final_fraction <= 0.5))
    throw std::invalid_argument("sampler.final_fraction must lie in (0, 0.5]");
  if (s.target.builtin.empty() && s.target.command.empty())
    throw std::invalid_argument("target: need a builtin name or a command");
  if (!s.target.builtin.empty() && s.target.builtin != "synthetic" && s.target.builtin != "aco-tsp")
    throw std::invalid_argument("target: unknown builtin '" + s.target.builtin + "'");
  if (s.instances.list.empty() && s.instances.count == 0)
    throw std::invalid_argument("instances: need a list file or a positive count");
  if (s.target.builtin == "aco-tsp" && s.instances.list.empty() && s.instances.n_cities < 3)
    throw std::invalid_argument("instances: aco-tsp needs n >= 3");
}

std::string resolve_path(const Scenario& s, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute() || s.base_dir.empty()) return p.string();
  return (fs::path(s.base_dir) / p).lexically_normal().string();
}

ParameterSpace load_space(const Scenario& s) {
  const std::string prefix = "builtin:";
  if (s.parameters.rfind(prefix, 0) == 0) {
    auto name = s.parameters.substr(prefix.size());
    if (name == "synthetic") return parse_parameter_file(synthetic_space_text());
    if (name == "aco") return parse_parameter_file(aco_space_text());
    throw std::invalid_argument("unknown builtin parameter space '" + name + "'");
  }
  return load_parameter_file(resolve_path(s, s.parameters));
}

std::unique_ptr<Target> make_target(const Scenario& s, const ParameterSpace& space) {
  if (s.target.builtin == "synthetic") return std::make_unique<SyntheticTarget>(space, s.target.key);
  if (s.target.builtin == "aco-tsp") return std::make_unique<AcoTspTarget>(space, s.target.tour_budget);
  return std::make_unique<ExternalTarget>(space, s.target.command, s.target.timeout_s);
}

std::vector<Instance> training_instances(const Scenario& s) {
  if (!s.instances.list.empty()) return load_instance_list(resolve_path(s, s.instances.list), s.instances.n_cities);
  return generated_instances(s.instances.n_cities, s.instances.count, s.instances.seed);
}

RaceSettings race_settings(const Scenario& s) {
  RaceSettings r;
  r.test = s.test;
  r.alpha = s.alpha;
  r.first_test = s.first_test;
  r.each_test = s.each_test;
  r.elite_test = s.elite_test;
  r.n_min = s.n_min;
  r.elitist = s.elitist;
  return r;
}

std::size_t effective_workers(const Scenario& s) {
  std::size_t w = s.workers ? s.workers : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RACETUNE_WORKERS")) {
    char* end = nullptr;
    unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) w = std::min<std::size_t>(w, cap);
  }
  return w;
}

}  // namespace racetune
