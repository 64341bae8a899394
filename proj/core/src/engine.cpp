#include "racetune/engine.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "racetune/csv.hpp"
#include "racetune/rng.hpp"
#include "racetune/sampler.hpp"

namespace racetune {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr char kStateMagic[8] = {'R', 'T', 'S', 'T', 'A', 'T', 'E', '\0'};
constexpr std::uint32_t kStateVersion = 1;

struct RunState {
  int race = 0;
  std::size_t used = 0;
  ConfigId next_id = 1;
  std::uint64_t next_fresh = 0;
  std::string rng;
  std::vector<Configuration> elites;
  ResultsMatrix results;
  int model_iteration = 1;
  std::map<ConfigId, std::vector<std::vector<double>>> categorical;
  std::uint64_t evals_bytes = 0;
  std::uint64_t diversity_bytes = 0;
  bool complete = false;
  std::vector<RaceSummary> history;
  std::vector<DiversityReport> diversity;
};

json value_to_json(const Value& v) {
  if (std::holds_alternative<Inactive>(v)) return nullptr;
  if (auto* d = std::get_if<double>(&v)) return *d;
  return json{{"l", std::get<Level>(v).index}};
}

Value value_from_json(const json& j) {
  if (j.is_null()) return Inactive{};
  if (j.is_number()) return j.get<double>();
  return Level{j.at("l").get<std::size_t>()};
}

json config_to_json(const Configuration& c) {
  json values = json::array();
  for (const auto& v : c.values) values.push_back(value_to_json(v));
  json parent = c.origin.parent ? json(*c.origin.parent) : json(nullptr);
  return json{{"id", c.id}, {"values", values}, {"parent", parent}, {"iteration", c.origin.iteration}};
}

Configuration config_from_json(const json& j) {
  Configuration c;
  c.id = j.at("id").get<ConfigId>();
  for (const auto& v : j.at("values")) c.values.push_back(value_from_json(v));
  if (!j.at("parent").is_null()) c.origin.parent = j.at("parent").get<ConfigId>();
  c.origin.iteration = j.at("iteration").get<int>();
  return c;
}

std::vector<std::uint8_t> encode_state(const RunState& s) {
  json j;
  j["race"] = s.race;
  j["used"] = s.used;
  j["next_id"] = s.next_id;
  j["next_fresh"] = s.next_fresh;
  j["rng"] = s.rng;
  j["elites"] = json::array();
  for (const auto& e : s.elites) j["elites"].push_back(config_to_json(e));
  json results = json::array();
  for (const auto& [id, row] : s.results.data())
    for (const auto& [pos, rec] : row)
      results.push_back({id, pos, rec.instance, rec.seed, rec.cost, rec.runtime_s});
  j["results"] = results;
  j["model_iteration"] = s.model_iteration;
  json cat = json::array();
  for (const auto& [id, vecs] : s.categorical) cat.push_back({id, vecs});
  j["categorical"] = cat;
  j["evals_bytes"] = s.evals_bytes;
  j["diversity_bytes"] = s.diversity_bytes;
  j["complete"] = s.complete;
  json hist = json::array();
  for (std::size_t i = 0; i < s.history.size(); ++i) {
    const auto& h = s.history[i];
    hist.push_back({h.race, h.budget, h.candidates, h.evaluations, h.steps, h.survivors, h.elites, h.diversity,
                    s.diversity[i].entropy, s.diversity[i].n});
  }
  j["history"] = hist;

  std::vector<std::uint8_t> out(kStateMagic, kStateMagic + sizeof kStateMagic);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(kStateVersion >> (8 * b)));
  auto body = json::to_cbor(j);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

RunState decode_state(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || !std::equal(kStateMagic, kStateMagic + 8, bytes.begin()))
    throw std::runtime_error("state.bin: not a run state file");
  std::uint32_t version = 0;
  for (int b = 0; b < 4; ++b) version |= static_cast<std::uint32_t>(bytes[8 + b]) << (8 * b);
  if (version != kStateVersion)
    throw std::runtime_error("state.bin: unsupported version " + std::to_string(version));
  json j = json::from_cbor(bytes.begin() + 12, bytes.end());
  RunState s;
  s.race = j.at("race");
  s.used = j.at("used");
  s.next_id = j.at("next_id");
  s.next_fresh = j.at("next_fresh");
  s.rng = j.at("rng");
  for (const auto& e : j.at("elites")) s.elites.push_back(config_from_json(e));
  for (const auto& r : j.at("results"))
    s.results.add(r[0].get<ConfigId>(), r[1].get<std::uint64_t>(),
                  Record{r[2].get<std::size_t>(), r[3].get<std::uint64_t>(), r[4].get<double>(), r[5].get<double>()});
  s.model_iteration = j.at("model_iteration");
  for (const auto& c : j.at("categorical"))
    s.categorical[c[0].get<ConfigId>()] = c[1].get<std::vector<std::vector<double>>>();
  s.evals_bytes = j.at("evals_bytes");
  s.diversity_bytes = j.at("diversity_bytes");
  s.complete = j.at("complete");
  for (const auto& h : j.at("history")) {
    RaceSummary r{h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7]};
    s.history.push_back(r);
    DiversityReport d;
    d.entropy = h[8].get<std::vector<double>>();
    d.diversity = r.diversity;
    d.n = h[9];
    d.p = d.entropy.size();
    s.diversity.push_back(d);
  }
  return s;
}

void write_atomically(const fs::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string diversity_header(const ParameterSpace& space) {
  std::vector<std::string> cols{"iteration", "D"};
  for (const auto& p : space.params()) cols.push_back("H_" + p.name);
  std::ostringstream out;
  write_csv_row(out, cols);
  return out.str();
}

std::string diversity_row(int race, const DiversityReport& d) {
  std::vector<std::string> cols{std::to_string(race), format_real(d.diversity)};
  for (double h : d.entropy) cols.push_back(format_real(h));
  std::ostringstream out;
  write_csv_row(out, cols);
  return out.str();
}

TuneResult make_result(const RunState& s, SelectionStrategy strategy) {
  TuneResult r;
  r.elites.members = s.elites;
  r.elites.strategy = strategy;
  for (const auto& e : s.elites) r.elite_mean_costs.push_back(s.results.mean_cost(e.id));
  r.evaluations = s.used;
  r.races = s.race;
  r.complete = s.complete;
  r.history = s.history;
  r.diversity = s.diversity;
  return r;
}

EliteSet select(const Scenario& sc, std::span<const Configuration> ranked, const ParameterSpace& space, Rng& rng) {
  switch (sc.strategy) {
    case SelectionStrategy::greedy: return select_greedy(ranked, sc.n_min);
    case SelectionStrategy::rand: return select_rand(ranked, sc.n_min, sc.pool_factor, rng);
    case SelectionStrategy::entropy:
      return select_entropy(ranked, sc.n_min, space, EntropySelectOptions{sc.entropy, sc.exhaustive_limit});
    case SelectionStrategy::gower: return select_gower(ranked, sc.n_min, space, rng);
  }
  throw std::logic_error("unknown selection strategy");
}

/// The tuning loop proper; `state` carries everything that crosses races.
TuneResult run(const Scenario& sc, RunState& state, const TuneOptions& options) {
  const ParameterSpace space = load_space(sc);
  const auto instances = training_instances(sc);
  std::unique_ptr<Target> owned;
  Target* target = options.target;
  if (!target) {
    owned = make_target(sc, space);
    target = owned.get();
  }
  target->prepare(instances);

  const Schedule schedule = compute_schedule(space.size(), sc.budget, sc.n_min + 1);
  const InstanceStream stream(instances.size(), derive_seed({sc.seed, 0x53545245ULL}));
  const RaceSettings settings = race_settings(sc);
  const CrashPolicy policy{sc.target.crash_cost};

  Rng rng(derive_seed({sc.seed, 0x454e47ULL}));
  if (!state.rng.empty()) rng.restore(state.rng);
  SamplingModel model = SamplingModel::restore(space, schedule.n_iterations, sc.sampler, state.model_iteration,
                                               state.categorical);

  std::vector<std::string> instance_ids;
  for (const auto& inst : instances) instance_ids.push_back(inst.id);

  const bool persist = !sc.output.empty();
  const fs::path dir = persist ? fs::path(sc.output) : fs::path();
  std::ofstream evals_out;
  std::ofstream diversity_out;
  if (persist) {
    evals_out.open(dir / "evals.csv", std::ios::binary | std::ios::app);
    diversity_out.open(dir / "diversity.csv", std::ios::binary | std::ios::app);
    if (!evals_out || !diversity_out) throw std::runtime_error("cannot open logs in '" + dir.string() + "'");
  }
  EvalLog log(persist ? &evals_out : nullptr, instance_ids);

  RaceContext ctx;
  ctx.workers = effective_workers(sc);
  ctx.log = &log;
  ctx.evaluate = [&](const Configuration& c, const Experiment& e) {
    return resolve(target->evaluate(c, instances[e.instance], e.seed), policy);
  };

  auto checkpoint = [&] {
    state.rng = rng.save();
    state.model_iteration = model.iteration();
    state.categorical = model.categorical();
    if (!persist) return;
    evals_out.flush();
    diversity_out.flush();
    state.evals_bytes = fs::file_size(dir / "evals.csv");
    state.diversity_bytes = fs::file_size(dir / "diversity.csv");
    auto bytes = encode_state(state);
    write_atomically(dir / "state.bin", std::string(bytes.begin(), bytes.end()));
    write_atomically(dir / "elites.json",
                     elites_to_json(space, make_result(state, sc.strategy), sc.budget));
  };

  while (!state.complete) {
    if (options.stop_after_race && state.race >= *options.stop_after_race) break;
    const int j = state.race + 1;
    const std::size_t remaining = sc.budget - state.used;
    const std::size_t race_budget = schedule.race_budget(j, state.used);
    if (remaining == 0) {
      state.complete = true;
      checkpoint();
      break;
    }

    const std::size_t n_new = new_candidate_count(race_budget, j, sc.n_min, sc.first_test, state.elites.size());
    std::vector<Configuration> candidates;
    if (j == 1) {
      candidates = initial_sample(space, n_new, rng, state.next_id, sc.sampler);
    } else {
      model = update_model(std::move(model), state.elites, j);
      candidates = sample_offspring(model, state.elites, space, n_new, rng, state.next_id, state.elites);
    }
    state.next_id += n_new;

    ctx.race_index = j;
    RaceOutcome outcome =
        race(candidates, state.elites, stream, state.next_fresh, race_budget, state.results, settings, ctx);
    state.race = j;

    RaceSummary summary;
    summary.race = j;
    summary.budget = race_budget;
    summary.candidates = candidates.size();
    summary.evaluations = outcome.evaluations;
    summary.steps = outcome.steps;

    if (outcome.evaluations == 0) {
      // Nothing affordable: keep the previous elites. Past the schedule the
      // leftover budget cannot buy another step, so the run ends here.
      summary.survivors = state.elites.size();
      summary.elites = state.elites.size();
      DiversityReport d = state.diversity.empty() ? population_diversity(state.elites, space, sc.entropy)
                                                  : state.diversity.back();
      summary.diversity = d.diversity;
      state.history.push_back(summary);
      state.diversity.push_back(d);
      if (persist) diversity_out << diversity_row(j, d);
      if (j >= schedule.n_iterations) state.complete = true;
      checkpoint();
      continue;
    }

    state.used += outcome.evaluations;
    state.next_fresh = outcome.next_fresh;
    EliteSet chosen = select(sc, outcome.survivors, space, rng);
    state.elites = chosen.members;
    std::vector<ConfigId> keep;
    for (const auto& e : state.elites) keep.push_back(e.id);
    state.results.retain(keep);

    DiversityReport d = population_diversity(state.elites, space, sc.entropy);
    summary.survivors = outcome.survivors.size();
    summary.elites = state.elites.size();
    summary.diversity = d.diversity;
    state.history.push_back(summary);
    state.diversity.push_back(d);
    if (persist) diversity_out << diversity_row(j, d);
    if (state.used >= sc.budget) state.complete = true;

    if (options.progress) {
      *options.progress << "race " << j << ": B_j=" << race_budget << " candidates=" << candidates.size()
                        << " evaluations=" << outcome.evaluations << " survivors=" << outcome.survivors.size()
                        << " elites=" << state.elites.size() << " D=" << format_real(d.diversity)
                        << " used=" << state.used << "/" << sc.budget << "\n";
    }
    checkpoint();
  }

  return make_result(state, sc.strategy);
}

}  // namespace

TuneResult tune(const Scenario& scenario, const TuneOptions& options) {
  check_scenario(scenario);
  Scenario sc = scenario;
  if (sc.parameters.rfind("builtin:", 0) != 0) sc.parameters = fs::absolute(resolve_path(sc, sc.parameters)).string();
  if (!sc.instances.list.empty()) sc.instances.list = fs::absolute(resolve_path(sc, sc.instances.list)).string();
  if (!sc.output.empty()) {
    sc.output = fs::absolute(resolve_path(sc, sc.output)).lexically_normal().string();
    const fs::path dir(sc.output);
    fs::create_directories(dir);
    Scenario echo = scenario;
    echo.output = sc.output;
    echo.parameters = sc.parameters;
    echo.instances.list = sc.instances.list;
    write_atomically(dir / "scenario.json", scenario_to_json(echo));
    std::ofstream(dir / "evals.csv", std::ios::binary | std::ios::trunc) << EvalLog::header() << '\n';
    std::ofstream(dir / "diversity.csv", std::ios::binary | std::ios::trunc) << diversity_header(load_space(sc));
    fs::remove(dir / "state.bin");
    fs::remove(dir / "elites.json");
  }
  RunState state;
  return run(sc, state, options);
}

TuneResult resume(const std::string& run_dir, const TuneOptions& options) {
  const fs::path dir(run_dir);
  Scenario sc = load_scenario((dir / "scenario.json").string());
  sc.output = fs::absolute(dir).lexically_normal().string();
  const auto text = read_file(dir / "state.bin");
  RunState state = decode_state(std::vector<std::uint8_t>(text.begin(), text.end()));
  fs::resize_file(dir / "evals.csv", state.evals_bytes);
  fs::resize_file(dir / "diversity.csv", state.diversity_bytes);
  return run(sc, state, options);
}

// --- elites file ----------------------------------------------------------------

std::string elites_to_json(const ParameterSpace& space, const TuneResult& result, std::size_t budget) {
  ordered_json j;
  j["strategy"] = std::string(to_string(result.elites.strategy));
  j["complete"] = result.complete;
  j["races"] = result.races;
  j["evaluations"] = result.evaluations;
  j["budget"] = budget;
  j["elites"] = ordered_json::array();
  for (std::size_t r = 0; r < result.elites.members.size(); ++r) {
    const auto& c = result.elites.members[r];
    ordered_json e;
    e["rank"] = r + 1;
    e["id"] = c.id;
    e["parent"] = c.origin.parent ? ordered_json(*c.origin.parent) : ordered_json(nullptr);
    e["iteration"] = c.origin.iteration;
    if (r < result.elite_mean_costs.size()) e["mean_cost"] = result.elite_mean_costs[r];
    ordered_json values = ordered_json::object();
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto& v = c.values[i];
      if (!is_active(v)) values[space[i].name] = nullptr;
      else if (auto* lvl = std::get_if<Level>(&v)) values[space[i].name] = space[i].levels.at(lvl->index);
      else values[space[i].name] = std::get<double>(v);
    }
    e["values"] = values;
    j["elites"].push_back(e);
  }
  return j.dump(2) + "\n";
}

std::vector<Configuration> parse_elites_json(const ParameterSpace& space, const std::string& text) {
  const json j = json::parse(text);
  std::vector<Configuration> out;
  for (const auto& e : j.at("elites")) {
    Configuration c;
    c.id = e.at("id").get<ConfigId>();
    if (auto p = e.find("parent"); p != e.end() && !p->is_null()) c.origin.parent = p->get<ConfigId>();
    if (auto it = e.find("iteration"); it != e.end()) c.origin.iteration = it->get<int>();
    const auto& values = e.at("values");
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto& spec = space[i];
      auto v = values.find(spec.name);
      if (v == values.end() || v->is_null()) {
        c.values.push_back(Inactive{});
      } else if (spec.kind == ParamKind::categorical) {
        c.values.push_back(parse_value(spec, v->is_string() ? v->get<std::string>() : v->dump()));
      } else {
        c.values.push_back(v->get<double>());
      }
    }
    if (auto bad = validate_configuration(space, c); !bad.empty())
      throw std::invalid_argument("elites: configuration " + std::to_string(c.id) + ": " + bad.front().message);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Configuration> load_elites(const ParameterSpace& space, const std::string& path) {
  return parse_elites_json(space, read_file(path));
}

// --- validation -------------------------------------------------------------------

double ValidationMatrix::row_mean(std::size_t config) const {
  const auto& row = mean.at(config);
  if (row.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : row) s += x;
  return s / static_cast<double>(row.size());
}

ValidationMatrix validate(Target& target, std::span<const Configuration> configs,
                          std::span<const Instance> instances, std::size_t repetitions, std::uint64_t seed,
                          std::size_t workers, const CrashPolicy& policy) {
  if (repetitions < 1) throw std::invalid_argument("validate: repetitions must be at least 1");
  target.prepare(instances);
  ValidationMatrix m;
  for (const auto& c : configs) m.configs.push_back(c.id);
  for (const auto& inst : instances) m.instances.push_back(inst.id);
  const std::size_t n_inst = instances.size();
  const std::size_t per_config = n_inst * repetitions;
  std::vector<double> costs(configs.size() * per_config);
  parallel_for(costs.size(), workers, [&](std::size_t k) {
    const std::size_t c = k / per_config;
    const std::size_t i = (k % per_config) / repetitions;
    const std::size_t r = k % repetitions;
    const std::uint64_t s = derive_seed({seed, 0x56414cULL, i, r}) >> 33;
    costs[k] = resolve(target.evaluate(configs[c], instances[i], s), policy).cost;
  });
  m.mean.assign(configs.size(), std::vector<double>(n_inst, 0.0));
  for (std::size_t c = 0; c < configs.size(); ++c)
    for (std::size_t i = 0; i < n_inst; ++i) {
      double sum = 0.0;
      for (std::size_t r = 0; r < repetitions; ++r) sum += costs[c * per_config + i * repetitions + r];
      m.mean[c][i] = sum / static_cast<double>(repetitions);
    }
  return m;
}

void write_validation_csv(std::ostream& out, const ValidationMatrix& m) {
  std::vector<std::string> header{"config_id"};
  header.insert(header.end(), m.instances.begin(), m.instances.end());
  write_csv_row(out, header);
  for (std::size_t c = 0; c < m.configs.size(); ++c) {
    std::vector<std::string> row{std::to_string(m.configs[c])};
    for (double x : m.mean[c]) row.push_back(format_real(x));
    write_csv_row(out, row);
  }
}

ValidationMatrix read_validation_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  if (t.header.empty() || t.header[0] != "config_id") throw std::runtime_error("validation CSV: bad header");
  ValidationMatrix m;
  m.instances.assign(t.header.begin() + 1, t.header.end());
  for (const auto& row : t.rows) {
    m.configs.push_back(std::stoull(row[0]));
    std::vector<double> v;
    for (std::size_t i = 1; i < row.size(); ++i) v.push_back(std::stod(row[i]));
    m.mean.push_back(std::move(v));
  }
  return m;
}

}  // namespace racetune
