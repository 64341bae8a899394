// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 5 11     run the listed criteria only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "racetune/diversity.hpp"
#include "racetune/engine.hpp"
#include "racetune/racer.hpp"
#include "racetune/report.hpp"
#include "racetune/rng.hpp"
#include "racetune/sampler.hpp"
#include "racetune/scenario.hpp"
#include "racetune/selector.hpp"
#include "racetune/stats.hpp"
#include "racetune/targets.hpp"
#include "racetune/tsp.hpp"

using namespace racetune;
namespace fs = std::filesystem;

namespace {

constexpr double kTol = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

ParameterSpace synthetic_space() { return parse_parameter_file(synthetic_space_text()); }
ParameterSpace aco_space() { return parse_parameter_file(aco_space_text()); }

Configuration random_config(const ParameterSpace& space, Rng& rng, ConfigId id) {
  return Configuration{id, sample_uniform_values(space, rng), {}};
}

// --- 1 ------------------------------------------------------------------------

Outcome schedule_exactness() {
  const Schedule s = compute_schedule(11, 5000);
  const std::size_t b1 = s.race_budget(1, 0);
  return {s.n_iterations == 5 && b1 == 1000, "N_iter=" + std::to_string(s.n_iterations) + " B_1=" + std::to_string(b1)};
}

// --- 2 ------------------------------------------------------------------------

Outcome statistical_tests() {
  CostTable hand(3, 4);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 4; ++i) hand.at(c, i) = static_cast<double>(c + 1);
  const auto f = friedman_test(hand, 0.05);
  const bool exact = std::abs(f.statistic - 8.0) <= kTol && f.eliminated == std::vector<std::size_t>{1, 2};

  // Null hypothesis: 4 exchangeable configurations. A race tests after
  // instances 5, 6, ..., 20; count per checkpoint how often anything goes.
  const std::size_t seeds = 1000, k = 4, n_max = 20, first = 5;
  std::vector<std::size_t> hits(n_max + 1, 0), t_hits(n_max + 1, 0);
  for (std::size_t s = 0; s < seeds; ++s) {
    Rng rng(derive_seed({0x4e554c4cULL, s}));
    CostTable full(k, n_max);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t i = 0; i < n_max; ++i) full.at(c, i) = rng.normal();
    for (std::size_t n = first; n <= n_max; ++n) {
      CostTable t(k, n);
      for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < n; ++i) t.at(c, i) = full.at(c, i);
      if (!friedman_test(t, 0.05).eliminated.empty()) ++hits[n];
      if (!racetune::t_test(t, 0.05).eliminated.empty()) ++t_hits[n];
    }
  }
  double worst = 0.0, t_worst = 0.0;
  for (std::size_t n = first; n <= n_max; ++n) {
    worst = std::max(worst, static_cast<double>(hits[n]) / seeds);
    t_worst = std::max(t_worst, static_cast<double>(t_hits[n]) / seeds);
  }
  return {exact && worst <= 0.07,
          "T=" + fmt(f.statistic, 17) + " eliminated rows {" +
              [&] {
                std::string s;
                for (auto r : f.eliminated) s += (s.empty() ? "c" : ",c") + std::to_string(r + 1);
                return s;
              }() +
              "}; null F-test max per-checkpoint rate " + fmt(worst) + " (limit 0.07); t-test " + fmt(t_worst) +
              " (informational)"};
}

// --- 3 ------------------------------------------------------------------------

Outcome entropy_values() {
  ParameterSpec cat{"c", ParamKind::categorical, 0, 0, {"a", "b", "c", "d"}, Scale::linear, std::nullopt};
  std::vector<Value> v1{Level{0}, Level{0}, Level{1}, Level{1}};
  const double h1 = normalized_entropy(v1, cat);

  ParameterSpec real{"x", ParamKind::real, 0.0, 1.0, {}, Scale::linear, std::nullopt};
  std::vector<Value> v2{0.1, 0.2, 0.6, 0.9};
  const double h2 = normalized_entropy(v2, real);

  const auto space = aco_space();
  Rng rng(11);
  auto c = random_config(space, rng, 1);
  std::vector<Configuration> same(6, c);
  const double d = population_diversity(same, space).diversity;

  const bool ok = std::abs(h1 - 0.5) <= kTol && std::abs(h2 - 0.75) <= kTol && std::abs(d) <= kTol;
  return {ok, "H{a,a,b,b}=" + fmt(h1, 17) + " H_binned=" + fmt(h2, 17) + " D_identical=" + fmt(d, 17)};
}

// --- 4 ------------------------------------------------------------------------

Outcome gower_values() {
  const auto worked = parse_parameter_file("c c {on, off}\nx r (0, 10)\ny r (0, 1) | c == \"on\"\n");
  Configuration a{1, {Level{0}, 2.0, 0.5}, {}};
  Configuration b{2, {Level{1}, 7.0, Inactive{}}, {}};
  const double d_ab = gower_distance(a, b, worked);
  const double d_aa = gower_distance(a, a, worked);

  std::size_t bad = 0;
  const ParameterSpace spaces[] = {synthetic_space(), aco_space()};
  Rng rng(0x474f574552ULL);
  for (int t = 0; t < 10000; ++t) {
    const auto& sp = spaces[t % 2];
    auto x = random_config(sp, rng, 1);
    auto y = random_config(sp, rng, 2);
    const double xy = gower_distance(x, y, sp);
    const double yx = gower_distance(y, x, sp);
    const double xx = gower_distance(x, x, sp);
    if (!(xy >= 0.0 && xy <= 1.0) || std::abs(xy - yx) > kTol || std::abs(xx) > kTol) ++bad;
  }
  const bool ok = std::abs(d_ab - 0.75) <= kTol && std::abs(d_aa) <= kTol && bad == 0;
  return {ok, "worked example " + fmt(d_ab, 17) + ", identity " + fmt(d_aa, 17) + ", property violations " +
                  std::to_string(bad) + "/10000"};
}

// --- 5 ------------------------------------------------------------------------

// Survivors drawn from a small value pool so clones and ties occur.
std::vector<Configuration> survivor_set(const ParameterSpace& space, std::size_t n, Rng& rng) {
  std::vector<Configuration> pool;
  const std::size_t distinct = 1 + rng.below(n);
  for (std::size_t i = 0; i < distinct; ++i) pool.push_back(random_config(space, rng, 0));
  std::vector<Configuration> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto c = pool[rng.below(pool.size())];
    c.id = 100 + i;
    out.push_back(std::move(c));
  }
  return out;
}

double brute_force_max_d(std::span<const Configuration> ranked, std::size_t n_min, const ParameterSpace& space) {
  const std::size_t m = ranked.size();
  double best = -1.0;
  for (std::uint32_t mask = 0; mask < (1u << (m - 1)); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != n_min - 1) continue;
    std::vector<Configuration> subset{ranked[0]};
    for (std::size_t i = 1; i < m; ++i)
      if (mask & (1u << (i - 1))) subset.push_back(ranked[i]);
    best = std::max(best, population_diversity(subset, space).diversity);
  }
  return best;
}

// Independent anchor check: numeric entries are the (rounded) mean over active
// members, categorical ones are one of the modes.
bool anchor_is_mean(const std::vector<Value>& anchor, std::span<const Configuration* const> members,
                    const ParameterSpace& space) {
  for (std::size_t p = 0; p < space.size(); ++p) {
    const auto& spec = space[p];
    std::vector<const Value*> active;
    for (auto* m : members)
      if (is_active(m->values[p])) active.push_back(&m->values[p]);
    if (active.empty()) continue;
    if (!is_active(anchor[p])) continue;  // deactivated by re-derivation
    if (spec.kind == ParamKind::categorical) {
      std::map<std::size_t, int> counts;
      for (auto* v : active) ++counts[std::get<Level>(*v).index];
      int top = 0;
      for (auto& [l, c] : counts) top = std::max(top, c);
      const auto l = std::get<Level>(anchor[p]).index;
      if (counts[l] != top) return false;
    } else {
      double sum = 0.0;
      for (auto* v : active) sum += std::get<double>(*v);
      double mean = sum / static_cast<double>(active.size());
      if (spec.kind == ParamKind::integer) mean = mean < 0 ? -std::round(-mean) : std::round(mean);
      if (std::abs(std::get<double>(anchor[p]) - mean) > 1e-9 * std::max(1.0, std::abs(mean))) return false;
    }
  }
  return true;
}

Outcome selection_oracles() {
  const auto space = aco_space();
  const std::size_t n_min = 5;
  std::size_t entropy_cases = 0, entropy_bad = 0, gower_steps = 0, gower_bad = 0;
  double worst_gap = 0.0;
  Rng rng(0x53454c);
  for (std::size_t n = 1; n <= 12; ++n) {
    for (int trial = 0; trial < 40; ++trial) {
      auto ranked = survivor_set(space, n, rng);
      auto e = select_entropy(ranked, n_min, space);
      ++entropy_cases;
      if (n > n_min) {
        const double got = population_diversity(e.members, space).diversity;
        const double want = brute_force_max_d(ranked, n_min, space);
        worst_gap = std::max(worst_gap, std::abs(got - want));
        if (!e.exhaustive || std::abs(got - want) > kTol || e.members.front().id != ranked.front().id) ++entropy_bad;
      } else if (e.members.size() != n) {
        ++entropy_bad;
      }

      std::vector<GowerStep> trace;
      Rng grng(derive_seed({n, static_cast<std::uint64_t>(trial)}));
      auto g = select_gower(ranked, n_min, space, grng, &trace);
      if (n <= n_min) {
        if (g.members.size() != n) ++gower_bad;
        continue;
      }
      std::vector<const Configuration*> chosen{&ranked[0]};
      for (const auto& step : trace) {
        ++gower_steps;
        bool ok = anchor_is_mean(step.anchor, chosen, space);
        std::size_t arg = step.remaining.front();
        double best = -1.0;
        for (std::size_t r = 0; r < step.remaining.size(); ++r) {
          const auto idx = step.remaining[r];
          const double d = gower_distance(step.anchor, ranked[idx].values, space);
          if (std::abs(d - step.distances[r]) > kTol) ok = false;
          if (d > best + kTol) best = d, arg = idx;  // remaining is in rank order: ties keep the better rank
        }
        if (arg != step.chosen) ok = false;
        if (!ok) ++gower_bad;
        chosen.push_back(&ranked[step.chosen]);
      }
      if (trace.size() != n_min - 1 || g.members.size() != n_min) ++gower_bad;
    }
  }
  return {entropy_bad == 0 && gower_bad == 0,
          "entropy: " + std::to_string(entropy_cases - entropy_bad) + "/" + std::to_string(entropy_cases) +
              " survivor sets match brute force (max |dD| " + fmt(worst_gap) + "); gower: " +
              std::to_string(gower_steps) + " steps, " + std::to_string(gower_bad) + " mismatches"};
}

// --- 6 ------------------------------------------------------------------------

Outcome selector_contracts() {
  const auto space = synthetic_space();
  Rng rng(0x434f4e54);
  std::size_t bad = 0, pool_violations = 0;
  const double factors[] = {1.5, 2.0, 3.0, std::numeric_limits<double>::infinity()};
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 1 + rng.below(18);
    const std::size_t n_min = 1 + rng.below(6);
    std::vector<Configuration> ranked;
    for (std::size_t i = 0; i < n; ++i) ranked.push_back(random_config(space, rng, 1000 + rng.below(1000000)));
    for (std::size_t i = 0; i < n; ++i) ranked[i].id = 10 * i + 7;  // distinct ids
    const double sigma = factors[rng.below(4)];
    std::vector<EliteSet> outs{select_greedy(ranked, n_min), select_rand(ranked, n_min, sigma, rng),
                               select_entropy(ranked, n_min, space), select_gower(ranked, n_min, space, rng)};
    for (const auto& o : outs) {
      std::set<ConfigId> ids;
      for (const auto& m : o.members) ids.insert(m.id);
      const bool from_survivors = std::all_of(o.members.begin(), o.members.end(), [&](const Configuration& m) {
        return std::any_of(ranked.begin(), ranked.end(), [&](const Configuration& r) { return r == m; });
      });
      if (o.members.size() != std::min(n, n_min) || ids.size() != o.members.size() || !from_survivors ||
          o.members.front().id != ranked.front().id)
        ++bad;
    }
    const std::size_t cap = std::isinf(sigma) ? n : std::min<std::size_t>(n, std::ceil(sigma * n_min));
    for (const auto& m : outs[1].members)
      if ((m.id - 7) / 10 >= cap) ++pool_violations;
  }
  // The SPEAR-style cap: ranked 1..12, N_min=5, sigma=2.
  std::vector<Configuration> twelve;
  for (ConfigId id = 1; id <= 12; ++id) twelve.push_back(random_config(space, rng, id));
  std::set<ConfigId> seen;
  std::size_t cap_violations = 0;
  for (int t = 0; t < 2000; ++t) {
    auto o = select_rand(twelve, 5, 2.0, rng);
    if (o.members.front().id != 1) ++cap_violations;
    for (const auto& m : o.members) {
      seen.insert(m.id);
      if (m.id > 10) ++cap_violations;
    }
  }
  const bool full_pool = seen.size() == 10;
  return {bad == 0 && pool_violations == 0 && cap_violations == 0 && full_pool,
          "contract violations " + std::to_string(bad) + "/40000, sigma-cap violations " +
              std::to_string(pool_violations + cap_violations) + ", 2N_min pool coverage " +
              std::to_string(seen.size()) + "/10"};
}

// --- 7, 8 --------------------------------------------------------------------

struct SyntheticSuite {
  std::map<SelectionStrategy, std::vector<double>> best_cost;  // epsilon-stripped
  std::map<SelectionStrategy, std::vector<double>> final_d;
  std::map<SelectionStrategy, std::size_t> over_budget;
  bool ran = false;
};

const SelectionStrategy kStrategies[] = {SelectionStrategy::greedy, SelectionStrategy::rand,
                                         SelectionStrategy::entropy, SelectionStrategy::gower};

SyntheticSuite& synthetic_suite() {
  static SyntheticSuite suite;
  if (suite.ran) return suite;
  const auto space = synthetic_space();
  SyntheticTarget target(space, 0);
  for (auto strategy : kStrategies) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Scenario sc;
      sc.parameters = "builtin:synthetic";
      sc.target.builtin = "synthetic";
      sc.instances.count = 10;
      sc.instances.seed = 77;
      sc.budget = 2000;
      sc.n_min = 5;
      sc.strategy = strategy;
      sc.seed = seed;
      sc.workers = 1;
      TuneOptions opt;
      opt.target = &target;
      const auto r = tune(sc, opt);
      suite.best_cost[strategy].push_back(target.noise_free_cost(r.elites.members.front()));
      suite.final_d[strategy].push_back(population_diversity(r.elites.members, space).diversity);
      if (r.evaluations > sc.budget) ++suite.over_budget[strategy];
    }
  }
  suite.ran = true;
  return suite;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

Outcome synthetic_tuning() {
  auto& s = synthetic_suite();
  bool ok = true;
  std::string detail;
  for (auto st : kStrategies) {
    const auto hits = std::count_if(s.best_cost[st].begin(), s.best_cost[st].end(), [](double c) { return c <= 0.05; });
    ok = ok && hits >= 18 && s.over_budget[st] == 0;
    detail += std::string(to_string(st)) + " " + std::to_string(hits) + "/20 ";
  }
  return {ok, detail + "runs reach cost <= 0.05"};
}

Outcome diversity_direction() {
  auto& s = synthetic_suite();
  const double dg = mean(s.final_d[SelectionStrategy::greedy]);
  const double dr = mean(s.final_d[SelectionStrategy::rand]);
  const double de = mean(s.final_d[SelectionStrategy::entropy]);
  const double dw = mean(s.final_d[SelectionStrategy::gower]);
  const double cg = mean(s.best_cost[SelectionStrategy::greedy]);
  const double ce = mean(s.best_cost[SelectionStrategy::entropy]);
  return {de > dr && dr > dg && ce <= cg,
          "mean final D: entropy " + fmt(de) + ", rand " + fmt(dr) + ", greedy " + fmt(dg) + ", gower " + fmt(dw) +
              "; mean best cost entropy " + fmt(ce) + " vs greedy " + fmt(cg)};
}

// --- 9 ------------------------------------------------------------------------

Outcome aco_tuning() {
  const auto space = aco_space();
  AcoTspTarget aco(space, 2000);
  // Runs that share a seed replay identical evaluations until their elite
  // sets diverge; the memo serves those without changing any result.
  MemoTarget target(aco);
  const auto train = generated_instances(100, 10, 9001);
  const auto test = generated_instances(100, 20, 9002);
  target.prepare(train);
  target.prepare(test);

  Configuration def{0, default_configuration(space), {}};
  const auto base = validate(target, std::span(&def, 1), test, 1, 5);
  const double default_mean = base.row_mean(0);

  std::vector<RunOutput> runs;
  std::map<SelectionStrategy, int> wins;
  for (auto strategy : kStrategies) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Scenario sc;
      sc.parameters = "builtin:aco";
      sc.target.builtin = "aco-tsp";
      sc.target.tour_budget = 2000;
      sc.instances.n_cities = 100;
      sc.instances.count = 10;
      sc.instances.seed = 9001;
      sc.budget = 500;
      sc.n_min = 5;
      sc.strategy = strategy;
      sc.seed = seed;
      sc.workers = 1;
      TuneOptions opt;
      opt.target = &target;
      const auto r = tune(sc, opt);
      RunOutput o;
      o.name = std::string(to_string(strategy)) + "-" + std::to_string(seed);
      o.variant = std::string(to_string(strategy));
      o.elites = r.elites.members;
      o.validation = validate(target, o.elites, test, 1, 5);
      if (o.validation.row_mean(0) < default_mean) ++wins[strategy];
      runs.push_back(std::move(o));
    }
  }
  const auto report = compare(runs);
  std::size_t best_total = 0;
  for (const auto& b : report.best_counts) best_total += b.best;

  bool ok = best_total == test.size();
  std::string detail = "default mean " + fmt(default_mean, 8) + "; best elite beats it in";
  for (auto st : kStrategies) {
    ok = ok && wins[st] >= 15;
    detail += " " + std::string(to_string(st)) + " " + std::to_string(wins[st]) + "/20";
  }
  detail += "; # best";
  for (const auto& b : report.best_counts) detail += " " + b.variant + "=" + std::to_string(b.best);
  detail += " (sum " + std::to_string(best_total) + "/" + std::to_string(test.size()) + ")";
  // Exact ties go to the first run in order; count instances where the best
  // cost is shared by more than one strategy.
  std::size_t tied = 0;
  for (std::size_t j = 0; j < test.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    std::set<std::string> holders;
    for (const auto& r : runs)
      for (const auto& row : r.validation.mean) {
        if (row[j] < best) best = row[j], holders.clear();
        if (row[j] == best) holders.insert(r.variant);
      }
    if (holders.size() > 1) ++tied;
  }
  detail += "; best cost shared across strategies on " + std::to_string(tied) + "/" + std::to_string(test.size()) +
            " instances";
  detail += "; memo hits " + std::to_string(target.hits()) + "/" + std::to_string(target.hits() + target.misses());
  return {ok, detail};
}

// --- 10 -----------------------------------------------------------------------

std::int64_t exhaustive_optimum(const TspInstance& inst) {
  const auto& pts = inst.cities();
  const std::size_t n = pts.size();
  auto d = [&](std::size_t a, std::size_t b) {
    const double dx = pts[a].x - pts[b].x, dy = pts[a].y - pts[b].y;
    return static_cast<std::int64_t>(std::sqrt(dx * dx + dy * dy) + 0.5);
  };
  std::vector<std::size_t> perm(n - 1);
  std::iota(perm.begin(), perm.end(), 1);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  do {
    std::int64_t len = d(0, perm.front()) + d(perm.back(), 0);
    for (std::size_t i = 0; i + 1 < perm.size(); ++i) len += d(perm[i], perm[i + 1]);
    best = std::min(best, len);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Outcome aco_oracle() {
  const auto space = aco_space();
  AcoTspTarget target(space, 500);
  std::size_t below = 0, small = 0, small_hit = 0, trials = 0;
  Rng rng(0x4f5241434c45ULL);
  for (std::uint64_t t = 0; t < 50; ++t) {
    for (std::size_t n = 3; n <= 9; ++n) {
      Instance inst{"o-" + std::to_string(n) + "-" + std::to_string(t), "", derive_seed({0x6f7261ULL, t, n}), n};
      const auto tsp = instantiate_tsp(inst);
      const auto opt = exhaustive_optimum(tsp);
      Configuration c = random_config(space, rng, t + 1);
      const auto r = target.evaluate(c, inst, derive_seed({t, n}) >> 33);
      ++trials;
      if (r.status != EvalStatus::ok || static_cast<std::int64_t>(r.cost) < opt) ++below;
      if (n <= 6) {
        ++small;
        if (static_cast<std::int64_t>(r.cost) == opt) ++small_hit;
      }
    }
  }
  return {below == 0 && small_hit == small,
          std::to_string(trials) + " runs on n=3..9: " + std::to_string(below) + " below the optimum; n<=6 optimum hit " +
              std::to_string(small_hit) + "/" + std::to_string(small)};
}

// --- 11 -----------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / ("racetune-accept-" + std::to_string(::getpid()));
  fs::remove_all(root);
  auto scenario = [&](const std::string& name, std::size_t workers) {
    Scenario sc;
    sc.parameters = "builtin:synthetic";
    sc.target.builtin = "synthetic";
    sc.instances.count = 10;
    sc.instances.seed = 5;
    sc.budget = 2000;
    sc.strategy = SelectionStrategy::gower;
    sc.seed = 42;
    sc.workers = workers;
    sc.output = (root / name).string();
    return sc;
  };
  const auto a = tune(scenario("a", 1));
  tune(scenario("b", 3));
  TuneOptions stop;
  stop.stop_after_race = 3;
  const auto partial = tune(scenario("c", 1), stop);
  const auto resumed = resume((root / "c").string());

  auto same = [&](const char* file, const char* x, const char* y) {
    const auto fx = slurp(root / x / file), fy = slurp(root / y / file);
    return !fx.empty() && fx == fy;
  };
  const bool repeat = same("evals.csv", "a", "b") && same("elites.json", "a", "b");
  const bool resume_ok = !partial.complete && resumed.complete && same("evals.csv", "a", "c") &&
                         same("elites.json", "a", "c") && same("diversity.csv", "a", "c");

  // The same check on the ACO target, which exercises the pheromone code.
  auto aco = [&](const std::string& name, std::size_t workers) {
    Scenario sc;
    sc.parameters = "builtin:aco";
    sc.target.builtin = "aco-tsp";
    sc.target.tour_budget = 300;
    sc.instances.n_cities = 40;
    sc.instances.count = 6;
    sc.instances.seed = 3;
    sc.budget = 300;
    sc.strategy = SelectionStrategy::entropy;
    sc.seed = 9;
    sc.workers = workers;
    sc.output = (root / name).string();
    return sc;
  };
  tune(aco("d", 1));
  tune(aco("e", 2));
  tune(aco("f", 1), stop);
  resume((root / "f").string());
  const bool aco_ok = same("evals.csv", "d", "e") && same("elites.json", "d", "e") && same("evals.csv", "d", "f") &&
                      same("elites.json", "d", "f");
  fs::remove_all(root);
  return {repeat && resume_ok && aco_ok,
          std::string("repeat runs identical: ") + (repeat ? "yes" : "no") +
              "; resume after race 3 identical: " + (resume_ok ? "yes" : "no") + " (" +
              std::to_string(a.races) + " races); ACO repeat+resume identical: " + (aco_ok ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "schedule exactness", schedule_exactness},
      {2, "statistical-test oracle", statistical_tests},
      {3, "entropy unit values", entropy_values},
      {4, "gower unit values", gower_values},
      {5, "selection oracles", selection_oracles},
      {6, "selector contracts", selector_contracts},
      {7, "end-to-end synthetic tuning", synthetic_tuning},
      {8, "diversity direction", diversity_direction},
      {9, "desk-scale ACO tuning", aco_tuning},
      {10, "ACO correctness oracle", aco_oracle},
      {11, "reproducibility", reproducibility},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s  criterion %2d  %-28s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : 1;
}
