#include "racetune/racer.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "racetune/rng.hpp"

namespace racetune {

std::size_t Schedule::race_budget(int j, std::size_t used) const {
  const std::size_t remaining = used >= budget ? 0 : budget - used;
  const int denominator = std::max(1, n_iterations - j + 1);
  return remaining / static_cast<std::size_t>(denominator);
}

Schedule compute_schedule(std::size_t n_params, std::size_t budget, std::size_t min_race_need) {
  if (n_params == 0) throw std::invalid_argument("schedule: the space has no parameters");
  if (budget == 0) throw std::invalid_argument("schedule: budget must be positive");
  Schedule s;
  // floor(2 + log2(n)) == 2 + floor(log2(n)) == 1 + bit_width(n)
  s.n_iterations = 1 + static_cast<int>(std::bit_width(n_params));
  s.budget = budget;
  if (s.race_budget(1, 0) < min_race_need)
    throw std::invalid_argument("schedule: budget " + std::to_string(budget) +
                                " leaves the first race " + std::to_string(s.race_budget(1, 0)) +
                                " evaluations, fewer than the " + std::to_string(min_race_need) +
                                " it needs");
  return s;
}

std::size_t new_candidate_count(std::size_t race_budget, int j, std::size_t n_min, int first_test,
                                std::size_t n_elites) {
  const auto per = static_cast<std::size_t>(first_test + std::min(j, 5));
  const std::size_t total = std::max(n_min + 1, race_budget / std::max<std::size_t>(1, per));
  return total > n_elites ? total - n_elites : 0;
}

InstanceStream::InstanceStream(std::size_t n_instances, std::uint64_t master_seed)
    : n_(n_instances), master_seed_(master_seed) {
  if (n_ == 0) throw std::invalid_argument("instance stream: no training instances");
}

Experiment InstanceStream::at(std::uint64_t position) const {
  const std::uint64_t pass = position / n_;
  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed({master_seed_, 0x5354524541ULL, pass}));
  for (std::size_t i = n_; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return Experiment{position, order[position % n_],
                    derive_seed({master_seed_, 0x53454544ULL, position}) >> 33};
}

// ---------------------------------------------------------------------------

void ResultsMatrix::add(ConfigId config, std::uint64_t position, const Record& record) {
  if (!std::isfinite(record.cost))
    throw std::invalid_argument("results: non-finite cost for configuration " + std::to_string(config));
  auto [it, inserted] = data_[config].emplace(position, record);
  if (!inserted)
    throw std::invalid_argument("results: duplicate record for configuration " +
                                std::to_string(config) + " at position " + std::to_string(position));
  ++count_;
}

bool ResultsMatrix::has(ConfigId config, std::uint64_t position) const {
  auto it = data_.find(config);
  return it != data_.end() && it->second.count(position) > 0;
}

const Record& ResultsMatrix::get(ConfigId config, std::uint64_t position) const {
  return data_.at(config).at(position);
}

std::vector<std::uint64_t> ResultsMatrix::positions(ConfigId config) const {
  std::vector<std::uint64_t> out;
  if (auto it = data_.find(config); it != data_.end())
    for (const auto& [pos, rec] : it->second) out.push_back(pos);
  return out;
}

std::vector<std::uint64_t> ResultsMatrix::common_positions(std::span<const ConfigId> ids) const {
  if (ids.empty()) return {};
  auto common = positions(ids.front());
  for (std::size_t i = 1; i < ids.size() && !common.empty(); ++i) {
    auto mine = positions(ids[i]);
    std::vector<std::uint64_t> both;
    std::set_intersection(common.begin(), common.end(), mine.begin(), mine.end(),
                          std::back_inserter(both));
    common = std::move(both);
  }
  return common;
}

CostTable ResultsMatrix::table(std::span<const ConfigId> ids,
                               std::span<const std::uint64_t> positions) const {
  CostTable t(ids.size(), positions.size());
  for (std::size_t c = 0; c < ids.size(); ++c) {
    const auto& row = data_.at(ids[c]);
    for (std::size_t i = 0; i < positions.size(); ++i) t.at(c, i) = row.at(positions[i]).cost;
  }
  return t;
}

double ResultsMatrix::mean_cost(ConfigId config) const {
  auto it = data_.find(config);
  if (it == data_.end() || it->second.empty()) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& [pos, rec] : it->second) sum += rec.cost;
  return sum / static_cast<double>(it->second.size());
}

void ResultsMatrix::retain(std::span<const ConfigId> keep) {
  for (auto it = data_.begin(); it != data_.end();) {
    if (std::find(keep.begin(), keep.end(), it->first) == keep.end()) {
      count_ -= it->second.size();
      it = data_.erase(it);
    } else {
      ++it;
    }
  }
}

// ---------------------------------------------------------------------------

const char* EvalLog::header() { return "race,instance_pos,instance_id,config_id,seed,cost,runtime_s"; }

void EvalLog::write_step(int race, const std::vector<std::pair<ConfigId, Record>>& rows,
                         std::uint64_t position) {
  if (!out_ || rows.empty()) return;
  std::string chunk;
  for (const auto& [id, rec] : rows) {
    chunk += std::to_string(race) + ',' + std::to_string(position) + ',' + ids_.at(rec.instance) +
             ',' + std::to_string(id) + ',' + std::to_string(rec.seed) + ',' + format_real(rec.cost) +
             ',' + format_real(rec.runtime_s) + '\n';
  }
  out_->write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
  out_->flush();
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::vector<ConfigId> friedman_eliminate(const CostTable& table, std::span<const ConfigId> ids,
                                         double alpha) {
  std::vector<ConfigId> out;
  for (auto row : friedman_test(table, alpha).eliminated) out.push_back(ids[row]);
  return out;
}

std::vector<ConfigId> t_test_eliminate(const CostTable& table, std::span<const ConfigId> ids,
                                       double alpha) {
  std::vector<ConfigId> out;
  for (auto row : t_test(table, alpha).eliminated) out.push_back(ids[row]);
  return out;
}

std::vector<ConfigId> rank_survivors(const ResultsMatrix& results, std::span<const ConfigId> alive) {
  const auto common = results.common_positions(alive);
  std::vector<double> sums(alive.size(), 0.0);
  std::vector<double> means(alive.size(), 0.0);
  if (!common.empty()) {
    auto table = results.table(alive, common);
    sums = rank_sums(table);
    for (std::size_t c = 0; c < alive.size(); ++c) means[c] = table.mean(c);
  } else {
    for (std::size_t c = 0; c < alive.size(); ++c) means[c] = results.mean_cost(alive[c]);
  }
  std::vector<std::size_t> order(alive.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sums[a] != sums[b]) return sums[a] < sums[b];
    if (means[a] != means[b]) return means[a] < means[b];
    return alive[a] < alive[b];
  });
  std::vector<ConfigId> out;
  for (auto i : order) out.push_back(alive[i]);
  return out;
}

RaceOutcome race(std::span<const Configuration> candidates, std::span<const Configuration> elites,
                 const InstanceStream& stream, std::uint64_t next_fresh, std::size_t budget,
                 ResultsMatrix& results, const RaceSettings& settings, RaceContext& context) {
  RaceOutcome outcome;
  outcome.next_fresh = next_fresh;

  std::vector<const Configuration*> alive;
  std::vector<bool> is_elite;
  for (const auto& e : elites) alive.push_back(&e), is_elite.push_back(true);
  for (const auto& c : candidates) alive.push_back(&c), is_elite.push_back(false);
  {
    // Canonical order: by id, so commits and statistics never depend on input order.
    std::vector<std::size_t> idx(alive.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return alive[a]->id < alive[b]->id; });
    std::vector<const Configuration*> a2;
    std::vector<bool> e2;
    for (auto i : idx) a2.push_back(alive[i]), e2.push_back(is_elite[i]);
    alive = std::move(a2);
    is_elite = std::move(e2);
  }
  if (alive.empty()) throw std::invalid_argument("race: no configurations");

  std::vector<std::uint64_t> replay;
  for (const auto& e : elites) {
    auto p = results.positions(e.id);
    replay.insert(replay.end(), p.begin(), p.end());
  }
  std::sort(replay.begin(), replay.end());
  replay.erase(std::unique(replay.begin(), replay.end()), replay.end());

  std::vector<std::uint64_t> race_positions;
  std::size_t remaining = budget;
  std::size_t fresh_seen = 0;

  while (true) {
    const std::size_t step = race_positions.size();
    const bool fresh = step >= replay.size();
    const std::uint64_t position = fresh ? outcome.next_fresh : replay[step];
    const Experiment exp = stream.at(position);

    std::vector<std::size_t> todo;
    for (std::size_t a = 0; a < alive.size(); ++a)
      if (!results.has(alive[a]->id, position)) todo.push_back(a);
    if (todo.size() > remaining) break;

    std::vector<Observation> obs(todo.size());
    parallel_for(todo.size(), context.workers,
                 [&](std::size_t t) { obs[t] = context.evaluate(*alive[todo[t]], exp); });
    std::vector<std::pair<ConfigId, Record>> rows;
    for (std::size_t t = 0; t < todo.size(); ++t) {
      Record rec{exp.instance, exp.seed, obs[t].cost, obs[t].runtime_s};
      results.add(alive[todo[t]]->id, position, rec);
      rows.emplace_back(alive[todo[t]]->id, rec);
    }
    if (context.log) context.log->write_step(context.race_index, rows, position);
    remaining -= todo.size();
    outcome.evaluations += todo.size();
    race_positions.push_back(position);
    if (fresh) {
      ++fresh_seen;
      outcome.next_fresh = position + 1;
    }

    const auto done = static_cast<int>(race_positions.size());
    const bool checkpoint = done >= settings.first_test &&
                            (done - settings.first_test) % std::max(1, settings.each_test) == 0;
    if (checkpoint && alive.size() >= 2) {
      std::vector<ConfigId> ids;
      for (auto* c : alive) ids.push_back(c->id);
      auto table = results.table(ids, race_positions);
      std::vector<ConfigId> out;
      double statistic = 0.0;
      if (settings.test == TestKind::friedman) {
        auto f = friedman_test(table, settings.alpha);
        statistic = f.statistic;
        for (auto row : f.eliminated) out.push_back(ids[row]);
      } else {
        auto t = t_test(table, settings.alpha);
        for (auto row : t.eliminated) out.push_back(ids[row]);
        statistic = t.eliminated.empty() ? 1.0 : t.p_values[t.eliminated.front()];
      }
      std::vector<const Configuration*> keep;
      std::vector<bool> keep_elite;
      for (std::size_t a = 0; a < alive.size(); ++a) {
        const bool hit = std::find(out.begin(), out.end(), alive[a]->id) != out.end();
        const bool protect = settings.elitist && is_elite[a] &&
                             fresh_seen < static_cast<std::size_t>(settings.elite_test);
        if (hit && !protect) {
          outcome.eliminations.push_back(
              {alive[a]->id, race_positions.size(), statistic, is_elite[a], fresh_seen});
        } else {
          keep.push_back(alive[a]);
          keep_elite.push_back(is_elite[a]);
        }
      }
      alive = std::move(keep);
      is_elite = std::move(keep_elite);
      if (alive.size() <= settings.n_min) break;
    }
  }
  outcome.steps = race_positions.size();

  std::vector<ConfigId> ids;
  for (auto* c : alive) ids.push_back(c->id);
  for (auto id : rank_survivors(results, ids)) {
    auto it = std::find_if(alive.begin(), alive.end(), [&](auto* c) { return c->id == id; });
    outcome.survivors.push_back(**it);
  }
  return outcome;
}

}  // namespace racetune
