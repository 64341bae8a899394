#include "racetune/aco.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "racetune/rng.hpp"

namespace racetune {

AcoParams aco_params_from(const ParameterSpace& space, const Configuration& config) {
  auto num = [&](std::string_view name) { return std::get<double>(config.values.at(space.at(name))); };
  auto level = [&](std::string_view name) {
    const auto i = space.at(name);
    return space[i].levels.at(std::get<Level>(config.values.at(i)).index);
  };
  auto active = [&](std::string_view name) { return is_active(config.values.at(space.at(name))); };

  AcoParams p;
  const auto algorithm = level("algorithm");
  if (algorithm == "as") p.variant = AcoVariant::as;
  else if (algorithm == "mmas") p.variant = AcoVariant::mmas;
  else if (algorithm == "acs") p.variant = AcoVariant::acs;
  else if (algorithm == "ras") p.variant = AcoVariant::ras;
  else throw std::invalid_argument("unknown ACO algorithm '" + algorithm + "'");
  p.alpha = num("alpha");
  p.beta = num("beta");
  p.rho = num("rho");
  p.ants = static_cast<int>(num("ants"));
  p.nn = static_cast<int>(num("nnls"));
  if (active("q0")) p.q0 = num("q0");
  if (active("rasrank")) p.rasrank = static_cast<int>(num("rasrank"));
  p.local_search = level("localsearch") == "1";
  p.dont_look_bits = p.local_search && active("dlb") && level("dlb") == "1";
  return p;
}

std::int64_t nearest_neighbor_length(const TspInstance& inst) {
  const auto n = inst.size();
  std::vector<char> visited(n, 0);
  std::size_t cur = 0;
  visited[0] = 1;
  std::int64_t len = 0;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t c = 0; c < n; ++c)
      if (!visited[c] && (next == n || inst.distance(cur, c) < inst.distance(cur, next))) next = c;
    len += inst.distance(cur, next);
    visited[next] = 1;
    cur = next;
  }
  return len + inst.distance(cur, 0);
}

namespace {

class Colony {
 public:
  Colony(const TspInstance& inst, const AcoParams& p, std::uint64_t seed)
      : inst_(inst), p_(p), n_(static_cast<int>(inst.size())), rng_(seed) {
    nn_ = std::clamp(p.nn, 1, n_ - 1);
    neighbors_ = inst.neighbor_lists(static_cast<std::size_t>(nn_));
    for (const auto& row : neighbors_) nbflat_.insert(nbflat_.end(), row.begin(), row.begin() + nn_);
    nbpos_.assign(static_cast<std::size_t>(n_) * n_, -1);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < nn_; ++k) nbpos_[idx(i, neighbors_[i][k])] = k;
    eta_beta_.resize(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        eta_beta_[idx(i, j)] = std::pow(1.0 / (static_cast<double>(dist(i, j)) + 0.1), p.beta);
    choice_.resize(static_cast<std::size_t>(n_) * nn_);

    const double c_nn = static_cast<double>(nearest_neighbor_length(inst));
    const int m = std::max(1, p.ants);
    switch (p.variant) {
      case AcoVariant::as: tau0_ = m / c_nn; break;
      case AcoVariant::ras: {
        const double w = std::max(2, p.rasrank);
        tau0_ = 0.5 * w * (w - 1.0) / (p.rho * c_nn);
        break;
      }
      case AcoVariant::mmas:
        tau_max_ = 1.0 / (p.rho * c_nn);
        tau_min_ = tau_max_ / (2.0 * n_);
        tau0_ = tau_max_;
        break;
      case AcoVariant::acs: tau0_ = 1.0 / (n_ * c_nn); break;
    }
    tau_.assign(static_cast<std::size_t>(n_) * n_, tau0_);
  }

  AcoResult run(std::size_t budget) {
    AcoResult result;
    result.best_length = std::numeric_limits<std::int64_t>::max();
    std::vector<std::vector<int>> tours;
    std::vector<std::int64_t> lengths;
    std::size_t iteration = 0;
    while (result.tours < budget) {
      const auto m = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(1, p_.ants)),
                                                            budget - result.tours));
      refresh_choice();
      tours.assign(static_cast<std::size_t>(m), {});
      lengths.assign(static_cast<std::size_t>(m), 0);
      for (int k = 0; k < m; ++k) {
        construct(tours[k]);
        lengths[k] = inst_.tour_length(tours[k]);
        if (p_.local_search) {
          const auto improved =
              two_opt(inst_, tours[k], neighbors_, p_.dont_look_bits, rng_.next());
          if (improved > lengths[k]) throw std::logic_error("2-opt increased the tour length");
          lengths[k] = improved;
        }
      }
      result.tours += static_cast<std::size_t>(m);
      std::size_t it_best = 0;
      for (std::size_t k = 1; k < lengths.size(); ++k)
        if (lengths[k] < lengths[it_best]) it_best = k;
      if (lengths[it_best] < result.best_length) {
        result.best_length = lengths[it_best];
        result.best_tour = tours[it_best];
        if (p_.variant == AcoVariant::mmas) {
          tau_max_ = 1.0 / (p_.rho * static_cast<double>(result.best_length));
          tau_min_ = tau_max_ / (2.0 * n_);
        }
      }
      update_pheromone(tours, lengths, it_best, result, iteration++);
    }
    return result;
  }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j); }
  std::int64_t dist(int i, int j) const { return inst_.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); }
  // Many cells share a value (tau0, the MMAS bounds), so one memo entry skips most pow calls.
  double tau_alpha(double t) const {
    if (t != memo_tau_) {
      memo_tau_ = t;
      memo_pow_ = std::pow(t, p_.alpha);
    }
    return memo_pow_;
  }
  double total(int i, int j) const { return tau_alpha(tau_[idx(i, j)]) * eta_beta_[idx(i, j)]; }

  void refresh_choice() {
    if (full_refresh_ || 2 * touched_.size() > static_cast<std::size_t>(n_) * nn_) {
      for (int i = 0; i < n_; ++i)
        for (int k = 0; k < nn_; ++k) choice_[static_cast<std::size_t>(i) * nn_ + k] = total(i, neighbors_[i][k]);
    } else {
      for (const auto& [a, b] : touched_) {
        refresh_edge(a, b);
        refresh_edge(b, a);
      }
    }
    touched_.clear();
    full_refresh_ = false;
  }

  int best_unvisited(int cur) const {
    int best = -1;
    double best_v = -1.0;
    for (int c = 0; c < n_; ++c) {
      if (avail_[c] == 0.0) continue;
      const double v = total(cur, c);
      if (v > best_v) best_v = v, best = c;
    }
    return best;
  }

  void construct(std::vector<int>& tour) {
    // avail_[c] is 1 while c is unvisited, so masked choice values need no branch.
    avail_.assign(static_cast<std::size_t>(n_), 1.0);
    tour.resize(static_cast<std::size_t>(n_));
    int cur = static_cast<int>(rng_.below(static_cast<std::size_t>(n_)));
    tour[0] = cur;
    avail_[cur] = 0.0;
    prob_.resize(static_cast<std::size_t>(nn_));
    double* prob = prob_.data();
    for (int step = 1; step < n_; ++step) {
      const double* ch = &choice_[static_cast<std::size_t>(cur) * nn_];
      const int* nb = &nbflat_[static_cast<std::size_t>(cur) * nn_];
      // Four partial sums break the add dependency chain.
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      int k = 0;
      for (; k + 4 <= nn_; k += 4) {
        s0 += prob[k] = ch[k] * avail_[nb[k]];
        s1 += prob[k + 1] = ch[k + 1] * avail_[nb[k + 1]];
        s2 += prob[k + 2] = ch[k + 2] * avail_[nb[k + 2]];
        s3 += prob[k + 3] = ch[k + 3] * avail_[nb[k + 3]];
      }
      for (; k < nn_; ++k) s0 += prob[k] = ch[k] * avail_[nb[k]];
      const double sum = (s0 + s1) + (s2 + s3);
      int next;
      if (!(sum > 0.0)) {
        next = best_unvisited(cur);
      } else if (p_.variant == AcoVariant::acs && rng_.uniform() < p_.q0) {
        int argmax = 0;
        for (int k = 1; k < nn_; ++k)
          if (prob[k] > prob[argmax]) argmax = k;
        next = nb[argmax];
      } else {
        const double u = rng_.uniform() * sum;
        double acc = 0.0;
        int last = -1;
        next = -1;
        for (int k = 0; k < nn_; ++k) {
          if (prob[k] <= 0.0) continue;
          last = k;
          acc += prob[k];
          if (u < acc) {
            next = nb[k];
            break;
          }
        }
        if (next < 0) next = nb[last];
      }
      if (p_.variant == AcoVariant::acs) local_update(cur, next);
      tour[step] = next;
      avail_[next] = 0.0;
      cur = next;
    }
    if (p_.variant == AcoVariant::acs) local_update(cur, tour[0]);
  }

  void local_update(int a, int b) {
    constexpr double xi = 0.1;
    const double t = (1.0 - xi) * tau_[idx(a, b)] + xi * tau0_;
    tau_[idx(a, b)] = tau_[idx(b, a)] = t;
    refresh_edge(a, b);
    refresh_edge(b, a);
  }

  void refresh_edge(int a, int b) {
    const int k = nbpos_[idx(a, b)];
    if (k >= 0) choice_[static_cast<std::size_t>(a) * nn_ + k] = total(a, b);
  }

  void deposit(const std::vector<int>& tour, double amount) {
    const double stored = amount / scale_;
    for (std::size_t i = 0; i < tour.size(); ++i) {
      const int a = tour[i];
      const int b = tour[(i + 1) % tour.size()];
      tau_[idx(a, b)] += stored;
      tau_[idx(b, a)] = tau_[idx(a, b)];
      touched_.emplace_back(a, b);
    }
  }

  // Pheromone is tau_ * scale_. Uniform evaporation only moves scale_, which
  // leaves every row's choice ratios unchanged; it is folded back into tau_
  // before it gets small.
  void evaporate() {
    const double next = scale_ * (1.0 - p_.rho);
    if (next >= 1e-6) {
      scale_ = next;
      return;
    }
    for (auto& t : tau_) t *= next;
    scale_ = 1.0;
    full_refresh_ = true;
  }

  // MMAS bounds act on true values; cells pinned to a bound share one stored
  // value, so their choice entries mostly hit the pow memo.
  void clamp_to_bounds() {
    const double lo = tau_min_ / scale_, hi = tau_max_ / scale_;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) {
        double& t = tau_[idx(i, j)];
        const double c = std::clamp(t, lo, hi);
        if (c != t) {
          t = tau_[idx(j, i)] = c;
          touched_.emplace_back(i, j);
        }
      }
  }

  void update_pheromone(const std::vector<std::vector<int>>& tours, const std::vector<std::int64_t>& lengths,
                        std::size_t it_best, const AcoResult& best, std::size_t iteration) {
    switch (p_.variant) {
      case AcoVariant::as:
        evaporate();
        for (std::size_t k = 0; k < tours.size(); ++k) deposit(tours[k], 1.0 / static_cast<double>(lengths[k]));
        break;
      case AcoVariant::ras: {
        evaporate();
        const int w = std::max(2, p_.rasrank);
        std::vector<std::size_t> order(tours.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return lengths[a] < lengths[b]; });
        const auto ranked = std::min<std::size_t>(static_cast<std::size_t>(w - 1), order.size());
        for (std::size_t r = 0; r < ranked; ++r)
          deposit(tours[order[r]], static_cast<double>(w - 1 - static_cast<int>(r)) /
                                       static_cast<double>(lengths[order[r]]));
        deposit(best.best_tour, static_cast<double>(w) / static_cast<double>(best.best_length));
        break;
      }
      case AcoVariant::mmas: {
        evaporate();
        if (iteration % 10 == 9) {
          deposit(best.best_tour, 1.0 / static_cast<double>(best.best_length));
        } else {
          deposit(tours[it_best], 1.0 / static_cast<double>(lengths[it_best]));
        }
        clamp_to_bounds();
        break;
      }
      case AcoVariant::acs: {
        const auto& tour = best.best_tour;
        const double add = p_.rho / static_cast<double>(best.best_length);
        for (std::size_t i = 0; i < tour.size(); ++i) {
          const int a = tour[i];
          const int b = tour[(i + 1) % tour.size()];
          const double t = (1.0 - p_.rho) * tau_[idx(a, b)] + add;
          tau_[idx(a, b)] = tau_[idx(b, a)] = t;
          touched_.emplace_back(a, b);
        }
        break;
      }
    }
  }

  const TspInstance& inst_;
  AcoParams p_;
  int n_;
  int nn_ = 1;
  Rng rng_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<int> nbflat_;
  std::vector<double> avail_;
  std::vector<double> prob_;
  std::vector<int> nbpos_;  // position of j in i's candidate list, or -1
  std::vector<std::pair<int, int>> touched_;
  double scale_ = 1.0;
  bool full_refresh_ = true;
  std::vector<double> eta_beta_;
  std::vector<double> tau_;
  std::vector<double> choice_;
  double tau0_ = 1.0;
  double tau_max_ = 1.0;
  double tau_min_ = 0.0;
  mutable double memo_tau_ = -1.0;
  mutable double memo_pow_ = 0.0;
};

}  // namespace

AcoResult run_aco(const TspInstance& instance, const AcoParams& params, std::uint64_t seed,
                  std::size_t tour_budget) {
  if (tour_budget == 0) throw std::invalid_argument("ACO: tour budget must be positive");
  Colony colony(instance, params, seed);
  return colony.run(tour_budget);
}

}  // namespace racetune
