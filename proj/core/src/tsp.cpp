#include "racetune/tsp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "racetune/rng.hpp"
#include "racetune/space.hpp"

namespace racetune {

TspInstance::TspInstance(std::vector<Point> cities) : cities_(std::move(cities)) {
  const auto n = cities_.size();
  if (n < 3) throw std::invalid_argument("TSP instance needs at least 3 cities");
  dist_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = cities_[i].x - cities_[j].x;
      const double dy = cities_[i].y - cities_[j].y;
      const double d = std::sqrt(dx * dx + dy * dy) + 0.5;
      if (!(d <= max_distance)) throw std::invalid_argument("TSP coordinates too far apart");
      dist_[i * n + j] = static_cast<std::int32_t>(d);
    }
}

std::int64_t TspInstance::tour_length(std::span<const int> tour) const {
  if (tour.empty()) return 0;
  std::int64_t len = distance(static_cast<std::size_t>(tour.back()), static_cast<std::size_t>(tour.front()));
  for (std::size_t i = 0; i + 1 < tour.size(); ++i)
    len += distance(static_cast<std::size_t>(tour[i]), static_cast<std::size_t>(tour[i + 1]));
  return len;
}

std::vector<std::vector<int>> TspInstance::neighbor_lists(std::size_t length) const {
  const auto n = size();
  length = std::min(length, n - 1);
  std::vector<std::vector<int>> out(n);
  std::vector<int> all(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::iota(all.begin(), all.end(), 0);
    std::swap(all[c], all.back());
    all.pop_back();
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(length), all.end(),
                      [&](int a, int b) {
                        const auto da = distance(c, static_cast<std::size_t>(a));
                        const auto db = distance(c, static_cast<std::size_t>(b));
                        return da != db ? da < db : a < b;
                      });
    out[c].assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(length));
    all.resize(n);
  }
  return out;
}

TspInstance generate_tsp(std::size_t n_cities, std::uint64_t base_seed) {
  if (n_cities < 3) throw std::invalid_argument("TSP instance needs at least 3 cities");
  Rng rng(derive_seed({0x747370ULL, base_seed}));
  std::vector<Point> pts(n_cities);
  for (auto& p : pts) {
    p.x = rng.uniform(0.0, 1e6);
    p.y = rng.uniform(0.0, 1e6);
  }
  return TspInstance(std::move(pts));
}

void write_tsp(std::ostream& out, const TspInstance& instance) {
  out << instance.size() << '\n';
  for (const auto& p : instance.cities()) out << format_real(p.x) << ' ' << format_real(p.y) << '\n';
}

TspInstance read_tsp(std::istream& in) {
  std::size_t n = 0;
  if (!(in >> n)) throw std::runtime_error("TSP file: missing city count");
  std::vector<Point> pts(n);
  for (auto& p : pts)
    if (!(in >> p.x >> p.y)) throw std::runtime_error("TSP file: expected " + std::to_string(n) + " coordinate lines");
  return TspInstance(std::move(pts));
}

void save_tsp(const std::string& path, const TspInstance& instance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_tsp(out, instance);
}

TspInstance load_tsp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open TSP file '" + path + "'");
  return read_tsp(in);
}

namespace {

/// Reverses tour positions i..j (inclusive, circular), choosing the
/// shorter of the segment and its complement.
void reverse_segment(std::vector<int>& tour, std::vector<int>& pos, int i, int j) {
  const int n = static_cast<int>(tour.size());
  int inner = (j - i + n) % n + 1;
  if (inner * 2 > n) {
    // Reversing the complement yields the same cycle.
    const int ni = (j + 1) % n;
    const int nj = (i - 1 + n) % n;
    i = ni;
    j = nj;
    inner = n - inner;
  }
  int a = i, b = j;
  for (int k = 0; k < inner / 2; ++k) {
    std::swap(tour[a], tour[b]);
    pos[tour[a]] = a;
    pos[tour[b]] = b;
    a = a + 1 == n ? 0 : a + 1;
    b = b == 0 ? n - 1 : b - 1;
  }
}

}  // namespace

std::int64_t two_opt(const TspInstance& inst, std::vector<int>& tour,
                     const std::vector<std::vector<int>>& neighbors, bool dont_look_bits,
                     std::uint64_t order_seed) {
  const int n = static_cast<int>(tour.size());
  [[maybe_unused]] const auto before = inst.tour_length(tour);
  if (n < 4) return inst.tour_length(tour);
  std::vector<int> pos(n);
  for (int i = 0; i < n; ++i) pos[tour[i]] = i;
  auto d = [&](int a, int b) { return inst.distance(static_cast<std::size_t>(a), static_cast<std::size_t>(b)); };
  auto succ = [n](int p) { return p + 1 == n ? 0 : p + 1; };
  auto pred = [n](int p) { return p == 0 ? n - 1 : p - 1; };

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // A counter-based shuffle; seeding a full engine per call costs more than the search.
  for (int i = n; i > 1; --i) {
    const auto r = splitmix64(order_seed + static_cast<std::uint64_t>(i)) % static_cast<std::uint64_t>(i);
    std::swap(order[i - 1], order[r]);
  }
  std::vector<char> dlb(n, 0);

  bool improved = true;
  while (improved) {
    improved = false;
    for (int a : order) {
      if (dont_look_bits && dlb[a]) continue;
      bool found = false;
      for (int dir = 0; dir < 2 && !found; ++dir) {
        const int pa = pos[a];
        // dir 0: edge (a, succ a); dir 1: edge (pred a, a)
        const int a_next = dir == 0 ? tour[succ(pa)] : tour[pred(pa)];
        const auto d_a = d(a, a_next);
        for (int c : neighbors[a]) {
          const auto d_ac = d(a, c);
          if (d_ac >= d_a) break;
          const int pc = pos[c];
          const int c_next = dir == 0 ? tour[succ(pc)] : tour[pred(pc)];
          if (c_next == a || c == a_next) continue;
          const auto gain = d_a + d(c, c_next) - d_ac - d(a_next, c_next);
          if (gain > 0) {
            if (dir == 0) {
              reverse_segment(tour, pos, succ(pa), pc);
            } else {
              reverse_segment(tour, pos, pc, pred(pa));
            }
            dlb[a] = dlb[a_next] = dlb[c] = dlb[c_next] = 0;
            found = improved = true;
            break;
          }
        }
      }
      if (!found) dlb[a] = 1;
    }
  }
  const auto after = inst.tour_length(tour);
  assert(after <= before);
  return after;
}

}  // namespace racetune
