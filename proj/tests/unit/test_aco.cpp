#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "racetune/aco.hpp"
#include "racetune/rng.hpp"

using namespace racetune;

namespace {

std::int64_t brute_force(const TspInstance& inst) {
  std::vector<int> perm(inst.size() - 1);
  std::iota(perm.begin(), perm.end(), 1);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  do {
    std::vector<int> tour{0};
    tour.insert(tour.end(), perm.begin(), perm.end());
    best = std::min(best, inst.tour_length(tour));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

bool is_permutation_of_cities(const std::vector<int>& tour, std::size_t n) {
  auto sorted = tour;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n; ++i)
    if (sorted.at(i) != static_cast<int>(i)) return false;
  return sorted.size() == n;
}

}  // namespace

TEST_CASE("euclidean distances round to the nearest integer") {
  const TspInstance t({{0, 0}, {3, 4}, {1, 1}});
  CHECK(t.distance(0, 1) == 5);
  CHECK(t.distance(0, 2) == 1);  // sqrt(2)
  CHECK(t.distance(1, 0) == t.distance(0, 1));
  const std::vector<int> tour{0, 1, 2};
  CHECK(t.tour_length(tour) == 5 + 4 + 1);
}

TEST_CASE("neighbor lists sort by distance") {
  const TspInstance t({{0, 0}, {10, 0}, {1, 0}, {5, 0}});
  const auto nb = t.neighbor_lists(2);
  CHECK(nb[0] == std::vector<int>{2, 3});
  CHECK(nb[1] == std::vector<int>{3, 2});
}

TEST_CASE("2-opt never lengthens a tour") {
  const auto inst = generate_tsp(60, 3);
  const auto nb = inst.neighbor_lists(10);
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> tour(60);
    std::iota(tour.begin(), tour.end(), 0);
    for (std::size_t i = tour.size(); i > 1; --i) std::swap(tour[i - 1], tour[rng.below(i)]);
    const auto before = inst.tour_length(tour);
    const auto after = two_opt(inst, tour, nb, trial % 2 == 0, rng.next());
    CHECK(after <= before);
    CHECK(after == inst.tour_length(tour));
    CHECK(is_permutation_of_cities(tour, 60));
  }
}

TEST_CASE("every variant reaches small optima") {
  for (auto variant : {AcoVariant::as, AcoVariant::mmas, AcoVariant::acs, AcoVariant::ras}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto inst = generate_tsp(6, seed);
      AcoParams p;
      p.variant = variant;
      p.ants = 10;
      p.nn = 5;
      const auto r = run_aco(inst, p, seed, 500);
      CHECK(r.best_length == brute_force(inst));
      CHECK(r.tours == 500);
      CHECK(inst.tour_length(r.best_tour) == r.best_length);
    }
  }
}

TEST_CASE("aco is a pure function of its inputs") {
  const auto inst = generate_tsp(40, 2);
  AcoParams p;
  p.variant = AcoVariant::acs;
  p.local_search = true;
  p.dont_look_bits = true;
  const auto a = run_aco(inst, p, 11, 300);
  const auto b = run_aco(inst, p, 11, 300);
  CHECK(a.best_length == b.best_length);
  CHECK(a.best_tour == b.best_tour);
}

TEST_CASE("aco beats random tours") {
  const auto inst = generate_tsp(100, 21);
  Rng rng(3);
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<int> tour(100);
    std::iota(tour.begin(), tour.end(), 0);
    for (std::size_t i = tour.size(); i > 1; --i) std::swap(tour[i - 1], tour[rng.below(i)]);
    AcoParams p;
    if (run_aco(inst, p, seed, 2000).best_length < inst.tour_length(tour)) ++wins;
  }
  CHECK(wins == 5);
}

TEST_CASE("extreme parameters stay finite") {
  const auto inst = generate_tsp(30, 5);
  for (double rho : {0.01, 1.0})
    for (double alpha : {0.0, 5.0})
      for (auto variant : {AcoVariant::as, AcoVariant::mmas, AcoVariant::acs, AcoVariant::ras}) {
        AcoParams p;
        p.variant = variant;
        p.rho = rho;
        p.alpha = alpha;
        p.beta = 10.0;
        p.ants = 5;
        p.rasrank = 100;
        p.q0 = 1.0;
        const auto r = run_aco(inst, p, 2, 200);
        CHECK(is_permutation_of_cities(r.best_tour, 30));
        CHECK(r.best_length > 0);
      }
}

TEST_CASE("budget must be positive") {
  CHECK_THROWS(run_aco(generate_tsp(5, 1), AcoParams{}, 1, 0));
}
