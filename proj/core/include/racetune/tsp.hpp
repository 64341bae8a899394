#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace racetune {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Symmetric Euclidean TSP instance with distances rounded to the nearest
/// integer (TSPLIB EUC_2D).
class TspInstance {
 public:
  TspInstance() = default;
  explicit TspInstance(std::vector<Point> cities);

  std::size_t size() const noexcept { return cities_.size(); }
  const std::vector<Point>& cities() const noexcept { return cities_; }
  std::int64_t distance(std::size_t a, std::size_t b) const { return dist_[a * cities_.size() + b]; }
  /// Largest representable distance; farther city pairs are rejected.
  static constexpr double max_distance = 2147483647.0;
  std::int64_t tour_length(std::span<const int> tour) const;
  /// Cities sorted by distance from `city` (ties by index), excluding it.
  std::vector<std::vector<int>> neighbor_lists(std::size_t length) const;

 private:
  std::vector<Point> cities_;
  std::vector<std::int32_t> dist_;  // half the cache footprint of int64
};

/// n cities uniform on [0, 1e6]^2; deterministic in base_seed.
TspInstance generate_tsp(std::size_t n_cities, std::uint64_t base_seed);

/// Format: first line `n`, then n lines `x y`.
void write_tsp(std::ostream& out, const TspInstance& instance);
TspInstance read_tsp(std::istream& in);
void save_tsp(const std::string& path, const TspInstance& instance);
TspInstance load_tsp(const std::string& path);

/// 2-opt local search using neighbor lists, optionally with don't-look
/// bits. `tour` is modified in place; returns its new length, which never
/// exceeds the input length. `order_seed` fixes the scan order.
std::int64_t two_opt(const TspInstance& instance, std::vector<int>& tour,
                     const std::vector<std::vector<int>>& neighbors, bool dont_look_bits,
                     std::uint64_t order_seed);

}  // namespace racetune
