#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "racetune/space.hpp"
#include "racetune/tsp.hpp"

namespace racetune {

enum class AcoVariant { as, mmas, acs, ras };

struct AcoParams {
  AcoVariant variant = AcoVariant::as;
  double alpha = 1.0;
  double beta = 2.0;
  double rho = 0.5;
  int ants = 25;
  int nn = 20;        // candidate list length (construction and local search)
  double q0 = 0.9;    // acs only
  int rasrank = 6;    // ras only
  bool local_search = false;
  bool dont_look_bits = false;
};

/// Reads AcoParams from a configuration of the built-in ACO space
/// (parameter names algorithm, alpha, beta, rho, ants, nnls, q0, rasrank,
/// localsearch, dlb).
AcoParams aco_params_from(const ParameterSpace& space, const Configuration& config);

struct AcoResult {
  std::int64_t best_length = 0;
  std::vector<int> best_tour;
  std::size_t tours = 0;  // tour constructions consumed
};

/// Runs the ACO variant until `tour_budget` tour constructions are spent.
/// Pure function of its arguments.
AcoResult run_aco(const TspInstance& instance, const AcoParams& params, std::uint64_t seed,
                  std::size_t tour_budget);

/// Greedy nearest-neighbor tour length from city 0.
std::int64_t nearest_neighbor_length(const TspInstance& instance);

}  // namespace racetune
