#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace racetune {

/// Costs of k configurations on a common block of n instances, row-major
/// (row = configuration).
class CostTable {
 public:
  CostTable(std::size_t configs, std::size_t instances)
      : k_(configs), n_(instances), cells_(configs * instances, 0.0) {}

  std::size_t configs() const noexcept { return k_; }
  std::size_t instances() const noexcept { return n_; }
  double& at(std::size_t config, std::size_t instance) { return cells_[config * n_ + instance]; }
  double at(std::size_t config, std::size_t instance) const { return cells_[config * n_ + instance]; }
  std::span<const double> row(std::size_t config) const { return {cells_.data() + config * n_, n_}; }
  double mean(std::size_t config) const;

 private:
  std::size_t k_;
  std::size_t n_;
  std::vector<double> cells_;
};

/// Mid-ranks (1-based, ties averaged) of `values`.
std::vector<double> mid_ranks(std::span<const double> values);

/// Per-configuration rank sums over instances (ranks within each instance).
std::vector<double> rank_sums(const CostTable& table);

struct FriedmanResult {
  double statistic = 0.0;      // T
  double critical = 0.0;       // chi-square (k-1) quantile at 1 - alpha
  bool significant = false;
  double posthoc_width = 0.0;  // Conover critical rank-sum difference
  std::vector<double> rank_sums;
  std::vector<std::size_t> eliminated;  // row indices
};

/// Friedman test with a Conover post-hoc against the best rank sum.
/// Requires >= 2 rows and >= 2 instances; otherwise nothing is eliminated.
FriedmanResult friedman_test(const CostTable& table, double alpha);

struct TTestResult {
  std::size_t best = 0;                 // row with the lowest mean cost
  std::vector<double> p_values;         // per row; 1 for the best row
  std::vector<std::size_t> eliminated;  // row indices
};

/// Paired two-sided t-test of every row against the lowest-mean row, with
/// no multiplicity correction. Zero-variance differences eliminate iff the
/// row is strictly worse on every instance.
TTestResult t_test(const CostTable& table, double alpha);

/// Two-sided p-value of the paired t statistic of `a - b`.
double paired_t_p_value(std::span<const double> a, std::span<const double> b);

double chi_square_quantile(double df, double p);
double student_t_quantile(double df, double p);

}  // namespace racetune
