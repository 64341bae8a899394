#include "racetune/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace racetune {

double CostTable::mean(std::size_t config) const {
  if (n_ == 0) return 0.0;
  auto r = row(config);
  return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n_);
}

std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> rank_sums(const CostTable& table) {
  std::vector<double> sums(table.configs(), 0.0);
  std::vector<double> block(table.configs());
  for (std::size_t i = 0; i < table.instances(); ++i) {
    for (std::size_t c = 0; c < table.configs(); ++c) block[c] = table.at(c, i);
    auto r = mid_ranks(block);
    for (std::size_t c = 0; c < table.configs(); ++c) sums[c] += r[c];
  }
  return sums;
}

double chi_square_quantile(double df, double p) {
  return boost::math::quantile(boost::math::chi_squared(df), p);
}

double student_t_quantile(double df, double p) {
  return boost::math::quantile(boost::math::students_t(df), p);
}

FriedmanResult friedman_test(const CostTable& table, double alpha) {
  FriedmanResult out;
  const auto k = static_cast<double>(table.configs());
  const auto n = static_cast<double>(table.instances());
  if (table.configs() < 2 || table.instances() < 2) return out;

  // Sum of squared within-block ranks, and rank sums.
  double sum_r2 = 0.0;
  out.rank_sums.assign(table.configs(), 0.0);
  std::vector<double> block(table.configs());
  for (std::size_t i = 0; i < table.instances(); ++i) {
    for (std::size_t c = 0; c < table.configs(); ++c) block[c] = table.at(c, i);
    auto r = mid_ranks(block);
    for (std::size_t c = 0; c < table.configs(); ++c) {
      out.rank_sums[c] += r[c];
      sum_r2 += r[c] * r[c];
    }
  }
  double sum_R2 = 0.0;
  for (double R : out.rank_sums) sum_R2 += R * R;

  out.statistic = 12.0 / (n * k * (k + 1.0)) * sum_R2 - 3.0 * n * (k + 1.0);
  out.critical = chi_square_quantile(k - 1.0, 1.0 - alpha);
  out.significant = out.statistic > out.critical;
  if (!out.significant) return out;

  const double df = (n - 1.0) * (k - 1.0);
  const double concordance = std::max(0.0, 1.0 - out.statistic / (n * (k - 1.0)));
  const double spread = std::max(0.0, sum_r2 - sum_R2 / n);
  out.posthoc_width =
      student_t_quantile(df, 1.0 - alpha / 2.0) * std::sqrt(2.0 * n * concordance * spread / df);

  const double best = *std::min_element(out.rank_sums.begin(), out.rank_sums.end());
  for (std::size_t c = 0; c < table.configs(); ++c)
    if (out.rank_sums[c] - best > out.posthoc_width) out.eliminated.push_back(c);
  return out;
}

double paired_t_p_value(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 1.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return mean == 0.0 ? 1.0 : 0.0;
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(n - 1));
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

TTestResult t_test(const CostTable& table, double alpha) {
  TTestResult out;
  out.p_values.assign(table.configs(), 1.0);
  if (table.configs() < 2 || table.instances() < 2) return out;
  for (std::size_t c = 1; c < table.configs(); ++c)
    if (table.mean(c) < table.mean(out.best)) out.best = c;
  const auto best_row = table.row(out.best);
  for (std::size_t c = 0; c < table.configs(); ++c) {
    if (c == out.best) continue;
    const auto row = table.row(c);
    bool all_worse = true;
    bool constant = true;
    const double d0 = row[0] - best_row[0];
    for (std::size_t i = 0; i < table.instances(); ++i) {
      const double d = row[i] - best_row[i];
      all_worse = all_worse && d > 0.0;
      constant = constant && d == d0;
    }
    if (constant) {
      out.p_values[c] = d0 == 0.0 ? 1.0 : 0.0;
      if (all_worse) out.eliminated.push_back(c);
      continue;
    }
    out.p_values[c] = paired_t_p_value(row, best_row);
    if (table.mean(c) > table.mean(out.best) && out.p_values[c] < alpha) out.eliminated.push_back(c);
  }
  return out;
}

}  // namespace racetune
