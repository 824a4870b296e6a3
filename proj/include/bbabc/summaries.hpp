#ifndef BBABC_SUMMARIES_HPP
#define BBABC_SUMMARIES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bbabc/error.hpp"
#include "bbabc/model.hpp"

namespace bbabc {

/// Finite statistic vector fed to the ABC distance.
class SummaryVector {
 public:
  SummaryVector() = default;
  explicit SummaryVector(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
      if (!std::isfinite(v)) throw DegenerateError("SummaryVector: non-finite component");
    }
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const SummaryVector&, const SummaryVector&) = default;

 private:
  std::vector<double> values_;
};

/// How S6 forms its differences d_i.
enum class SpearmanMode {
  /// d_i = rank(z_i1) - rank(z_i2), average ranks for ties.
  kRanks,
  /// d_i = z_i1 - z_i2 taken literally; not bounded to [-1, 1].
  kRawDifference,
};

namespace detail {

/// 1-based ranks, ties receive the average of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

inline void require_two(const BivariateDataset& data, const char* fn) {
  if (data.size() < 2) throw DegenerateError(std::string(fn) + ": need at least two observations");
}

}  // namespace detail

/// Mean of log z1, log z2, log(1 - z1), log(1 - z2) and the Pearson
/// correlation.
inline SummaryVector summaries5(const BivariateDataset& data) {
  detail::require_two(data, "summaries5");
  const double n = static_cast<double>(data.size());
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (const auto& o : data) {
    s1 += std::log(o.z1);
    s2 += std::log(o.z2);
    s3 += std::log1p(-o.z1);
    s4 += std::log1p(-o.z2);
  }
  const auto x = data.first();
  const auto y = data.second();
  const double r = pearson(x, y);
  if (std::isnan(r)) throw DegenerateError("summaries5: a coordinate has zero variance");
  return SummaryVector({s1 / n, s2 / n, s3 / n, s4 / n, r});
}

inline double spearman_statistic(const BivariateDataset& data, SpearmanMode mode = SpearmanMode::kRanks) {
  detail::require_two(data, "spearman_statistic");
  const auto x = data.first();
  const auto y = data.second();
  const double n = static_cast<double>(data.size());
  double sum_d2 = 0.0;
  if (mode == SpearmanMode::kRanks) {
    const auto rx = detail::average_ranks(x);
    const auto ry = detail::average_ranks(y);
    for (std::size_t i = 0; i < rx.size(); ++i) sum_d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) sum_d2 += (x[i] - y[i]) * (x[i] - y[i]);
  }
  return 1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0));
}

/// (concordant - discordant) / (n (n - 1) / 2); ties count as neither.
inline double kendall_statistic(const BivariateDataset& data) {
  detail::require_two(data, "kendall_statistic");
  const auto pairs = data.pairs();
  long long balance = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      const double prod = (pairs[i].z1 - pairs[j].z1) * (pairs[i].z2 - pairs[j].z2);
      if (prod > 0.0) ++balance;
      else if (prod < 0.0) --balance;
    }
  }
  const double n = static_cast<double>(pairs.size());
  return static_cast<double>(balance) / (0.5 * n * (n - 1.0));
}

/// summaries5 plus Spearman, Kendall and mean sqrt(z1 z2).
inline SummaryVector summaries8(const BivariateDataset& data, SpearmanMode mode = SpearmanMode::kRanks) {
  const SummaryVector base = summaries5(data);
  std::vector<double> v(base.values().begin(), base.values().end());
  v.push_back(spearman_statistic(data, mode));
  v.push_back(kendall_statistic(data));
  double s8 = 0.0;
  for (const auto& o : data) s8 += std::sqrt(o.z1 * o.z2);
  v.push_back(s8 / static_cast<double>(data.size()));
  return SummaryVector(std::move(v));
}

/// Sample mean of (1 - z1)(1 - z2) / (z1 z2). Observations near zero make
/// it explode; that instability is expected.
inline double legacy_moment_stat(const BivariateDataset& data) {
  double acc = 0.0;
  for (const auto& o : data) acc += ((1.0 - o.z1) * (1.0 - o.z2)) / (o.z1 * o.z2);
  return acc / static_cast<double>(data.size());
}

/// Unweighted L1 distance.
inline double l1_distance(const SummaryVector& a, const SummaryVector& b) {
  if (a.size() != b.size()) {
    throw DimensionError("l1_distance: summary sizes differ (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::fabs(a[i] - b[i]);
  return d;
}

}  // namespace bbabc

#endif  // BBABC_SUMMARIES_HPP
