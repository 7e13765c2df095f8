#pragma once

// Point estimates with standard errors, and two-sample distances between
// empirical laws of integer-valued observables.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace gwpark {

struct Estimate {
  double point = 0.0;
  double std_error = 0.0;
  /// Replicates attempted, overflowed ones included.
  std::uint64_t replicates = 0;
  std::uint64_t overflow_count = 0;
  bool diverged = false;
  std::uint64_t seed = 0;
  /// Set when the heavy-tail diagnostic switched the error to the
  /// median-of-means variant.
  bool median_of_means = false;
  double excess_kurtosis = 0.0;

  std::uint64_t used() const { return replicates - overflow_count; }
  double overflow_fraction() const {
    return replicates ? static_cast<double>(overflow_count) / static_cast<double>(replicates) : 0.0;
  }

  friend bool operator==(const Estimate&, const Estimate&) = default;
};

inline constexpr std::size_t kMomBlocks = 16;
inline constexpr double kKurtosisThreshold = 50.0;

/// Sample mean with its standard error. When the excess kurtosis exceeds
/// kKurtosisThreshold the error is max(plain, median-of-means), the latter
/// from the MAD of 16 contiguous block means.
inline Estimate summarize(std::span<const double> values, std::uint64_t replicates, std::uint64_t seed) {
  Estimate e;
  e.replicates = replicates;
  e.overflow_count = replicates - values.size();
  e.seed = seed;
  const std::size_t n = values.size();
  if (n == 0) return e;
  long double sum = 0;
  for (double v : values) sum += v;
  const double mean = static_cast<double>(sum / n);
  long double m2 = 0, m4 = 0;
  for (double v : values) {
    const long double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  e.point = mean;
  if (n < 2) return e;
  const double var = static_cast<double>(m2 / (n - 1));
  e.std_error = std::sqrt(var / static_cast<double>(n));
  const double pop_var = static_cast<double>(m2 / n);
  e.excess_kurtosis = pop_var > 0 ? static_cast<double>(m4 / n) / (pop_var * pop_var) - 3.0 : 0.0;
  if (e.excess_kurtosis > kKurtosisThreshold && n >= 2 * kMomBlocks) {
    std::vector<double> blocks(kMomBlocks, 0.0);
    const std::size_t per = n / kMomBlocks;
    for (std::size_t b = 0; b < kMomBlocks; ++b) {
      long double s = 0;
      for (std::size_t i = b * per; i < (b + 1) * per; ++i) s += values[i];
      blocks[b] = static_cast<double>(s / per);
    }
    std::vector<double> sorted = blocks;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[kMomBlocks / 2 - 1] + sorted[kMomBlocks / 2]);
    std::vector<double> dev;
    for (double b : blocks) dev.push_back(std::abs(b - median));
    std::sort(dev.begin(), dev.end());
    const double mad = 0.5 * (dev[kMomBlocks / 2 - 1] + dev[kMomBlocks / 2]);
    const double mom_se = 1.4826 * mad / std::sqrt(static_cast<double>(kMomBlocks));
    e.median_of_means = true;
    e.std_error = std::max(e.std_error, mom_se);
  }
  return e;
}

inline Estimate summarize(std::span<const double> values, std::uint64_t seed) {
  return summarize(values, values.size(), seed);
}

/// Empirical law of a nonnegative integer sample, as value -> count.
using IntHistogram = std::map<std::uint64_t, std::uint64_t>;

inline IntHistogram histogram_of(std::span<const std::uint64_t> sample) {
  IntHistogram h;
  for (auto v : sample) ++h[v];
  return h;
}

/// Two-sample Kolmogorov-Smirnov distance sup_x |F1(x) - F2(x)|.
inline double ks_distance(const IntHistogram& a, const IntHistogram& b) {
  std::uint64_t na = 0, nb = 0;
  for (const auto& [v, c] : a) na += c;
  for (const auto& [v, c] : b) nb += c;
  if (na == 0 || nb == 0) return 1.0;
  std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> joint;
  for (const auto& [v, c] : a) joint[v].first = c;
  for (const auto& [v, c] : b) joint[v].second = c;
  double fa = 0, fb = 0, d = 0;
  for (const auto& [v, cc] : joint) {
    fa += static_cast<double>(cc.first) / static_cast<double>(na);
    fb += static_cast<double>(cc.second) / static_cast<double>(nb);
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

/// Total-variation distance (1/2) sum_x |p1(x) - p2(x)|.
inline double tv_distance(const IntHistogram& a, const IntHistogram& b) {
  std::uint64_t na = 0, nb = 0;
  for (const auto& [v, c] : a) na += c;
  for (const auto& [v, c] : b) nb += c;
  if (na == 0 || nb == 0) return 1.0;
  std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> joint;
  for (const auto& [v, c] : a) joint[v].first = c;
  for (const auto& [v, c] : b) joint[v].second = c;
  double d = 0;
  for (const auto& [v, cc] : joint)
    d += std::abs(static_cast<double>(cc.first) / na - static_cast<double>(cc.second) / nb);
  return 0.5 * d;
}

/// Standard error of the difference of two independent estimates.
inline double combined_se(const Estimate& a, const Estimate& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

}  // namespace gwpark
