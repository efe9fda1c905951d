#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace flockscope {

// Linear-interpolation percentile (the numpy default): the q-quantile of m
// sorted values sits at fractional index q*(m-1). q in [0, 1].
inline double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty range");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("percentile: q outside [0,1]");
  const std::size_t m = sorted.size();
  if (m == 1) return sorted[0];
  const double h = q * static_cast<double>(m - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= m) return sorted[m - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return percentile_sorted(values, q);
}

inline double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty range");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Population standard deviation (divisor n); a single observation has spread 0.
inline double population_stddev(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

inline double median_sorted(std::span<const double> sorted) {
  return percentile_sorted(sorted, 0.5);
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return median_sorted(values);
}

// Fisher moment-based skewness; 0 when the variance vanishes.
inline double skewness(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("skewness of empty range");
  const double m = mean(v);
  double m2 = 0.0, m3 = 0.0;
  for (double x : v) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  const double n = static_cast<double>(v.size());
  m2 /= n;
  m3 /= n;
  if (m2 <= 0.0) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

}  // namespace flockscope
