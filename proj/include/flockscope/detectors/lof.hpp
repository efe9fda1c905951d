#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "flockscope/error.hpp"
#include "flockscope/features.hpp"
#include "flockscope/scored.hpp"

namespace flockscope {

struct LofOptions {
  std::optional<int> min_pts;      // explicit neighbor count wins when set
  double min_pts_fraction = 0.03;  // otherwise max(2, ceil(fraction * n))
};

inline std::int32_t resolve_min_pts(const LofOptions& opts, std::int64_t n) {
  if (opts.min_pts) {
    if (*opts.min_pts < 1) throw ConfigError("lof: min_pts must be positive");
    return *opts.min_pts;
  }
  if (opts.min_pts_fraction <= 0.0 || opts.min_pts_fraction > 1.0)
    throw ConfigError("lof: min_pts_fraction must be in (0, 1]");
  const double raw = std::ceil(opts.min_pts_fraction * static_cast<double>(n));
  return static_cast<std::int32_t>(std::max(2.0, raw));
}

// Local outlier factor with the textbook reachability definitions. The
// neighborhood of a row is every other row within its k-distance, ties
// included, so results depend only on the point values. The 1e-10 added to
// the reachability mean keeps densities finite when a row's neighborhood
// consists entirely of duplicates of itself.
inline ScoredFollowers lof_score(const FeatureMatrix& fm, const LofOptions& opts = {}) {
  const std::int64_t n = fm.rows();
  if (n < 2) throw ValidationError("lof needs at least two rows");
  const std::int32_t k = resolve_min_pts(opts, n);
  if (k >= n)
    throw ValidationError("lof: min_pts " + std::to_string(k) +
                          " must be below the number of rows " + std::to_string(n));

  constexpr int cols = FeatureMatrix::kColumns;
  const double* data = fm.values().data();

  struct Entry {
    double d2;
    std::int32_t idx;
  };
  std::vector<Entry> buf(n - 1);
  std::vector<double> kdist(n);
  std::vector<std::int32_t> neighbors;     // concatenated neighbor lists
  std::vector<std::int64_t> offsets(n + 1, 0);
  neighbors.reserve(static_cast<std::size_t>(n) * (k + 1));

  auto dist2 = [&](std::int64_t a, std::int64_t b) {
    const double* pa = data + a * cols;
    const double* pb = data + b * cols;
    double s = 0.0;
    for (int c = 0; c < cols; ++c) {
      const double d = pa[c] - pb[c];
      s += d * d;
    }
    return s;
  };

  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t w = 0;
    for (std::int64_t j = 0; j < n; ++j)
      if (j != i) buf[w++] = {dist2(i, j), static_cast<std::int32_t>(j)};
    std::nth_element(buf.begin(), buf.begin() + (k - 1), buf.end(),
                     [](const Entry& a, const Entry& b) { return a.d2 < b.d2; });
    const double kd2 = buf[k - 1].d2;
    kdist[i] = std::sqrt(kd2);
    for (std::int64_t j = 0; j < k; ++j) neighbors.push_back(buf[j].idx);
    for (std::int64_t j = k; j < n - 1; ++j)
      if (buf[j].d2 <= kd2) neighbors.push_back(buf[j].idx);
    offsets[i + 1] = static_cast<std::int64_t>(neighbors.size());
  }

  std::vector<double> lrd(n);
  for (std::int64_t i = 0; i < n; ++i) {
    double reach_sum = 0.0;
    const std::int64_t count = offsets[i + 1] - offsets[i];
    for (std::int64_t p = offsets[i]; p < offsets[i + 1]; ++p) {
      const std::int32_t o = neighbors[p];
      reach_sum += std::max(kdist[o], std::sqrt(dist2(i, o)));
    }
    lrd[i] = 1.0 / (reach_sum / static_cast<double>(count) + 1e-10);
  }

  ScoredFollowers out;
  out.method = Method::lof;
  out.params = {{"min_pts", static_cast<double>(k)}};
  out.scores.resize(n);
  for (std::int64_t i = 0; i < n; ++i) {
    double lrd_sum = 0.0;
    const std::int64_t count = offsets[i + 1] - offsets[i];
    for (std::int64_t p = offsets[i]; p < offsets[i + 1]; ++p)
      lrd_sum += lrd[neighbors[p]];
    out.scores[i] = lrd_sum / static_cast<double>(count) / lrd[i];
  }
  out.check_finite();
  return out;
}

}  // namespace flockscope
