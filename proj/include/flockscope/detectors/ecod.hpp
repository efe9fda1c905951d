#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "flockscope/error.hpp"
#include "flockscope/features.hpp"
#include "flockscope/scored.hpp"
#include "flockscope/stats.hpp"

namespace flockscope {

// Empirical-CDF outlier detection: a row is scored by how improbable its
// coordinates are under the per-dimension empirical distributions, aggregated
// as negative log tail probabilities. Three aggregations are computed — all
// left tails, all right tails, and the per-dimension tail chosen by the sign
// of the skewness — and the largest wins. Parameter-free and deterministic.
inline ScoredFollowers ecod_score(const FeatureMatrix& fm) {
  const std::int64_t n = fm.rows();
  if (n < 1) throw ValidationError("ecod needs at least one row");
  constexpr int cols = FeatureMatrix::kColumns;

  std::vector<double> sorted(n);
  std::vector<double> column(n);
  std::vector<double> o_left(n, 0.0), o_right(n, 0.0), o_auto(n, 0.0);

  for (int c = 0; c < cols; ++c) {
    for (std::int64_t r = 0; r < n; ++r) column[r] = fm.at(r, c);
    sorted = column;
    std::sort(sorted.begin(), sorted.end());
    const double skew = skewness(column);

    for (std::int64_t r = 0; r < n; ++r) {
      const double x = column[r];
      const auto le = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
      const auto ge = sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), x);
      const double left = -std::log(static_cast<double>(le) / static_cast<double>(n));
      const double right = -std::log(static_cast<double>(ge) / static_cast<double>(n));
      o_left[r] += left;
      o_right[r] += right;
      o_auto[r] += skew < 0.0 ? left : right;
    }
  }

  ScoredFollowers out;
  out.method = Method::ecod;
  out.scores.resize(n);
  for (std::int64_t r = 0; r < n; ++r)
    out.scores[r] = std::max({o_left[r], o_right[r], o_auto[r]});
  out.check_finite();
  return out;
}

}  // namespace flockscope
