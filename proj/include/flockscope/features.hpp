#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "flockscope/csvio.hpp"
#include "flockscope/error.hpp"
#include "flockscope/follower_map.hpp"
#include "flockscope/stats.hpp"

namespace flockscope {

// Per-follower summary of the local neighborhood in (rank, creation date)
// space, the input representation for the general-purpose detectors.
class FeatureMatrix {
 public:
  static constexpr int kColumns = 6;
  static constexpr std::array<const char*, kColumns> kColumnNames = {
      "avg_neighbor_creation_date", "neighbor_creation_date_range",
      "avg_distance_to_neighbors",  "creation_date_boundary_range",
      "distance_to_upper_bound",    "relative_rank"};

  FeatureMatrix() = default;
  FeatureMatrix(std::int64_t rows, int window_width)
      : rows_(rows), window_width_(window_width),
        values_(static_cast<std::size_t>(rows) * kColumns, 0.0) {}

  std::int64_t rows() const { return rows_; }
  int window_width() const { return window_width_; }

  double& at(std::int64_t row, int col) {
    return values_[static_cast<std::size_t>(row) * kColumns + col];
  }
  double at(std::int64_t row, int col) const {
    return values_[static_cast<std::size_t>(row) * kColumns + col];
  }
  const double* row(std::int64_t r) const {
    return values_.data() + static_cast<std::size_t>(r) * kColumns;
  }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::int64_t rows_ = 0;
  int window_width_ = 0;
  std::vector<double> values_;
};

// Neighbors of rank r are the other records within window_width/2 ranks,
// truncated at the ends of the list; the record itself is excluded. Rank
// proximity weights are 1/(1+|rank delta|).
inline FeatureMatrix compute_features(const FollowerMap& map, int window_width) {
  if (window_width < 3 || window_width % 2 == 0)
    throw ConfigError("feature window width must be an odd integer >= 3, got " +
                      std::to_string(window_width));
  const std::int64_t n = map.size();
  if (n == 0) throw ValidationError("cannot compute features of an empty map");

  FeatureMatrix fm(n, window_width);
  const std::int64_t half = window_width / 2;
  const auto& ub = map.upper_bound();
  const auto& lb = map.lower_bound();
  std::vector<double> neighbor_dates;
  neighbor_dates.reserve(window_width);

  for (std::int64_t r = 0; r < n; ++r) {
    const std::int64_t lo = std::max<std::int64_t>(0, r - half);
    const std::int64_t hi = std::min<std::int64_t>(n - 1, r + half);
    const double own = static_cast<double>(map.followers[r].created_at);

    double weight_sum = 0.0, weighted_dates = 0.0, weighted_dist = 0.0;
    neighbor_dates.clear();
    for (std::int64_t q = lo; q <= hi; ++q) {
      if (q == r) continue;
      const double t = static_cast<double>(map.followers[q].created_at);
      const double w = 1.0 / (1.0 + static_cast<double>(std::llabs(q - r)));
      weight_sum += w;
      weighted_dates += w * t;
      weighted_dist += w * std::abs(own - t);
      neighbor_dates.push_back(t);
    }

    if (neighbor_dates.empty()) {
      fm.at(r, 0) = own;  // a lone record is its own neighborhood
      fm.at(r, 1) = 0.0;
      fm.at(r, 2) = 0.0;
    } else {
      fm.at(r, 0) = weighted_dates / weight_sum;
      std::sort(neighbor_dates.begin(), neighbor_dates.end());
      fm.at(r, 1) = percentile_sorted(neighbor_dates, 0.90) -
                    percentile_sorted(neighbor_dates, 0.10);
      fm.at(r, 2) = weighted_dist / weight_sum;
    }
    fm.at(r, 3) = static_cast<double>(ub[r] - lb[r]);
    fm.at(r, 4) = static_cast<double>(ub[r] - map.followers[r].created_at);
    fm.at(r, 5) = static_cast<double>(r) / static_cast<double>(n);
  }
  return fm;
}

// Column-wise z-scoring; a constant column stays all-zero rather than NaN.
inline void standardize(FeatureMatrix& fm) {
  const std::int64_t n = fm.rows();
  if (n == 0) return;
  for (int c = 0; c < FeatureMatrix::kColumns; ++c) {
    double sum = 0.0;
    for (std::int64_t r = 0; r < n; ++r) sum += fm.at(r, c);
    const double m = sum / static_cast<double>(n);
    double var = 0.0;
    for (std::int64_t r = 0; r < n; ++r) {
      const double d = fm.at(r, c) - m;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::int64_t r = 0; r < n; ++r)
      fm.at(r, c) = sd > 0.0 ? (fm.at(r, c) - m) / sd : 0.0;
  }
}

inline void write_features_csv(const FeatureMatrix& fm, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "rank";
  for (const char* name : FeatureMatrix::kColumnNames) out << ',' << name;
  out << "\n";
  for (std::int64_t r = 0; r < fm.rows(); ++r) {
    out << r;
    for (int c = 0; c < FeatureMatrix::kColumns; ++c)
      out << ',' << format_double(fm.at(r, c));
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace flockscope
