#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_set>
#include <vector>

#include "flockscope/csvio.hpp"
#include "flockscope/error.hpp"
#include "flockscope/follower_map.hpp"
#include "flockscope/scored.hpp"

namespace flockscope {

enum class HeatmapKind { count, mean_anomaly_score, shared_follower_ratio };

inline HeatmapKind parse_heatmap_kind(const std::string& name) {
  if (name == "count") return HeatmapKind::count;
  if (name == "mean_anomaly_score") return HeatmapKind::mean_anomaly_score;
  if (name == "shared_follower_ratio") return HeatmapKind::shared_follower_ratio;
  throw ConfigError("unknown heatmap kind '" + name + "'");
}

inline const char* heatmap_kind_name(HeatmapKind k) {
  switch (k) {
    case HeatmapKind::count: return "count";
    case HeatmapKind::mean_anomaly_score: return "mean_anomaly_score";
    case HeatmapKind::shared_follower_ratio: return "shared_follower_ratio";
  }
  throw ConfigError("unknown heatmap kind");
}

// Rank (x) by creation date (y) grid over a follower map. Cells that hold no
// records carry NaN rather than zero for the mean/ratio kinds, so an empty
// region is distinguishable from a zero-valued one.
struct HeatmapGrid {
  HeatmapKind kind = HeatmapKind::count;
  int nx = 0, ny = 0;
  std::vector<double> x_edges;        // nx + 1 rank edges
  std::vector<double> y_edges;        // ny + 1 creation-date edges
  std::vector<std::int64_t> counts;   // ny x nx, y-major
  std::vector<double> values;

  std::int64_t cell(int iy, int ix) const {
    return static_cast<std::int64_t>(iy) * nx + ix;
  }
};

inline HeatmapGrid compute_heatmap(const FollowerMap& map, HeatmapKind kind,
                                   int nx = 200, int ny = 200,
                                   const ScoredFollowers* scores = nullptr,
                                   const std::unordered_set<std::string>* shared_ids = nullptr) {
  if (nx < 1 || ny < 1) throw ConfigError("heatmap grid must be at least 1x1");
  const std::int64_t n = map.size();
  if (n == 0) throw ValidationError("cannot build a heatmap of an empty map");
  if (kind == HeatmapKind::mean_anomaly_score) {
    if (!scores) throw ConfigError("mean_anomaly_score heatmap needs scores");
    if (static_cast<std::int64_t>(scores->scores.size()) != n)
      throw ValidationError("score vector does not match map size");
  }
  if (kind == HeatmapKind::shared_follower_ratio && !shared_ids)
    throw ConfigError("shared_follower_ratio heatmap needs the shared follower ids");

  Timestamp t_lo = map.followers[0].created_at, t_hi = t_lo;
  for (const auto& r : map.followers) {
    t_lo = std::min(t_lo, r.created_at);
    t_hi = std::max(t_hi, r.created_at);
  }

  HeatmapGrid g;
  g.kind = kind;
  g.nx = nx;
  g.ny = ny;
  g.x_edges.resize(nx + 1);
  for (int i = 0; i <= nx; ++i)
    g.x_edges[i] = static_cast<double>(n) * static_cast<double>(i) / nx;
  g.y_edges.resize(ny + 1);
  for (int i = 0; i <= ny; ++i)
    g.y_edges[i] = static_cast<double>(t_lo) +
                   static_cast<double>(t_hi - t_lo) * static_cast<double>(i) / ny;

  g.counts.assign(static_cast<std::size_t>(nx) * ny, 0);
  std::vector<double> accum(g.counts.size(), 0.0);

  for (std::int64_t r = 0; r < n; ++r) {
    const int ix = static_cast<int>(std::min<std::int64_t>(r * nx / n, nx - 1));
    const Timestamp t = map.followers[r].created_at;
    const int iy = t_hi > t_lo
                       ? static_cast<int>(std::min<std::int64_t>(
                             (t - t_lo) * ny / (t_hi - t_lo), ny - 1))
                       : 0;
    const std::int64_t c = g.cell(iy, ix);
    ++g.counts[c];
    if (kind == HeatmapKind::mean_anomaly_score)
      accum[c] += scores->scores[r];
    else if (kind == HeatmapKind::shared_follower_ratio)
      accum[c] += shared_ids->count(map.followers[r].follower_id) ? 1.0 : 0.0;
  }

  g.values.resize(g.counts.size());
  for (std::size_t c = 0; c < g.counts.size(); ++c) {
    if (kind == HeatmapKind::count)
      g.values[c] = static_cast<double>(g.counts[c]);
    else if (g.counts[c] == 0)
      g.values[c] = std::numeric_limits<double>::quiet_NaN();
    else
      g.values[c] = accum[c] / static_cast<double>(g.counts[c]);
  }
  return g;
}

// Two edge header rows, then one row per y bin (ascending); empty fields mark
// cells without records.
inline void write_heatmap_csv(const HeatmapGrid& g, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "x_edges";
  for (double e : g.x_edges) out << ',' << format_double(e);
  out << "\ny_edges";
  for (double e : g.y_edges) out << ',' << format_double(e);
  out << "\n";
  for (int iy = 0; iy < g.ny; ++iy) {
    out << "y" << iy;
    for (int ix = 0; ix < g.nx; ++ix) {
      const double v = g.values[g.cell(iy, ix)];
      out << ',';
      if (!std::isnan(v)) out << format_double(v);
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace flockscope
