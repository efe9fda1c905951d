#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <vector>

#include "flockscope/error.hpp"
#include "flockscope/follower_map.hpp"
#include "flockscope/scored.hpp"
#include "flockscope/stats.hpp"

namespace flockscope {

struct SlidingHistogramConfig {
  std::int64_t window_width = 201;
  int n_bins = 10;
  std::int64_t stride = 1;

  void validate() const {
    if (n_bins < 2) throw ConfigError("sliding histogram: n_bins must be at least 2");
    if (window_width < n_bins)
      throw ConfigError("sliding histogram: window width must be at least n_bins");
    if (stride < 1) throw ConfigError("sliding histogram: stride must be positive");
  }
};

// One rank window and the histogram of its creation dates: the window's time
// span [span_low, span_high] is divided into n_bins equal bins, the last bin
// closed on the right.
struct WindowHistogram {
  std::int64_t index = 0;
  std::int64_t start_rank = 0;
  std::int64_t center_rank = 0;
  Timestamp span_low = 0;
  Timestamp span_high = 0;
  std::vector<std::int32_t> counts;

  friend bool operator==(const WindowHistogram&, const WindowHistogram&) = default;
};

inline int bin_index(Timestamp t, Timestamp lo, Timestamp hi, int n_bins) {
  if (hi <= lo) return 0;  // all dates equal: everything in the first bin
  const std::int64_t j = (t - lo) * n_bins / (hi - lo);
  return static_cast<int>(std::min<std::int64_t>(j, n_bins - 1));
}

namespace detail {

inline std::int64_t window_count(std::int64_t n, const SlidingHistogramConfig& cfg) {
  if (n < cfg.window_width)
    throw ValidationError("map of " + std::to_string(n) +
                          " followers is shorter than the window width " +
                          std::to_string(cfg.window_width));
  return (n - cfg.window_width) / cfg.stride + 1;
}

}  // namespace detail

// Straightforward builder: every window is scanned in full. Kept as the
// reference the incremental builder is checked against.
inline std::vector<WindowHistogram> build_windows(const FollowerMap& map,
                                                  const SlidingHistogramConfig& cfg) {
  cfg.validate();
  const std::int64_t n = map.size();
  const std::int64_t n_windows = detail::window_count(n, cfg);
  std::vector<WindowHistogram> windows(n_windows);
  for (std::int64_t i = 0; i < n_windows; ++i) {
    WindowHistogram& w = windows[i];
    w.index = i;
    w.start_rank = i * cfg.stride;
    w.center_rank = w.start_rank + cfg.window_width / 2;
    Timestamp lo = map.followers[w.start_rank].created_at, hi = lo;
    for (std::int64_t r = w.start_rank + 1; r < w.start_rank + cfg.window_width; ++r) {
      const Timestamp t = map.followers[r].created_at;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    w.span_low = lo;
    w.span_high = hi;
    w.counts.assign(cfg.n_bins, 0);
    for (std::int64_t r = w.start_rank; r < w.start_rank + cfg.window_width; ++r)
      ++w.counts[bin_index(map.followers[r].created_at, lo, hi, cfg.n_bins)];
  }
  return windows;
}

// Sliding builder: monotonic deques track the window min/max, and bin counts
// are patched for the records that enter and leave. A span change invalidates
// the binning, so the histogram is rebuilt for that window only. Produces
// exactly the same histograms as build_windows.
inline std::vector<WindowHistogram> build_windows_incremental(
    const FollowerMap& map, const SlidingHistogramConfig& cfg) {
  cfg.validate();
  const std::int64_t n = map.size();
  const std::int64_t b = cfg.window_width;
  const std::int64_t n_windows = detail::window_count(n, cfg);
  std::vector<WindowHistogram> windows(n_windows);

  std::deque<std::int64_t> min_q, max_q;  // ranks, values increasing / decreasing
  auto push_rank = [&](std::int64_t r) {
    const Timestamp t = map.followers[r].created_at;
    while (!min_q.empty() && map.followers[min_q.back()].created_at >= t)
      min_q.pop_back();
    min_q.push_back(r);
    while (!max_q.empty() && map.followers[max_q.back()].created_at <= t)
      max_q.pop_back();
    max_q.push_back(r);
  };

  std::vector<std::int32_t> counts(cfg.n_bins, 0);
  Timestamp lo = 0, hi = 0;
  std::int64_t prev_start = 0;

  for (std::int64_t i = 0; i < n_windows; ++i) {
    const std::int64_t start = i * cfg.stride;
    const std::int64_t end = start + b;  // exclusive
    if (i == 0) {
      for (std::int64_t r = 0; r < b; ++r) push_rank(r);
    } else {
      for (std::int64_t r = prev_start + b; r < end; ++r) push_rank(r);
      while (!min_q.empty() && min_q.front() < start) min_q.pop_front();
      while (!max_q.empty() && max_q.front() < start) max_q.pop_front();
    }
    const Timestamp new_lo = map.followers[min_q.front()].created_at;
    const Timestamp new_hi = map.followers[max_q.front()].created_at;

    if (i == 0 || new_lo != lo || new_hi != hi) {
      counts.assign(cfg.n_bins, 0);
      for (std::int64_t r = start; r < end; ++r)
        ++counts[bin_index(map.followers[r].created_at, new_lo, new_hi, cfg.n_bins)];
    } else {
      for (std::int64_t r = prev_start; r < std::min(start, prev_start + b); ++r)
        --counts[bin_index(map.followers[r].created_at, lo, hi, cfg.n_bins)];
      for (std::int64_t r = std::max(prev_start + b, start); r < end; ++r)
        ++counts[bin_index(map.followers[r].created_at, lo, hi, cfg.n_bins)];
    }
    lo = new_lo;
    hi = new_hi;
    prev_start = start;

    WindowHistogram& w = windows[i];
    w.index = i;
    w.start_rank = start;
    w.center_rank = start + b / 2;
    w.span_low = lo;
    w.span_high = hi;
    w.counts = counts;
  }
  return windows;
}

// Cross-window robust normalization: each bin position j gets the median and
// IQR of its count across all windows, and a window's bin score is how far the
// count sits above the median, in IQR-like units:
//   a = (count - median + 1) / (iqr + 1).
// A bin that looks like every other window's bin j scores 1.
struct BinScores {
  std::vector<double> median;  // per bin
  std::vector<double> iqr;     // per bin
  std::vector<double> a;       // n_windows x n_bins, row-major

  double at(std::int64_t window, int bin, int n_bins) const {
    return a[static_cast<std::size_t>(window) * n_bins + bin];
  }
};

inline BinScores compute_bin_scores(const std::vector<WindowHistogram>& windows,
                                    int n_bins) {
  if (windows.empty()) throw ValidationError("no windows to score");
  const std::int64_t n_windows = static_cast<std::int64_t>(windows.size());
  BinScores bs;
  bs.median.resize(n_bins);
  bs.iqr.resize(n_bins);
  bs.a.resize(static_cast<std::size_t>(n_windows) * n_bins);

  std::vector<double> column(n_windows);
  for (int j = 0; j < n_bins; ++j) {
    for (std::int64_t i = 0; i < n_windows; ++i)
      column[i] = static_cast<double>(windows[i].counts[j]);
    std::sort(column.begin(), column.end());
    bs.median[j] = percentile_sorted(column, 0.50);
    bs.iqr[j] = percentile_sorted(column, 0.75) - percentile_sorted(column, 0.25);
    for (std::int64_t i = 0; i < n_windows; ++i)
      bs.a[static_cast<std::size_t>(i) * n_bins + j] =
          (static_cast<double>(windows[i].counts[j]) - bs.median[j] + 1.0) /
          (bs.iqr[j] + 1.0);
  }
  return bs;
}

// The windows containing rank r, each with its convex blending weight: closer
// window centers weigh more, and the weights over the containing windows sum
// to 1. Followers no window covers (possible near the tail when stride > 1)
// get an empty list and score 0.
inline std::vector<std::pair<std::int64_t, double>> window_weights(
    std::int64_t n, const SlidingHistogramConfig& cfg, std::int64_t rank) {
  cfg.validate();
  const std::int64_t n_windows = detail::window_count(n, cfg);
  const std::int64_t b = cfg.window_width;
  std::int64_t first_start = rank - b + 1;
  first_start = first_start <= 0 ? 0 : (first_start + cfg.stride - 1) / cfg.stride * cfg.stride;

  std::vector<std::pair<std::int64_t, double>> weights;
  double total = 0.0;
  for (std::int64_t s = first_start; s <= rank && s / cfg.stride < n_windows;
       s += cfg.stride) {
    const std::int64_t center = s + b / 2;
    const double w = static_cast<double>(b) / 2.0 -
                     static_cast<double>(std::llabs(rank - center)) + 1.0;
    weights.emplace_back(s / cfg.stride, w);
    total += w;
  }
  for (auto& [idx, w] : weights) w /= total;
  return weights;
}

namespace detail {

inline ScoredFollowers score_from_windows(const FollowerMap& map,
                                          const SlidingHistogramConfig& cfg,
                                          const std::vector<WindowHistogram>& windows) {
  const BinScores bs = compute_bin_scores(windows, cfg.n_bins);
  ScoredFollowers out;
  out.account_id = map.account_id;
  out.method = Method::sliding_histogram;
  out.params = {{"window_width", static_cast<double>(cfg.window_width)},
                {"n_bins", static_cast<double>(cfg.n_bins)},
                {"stride", static_cast<double>(cfg.stride)}};
  out.scores.assign(map.followers.size(), 0.0);
  for (std::int64_t r = 0; r < map.size(); ++r) {
    const Timestamp t = map.followers[r].created_at;
    double score = 0.0;
    for (const auto& [i, lambda] : window_weights(map.size(), cfg, r)) {
      const WindowHistogram& w = windows[i];
      score += lambda * bs.at(i, bin_index(t, w.span_low, w.span_high, cfg.n_bins),
                              cfg.n_bins);
    }
    out.scores[r] = score;
  }
  out.check_finite();
  return out;
}

}  // namespace detail

inline ScoredFollowers score_followers(const FollowerMap& map,
                                       const SlidingHistogramConfig& cfg) {
  return detail::score_from_windows(map, cfg, build_windows(map, cfg));
}

inline ScoredFollowers score_followers_incremental(const FollowerMap& map,
                                                   const SlidingHistogramConfig& cfg) {
  return detail::score_from_windows(map, cfg, build_windows_incremental(map, cfg));
}

}  // namespace flockscope
