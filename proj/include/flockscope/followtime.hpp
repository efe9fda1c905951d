#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "flockscope/csvio.hpp"
#include "flockscope/error.hpp"
#include "flockscope/follower_map.hpp"
#include "flockscope/time.hpp"

namespace flockscope {

// A follower cannot have followed before its own account existed, so the
// running max of creation dates up to a rank is a lower bound on the follow
// time there — and a tight one whenever fresh accounts keep joining.
struct FollowTimeEstimate {
  std::int64_t rank = 0;
  Timestamp estimated_at = 0;
  bool is_envelope_point = false;  // this record set or matched the running max
};

inline std::vector<FollowTimeEstimate> estimate_follow_times(const FollowerMap& map) {
  if (map.size() == 0) throw ValidationError("cannot estimate follow times of an empty map");
  std::vector<FollowTimeEstimate> est(map.followers.size());
  const auto& ub = map.upper_bound();
  for (std::int64_t r = 0; r < map.size(); ++r) {
    est[r].rank = r;
    est[r].estimated_at = ub[r];
    est[r].is_envelope_point = map.followers[r].created_at == ub[r];
  }
  return est;
}

struct EstimationErrorSummary {
  double mean_abs_error_seconds = 0.0;
  std::vector<Duration> per_rank_errors;  // signed, estimated minus true
};

inline EstimationErrorSummary evaluate_estimation_error(
    const std::vector<FollowTimeEstimate>& estimates,
    const std::vector<Timestamp>& true_follow_times) {
  if (estimates.size() != true_follow_times.size())
    throw ValidationError("estimate count " + std::to_string(estimates.size()) +
                          " does not match ground-truth count " +
                          std::to_string(true_follow_times.size()));
  if (estimates.empty()) throw ValidationError("no estimates to evaluate");
  EstimationErrorSummary summary;
  summary.per_rank_errors.resize(estimates.size());
  long double abs_sum = 0.0L;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const Duration e = estimates[i].estimated_at - true_follow_times[i];
    summary.per_rank_errors[i] = e;
    abs_sum += e < 0 ? static_cast<long double>(-e) : static_cast<long double>(e);
  }
  summary.mean_abs_error_seconds =
      static_cast<double>(abs_sum / static_cast<long double>(estimates.size()));
  return summary;
}

// First rank whose estimate enters each new calendar year; useful as axis
// marks when plotting a follower map against estimated time.
struct YearBoundary {
  std::int64_t year = 0;
  std::int64_t rank = 0;
};

inline std::vector<YearBoundary> year_boundaries(
    const std::vector<FollowTimeEstimate>& estimates) {
  std::vector<YearBoundary> out;
  for (const auto& e : estimates) {
    const std::int64_t y = utc_year(e.estimated_at);
    if (out.empty() || y > out.back().year) out.push_back({y, e.rank});
  }
  return out;
}

inline void write_estimates_csv(const std::vector<FollowTimeEstimate>& estimates,
                                const std::string& path) {
  std::ofstream out = open_output(path);
  out << "rank,estimated_at,is_envelope_point\n";
  for (const auto& e : estimates)
    out << e.rank << ',' << format_rfc3339(e.estimated_at) << ','
        << (e.is_envelope_point ? 1 : 0) << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace flockscope
