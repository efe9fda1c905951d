#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "flockscope/error.hpp"
#include "flockscope/time.hpp"

namespace flockscope {

// One follower edge: rank is the 0-based position in the account's follower
// list, oldest follow first; created_at is when the follower account was made.
struct FollowerRecord {
  std::string follower_id;
  Timestamp created_at = 0;
  std::int64_t rank = 0;

  friend bool operator==(const FollowerRecord&, const FollowerRecord&) = default;
};

// Accounts below this size are still usable but flagged by callers.
constexpr std::int64_t kMinFollowerCount = 1000;

class FollowerMap {
 public:
  std::string account_id;
  Timestamp collected_at = 0;
  std::vector<FollowerRecord> followers;

  std::int64_t size() const { return static_cast<std::int64_t>(followers.size()); }

  // Running max / min of created_at over ranks 0..r. The upper bound traces the
  // newest account seen so far and acts as a proxy for follow time.
  const std::vector<Timestamp>& upper_bound() const { return upper_bound_; }
  const std::vector<Timestamp>& lower_bound() const { return lower_bound_; }

  bool is_envelope_point(std::int64_t rank) const {
    return followers[rank].created_at == upper_bound_[rank];
  }

  // Sorts by rank, validates, renumbers ranks to 0..n-1, caches the envelopes.
  static FollowerMap build(std::string account_id, Timestamp collected_at,
                           std::vector<FollowerRecord> records) {
    if (records.empty())
      throw ValidationError("follower map for '" + account_id + "' is empty");
    std::stable_sort(records.begin(), records.end(),
                     [](const FollowerRecord& a, const FollowerRecord& b) {
                       return a.rank < b.rank;
                     });
    std::unordered_set<std::string> seen_ids;
    seen_ids.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (i > 0 && records[i].rank == records[i - 1].rank)
        throw ValidationError("duplicate rank " + std::to_string(records[i].rank) +
                              " in follower map for '" + account_id + "'");
      if (!seen_ids.insert(records[i].follower_id).second)
        throw ValidationError("duplicate follower_id '" + records[i].follower_id +
                              "' in follower map for '" + account_id + "'");
      if (records[i].created_at > collected_at)
        throw ValidationError(
            "follower '" + records[i].follower_id + "' created at " +
            format_rfc3339(records[i].created_at) + ", after collection time " +
            format_rfc3339(collected_at));
      records[i].rank = static_cast<std::int64_t>(i);
    }
    FollowerMap map;
    map.account_id = std::move(account_id);
    map.collected_at = collected_at;
    map.followers = std::move(records);
    map.refresh_bounds();
    return map;
  }

  // Recomputes the cached envelopes; call after any direct mutation of followers.
  void refresh_bounds() {
    const std::size_t n = followers.size();
    upper_bound_.resize(n);
    lower_bound_.resize(n);
    Timestamp hi = 0, lo = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Timestamp t = followers[i].created_at;
      hi = i == 0 ? t : std::max(hi, t);
      lo = i == 0 ? t : std::min(lo, t);
      upper_bound_[i] = hi;
      lower_bound_[i] = lo;
    }
  }

  friend bool operator==(const FollowerMap& a, const FollowerMap& b) {
    return a.account_id == b.account_id && a.collected_at == b.collected_at &&
           a.followers == b.followers;
  }

 private:
  std::vector<Timestamp> upper_bound_;
  std::vector<Timestamp> lower_bound_;
};

inline bool is_below_inclusion_threshold(const FollowerMap& map) {
  return map.size() < kMinFollowerCount;
}

}  // namespace flockscope
