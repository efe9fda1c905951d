#include <gtest/gtest.h>

#include "flockscope/followtime.hpp"
#include "flockscope/rng.hpp"
#include "flockscope/synth.hpp"
#include "testutil.hpp"

namespace flockscope {
namespace {

using testutil::TempDir;
using testutil::make_map;

TEST(FollowTime, EstimatesAreRunningMax) {
  const FollowerMap map = make_map({50, 20, 80, 30, 90});
  const auto est = estimate_follow_times(map);
  ASSERT_EQ(est.size(), 5u);
  const std::vector<Timestamp> expected{50, 50, 80, 80, 90};
  for (std::size_t i = 0; i < est.size(); ++i) {
    EXPECT_EQ(est[i].rank, static_cast<std::int64_t>(i));
    EXPECT_EQ(est[i].estimated_at, expected[i]);
  }
  EXPECT_TRUE(est[0].is_envelope_point);
  EXPECT_FALSE(est[1].is_envelope_point);
  EXPECT_TRUE(est[2].is_envelope_point);
  EXPECT_FALSE(est[3].is_envelope_point);
  EXPECT_TRUE(est[4].is_envelope_point);
}

TEST(FollowTime, MatchesIndependentPrefixMaxOnRandomMaps) {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Timestamp> created;
    for (int i = 0; i < 200; ++i) created.push_back(rng.uniform_int(0, 100000));
    const FollowerMap map = make_map(created);
    const auto est = estimate_follow_times(map);
    Timestamp running = created[0];
    for (std::size_t i = 0; i < created.size(); ++i) {
      running = std::max(running, created[i]);
      ASSERT_EQ(est[i].estimated_at, running) << "trial " << trial << " rank " << i;
    }
  }
}

TEST(FollowTime, EstimateNeverExceedsTrueFollowTime) {
  GrowthModel growth;
  const SimulatedMap sim = simulate_base_map("sim", 2000, growth, 99);
  const auto est = estimate_follow_times(sim.map);
  const auto summary = evaluate_estimation_error(est, sim.follow_times);
  for (std::size_t i = 0; i < summary.per_rank_errors.size(); ++i)
    ASSERT_LE(summary.per_rank_errors[i], 0) << "rank " << i;
}

TEST(FollowTime, ErrorSummary) {
  const FollowerMap map = make_map({10, 20, 15});
  const auto est = estimate_follow_times(map);  // 10, 20, 20
  const auto summary = evaluate_estimation_error(est, {10, 22, 25});
  EXPECT_EQ(summary.per_rank_errors, (std::vector<Duration>{0, -2, -5}));
  EXPECT_DOUBLE_EQ(summary.mean_abs_error_seconds, 7.0 / 3.0);
}

TEST(FollowTime, ErrorLengthMismatch) {
  const FollowerMap map = make_map({10, 20});
  const auto est = estimate_follow_times(map);
  EXPECT_THROW(evaluate_estimation_error(est, {10, 20, 30}), ValidationError);
}

TEST(FollowTime, YearBoundaries) {
  const FollowerMap map = make_map({
      make_timestamp(2019, 6, 1),
      make_timestamp(2019, 3, 1),   // below envelope
      make_timestamp(2020, 2, 1),
      make_timestamp(2020, 3, 1),
      make_timestamp(2021, 1, 1),
  });
  const auto bounds = year_boundaries(estimate_follow_times(map));
  ASSERT_EQ(bounds.size(), 3u);
  EXPECT_EQ(bounds[0].year, 2019);
  EXPECT_EQ(bounds[0].rank, 0);
  EXPECT_EQ(bounds[1].year, 2020);
  EXPECT_EQ(bounds[1].rank, 2);
  EXPECT_EQ(bounds[2].year, 2021);
  EXPECT_EQ(bounds[2].rank, 4);
}

TEST(FollowTime, EstimatesCsvGolden) {
  TempDir dir;
  const FollowerMap map = make_map({1609459200, 1609459100});
  const std::string path = dir.file("est.csv");
  write_estimates_csv(estimate_follow_times(map), path);
  EXPECT_EQ(read_file(path),
            "rank,estimated_at,is_envelope_point\n"
            "0,2021-01-01T00:00:00Z,1\n"
            "1,2021-01-01T00:00:00Z,0\n");
}

}  // namespace
}  // namespace flockscope
