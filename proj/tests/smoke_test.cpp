// Pulls in every public header and exercises one tiny path through each so
// the whole library compiles and links as a unit.

#include <gtest/gtest.h>

#include "flockscope/csvio.hpp"
#include "flockscope/detectors/ecod.hpp"
#include "flockscope/detectors/gen2out.hpp"
#include "flockscope/detectors/isolation_forest.hpp"
#include "flockscope/detectors/lof.hpp"
#include "flockscope/error.hpp"
#include "flockscope/evalkit.hpp"
#include "flockscope/features.hpp"
#include "flockscope/follower_map.hpp"
#include "flockscope/followtime.hpp"
#include "flockscope/heatmap.hpp"
#include "flockscope/ingest.hpp"
#include "flockscope/network.hpp"
#include "flockscope/rng.hpp"
#include "flockscope/scored.hpp"
#include "flockscope/sliding_histogram.hpp"
#include "flockscope/stats.hpp"
#include "flockscope/synth.hpp"
#include "flockscope/time.hpp"

namespace flockscope {
namespace {

FollowerMap tiny_map(int n) {
  std::vector<FollowerRecord> records;
  for (int i = 0; i < n; ++i)
    records.push_back({"f" + std::to_string(i), 1000 + 37 * i - (i % 5) * 90, i});
  return FollowerMap::build("acct", 1'000'000, std::move(records));
}

TEST(Smoke, EndToEnd) {
  const FollowerMap map = tiny_map(64);
  EXPECT_EQ(map.size(), 64);
  EXPECT_TRUE(is_below_inclusion_threshold(map));

  const auto estimates = estimate_follow_times(map);
  EXPECT_EQ(estimates.size(), 64u);

  FeatureMatrix fm = compute_features(map, 5);
  EXPECT_EQ(fm.rows(), 64);
  standardize(fm);

  const ScoredFollowers sh = score_followers(map, {.window_width = 8, .n_bins = 4});
  const ScoredFollowers shi =
      score_followers_incremental(map, {.window_width = 8, .n_bins = 4});
  ASSERT_EQ(sh.scores.size(), shi.scores.size());
  for (std::size_t i = 0; i < sh.scores.size(); ++i)
    EXPECT_NEAR(sh.scores[i], shi.scores[i], 1e-12);

  const ScoredFollowers iso = isolation_forest_score(fm, {.n_trees = 10}, 7);
  const ScoredFollowers lof = lof_score(fm);
  const ScoredFollowers ecod = ecod_score(fm);
  const ScoredFollowers g2o = gen2out_score(fm, {.n_trees = 10}, 7);
  for (const auto* s : {&iso, &lof, &ecod, &g2o}) EXPECT_EQ(s->scores.size(), 64u);

  std::vector<char> labels(64, 0);
  labels[3] = labels[40] = 1;
  EXPECT_GE(roc_auc(sh.scores, labels), 0.0);
  EXPECT_GE(average_precision(sh.scores, labels), 0.0);
  EXPECT_GE(precision_at_k(sh.scores, labels, 10), 0.0);

  const HeatmapGrid grid = compute_heatmap(map, HeatmapKind::count, 8, 8);
  EXPECT_EQ(grid.counts.size(), 64u);
}

TEST(Smoke, SynthAndNetwork) {
  GrowthModel growth;
  const SimulatedMap sim = simulate_base_map("sim", 400, growth, 11);
  EXPECT_EQ(sim.map.size(), 400);
  EXPECT_EQ(sim.follow_times.size(), 400u);

  auto injected = inject_type1(sim.map, {.n1 = 20, .sigma = days(10)}, 3);
  EXPECT_EQ(injected.map.size(), 420);
  EXPECT_EQ(injected.anomaly_count(), 20);

  std::vector<ScoredAccount> accounts;
  for (int a = 0; a < 3; ++a) {
    ScoredAccount acc;
    acc.account_id = "a" + std::to_string(a);
    for (int i = 0; i < 150; ++i) {
      acc.follower_ids.push_back("shared" + std::to_string(i));
      acc.scores.push_back(1.0);
    }
    accounts.push_back(std::move(acc));
  }
  SimilarityNetwork net = build_network(accounts, 0.5, 100);
  EXPECT_EQ(net.edges.size(), 3u);
  detect_communities(net, 1);
  const auto ranking = rank_communities(net);
  EXPECT_EQ(ranking.size(), 1u);
}

}  // namespace
}  // namespace flockscope
