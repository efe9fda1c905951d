#include <gtest/gtest.h>

#include <cmath>

#include "flockscope/features.hpp"
#include "flockscope/rng.hpp"
#include "testutil.hpp"

namespace flockscope {
namespace {

using testutil::TempDir;
using testutil::make_map;

// Hand-worked fixture: W = 3, creation dates [10,12,11,30,13,14,40].
// Neighbor weights at distance 1 are 1/2; range column is P90 - P10.
TEST(Features, HandFixtureW3) {
  const FollowerMap map = make_map({10, 12, 11, 30, 13, 14, 40});
  const FeatureMatrix fm = compute_features(map, 3);
  ASSERT_EQ(fm.rows(), 7);
  EXPECT_EQ(fm.window_width(), 3);

  const double expected[7][6] = {
      {12.0, 0.0, 2.0, 0.0, 0.0, 0.0 / 7},
      {10.5, 0.8, 1.5, 2.0, 0.0, 1.0 / 7},
      {21.0, 14.4, 10.0, 2.0, 1.0, 2.0 / 7},
      {12.0, 1.6, 18.0, 20.0, 0.0, 3.0 / 7},
      {22.0, 12.8, 9.0, 20.0, 17.0, 4.0 / 7},
      {26.5, 21.6, 13.5, 20.0, 16.0, 5.0 / 7},
      {14.0, 0.0, 26.0, 30.0, 0.0, 6.0 / 7},
  };
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 6; ++c)
      EXPECT_NEAR(fm.at(r, c), expected[r][c], 1e-12) << "row " << r << " col " << c;
}

TEST(Features, InvariantsOnRandomMaps) {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Timestamp> created;
    for (int i = 0; i < 300; ++i) created.push_back(rng.uniform_int(0, 1000000));
    const FollowerMap map = make_map(created);
    const FeatureMatrix fm = compute_features(map, 21);
    const auto& ub = map.upper_bound();
    const auto& lb = map.lower_bound();
    for (std::int64_t r = 0; r < fm.rows(); ++r) {
      ASSERT_GE(fm.at(r, 1), 0.0);
      ASSERT_GE(fm.at(r, 2), 0.0);
      ASSERT_DOUBLE_EQ(fm.at(r, 3), static_cast<double>(ub[r] - lb[r]));
      ASSERT_DOUBLE_EQ(fm.at(r, 4), static_cast<double>(ub[r] - created[r]));
      ASSERT_GE(fm.at(r, 5), 0.0);
      ASSERT_LT(fm.at(r, 5), 1.0);
      for (int c = 0; c < 6; ++c) ASSERT_TRUE(std::isfinite(fm.at(r, c)));
    }
  }
}

TEST(Features, SingleRecordMap) {
  const FollowerMap map = make_map({42});
  const FeatureMatrix fm = compute_features(map, 3);
  ASSERT_EQ(fm.rows(), 1);
  EXPECT_DOUBLE_EQ(fm.at(0, 0), 42.0);  // no neighbors: own value stands in
  EXPECT_DOUBLE_EQ(fm.at(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(fm.at(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(fm.at(0, 3), 0.0);
  EXPECT_DOUBLE_EQ(fm.at(0, 4), 0.0);
  EXPECT_DOUBLE_EQ(fm.at(0, 5), 0.0);
}

TEST(Features, WindowValidation) {
  const FollowerMap map = make_map({1, 2, 3});
  EXPECT_THROW(compute_features(map, 2), ConfigError);
  EXPECT_THROW(compute_features(map, 1), ConfigError);
  EXPECT_THROW(compute_features(map, -3), ConfigError);
  EXPECT_NO_THROW(compute_features(map, 21));  // window larger than map is fine
}

TEST(Features, StandardizeZeroMeanUnitVariance) {
  Rng rng(8);
  std::vector<Timestamp> created;
  for (int i = 0; i < 500; ++i) created.push_back(rng.uniform_int(0, 1000000));
  FeatureMatrix fm = compute_features(make_map(created), 11);
  standardize(fm);
  for (int c = 0; c < FeatureMatrix::kColumns; ++c) {
    double sum = 0, sum2 = 0;
    for (std::int64_t r = 0; r < fm.rows(); ++r) {
      sum += fm.at(r, c);
      sum2 += fm.at(r, c) * fm.at(r, c);
    }
    const double m = sum / fm.rows();
    EXPECT_NEAR(m, 0.0, 1e-9) << "col " << c;
    EXPECT_NEAR(sum2 / fm.rows() - m * m, 1.0, 1e-9) << "col " << c;
  }
}

TEST(Features, StandardizeConstantColumnBecomesZeros) {
  const FollowerMap map = make_map({7, 7, 7, 7});  // several columns constant
  FeatureMatrix fm = compute_features(map, 3);
  standardize(fm);
  for (std::int64_t r = 0; r < fm.rows(); ++r) {
    EXPECT_DOUBLE_EQ(fm.at(r, 0), 0.0);
    EXPECT_DOUBLE_EQ(fm.at(r, 3), 0.0);
    EXPECT_DOUBLE_EQ(fm.at(r, 4), 0.0);
  }
}

TEST(Features, CsvGolden) {
  TempDir dir;
  const FollowerMap map = make_map({10, 12});
  const FeatureMatrix fm = compute_features(map, 3);
  const std::string path = dir.file("f.csv");
  write_features_csv(fm, path);
  EXPECT_EQ(read_file(path),
            "rank,avg_neighbor_creation_date,neighbor_creation_date_range,"
            "avg_distance_to_neighbors,creation_date_boundary_range,"
            "distance_to_upper_bound,relative_rank\n"
            "0,12,0,2,0,0,0\n"
            "1,10,0,2,2,0,0.5\n");
}

}  // namespace
}  // namespace flockscope
