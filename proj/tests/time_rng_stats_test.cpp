#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "flockscope/rng.hpp"
#include "flockscope/stats.hpp"
#include "flockscope/time.hpp"

namespace flockscope {
namespace {

// Reference epochs cross-checked against an independent calendar
// implementation.
TEST(Time, KnownEpochs) {
  EXPECT_EQ(make_timestamp(1970, 1, 1), 0);
  EXPECT_EQ(make_timestamp(2021, 1, 1), 1609459200);
  EXPECT_EQ(make_timestamp(2009, 1, 1), 1230768000);
  EXPECT_EQ(make_timestamp(2016, 1, 1), 1451606400);
  EXPECT_EQ(make_timestamp(2000, 2, 29, 12, 34, 56), 951827696);
  EXPECT_EQ(make_timestamp(1969, 7, 20, 20, 17, 40), -14182940);
  EXPECT_EQ(make_timestamp(2038, 1, 19, 3, 14, 8), 2147483648LL);
}

TEST(Time, ParseRfc3339) {
  EXPECT_EQ(parse_rfc3339("2021-01-01T00:00:00Z"), 1609459200);
  EXPECT_EQ(parse_rfc3339("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(parse_rfc3339("2021-06-01T05:30:00+05:30"), 1622505600);
  EXPECT_EQ(parse_rfc3339("2021-06-01T05:30:00-04:00"), 1622539800);
  EXPECT_EQ(parse_rfc3339("2021-01-01T00:00:00.999Z"), 1609459200);  // truncated
  EXPECT_EQ(parse_rfc3339("2021-01-01t00:00:00z"), 1609459200);      // lowercase ok
  EXPECT_EQ(parse_rfc3339("2016-12-31T23:59:60Z"),                   // leap second
            parse_rfc3339("2017-01-01T00:00:00Z"));

  EXPECT_FALSE(parse_rfc3339(""));
  EXPECT_FALSE(parse_rfc3339("2021-01-01"));
  EXPECT_FALSE(parse_rfc3339("2021-13-01T00:00:00Z"));
  EXPECT_FALSE(parse_rfc3339("2021-02-29T00:00:00Z"));  // not a leap year
  EXPECT_FALSE(parse_rfc3339("2021-01-01T24:00:00Z"));
  EXPECT_FALSE(parse_rfc3339("2021-01-01T00:00:00"));   // missing offset
  EXPECT_FALSE(parse_rfc3339("2021-01-01T00:00:00Q"));
  EXPECT_FALSE(parse_rfc3339("2021-01-01T00:00:00+0530"));
}

TEST(Time, FormatRoundTrip) {
  for (Timestamp t : {Timestamp{0}, Timestamp{1609459200}, Timestamp{-14182940},
                      Timestamp{951827696}, Timestamp{2147483648LL}}) {
    const std::string s = format_rfc3339(t);
    EXPECT_EQ(parse_rfc3339(s), t) << s;
  }
  EXPECT_EQ(format_rfc3339(1609459200), "2021-01-01T00:00:00Z");
  EXPECT_EQ(format_rfc3339(951827696), "2000-02-29T12:34:56Z");
}

TEST(Time, UtcYear) {
  EXPECT_EQ(utc_year(0), 1970);
  EXPECT_EQ(utc_year(1609459200), 2021);
  EXPECT_EQ(utc_year(1609459199), 2020);
  EXPECT_EQ(utc_year(-1), 1969);
}

// Published reference outputs for this generator.
TEST(Rng, Splitmix64Vectors) {
  std::uint64_t s = 0;
  EXPECT_EQ(splitmix64(s), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(s), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(splitmix64(s), 0x06c45d188009454fULL);
  s = 42;
  EXPECT_EQ(splitmix64(s), 0xbdd732262feb6e95ULL);
  EXPECT_EQ(splitmix64(s), 0x28efe333b266f103ULL);
  s = 0xdeadbeef;
  EXPECT_EQ(splitmix64(s), 0x4adfb90f68c9eb9bULL);
}

TEST(Rng, DeriveSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(7, a, b));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(7, 3, 4), derive_seed(7, 3, 4));
  EXPECT_NE(derive_seed(7, 3, 4), derive_seed(8, 3, 4));
}

TEST(Rng, Determinism) {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, CanonicalInUnitInterval) {
  Rng r(5);
  for (int i = 0; i < 10000; ++i) {
    const double x = r.next_canonical();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Rng, UniformIntBoundsInclusive) {
  Rng r(9);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t x = r.uniform_int(3, 7);
    EXPECT_GE(x, 3);
    EXPECT_LE(x, 7);
    saw_lo |= x == 3;
    saw_hi |= x == 7;
  }
  EXPECT_TRUE(saw_lo);
  EXPECT_TRUE(saw_hi);
  EXPECT_EQ(r.uniform_int(5, 5), 5);
}

TEST(Rng, NormalConsumesExactlyTwoDraws) {
  Rng a(77), b(77);
  (void)a.normal(0.0, 1.0);
  (void)b.next_u64();
  (void)b.next_u64();
  EXPECT_EQ(a.next_u64(), b.next_u64());  // streams aligned afterwards
}

TEST(Rng, NormalMoments) {
  Rng r(11);
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(10.0, 2.0);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  EXPECT_NEAR(mean, 10.0, 0.05);
  EXPECT_NEAR(var, 4.0, 0.1);
}

TEST(Rng, ShufflePrefixIsPermutation) {
  Rng r(3);
  std::vector<std::int32_t> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  r.shuffle_prefix(v, 10);
  std::set<std::int32_t> s(v.begin(), v.end());
  EXPECT_EQ(s.size(), 50u);
}

// Linear-interpolation quantiles; expected values from an independent
// numerics library.
TEST(Stats, PercentileLinear) {
  const std::vector<double> data{3, 1, 4, 1, 5, 9, 2, 6};
  EXPECT_DOUBLE_EQ(percentile(data, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(percentile(data, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(percentile(data, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(percentile(data, 0.5), 3.5);
  EXPECT_DOUBLE_EQ(percentile(data, 0.75), 5.25);
  EXPECT_NEAR(percentile(data, 0.9), 6.8999999999999995, 1e-15);
  EXPECT_DOUBLE_EQ(percentile(data, 1.0), 9.0);
  EXPECT_DOUBLE_EQ(percentile({42.0}, 0.37), 42.0);
}

TEST(Stats, MeanAndPopulationStddev) {
  const std::vector<double> data{3, 1, 4, 1, 5, 9, 2, 6};
  EXPECT_DOUBLE_EQ(mean(data), 3.875);
  EXPECT_NEAR(population_stddev(data), 2.5708704751503917, 1e-15);
  const std::vector<double> single{5.0};
  EXPECT_DOUBLE_EQ(population_stddev(single), 0.0);
}

TEST(Stats, Median) {
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 3.0}), 3.0);
}

TEST(Stats, Skewness) {
  const std::vector<double> right{1.0, 2.0, 2.5, 3.0, 10.0};
  const std::vector<double> flat{2.0, 2.0, 2.0};
  const std::vector<double> left{-10.0, 1.0, 2.0, 2.5, 3.0};
  EXPECT_NEAR(skewness(right), 1.3397835746076068, 1e-12);
  EXPECT_DOUBLE_EQ(skewness(flat), 0.0);
  EXPECT_LT(skewness(left), 0.0);
}

}  // namespace
}  // namespace flockscope
