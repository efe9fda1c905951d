#include <gtest/gtest.h>

#include <fstream>

#include "flockscope/csvio.hpp"
#include "flockscope/error.hpp"
#include "flockscope/ingest.hpp"
#include "testutil.hpp"

namespace flockscope {
namespace {

using testutil::TempDir;
using testutil::make_map;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

TEST(CsvIo, FormatDouble) {
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(1.5), "1.5");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(123456789.0), "123456789");
  EXPECT_EQ(format_double(1234567891.0), "1.23456789e+09");
  EXPECT_EQ(format_double(-2.25), "-2.25");
}

TEST(CsvIo, SplitLine) {
  EXPECT_EQ(split_csv_line("a,b,c"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(split_csv_line("a,,c"), (std::vector<std::string>{"a", "", "c"}));
  EXPECT_EQ(split_csv_line(""), (std::vector<std::string>{""}));
  EXPECT_EQ(split_csv_line("x,"), (std::vector<std::string>{"x", ""}));
}

TEST(CsvIo, CheckCsvSafe) {
  EXPECT_NO_THROW(check_csv_safe("plain_id-123", "field"));
  EXPECT_THROW(check_csv_safe("a,b", "field"), ValidationError);
  EXPECT_THROW(check_csv_safe("a\"b", "field"), ValidationError);
  EXPECT_THROW(check_csv_safe("a\nb", "field"), ValidationError);
}

TEST(Errors, CodesAndLinePrefix) {
  EXPECT_EQ(ParseError("bad").code(), "parse_error");
  EXPECT_STREQ(ParseError("bad", 7).what(), "line 7: bad");
  EXPECT_STREQ(ParseError("bad").what(), "bad");
  EXPECT_EQ(ValidationError("x").code(), "validation_error");
  EXPECT_EQ(ConfigError("x").code(), "config_error");
  EXPECT_EQ(IoError("x").code(), "io_error");
}

TEST(FollowerMap, BuildSortsAndRenumbers) {
  std::vector<FollowerRecord> records{
      {"c", 30, 9}, {"a", 10, 5}, {"b", 20, 7}};
  const FollowerMap map = FollowerMap::build("acct", 1000, std::move(records));
  ASSERT_EQ(map.size(), 3);
  EXPECT_EQ(map.followers[0].follower_id, "a");
  EXPECT_EQ(map.followers[0].rank, 0);
  EXPECT_EQ(map.followers[1].follower_id, "b");
  EXPECT_EQ(map.followers[2].rank, 2);
}

TEST(FollowerMap, BuildErrors) {
  EXPECT_THROW(FollowerMap::build("a", 10, {}), ValidationError);
  EXPECT_THROW(FollowerMap::build("a", 10, {{"x", 1, 0}, {"y", 2, 0}}),
               ValidationError);  // duplicate rank
  EXPECT_THROW(FollowerMap::build("a", 10, {{"x", 1, 0}, {"x", 2, 1}}),
               ValidationError);  // duplicate follower
  EXPECT_THROW(FollowerMap::build("a", 10, {{"x", 11, 0}}),
               ValidationError);  // created after collection
}

TEST(FollowerMap, BoundsAreRunningExtrema) {
  const FollowerMap map = make_map({50, 20, 80, 30, 90});
  EXPECT_EQ(map.upper_bound(), (std::vector<Timestamp>{50, 50, 80, 80, 90}));
  EXPECT_EQ(map.lower_bound(), (std::vector<Timestamp>{50, 20, 20, 20, 20}));
  EXPECT_TRUE(map.is_envelope_point(0));
  EXPECT_FALSE(map.is_envelope_point(1));
  EXPECT_TRUE(map.is_envelope_point(2));
  EXPECT_FALSE(map.is_envelope_point(3));
  EXPECT_TRUE(map.is_envelope_point(4));
}

TEST(FollowerMap, InclusionThreshold) {
  EXPECT_TRUE(is_below_inclusion_threshold(make_map({1, 2, 3})));
  std::vector<Timestamp> big(kMinFollowerCount, 5);
  EXPECT_FALSE(is_below_inclusion_threshold(make_map(big)));
}

TEST(Ingest, JsonlRoundTripIsByteIdentical) {
  TempDir dir;
  const FollowerMap map = make_map({100, 200, 150}, "acct_1", 1000);
  const std::string p1 = dir.file("a.jsonl"), p2 = dir.file("b.jsonl");
  save_follower_map(map, p1, InputFormat::jsonl);
  const FollowerMap loaded = load_follower_map(p1, InputFormat::jsonl);
  EXPECT_EQ(loaded, map);
  save_follower_map(loaded, p2, InputFormat::jsonl);
  EXPECT_EQ(read_file(p1), read_file(p2));
}

TEST(Ingest, CsvRoundTripIsByteIdentical) {
  TempDir dir;
  const FollowerMap map = make_map({100, 200, 150}, "acct_1", 1000);
  const std::string p1 = dir.file("a.csv"), p2 = dir.file("b.csv");
  save_follower_map(map, p1, InputFormat::csv);
  const FollowerMap loaded = load_follower_map(p1, InputFormat::csv);
  EXPECT_EQ(loaded, map);
  save_follower_map(loaded, p2, InputFormat::csv);
  EXPECT_EQ(read_file(p1), read_file(p2));
}

TEST(Ingest, JsonlAcceptsIntegerAndStringTimestamps) {
  TempDir dir;
  const std::string path = dir.file("mixed.jsonl");
  write_text(path,
             "{\"account_id\":\"a\",\"collected_at\":1609459200}\n"
             "{\"rank\":0,\"follower_id\":\"x\",\"created_at\":\"2020-01-01T00:00:00Z\"}\n"
             "\n"
             "{\"rank\":1,\"follower_id\":\"y\",\"created_at\":1577836801}\r\n");
  const FollowerMap map = load_follower_map(path, InputFormat::jsonl);
  ASSERT_EQ(map.size(), 2);
  EXPECT_EQ(map.followers[0].created_at, 1577836800);
  EXPECT_EQ(map.followers[1].created_at, 1577836801);
  EXPECT_EQ(map.collected_at, 1609459200);
}

TEST(Ingest, InputRanksNeedNotBeContiguous) {
  TempDir dir;
  const std::string path = dir.file("gaps.jsonl");
  write_text(path,
             "{\"account_id\":\"a\",\"collected_at\":1000}\n"
             "{\"rank\":30,\"follower_id\":\"z\",\"created_at\":3}\n"
             "{\"rank\":10,\"follower_id\":\"x\",\"created_at\":1}\n"
             "{\"rank\":20,\"follower_id\":\"y\",\"created_at\":2}\n");
  const FollowerMap map = load_follower_map(path, InputFormat::jsonl);
  ASSERT_EQ(map.size(), 3);
  EXPECT_EQ(map.followers[0].follower_id, "x");
  EXPECT_EQ(map.followers[2].follower_id, "z");
  EXPECT_EQ(map.followers[2].rank, 2);
}

TEST(Ingest, ParseErrorsCarryLineNumbers) {
  TempDir dir;
  const std::string path = dir.file("bad.jsonl");
  write_text(path,
             "{\"account_id\":\"a\",\"collected_at\":1000}\n"
             "{\"rank\":0,\"follower_id\":\"x\",\"created_at\":1}\n"
             "{\"rank\":1,\"follower_id\":\"y\"}\n");
  try {
    load_follower_map(path, InputFormat::jsonl);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Ingest, CsvHeaderMismatchIsError) {
  TempDir dir;
  const std::string path = dir.file("bad.csv");
  write_text(path, "follower_id,rank,created_at\n");
  write_text(path + ".meta.json",
             "{\"account_id\":\"a\",\"collected_at\":\"2021-01-01T00:00:00Z\"}\n");
  EXPECT_THROW(load_follower_map(path, InputFormat::csv), ParseError);
}

TEST(Ingest, CsvWithoutSidecarIsIoError) {
  TempDir dir;
  const std::string path = dir.file("lonely.csv");
  write_text(path, "rank,follower_id,created_at\n0,x,2020-01-01T00:00:00Z\n");
  EXPECT_THROW(load_follower_map(path, InputFormat::csv), IoError);
}

TEST(Ingest, MissingFileIsIoError) {
  EXPECT_THROW(load_follower_map("/nonexistent/nope.jsonl", InputFormat::jsonl), IoError);
  EXPECT_THROW(parse_input_format("xml"), ConfigError);
}

// created = [10, 20, 500, 30, 40]: the 500 spikes over the running max and
// nothing in the lookahead reaches it again.
TEST(Cleaning, RemovesIsolatedSpike) {
  const FollowerMap map = make_map({10, 20, 500, 30, 40});
  const CleaningReport report = detect_misplaced_followers(map, 100, 2);
  EXPECT_EQ(report.removed_ranks, (std::vector<std::int64_t>{2}));
  EXPECT_TRUE(report.flagged_for_review);

  const FollowerMap cleaned = apply_cleaning(map, report);
  ASSERT_EQ(cleaned.size(), 4);
  EXPECT_EQ(cleaned.followers[2].follower_id, "f3");
  EXPECT_EQ(cleaned.followers[2].rank, 2);
  EXPECT_EQ(cleaned.upper_bound(), (std::vector<Timestamp>{10, 20, 30, 40}));
}

TEST(Cleaning, SustainedJumpIsKept) {
  const FollowerMap map = make_map({10, 20, 500, 600, 30});
  const CleaningReport report = detect_misplaced_followers(map, 100, 2);
  EXPECT_TRUE(report.removed_ranks.empty());
  EXPECT_FALSE(report.flagged_for_review);
}

// Removing one spike can expose the next; the scan must settle.
TEST(Cleaning, CascadingSpikes) {
  const FollowerMap map = make_map({10, 500, 400, 20, 30});
  const CleaningReport report = detect_misplaced_followers(map, 100, 1);
  EXPECT_EQ(report.removed_ranks, (std::vector<std::int64_t>{1, 2}));
}

TEST(Cleaning, FirstAndLastRecordsNeverFlagged) {
  const FollowerMap a = make_map({5000, 10, 20, 30});
  EXPECT_TRUE(detect_misplaced_followers(a, 100, 2).removed_ranks.empty());
  const FollowerMap b = make_map({10, 20, 5000});
  EXPECT_TRUE(detect_misplaced_followers(b, 100, 2).removed_ranks.empty());
}

TEST(Cleaning, LaterSpikeProtectsEarlierOne) {
  // 500 sees 600 within its lookahead, and 600 is not > 500 + threshold.
  const FollowerMap map = make_map({10, 500, 20, 600, 30, 40});
  const CleaningReport report = detect_misplaced_followers(map, 100, 2);
  EXPECT_TRUE(report.removed_ranks.empty());
}

TEST(Cleaning, IsIdempotent) {
  const FollowerMap map = make_map({10, 20, 500, 30, 40, 700, 50});
  const CleaningReport report = detect_misplaced_followers(map, 100, 2);
  const FollowerMap cleaned = apply_cleaning(map, report);
  EXPECT_TRUE(detect_misplaced_followers(cleaned, 100, 2).removed_ranks.empty());
}

TEST(Cleaning, ReportJsonRoundTrip) {
  const FollowerMap map = make_map({10, 20, 500, 30, 40});
  const CleaningReport report = detect_misplaced_followers(map, 100, 2);
  const CleaningReport back = CleaningReport::from_json(report.to_json());
  EXPECT_EQ(back.removed_ranks, report.removed_ranks);
  EXPECT_EQ(back.jump_threshold, report.jump_threshold);
  EXPECT_EQ(back.lookahead, report.lookahead);
  EXPECT_EQ(back.flagged_for_review, report.flagged_for_review);
}

TEST(Cleaning, UnknownRankInReportIsError) {
  const FollowerMap map = make_map({10, 20});
  CleaningReport report;
  report.removed_ranks = {5};
  EXPECT_THROW(apply_cleaning(map, report), ValidationError);
}

TEST(Cleaning, BadParamsAreErrors) {
  const FollowerMap map = make_map({10, 20});
  EXPECT_THROW(detect_misplaced_followers(map, 0, 2), ConfigError);
  EXPECT_THROW(detect_misplaced_followers(map, 100, 0), ConfigError);
}

}  // namespace
}  // namespace flockscope
