#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flockscope/csvio.hpp"
#include "flockscope/error.hpp"
#include "flockscope/follower_map.hpp"
#include "flockscope/time.hpp"

namespace flockscope {

enum class InputFormat { jsonl, csv };

inline InputFormat parse_input_format(const std::string& name) {
  if (name == "jsonl") return InputFormat::jsonl;
  if (name == "csv") return InputFormat::csv;
  throw ConfigError("unknown input format '" + name + "' (expected jsonl or csv)");
}

namespace detail {

inline std::string csv_sidecar_path(const std::string& path) {
  return path + ".meta.json";
}

inline Timestamp parse_timestamp_field(const nlohmann::json& v, const char* field,
                                       std::int64_t line) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) {
    auto t = parse_rfc3339(v.get<std::string>());
    if (t) return *t;
  }
  throw ParseError(std::string(field) + " is not a valid RFC 3339 timestamp", line);
}

}  // namespace detail

// JSONL layout: a header object {"account_id", "collected_at"} followed by one
// {"rank", "follower_id", "created_at"} object per line. The CSV layout keeps
// the per-record fields in rank,follower_id,created_at columns and the header
// fields in a "<path>.meta.json" sidecar.
inline FollowerMap load_follower_map(const std::string& path, InputFormat format) {
  std::ifstream in = open_input(path);
  std::string account_id;
  Timestamp collected_at = 0;
  std::vector<FollowerRecord> records;
  std::string line;
  std::int64_t line_no = 0;

  if (format == InputFormat::jsonl) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
      }
      if (!j.is_object()) throw ParseError("expected a JSON object", line_no);
      if (records.empty() && account_id.empty() && j.contains("account_id")) {
        if (!j["account_id"].is_string() || j["account_id"].get<std::string>().empty())
          throw ParseError("account_id must be a non-empty string", line_no);
        if (!j.contains("collected_at"))
          throw ParseError("header is missing collected_at", line_no);
        account_id = j["account_id"].get<std::string>();
        collected_at = detail::parse_timestamp_field(j["collected_at"], "collected_at", line_no);
        continue;
      }
      if (account_id.empty())
        throw ParseError("first line must be the {account_id, collected_at} header", line_no);
      for (const char* field : {"rank", "follower_id", "created_at"})
        if (!j.contains(field))
          throw ParseError(std::string("record is missing ") + field, line_no);
      FollowerRecord r;
      if (!j["rank"].is_number_integer() || j["rank"].get<std::int64_t>() < 0)
        throw ParseError("rank must be a non-negative integer", line_no);
      r.rank = j["rank"].get<std::int64_t>();
      if (!j["follower_id"].is_string() || j["follower_id"].get<std::string>().empty())
        throw ParseError("follower_id must be a non-empty string", line_no);
      r.follower_id = j["follower_id"].get<std::string>();
      r.created_at = detail::parse_timestamp_field(j["created_at"], "created_at", line_no);
      records.push_back(std::move(r));
    }
    if (account_id.empty()) throw ParseError("input has no header line", 0);
  } else {
    const std::string meta_path = detail::csv_sidecar_path(path);
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(read_file(meta_path));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("invalid sidecar '" + meta_path + "': " + e.what());
    }
    if (!meta.contains("account_id") || !meta.contains("collected_at"))
      throw ParseError("sidecar '" + meta_path + "' must carry account_id and collected_at");
    account_id = meta["account_id"].get<std::string>();
    collected_at = detail::parse_timestamp_field(meta["collected_at"], "collected_at", -1);

    if (!std::getline(in, line)) throw ParseError("input is empty", 0);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "rank,follower_id,created_at")
      throw ParseError("expected header 'rank,follower_id,created_at'", 1);
    line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto fields = split_csv_line(line);
      if (fields.size() != 3) throw ParseError("expected 3 fields", line_no);
      FollowerRecord r;
      try {
        std::size_t used = 0;
        r.rank = std::stoll(fields[0], &used);
        if (used != fields[0].size() || r.rank < 0) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("rank must be a non-negative integer", line_no);
      }
      if (fields[1].empty()) throw ParseError("follower_id must be non-empty", line_no);
      r.follower_id = fields[1];
      auto t = parse_rfc3339(fields[2]);
      if (!t) throw ParseError("created_at is not a valid RFC 3339 timestamp", line_no);
      r.created_at = *t;
      records.push_back(std::move(r));
    }
  }

  return FollowerMap::build(std::move(account_id), collected_at, std::move(records));
}

inline void save_follower_map(const FollowerMap& map, const std::string& path,
                              InputFormat format) {
  std::ofstream out = open_output(path);
  if (format == InputFormat::jsonl) {
    nlohmann::json header{{"account_id", map.account_id},
                          {"collected_at", format_rfc3339(map.collected_at)}};
    out << header.dump() << "\n";
    for (const auto& r : map.followers) {
      nlohmann::json row{{"rank", r.rank},
                         {"follower_id", r.follower_id},
                         {"created_at", format_rfc3339(r.created_at)}};
      out << row.dump() << "\n";
    }
  } else {
    out << "rank,follower_id,created_at\n";
    for (const auto& r : map.followers) {
      check_csv_safe(r.follower_id, "follower_id");
      out << r.rank << ',' << r.follower_id << ',' << format_rfc3339(r.created_at)
          << "\n";
    }
    nlohmann::json meta{{"account_id", map.account_id},
                        {"collected_at", format_rfc3339(map.collected_at)}};
    std::ofstream mout = open_output(detail::csv_sidecar_path(path));
    mout << meta.dump(2) << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

// A record is treated as misplaced when its creation date jumps more than
// jump_threshold above the running max of everything kept before it and none
// of the next `lookahead` kept records reaches that level again — an isolated
// spike that would otherwise distort the envelope. Removing a spike can expose
// another one, so the scan repeats until it settles; that also makes cleaning
// an already-clean map a no-op.
struct CleaningReport {
  std::vector<std::int64_t> removed_ranks;
  Duration jump_threshold = days(365);
  std::int64_t lookahead = 50;
  bool flagged_for_review = false;

  nlohmann::json to_json() const {
    return {{"removed_ranks", removed_ranks},
            {"jump_threshold_seconds", jump_threshold},
            {"lookahead", lookahead},
            {"flagged_for_review", flagged_for_review}};
  }

  static CleaningReport from_json(const nlohmann::json& j) {
    CleaningReport r;
    r.removed_ranks = j.at("removed_ranks").get<std::vector<std::int64_t>>();
    r.jump_threshold = j.at("jump_threshold_seconds").get<Duration>();
    r.lookahead = j.at("lookahead").get<std::int64_t>();
    r.flagged_for_review = j.at("flagged_for_review").get<bool>();
    return r;
  }
};

inline CleaningReport detect_misplaced_followers(const FollowerMap& map,
                                                 Duration jump_threshold = days(365),
                                                 std::int64_t lookahead = 50) {
  if (jump_threshold <= 0) throw ConfigError("jump_threshold must be positive");
  if (lookahead < 1) throw ConfigError("lookahead must be at least 1");

  const std::int64_t n = map.size();
  std::vector<bool> removed(n, false);
  std::vector<std::int64_t> kept;
  kept.reserve(n);

  bool changed = true;
  while (changed) {
    changed = false;
    kept.clear();
    for (std::int64_t r = 0; r < n; ++r)
      if (!removed[r]) kept.push_back(r);

    Timestamp running_max = 0;
    for (std::size_t p = 0; p < kept.size(); ++p) {
      const Timestamp t = map.followers[kept[p]].created_at;
      if (p == 0) {
        running_max = t;
        continue;
      }
      if (t > running_max + jump_threshold) {
        Timestamp ahead_max = 0;
        bool has_ahead = false;
        const std::size_t end = std::min(kept.size(), p + 1 + static_cast<std::size_t>(lookahead));
        for (std::size_t q = p + 1; q < end; ++q) {
          const Timestamp u = map.followers[kept[q]].created_at;
          ahead_max = has_ahead ? std::max(ahead_max, u) : u;
          has_ahead = true;
        }
        if (has_ahead && ahead_max < t) {
          removed[kept[p]] = true;
          changed = true;
          continue;  // spikes never advance the running max
        }
      }
      running_max = std::max(running_max, t);
    }
  }

  CleaningReport report;
  report.jump_threshold = jump_threshold;
  report.lookahead = lookahead;
  for (std::int64_t r = 0; r < n; ++r)
    if (removed[r]) report.removed_ranks.push_back(r);
  report.flagged_for_review = !report.removed_ranks.empty();
  return report;
}

// Drops the reported ranks and renumbers the remainder contiguously.
inline FollowerMap apply_cleaning(const FollowerMap& map, const CleaningReport& report) {
  std::vector<bool> drop(map.size(), false);
  for (std::int64_t r : report.removed_ranks) {
    if (r < 0 || r >= map.size())
      throw ValidationError("cleaning report names rank " + std::to_string(r) +
                            ", outside the map of size " + std::to_string(map.size()));
    drop[r] = true;
  }
  std::vector<FollowerRecord> keep;
  keep.reserve(map.followers.size() - report.removed_ranks.size());
  for (const auto& rec : map.followers)
    if (!drop[rec.rank]) keep.push_back(rec);
  return FollowerMap::build(map.account_id, map.collected_at, std::move(keep));
}

}  // namespace flockscope
