#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flockscope/csvio.hpp"
#include "flockscope/error.hpp"
#include "flockscope/follower_map.hpp"

namespace flockscope {

enum class Method {
  sliding_histogram,
  isolation_forest,
  lof,
  ecod,
  gen2out,
};

inline const char* method_name(Method m) {
  switch (m) {
    case Method::sliding_histogram: return "sh";
    case Method::isolation_forest: return "if";
    case Method::lof: return "lof";
    case Method::ecod: return "ecod";
    case Method::gen2out: return "gen2out";
  }
  throw ConfigError("unknown method");
}

inline Method parse_method(const std::string& name) {
  if (name == "sh") return Method::sliding_histogram;
  if (name == "if") return Method::isolation_forest;
  if (name == "lof") return Method::lof;
  if (name == "ecod") return Method::ecod;
  if (name == "gen2out") return Method::gen2out;
  throw ConfigError("unknown method '" + name +
                    "' (expected sh, if, lof, ecod, or gen2out)");
}

// Per-rank anomaly scores for one account, higher = more anomalous, plus the
// parameters that produced them so any output can be regenerated.
struct ScoredFollowers {
  std::string account_id;
  Method method = Method::sliding_histogram;
  std::vector<double> scores;
  std::map<std::string, double> params;
  std::optional<std::uint64_t> seed;

  void check_finite() const {
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (!std::isfinite(scores[i]))
        throw ValidationError("non-finite score at rank " + std::to_string(i));
  }

  nlohmann::json params_json() const {
    nlohmann::json j{{"account_id", account_id}, {"method", method_name(method)}};
    for (const auto& [k, v] : params) j[k] = v;
    if (seed) j["seed"] = *seed;
    return j;
  }
};

// rank,score rows; when the map is supplied the follower ids are included so
// scores can be joined across accounts.
inline void write_scores_csv(const ScoredFollowers& s, const std::string& path,
                             const FollowerMap* map = nullptr) {
  if (map && map->size() != static_cast<std::int64_t>(s.scores.size()))
    throw ValidationError("score vector does not match map size");
  std::ofstream out = open_output(path);
  out << (map ? "rank,follower_id,score\n" : "rank,score\n");
  for (std::size_t r = 0; r < s.scores.size(); ++r) {
    out << r << ',';
    if (map) {
      check_csv_safe(map->followers[r].follower_id, "follower_id");
      out << map->followers[r].follower_id << ',';
    }
    out << format_double(s.scores[r]) << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");

  std::ofstream meta = open_output(path + ".params.json");
  meta << s.params_json().dump(2) << "\n";
}

}  // namespace flockscope
