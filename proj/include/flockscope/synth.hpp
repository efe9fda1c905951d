#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flockscope/error.hpp"
#include "flockscope/follower_map.hpp"
#include "flockscope/ingest.hpp"
#include "flockscope/rng.hpp"
#include "flockscope/time.hpp"

namespace flockscope {

// Organic growth model. Followers arrive uniformly over [start, end]; a
// young_follower_fraction of them are accounts created shortly before they
// follow (within young_window), and instant_fraction of those are created
// within instant_window of the follow — the near-zero-age signups that keep
// the creation-date envelope tight against the follow time.
struct GrowthModel {
  Timestamp platform_epoch = make_timestamp(2009, 1, 1);
  Timestamp start = make_timestamp(2016, 1, 1);
  Timestamp end = make_timestamp(2021, 1, 1);
  double young_follower_fraction = 0.15;
  Duration young_window = days(30);
  double instant_fraction = 0.5;
  Duration instant_window = hours(1);

  void validate() const {
    if (start >= end) throw ConfigError("growth model: start must precede end");
    if (platform_epoch > start)
      throw ConfigError("growth model: platform_epoch must not exceed start");
    if (young_follower_fraction < 0.0 || young_follower_fraction > 1.0 ||
        instant_fraction < 0.0 || instant_fraction > 1.0)
      throw ConfigError("growth model: fractions must lie in [0, 1]");
    if (young_window < 0 || instant_window < 0)
      throw ConfigError("growth model: windows must be non-negative");
  }
};

struct SimulatedMap {
  FollowerMap map;
  std::vector<Timestamp> follow_times;  // ground truth, one per rank
};

inline SimulatedMap simulate_base_map(const std::string& account_id, std::int64_t n,
                                      const GrowthModel& growth, std::uint64_t seed) {
  growth.validate();
  if (n < 1) throw ConfigError("simulate_base_map: n must be positive");
  Rng rng(seed);

  std::vector<Timestamp> follow_times(n);
  for (auto& t : follow_times) t = rng.uniform_int(growth.start, growth.end);
  std::sort(follow_times.begin(), follow_times.end());

  std::vector<FollowerRecord> records(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const Timestamp f = follow_times[i];
    Timestamp created;
    if (rng.next_canonical() < growth.young_follower_fraction) {
      const Duration window = rng.next_canonical() < growth.instant_fraction
                                  ? growth.instant_window
                                  : growth.young_window;
      created = f - rng.uniform_int(0, window);
    } else {
      created = rng.uniform_int(growth.platform_epoch, f);
    }
    records[i] = {account_id + "_f" + std::to_string(i), created, i};
  }

  SimulatedMap sim;
  sim.map = FollowerMap::build(account_id, growth.end, std::move(records));
  sim.follow_times = std::move(follow_times);
  return sim;
}

// A batch of accounts created around the same moment that follows the same
// user consecutively. insertion_rank and t0 are sampled by the injector and
// recorded here afterwards.
struct Type1Params {
  std::int64_t n1 = 0;
  Duration sigma = 0;
  Timestamp t0 = 0;
  std::int64_t insertion_rank = -1;
};

// n_recent followers on the envelope, each replicated n_replica times right
// after its own rank, with creation dates within an hour below the original's.
struct Type2Params {
  std::int64_t n_recent = 0;
  std::int64_t n_replica = 0;

  std::int64_t n2() const { return n_recent * n_replica; }
};

struct SyntheticBenchmarkCase {
  std::string config_id;
  std::uint64_t seed = 0;
  FollowerMap map;
  std::vector<std::uint8_t> anomaly_type;  // 0 organic, 1 batch, 2 replica
  std::optional<Type1Params> type1;
  std::optional<Type2Params> type2;

  std::vector<char> labels() const {
    std::vector<char> l(anomaly_type.size());
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = anomaly_type[i] != 0;
    return l;
  }

  std::int64_t anomaly_count() const {
    std::int64_t c = 0;
    for (auto t : anomaly_type) c += t != 0;
    return c;
  }
};

inline SyntheticBenchmarkCase inject_type1(const FollowerMap& map, Type1Params params,
                                           std::uint64_t seed,
                                           const std::string& id_prefix = "inj1",
                                           std::vector<std::uint8_t> base_labels = {}) {
  const std::int64_t n = map.size();
  if (n < 100)
    throw ValidationError("type-1 injection needs at least 100 followers, got " +
                          std::to_string(n));
  if (params.n1 < 1) throw ConfigError("type-1 injection: n1 must be positive");
  if (params.sigma < 0) throw ConfigError("type-1 injection: sigma must be non-negative");
  if (!base_labels.empty() && base_labels.size() != map.followers.size())
    throw ValidationError("label vector does not match map size");
  if (base_labels.empty()) base_labels.assign(map.followers.size(), 0);

  Rng rng(seed);
  const std::int64_t lo_rank = std::llround(0.10 * static_cast<double>(n - 1));
  const std::int64_t hi_rank = std::llround(0.90 * static_cast<double>(n - 1));
  const Timestamp floor = map.lower_bound().back();  // oldest creation seen anywhere

  std::int64_t k = 0;
  Timestamp t0 = 0, cap = 0;
  std::vector<Timestamp> batch(params.n1);
  bool placed = false;
  for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
    k = rng.uniform_int(lo_rank, hi_rank);
    cap = map.upper_bound()[k - 1];  // injected records must stay under the
                                     // envelope that precedes them
    t0 = rng.uniform_int(floor, cap);
    placed = true;
    for (auto& t : batch) {
      bool ok = false;
      for (int draw = 0; draw < 1000; ++draw) {
        const double s = rng.normal(static_cast<double>(t0),
                                    static_cast<double>(params.sigma));
        const Timestamp ti = std::llround(s);
        if (ti >= floor && ti <= cap) {
          t = ti;
          ok = true;
          break;
        }
      }
      if (!ok) {  // truncation starved; pick a fresh center
        placed = false;
        break;
      }
    }
  }
  if (!placed)
    throw ValidationError(
        "type-1 injection could not fit the batch under the envelope; sigma " +
        std::to_string(params.sigma) + "s leaves too little admissible range");

  params.t0 = t0;
  params.insertion_rank = k;

  std::vector<FollowerRecord> records;
  std::vector<std::uint8_t> labels;
  records.reserve(map.followers.size() + batch.size());
  labels.reserve(records.capacity());
  for (std::int64_t r = 0; r < n; ++r) {
    if (r == k) {
      for (std::int64_t i = 0; i < params.n1; ++i) {
        records.push_back({id_prefix + "_" + std::to_string(i), batch[i],
                           static_cast<std::int64_t>(records.size())});
        labels.push_back(1);
      }
    }
    FollowerRecord rec = map.followers[r];
    rec.rank = static_cast<std::int64_t>(records.size());
    records.push_back(std::move(rec));
    labels.push_back(base_labels[r]);
  }

  SyntheticBenchmarkCase out;
  out.seed = seed;
  out.map = FollowerMap::build(map.account_id, map.collected_at, std::move(records));
  out.anomaly_type = std::move(labels);
  out.type1 = params;
  return out;
}

inline SyntheticBenchmarkCase inject_type2(const FollowerMap& map, Type2Params params,
                                           std::uint64_t seed,
                                           const std::string& id_prefix = "inj2",
                                           std::vector<std::uint8_t> base_labels = {}) {
  if (params.n_recent < 1 || params.n_replica < 1)
    throw ConfigError("type-2 injection: n_recent and n_replica must be positive");
  if (!base_labels.empty() && base_labels.size() != map.followers.size())
    throw ValidationError("label vector does not match map size");
  if (base_labels.empty()) base_labels.assign(map.followers.size(), 0);

  std::vector<std::int64_t> envelope_ranks;
  for (std::int64_t r = 0; r < map.size(); ++r)
    if (map.is_envelope_point(r)) envelope_ranks.push_back(r);
  if (static_cast<std::int64_t>(envelope_ranks.size()) < params.n_recent)
    throw ValidationError("type-2 injection needs " + std::to_string(params.n_recent) +
                          " envelope followers, map has only " +
                          std::to_string(envelope_ranks.size()));
  envelope_ranks.erase(envelope_ranks.begin(),
                       envelope_ranks.end() - params.n_recent);
  std::vector<bool> selected(map.followers.size(), false);
  for (std::int64_t r : envelope_ranks) selected[r] = true;

  Rng rng(seed);
  std::vector<FollowerRecord> records;
  std::vector<std::uint8_t> labels;
  records.reserve(map.followers.size() + params.n2());
  labels.reserve(records.capacity());
  std::int64_t replica_counter = 0;
  for (std::int64_t r = 0; r < map.size(); ++r) {
    FollowerRecord rec = map.followers[r];
    rec.rank = static_cast<std::int64_t>(records.size());
    const Timestamp original_created = rec.created_at;
    records.push_back(std::move(rec));
    labels.push_back(base_labels[r]);
    if (selected[r]) {
      for (std::int64_t i = 0; i < params.n_replica; ++i) {
        const Timestamp created = original_created - rng.uniform_int(0, kSecondsPerHour);
        records.push_back({id_prefix + "_" + std::to_string(replica_counter++), created,
                           static_cast<std::int64_t>(records.size())});
        labels.push_back(2);
      }
    }
  }

  SyntheticBenchmarkCase out;
  out.seed = seed;
  out.map = FollowerMap::build(map.account_id, map.collected_at, std::move(records));
  out.anomaly_type = std::move(labels);
  out.type2 = params;
  return out;
}

// The canonical evaluation grid: every type-1 (size, sigma) pair, every type-2
// (total, replica) pair, and every combined (total, sigma, replica) triple with
// the total split evenly between the two batch kinds.
struct GridSpec {
  std::vector<std::int64_t> type1_sizes{50, 100, 250, 500, 1000};
  std::vector<Duration> type1_sigmas{days(10), days(45), days(90)};
  std::vector<std::int64_t> type2_totals{50, 100, 250, 500, 1000};
  std::vector<std::int64_t> type2_replicas{5, 10};
  std::vector<std::int64_t> combined_totals{50, 100, 250, 500, 1000};

  std::size_t case_count() const {
    return type1_sizes.size() * type1_sigmas.size() +
           type2_totals.size() * type2_replicas.size() +
           combined_totals.size() * type1_sigmas.size() * type2_replicas.size();
  }
};

namespace detail {

inline std::string sigma_tag(Duration sigma) {
  if (sigma % kSecondsPerDay == 0) return std::to_string(sigma / kSecondsPerDay) + "d";
  return std::to_string(sigma) + "s";
}

// total/replica need not divide evenly; round to the nearest whole replica
// group and keep the overall count exact by giving the remainder to type 1.
inline Type2Params type2_from_total(std::int64_t total, std::int64_t replica) {
  Type2Params p;
  p.n_replica = replica;
  p.n_recent = std::max<std::int64_t>(
      1, std::llround(static_cast<double>(total) / static_cast<double>(replica)));
  return p;
}

}  // namespace detail

inline std::vector<SyntheticBenchmarkCase> generate_benchmark_grid(
    const FollowerMap& base, std::uint64_t master_seed,
    const GridSpec& spec = GridSpec{}) {
  std::vector<SyntheticBenchmarkCase> cases;
  cases.reserve(spec.case_count());
  std::uint64_t case_index = 0;
  auto next_seed = [&] { return derive_seed(master_seed, case_index++); };

  for (std::int64_t n1 : spec.type1_sizes)
    for (Duration sigma : spec.type1_sigmas) {
      Type1Params p{.n1 = n1, .sigma = sigma};
      auto c = inject_type1(base, p, next_seed());
      c.config_id = "t1_n" + std::to_string(n1) + "_s" + detail::sigma_tag(sigma);
      cases.push_back(std::move(c));
    }

  for (std::int64_t total : spec.type2_totals)
    for (std::int64_t replica : spec.type2_replicas) {
      if (total % replica != 0)
        throw ConfigError("type-2 total " + std::to_string(total) +
                          " is not divisible by replica count " + std::to_string(replica));
      Type2Params p{.n_recent = total / replica, .n_replica = replica};
      auto c = inject_type2(base, p, next_seed());
      c.config_id = "t2_n" + std::to_string(total) + "_r" + std::to_string(replica);
      cases.push_back(std::move(c));
    }

  for (std::int64_t total : spec.combined_totals)
    for (Duration sigma : spec.type1_sigmas)
      for (std::int64_t replica : spec.type2_replicas) {
        if (total % 2 != 0)
          throw ConfigError("combined total " + std::to_string(total) + " must be even");
        const std::uint64_t seed = next_seed();
        Type2Params p2 = detail::type2_from_total(total / 2, replica);
        Type1Params p1{.n1 = total - p2.n2(), .sigma = sigma};
        auto c1 = inject_type1(base, p1, derive_seed(seed, 1));
        auto c = inject_type2(c1.map, p2, derive_seed(seed, 2), "inj2",
                              std::move(c1.anomaly_type));
        c.type1 = c1.type1;
        c.seed = seed;
        c.config_id = "mix_n" + std::to_string(total) + "_s" + detail::sigma_tag(sigma) +
                      "_r" + std::to_string(replica);
        cases.push_back(std::move(c));
      }

  return cases;
}

inline void save_case(const SyntheticBenchmarkCase& c, const std::string& dir) {
  std::filesystem::create_directories(dir);
  save_follower_map(c.map, dir + "/followers.jsonl", InputFormat::jsonl);

  std::ofstream labels = open_output(dir + "/labels.jsonl");
  for (std::size_t r = 0; r < c.anomaly_type.size(); ++r) {
    nlohmann::json row{{"rank", r},
                       {"is_anomaly", c.anomaly_type[r] != 0},
                       {"anomaly_type", c.anomaly_type[r]}};
    labels << row.dump() << "\n";
  }

  nlohmann::json meta{{"config_id", c.config_id},
                      {"seed", c.seed},
                      {"account_id", c.map.account_id},
                      {"n_total", c.map.size()},
                      {"n_anomalous", c.anomaly_count()}};
  if (c.type1)
    meta["type1"] = {{"n1", c.type1->n1},
                     {"sigma_seconds", c.type1->sigma},
                     {"t0", format_rfc3339(c.type1->t0)},
                     {"insertion_rank", c.type1->insertion_rank}};
  else
    meta["type1"] = nullptr;
  if (c.type2)
    meta["type2"] = {{"n_recent", c.type2->n_recent},
                     {"n_replica", c.type2->n_replica},
                     {"n2", c.type2->n2()}};
  else
    meta["type2"] = nullptr;
  std::ofstream out = open_output(dir + "/case.json");
  out << meta.dump(2) << "\n";
}

inline SyntheticBenchmarkCase load_case(const std::string& dir) {
  SyntheticBenchmarkCase c;
  c.map = load_follower_map(dir + "/followers.jsonl", InputFormat::jsonl);

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(dir + "/case.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid case manifest in '" + dir + "': " + e.what());
  }
  c.config_id = meta.at("config_id").get<std::string>();
  c.seed = meta.at("seed").get<std::uint64_t>();
  if (!meta.at("type1").is_null()) {
    const auto& t1 = meta["type1"];
    Type1Params p;
    p.n1 = t1.at("n1").get<std::int64_t>();
    p.sigma = t1.at("sigma_seconds").get<Duration>();
    auto t0 = parse_rfc3339(t1.at("t0").get<std::string>());
    if (!t0) throw ParseError("invalid t0 in case manifest");
    p.t0 = *t0;
    p.insertion_rank = t1.at("insertion_rank").get<std::int64_t>();
    c.type1 = p;
  }
  if (!meta.at("type2").is_null()) {
    const auto& t2 = meta["type2"];
    Type2Params p;
    p.n_recent = t2.at("n_recent").get<std::int64_t>();
    p.n_replica = t2.at("n_replica").get<std::int64_t>();
    c.type2 = p;
  }

  c.anomaly_type.assign(c.map.followers.size(), 0);
  std::ifstream in = open_input(dir + "/labels.jsonl");
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid label row: ") + e.what(), line_no);
    }
    const std::int64_t rank = j.at("rank").get<std::int64_t>();
    if (rank < 0 || rank >= c.map.size())
      throw ParseError("label rank " + std::to_string(rank) + " outside the map", line_no);
    c.anomaly_type[rank] = j.at("anomaly_type").get<std::uint8_t>();
  }
  return c;
}

}  // namespace flockscope
