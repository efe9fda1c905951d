// Command-line front end: ingest and clean follower lists, simulate and
// inject benchmark cases, score with any detector, benchmark, and build the
// cross-account similarity network.

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flockscope/csvio.hpp"
#include "flockscope/detectors/ecod.hpp"
#include "flockscope/detectors/gen2out.hpp"
#include "flockscope/detectors/isolation_forest.hpp"
#include "flockscope/detectors/lof.hpp"
#include "flockscope/error.hpp"
#include "flockscope/evalkit.hpp"
#include "flockscope/features.hpp"
#include "flockscope/followtime.hpp"
#include "flockscope/heatmap.hpp"
#include "flockscope/ingest.hpp"
#include "flockscope/network.hpp"
#include "flockscope/scored.hpp"
#include "flockscope/sliding_histogram.hpp"
#include "flockscope/synth.hpp"

namespace fs = std::filesystem;
using namespace flockscope;

namespace {

// Key=value settings from --config override anything given as a flag. Each
// subcommand registers its keys here after CLI parsing.
class OptionRegistry {
 public:
  void add_string(const std::string& key, std::string* target) {
    setters_[key] = [target](const std::string& v) { *target = v; };
  }
  void add_int64(const std::string& key, std::int64_t* target) {
    setters_[key] = [key, target](const std::string& v) {
      try {
        std::size_t used = 0;
        *target = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
      }
    };
  }
  void add_int(const std::string& key, int* target) {
    setters_[key] = [key, target](const std::string& v) {
      try {
        std::size_t used = 0;
        *target = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
      }
    };
  }
  void add_uint64(const std::string& key, std::uint64_t* target) {
    setters_[key] = [key, target](const std::string& v) {
      try {
        std::size_t used = 0;
        *target = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects an unsigned integer, got '" +
                          v + "'");
      }
    };
  }
  void add_double(const std::string& key, double* target) {
    setters_[key] = [key, target](const std::string& v) {
      try {
        std::size_t used = 0;
        *target = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
      }
    };
  }
  void add_bool(const std::string& key, bool* target) {
    setters_[key] = [key, target](const std::string& v) {
      if (v == "true" || v == "1")
        *target = true;
      else if (v == "false" || v == "0")
        *target = false;
      else
        throw ConfigError("config key '" + key + "' expects true or false, got '" + v + "'");
    };
  }

  void apply_file(const std::string& path) const {
    std::ifstream in = open_input(path);
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::size_t start = line.find_first_not_of(" \t");
      if (start == std::string::npos || line[start] == '#') continue;
      const std::size_t eq = line.find('=', start);
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) +
                          " is not key=value: '" + line + "'");
      std::string key = line.substr(start, eq - start);
      while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
      std::string value = line.substr(eq + 1);
      std::size_t vstart = value.find_first_not_of(" \t");
      value = vstart == std::string::npos ? "" : value.substr(vstart);
      while (!value.empty() && (value.back() == ' ' || value.back() == '\t'))
        value.pop_back();
      const auto it = setters_.find(key);
      if (it == setters_.end())
        throw ConfigError("config key '" + key + "' is not recognized by this command");
      it->second(value);
    }
  }

 private:
  std::map<std::string, std::function<void(const std::string&)>> setters_;
};

Timestamp parse_timestamp_arg(const std::string& value, const std::string& what) {
  auto t = parse_rfc3339(value);
  if (!t) throw ConfigError(what + " is not a valid RFC 3339 timestamp: '" + value + "'");
  return *t;
}

std::vector<std::int64_t> parse_int_list(const std::string& csv, const std::string& what) {
  std::vector<std::int64_t> out;
  for (const std::string& f : split_csv_line(csv)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(f, &used));
      if (used != f.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError(what + " expects a comma-separated integer list, got '" + csv + "'");
    }
  }
  if (out.empty()) throw ConfigError(what + " must not be empty");
  return out;
}

// Ground-truth follow times: rank,followed_at CSV.
std::vector<Timestamp> load_truth_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("truth file is empty", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "rank,followed_at")
    throw ParseError("expected header 'rank,followed_at'", 1);
  std::vector<Timestamp> out;
  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) throw ParseError("expected 2 fields", line_no);
    auto t = parse_rfc3339(fields[1]);
    if (!t) throw ParseError("followed_at is not a valid RFC 3339 timestamp", line_no);
    out.push_back(*t);
  }
  return out;
}

void write_truth_csv(const std::vector<Timestamp>& times, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "rank,followed_at\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    out << i << ',' << format_rfc3339(times[i]) << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

struct LoadedScores {
  std::string account_id;  // from the params sidecar when present
  std::vector<std::string> follower_ids;
  std::vector<double> scores;
  bool has_ids = false;
};

LoadedScores load_scores_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("score file '" + path + "' is empty", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  LoadedScores out;
  if (line == "rank,follower_id,score")
    out.has_ids = true;
  else if (line != "rank,score")
    throw ParseError("unrecognized score header '" + line + "' in '" + path + "'", 1);

  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::size_t expect = out.has_ids ? 3 : 2;
    if (fields.size() != expect)
      throw ParseError("expected " + std::to_string(expect) + " fields", line_no);
    const std::int64_t rank = static_cast<std::int64_t>(out.scores.size());
    try {
      std::size_t used = 0;
      if (std::stoll(fields[0], &used) != rank || used != fields[0].size())
        throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError("ranks must be contiguous from 0", line_no);
    }
    if (out.has_ids) out.follower_ids.push_back(fields[1]);
    try {
      out.scores.push_back(std::stod(fields[out.has_ids ? 2 : 1]));
    } catch (const std::exception&) {
      throw ParseError("score is not a number", line_no);
    }
  }
  if (out.scores.empty()) throw ParseError("score file '" + path + "' has no rows", 1);

  const std::string sidecar = path + ".params.json";
  if (fs::exists(sidecar)) {
    try {
      const nlohmann::json j = nlohmann::json::parse(read_file(sidecar));
      if (j.contains("account_id")) out.account_id = j["account_id"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("invalid sidecar '" + sidecar + "': " + e.what());
    }
  }
  if (out.account_id.empty()) out.account_id = fs::path(path).stem().string();
  return out;
}

// Scores directories hold one CSV per account (plus .params.json sidecars).
std::vector<LoadedScores> load_scores_dir(const std::string& dir, bool need_ids) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > 4 && name.ends_with(".csv")) files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .csv score files in '" + dir + "'");
  std::vector<LoadedScores> out;
  for (const auto& f : files) {
    LoadedScores s = load_scores_csv(f);
    if (need_ids && !s.has_ids)
      throw ValidationError("'" + f +
                            "' lacks follower ids; regenerate with the sliding "
                            "histogram scorer (rank,follower_id,score)");
    out.push_back(std::move(s));
  }
  return out;
}

int run_subcommand(const std::string& name, const std::function<void()>& body);

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string input, output, report;
  std::string format = "jsonl", output_format = "jsonl";
};

void cmd_ingest(const IngestArgs& a) {
  const FollowerMap map = load_follower_map(a.input, parse_input_format(a.format));
  if (!a.output.empty())
    save_follower_map(map, a.output, parse_input_format(a.output_format));
  nlohmann::json report{{"account_id", map.account_id},
                        {"n_followers", map.size()},
                        {"collected_at", format_rfc3339(map.collected_at)},
                        {"small_map", is_below_inclusion_threshold(map)}};
  if (!a.report.empty()) {
    std::ofstream out = open_output(a.report);
    out << report.dump(2) << "\n";
  }
  std::cout << report.dump() << "\n";
}

struct CleanArgs {
  std::string input, output, report;
  std::string format = "jsonl", output_format = "jsonl";
  double jump_threshold_days = 365.0;
  std::int64_t lookahead = 50;
};

void cmd_clean(const CleanArgs& a) {
  const FollowerMap map = load_follower_map(a.input, parse_input_format(a.format));
  const Duration threshold =
      static_cast<Duration>(std::llround(a.jump_threshold_days * kSecondsPerDay));
  const CleaningReport report = detect_misplaced_followers(map, threshold, a.lookahead);
  if (!a.output.empty()) {
    const FollowerMap cleaned = apply_cleaning(map, report);
    save_follower_map(cleaned, a.output, parse_input_format(a.output_format));
  }
  if (!a.report.empty()) {
    std::ofstream out = open_output(a.report);
    out << report.to_json().dump(2) << "\n";
  }
  std::cout << report.to_json().dump() << "\n";
}

struct EstimateArgs {
  std::string input, output, truth, error_report, per_rank_errors;
  std::string format = "jsonl";
};

void cmd_estimate_times(const EstimateArgs& a) {
  const FollowerMap map = load_follower_map(a.input, parse_input_format(a.format));
  const auto estimates = estimate_follow_times(map);
  write_estimates_csv(estimates, a.output);
  if (!a.truth.empty()) {
    const auto truth = load_truth_csv(a.truth);
    const auto summary = evaluate_estimation_error(estimates, truth);
    nlohmann::json j{{"mean_abs_error_seconds", summary.mean_abs_error_seconds},
                     {"mean_abs_error_days",
                      summary.mean_abs_error_seconds / static_cast<double>(kSecondsPerDay)},
                     {"n", estimates.size()}};
    if (!a.error_report.empty()) {
      std::ofstream out = open_output(a.error_report);
      out << j.dump(2) << "\n";
    }
    if (!a.per_rank_errors.empty()) {
      std::ofstream out = open_output(a.per_rank_errors);
      out << "rank,error_seconds\n";
      for (std::size_t i = 0; i < summary.per_rank_errors.size(); ++i)
        out << i << ',' << summary.per_rank_errors[i] << "\n";
    }
    std::cout << j.dump() << "\n";
  } else {
    std::cout << nlohmann::json{{"n", estimates.size()}}.dump() << "\n";
  }
}

struct SynthArgs {
  std::string mode = "base";
  // base
  std::string account = "sim";
  std::int64_t n = 10000;
  std::string start = "2016-01-01T00:00:00Z", end = "2021-01-01T00:00:00Z";
  std::string platform_epoch = "2009-01-01T00:00:00Z";
  double young_fraction = 0.15, instant_fraction = 0.5;
  double young_window_days = 30.0;
  std::int64_t instant_window_seconds = 3600;
  std::string output, truth_out;
  std::string output_format = "jsonl";
  // grid
  std::string input, format = "jsonl", outdir;
  std::string type1_sizes, sigmas_days, type2_totals, replicas, combined_totals;
  std::uint64_t seed = 0;
};

void cmd_synth(const SynthArgs& a) {
  if (a.mode == "base") {
    if (a.output.empty()) throw ConfigError("synth base mode needs --output");
    GrowthModel growth;
    growth.start = parse_timestamp_arg(a.start, "--start");
    growth.end = parse_timestamp_arg(a.end, "--end");
    growth.platform_epoch = parse_timestamp_arg(a.platform_epoch, "--platform-epoch");
    growth.young_follower_fraction = a.young_fraction;
    growth.instant_fraction = a.instant_fraction;
    growth.young_window =
        static_cast<Duration>(std::llround(a.young_window_days * kSecondsPerDay));
    growth.instant_window = a.instant_window_seconds;
    const SimulatedMap sim = simulate_base_map(a.account, a.n, growth, a.seed);
    save_follower_map(sim.map, a.output, parse_input_format(a.output_format));
    if (!a.truth_out.empty()) write_truth_csv(sim.follow_times, a.truth_out);
    std::cout << nlohmann::json{{"account_id", a.account}, {"n", sim.map.size()}}.dump()
              << "\n";
  } else if (a.mode == "grid") {
    if (a.input.empty() || a.outdir.empty())
      throw ConfigError("synth grid mode needs --input and --outdir");
    const FollowerMap base = load_follower_map(a.input, parse_input_format(a.format));
    GridSpec spec;
    if (!a.type1_sizes.empty()) spec.type1_sizes = parse_int_list(a.type1_sizes, "--type1-sizes");
    if (!a.sigmas_days.empty()) {
      spec.type1_sigmas.clear();
      for (std::int64_t d : parse_int_list(a.sigmas_days, "--sigmas-days"))
        spec.type1_sigmas.push_back(days(d));
    }
    if (!a.type2_totals.empty()) spec.type2_totals = parse_int_list(a.type2_totals, "--type2-totals");
    if (!a.replicas.empty()) spec.type2_replicas = parse_int_list(a.replicas, "--replicas");
    if (!a.combined_totals.empty())
      spec.combined_totals = parse_int_list(a.combined_totals, "--combined-totals");

    const auto cases = generate_benchmark_grid(base, a.seed, spec);
    fs::create_directories(a.outdir);
    nlohmann::json manifest{{"account_id", base.account_id},
                            {"master_seed", a.seed},
                            {"cases", nlohmann::json::array()}};
    for (std::size_t i = 0; i < cases.size(); ++i) {
      char idx[16];
      std::snprintf(idx, sizeof(idx), "%03zu", i);
      const std::string dir_name = "case_" + std::string(idx) + "_" + cases[i].config_id;
      save_case(cases[i], a.outdir + "/" + dir_name);
      manifest["cases"].push_back({{"dir", dir_name}, {"config_id", cases[i].config_id}});
    }
    std::ofstream out = open_output(a.outdir + "/grid.json");
    out << manifest.dump(2) << "\n";
    std::cout << nlohmann::json{{"n_cases", cases.size()}, {"outdir", a.outdir}}.dump()
              << "\n";
  } else {
    throw ConfigError("unknown synth mode '" + a.mode + "' (expected base or grid)");
  }
}

struct FeaturesArgs {
  std::string input, output;
  std::string format = "jsonl";
  std::int64_t window = 201;
  bool standardize_flag = false;
};

void cmd_features(const FeaturesArgs& a) {
  const FollowerMap map = load_follower_map(a.input, parse_input_format(a.format));
  FeatureMatrix fm = compute_features(map, static_cast<int>(a.window));
  if (a.standardize_flag) standardize(fm);
  write_features_csv(fm, a.output);
  std::cout << nlohmann::json{{"rows", fm.rows()}, {"window", a.window}}.dump() << "\n";
}

struct ScoreArgs {
  std::string input, output, method;
  std::string format = "jsonl";
  std::int64_t window = 201;
  int bins = 10;
  std::int64_t stride = 1;
  std::uint64_t seed = 0;
  std::int64_t trees = 200, subsample = 256;
  std::int64_t min_pts = 0;  // 0 = use fraction
  double min_pts_fraction = 0.03;
  std::int64_t max_depth = 10, gen2out_trees = 100;
};

void cmd_score(const ScoreArgs& a) {
  if (a.method.empty()) throw ConfigError("--method is required");
  const FollowerMap map = load_follower_map(a.input, parse_input_format(a.format));
  const Method method = parse_method(a.method);

  ScoredFollowers scored;
  if (method == Method::sliding_histogram) {
    scored = score_followers_incremental(
        map, {.window_width = a.window, .n_bins = a.bins, .stride = a.stride});
  } else {
    FeatureMatrix fm = compute_features(map, static_cast<int>(a.window));
    if (method == Method::ecod) {
      scored = ecod_score(fm);
    } else {
      standardize(fm);
      if (method == Method::isolation_forest) {
        IsolationForestOptions opts{.n_trees = static_cast<int>(a.trees),
                                    .subsample = static_cast<int>(a.subsample)};
        if (opts.subsample > map.size())
          std::cerr << "warning: subsample " << opts.subsample << " exceeds map size "
                    << map.size() << "; clamping\n";
        scored = isolation_forest_score(fm, opts, a.seed);
      } else if (method == Method::lof) {
        LofOptions opts;
        if (a.min_pts > 0) opts.min_pts = static_cast<int>(a.min_pts);
        opts.min_pts_fraction = a.min_pts_fraction;
        scored = lof_score(fm, opts);
      } else {
        scored = gen2out_score(fm,
                               {.max_depth = static_cast<int>(a.max_depth),
                                .n_trees = static_cast<int>(a.gen2out_trees)},
                               a.seed);
      }
    }
    scored.params["window_width"] = static_cast<double>(a.window);
  }
  scored.account_id = map.account_id;
  // Follower ids ride along for the sliding histogram so cross-account tools
  // can join on them.
  write_scores_csv(scored, a.output,
                   method == Method::sliding_histogram ? &map : nullptr);
  std::cout << nlohmann::json{{"account_id", map.account_id},
                              {"method", method_name(method)},
                              {"n", scored.scores.size()}}.dump()
            << "\n";
}

struct BenchArgs {
  std::string cases_dir, methods = "sh,if,lof,ecod,gen2out", windows = "51,101,201";
  std::string output, per_case;
  int bins = 10;
  std::int64_t stride = 1, p_at = 50;
  std::uint64_t seed = 0;
  std::int64_t threads = 0;
};

void cmd_bench(const BenchArgs& a) {
  if (a.cases_dir.empty()) throw ConfigError("--cases is required");
  std::vector<std::string> case_dirs;
  const std::string manifest_path = a.cases_dir + "/grid.json";
  if (fs::exists(manifest_path)) {
    const nlohmann::json manifest = nlohmann::json::parse(read_file(manifest_path));
    for (const auto& c : manifest.at("cases"))
      case_dirs.push_back(a.cases_dir + "/" + c.at("dir").get<std::string>());
  } else {
    for (const auto& entry : fs::directory_iterator(a.cases_dir))
      if (entry.is_directory() && fs::exists(entry.path() / "case.json"))
        case_dirs.push_back(entry.path().string());
    std::sort(case_dirs.begin(), case_dirs.end());
  }
  if (case_dirs.empty())
    throw IoError("no benchmark cases under '" + a.cases_dir + "'");

  std::vector<SyntheticBenchmarkCase> cases;
  cases.reserve(case_dirs.size());
  for (const auto& dir : case_dirs) cases.push_back(load_case(dir));

  BenchmarkOptions opts;
  opts.methods.clear();
  for (const std::string& m : split_csv_line(a.methods)) opts.methods.push_back(parse_method(m));
  opts.windows = parse_int_list(a.windows, "--windows");
  opts.n_bins = a.bins;
  opts.stride = a.stride;
  opts.p_at = a.p_at;
  opts.seed = a.seed;
  opts.threads = static_cast<int>(a.threads);

  const BenchmarkReport report = run_benchmark(cases, opts);
  if (!a.output.empty()) write_results_csv(report, a.output);
  if (!a.per_case.empty()) write_per_case_csv(report, a.per_case);
  std::cout << format_results_table(report);
}

struct RankArgs {
  std::string scores_dir, mode = "mean_all", output;
  std::int64_t top_n = 1000;
};

void cmd_rank_users(const RankArgs& a) {
  if (a.scores_dir.empty()) throw ConfigError("--scores is required");
  std::vector<ScoredAccount> accounts;
  for (LoadedScores& s : load_scores_dir(a.scores_dir, false)) {
    ScoredAccount acc;
    acc.account_id = s.account_id;
    acc.follower_ids = std::move(s.follower_ids);
    acc.scores = std::move(s.scores);
    accounts.push_back(std::move(acc));
  }
  const auto ranking = rank_accounts(accounts, parse_rank_mode(a.mode), a.top_n);
  if (!a.output.empty()) {
    std::ofstream out = open_output(a.output);
    out << "account_id,score\n";
    for (const auto& r : ranking) {
      check_csv_safe(r.account_id, "account_id");
      out << r.account_id << ',' << format_double(r.score) << "\n";
    }
  }
  for (const auto& r : ranking)
    std::cout << r.account_id << " " << format_double(r.score) << "\n";
}

struct NetworkArgs {
  std::string scores_dir, edges_out, communities_out, ranking_out;
  double similarity_min = 0.75;
  std::int64_t shared_min = 100;
  double resolution = 1.0;
  std::uint64_t seed = 0;
};

void cmd_network(const NetworkArgs& a) {
  if (a.scores_dir.empty()) throw ConfigError("--scores is required");
  std::vector<ScoredAccount> accounts;
  for (LoadedScores& s : load_scores_dir(a.scores_dir, true)) {
    ScoredAccount acc;
    acc.account_id = s.account_id;
    acc.follower_ids = std::move(s.follower_ids);
    acc.scores = std::move(s.scores);
    accounts.push_back(std::move(acc));
  }
  SimilarityNetwork net = build_network(accounts, a.similarity_min, a.shared_min);
  detect_communities(net, a.seed, a.resolution);
  const auto ranking = rank_communities(net);

  if (!a.edges_out.empty()) write_edges_csv(net, a.edges_out);
  if (!a.communities_out.empty()) write_communities_csv(net, a.communities_out);
  if (!a.ranking_out.empty()) {
    std::ofstream out = open_output(a.ranking_out);
    out << "community,n_members,score\n";
    for (const auto& r : ranking)
      out << r.community << ',' << r.n_members << ',' << format_double(r.score) << "\n";
  }
  std::cout << nlohmann::json{{"n_accounts", net.nodes.size()},
                              {"n_edges", net.edges.size()},
                              {"n_communities", ranking.size()}}.dump()
            << "\n";
}

struct HeatmapArgs {
  std::string input, output, scores, shared_ids;
  std::string format = "jsonl", kind = "count";
  int nx = 200, ny = 200;
};

void cmd_heatmap(const HeatmapArgs& a) {
  if (a.output.empty()) throw ConfigError("--output is required");
  const FollowerMap map = load_follower_map(a.input, parse_input_format(a.format));
  const HeatmapKind kind = parse_heatmap_kind(a.kind);

  ScoredFollowers scored;
  std::unordered_set<std::string> shared;
  const ScoredFollowers* scored_ptr = nullptr;
  const std::unordered_set<std::string>* shared_ptr = nullptr;
  if (kind == HeatmapKind::mean_anomaly_score) {
    if (a.scores.empty()) throw ConfigError("mean_anomaly_score needs --scores");
    LoadedScores s = load_scores_csv(a.scores);
    scored.scores = std::move(s.scores);
    scored_ptr = &scored;
  } else if (kind == HeatmapKind::shared_follower_ratio) {
    if (a.shared_ids.empty()) throw ConfigError("shared_follower_ratio needs --shared-ids");
    std::ifstream in = open_input(a.shared_ids);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) shared.insert(line);
    }
    shared_ptr = &shared;
  }
  const HeatmapGrid grid = compute_heatmap(map, kind, a.nx, a.ny, scored_ptr, shared_ptr);
  write_heatmap_csv(grid, a.output);
  std::cout << nlohmann::json{{"nx", grid.nx}, {"ny", grid.ny},
                              {"kind", heatmap_kind_name(kind)}}.dump()
            << "\n";
}

// ---------------------------------------------------------------------------

int run_subcommand(const std::string& name, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const Error& e) {
    if (isatty(fileno(stderr))) {
      std::cerr << "error: " << e.what() << "\n";
    } else {
      nlohmann::json j{{"code", e.code()}, {"message", e.what()},
                       {"context", {{"command", name}}}};
      std::cerr << j.dump() << "\n";
    }
    return 1;
  } catch (const std::exception& e) {
    if (isatty(fileno(stderr))) {
      std::cerr << "internal error: " << e.what() << "\n";
    } else {
      nlohmann::json j{{"code", "internal_error"}, {"message", e.what()},
                       {"context", {{"command", name}}}};
      std::cerr << j.dump() << "\n";
    }
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"follower-map anomaly detection toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "key=value file applied after flags; its settings win");

  IngestArgs ingest_args;
  OptionRegistry ingest_reg;
  auto* ingest = app.add_subcommand("ingest", "validate and normalize a follower list");
  ingest->add_option("--input", ingest_args.input, "follower list file")->required();
  ingest->add_option("--format", ingest_args.format, "jsonl or csv");
  ingest->add_option("--output", ingest_args.output, "write the normalized map here");
  ingest->add_option("--output-format", ingest_args.output_format, "jsonl or csv");
  ingest->add_option("--report", ingest_args.report, "write a load report here");
  ingest_reg.add_string("input", &ingest_args.input);
  ingest_reg.add_string("format", &ingest_args.format);
  ingest_reg.add_string("output", &ingest_args.output);
  ingest_reg.add_string("output-format", &ingest_args.output_format);
  ingest_reg.add_string("report", &ingest_args.report);

  CleanArgs clean_args;
  OptionRegistry clean_reg;
  auto* clean = app.add_subcommand("clean", "remove misplaced followers");
  clean->add_option("--input", clean_args.input)->required();
  clean->add_option("--format", clean_args.format);
  clean->add_option("--output", clean_args.output, "write the cleaned map here");
  clean->add_option("--output-format", clean_args.output_format);
  clean->add_option("--report", clean_args.report, "write the cleaning report here");
  clean->add_option("--jump-threshold-days", clean_args.jump_threshold_days);
  clean->add_option("--lookahead", clean_args.lookahead);
  clean_reg.add_string("input", &clean_args.input);
  clean_reg.add_string("format", &clean_args.format);
  clean_reg.add_string("output", &clean_args.output);
  clean_reg.add_string("output-format", &clean_args.output_format);
  clean_reg.add_string("report", &clean_args.report);
  clean_reg.add_double("jump-threshold-days", &clean_args.jump_threshold_days);
  clean_reg.add_int64("lookahead", &clean_args.lookahead);

  EstimateArgs est_args;
  OptionRegistry est_reg;
  auto* est = app.add_subcommand("estimate-times", "estimate follow times from the envelope");
  est->add_option("--input", est_args.input)->required();
  est->add_option("--format", est_args.format);
  est->add_option("--output", est_args.output, "estimates CSV")->required();
  est->add_option("--truth", est_args.truth, "ground-truth rank,followed_at CSV");
  est->add_option("--error-report", est_args.error_report);
  est->add_option("--per-rank-errors", est_args.per_rank_errors);
  est_reg.add_string("input", &est_args.input);
  est_reg.add_string("format", &est_args.format);
  est_reg.add_string("output", &est_args.output);
  est_reg.add_string("truth", &est_args.truth);
  est_reg.add_string("error-report", &est_args.error_report);
  est_reg.add_string("per-rank-errors", &est_args.per_rank_errors);

  SynthArgs synth_args;
  OptionRegistry synth_reg;
  auto* synth = app.add_subcommand("synth", "simulate maps and inject benchmark cases");
  synth->add_option("--mode", synth_args.mode, "base or grid");
  synth->add_option("--account", synth_args.account);
  synth->add_option("--n", synth_args.n);
  synth->add_option("--start", synth_args.start);
  synth->add_option("--end", synth_args.end);
  synth->add_option("--platform-epoch", synth_args.platform_epoch);
  synth->add_option("--young-fraction", synth_args.young_fraction);
  synth->add_option("--young-window-days", synth_args.young_window_days);
  synth->add_option("--instant-fraction", synth_args.instant_fraction);
  synth->add_option("--instant-window-seconds", synth_args.instant_window_seconds);
  synth->add_option("--output", synth_args.output);
  synth->add_option("--output-format", synth_args.output_format);
  synth->add_option("--truth-out", synth_args.truth_out);
  synth->add_option("--input", synth_args.input, "base map for grid mode");
  synth->add_option("--format", synth_args.format);
  synth->add_option("--outdir", synth_args.outdir);
  synth->add_option("--type1-sizes", synth_args.type1_sizes);
  synth->add_option("--sigmas-days", synth_args.sigmas_days);
  synth->add_option("--type2-totals", synth_args.type2_totals);
  synth->add_option("--replicas", synth_args.replicas);
  synth->add_option("--combined-totals", synth_args.combined_totals);
  synth->add_option("--seed", synth_args.seed)->envname("SEED");
  synth_reg.add_string("mode", &synth_args.mode);
  synth_reg.add_string("account", &synth_args.account);
  synth_reg.add_int64("n", &synth_args.n);
  synth_reg.add_string("start", &synth_args.start);
  synth_reg.add_string("end", &synth_args.end);
  synth_reg.add_string("platform-epoch", &synth_args.platform_epoch);
  synth_reg.add_double("young-fraction", &synth_args.young_fraction);
  synth_reg.add_double("young-window-days", &synth_args.young_window_days);
  synth_reg.add_double("instant-fraction", &synth_args.instant_fraction);
  synth_reg.add_int64("instant-window-seconds", &synth_args.instant_window_seconds);
  synth_reg.add_string("output", &synth_args.output);
  synth_reg.add_string("output-format", &synth_args.output_format);
  synth_reg.add_string("truth-out", &synth_args.truth_out);
  synth_reg.add_string("input", &synth_args.input);
  synth_reg.add_string("format", &synth_args.format);
  synth_reg.add_string("outdir", &synth_args.outdir);
  synth_reg.add_string("type1-sizes", &synth_args.type1_sizes);
  synth_reg.add_string("sigmas-days", &synth_args.sigmas_days);
  synth_reg.add_string("type2-totals", &synth_args.type2_totals);
  synth_reg.add_string("replicas", &synth_args.replicas);
  synth_reg.add_string("combined-totals", &synth_args.combined_totals);
  synth_reg.add_uint64("seed", &synth_args.seed);

  FeaturesArgs feat_args;
  OptionRegistry feat_reg;
  auto* feat = app.add_subcommand("features", "per-follower neighborhood features");
  feat->add_option("--input", feat_args.input)->required();
  feat->add_option("--format", feat_args.format);
  feat->add_option("--window", feat_args.window);
  feat->add_flag("--standardize", feat_args.standardize_flag);
  feat->add_option("--output", feat_args.output)->required();
  feat_reg.add_string("input", &feat_args.input);
  feat_reg.add_string("format", &feat_args.format);
  feat_reg.add_int64("window", &feat_args.window);
  feat_reg.add_bool("standardize", &feat_args.standardize_flag);
  feat_reg.add_string("output", &feat_args.output);

  ScoreArgs score_args;
  OptionRegistry score_reg;
  auto* score = app.add_subcommand("score", "score followers with one detector");
  score->add_option("--input", score_args.input)->required();
  score->add_option("--format", score_args.format);
  score->add_option("--method", score_args.method, "sh, if, lof, ecod, or gen2out")
      ->required();
  score->add_option("--window", score_args.window);
  score->add_option("--bins", score_args.bins);
  score->add_option("--stride", score_args.stride);
  score->add_option("--seed", score_args.seed)->envname("SEED");
  score->add_option("--trees", score_args.trees);
  score->add_option("--subsample", score_args.subsample);
  score->add_option("--min-pts", score_args.min_pts, "0 = derive from fraction");
  score->add_option("--min-pts-fraction", score_args.min_pts_fraction);
  score->add_option("--max-depth", score_args.max_depth);
  score->add_option("--gen2out-trees", score_args.gen2out_trees);
  score->add_option("--output", score_args.output)->required();
  score_reg.add_string("input", &score_args.input);
  score_reg.add_string("format", &score_args.format);
  score_reg.add_string("method", &score_args.method);
  score_reg.add_int64("window", &score_args.window);
  score_reg.add_int("bins", &score_args.bins);
  score_reg.add_int64("stride", &score_args.stride);
  score_reg.add_uint64("seed", &score_args.seed);
  score_reg.add_int64("trees", &score_args.trees);
  score_reg.add_int64("subsample", &score_args.subsample);
  score_reg.add_int64("min-pts", &score_args.min_pts);
  score_reg.add_double("min-pts-fraction", &score_args.min_pts_fraction);
  score_reg.add_int64("max-depth", &score_args.max_depth);
  score_reg.add_int64("gen2out-trees", &score_args.gen2out_trees);
  score_reg.add_string("output", &score_args.output);

  BenchArgs bench_args;
  OptionRegistry bench_reg;
  auto* bench = app.add_subcommand("bench", "run detectors over a case directory");
  bench->add_option("--cases", bench_args.cases_dir)->required();
  bench->add_option("--methods", bench_args.methods);
  bench->add_option("--windows", bench_args.windows);
  bench->add_option("--bins", bench_args.bins);
  bench->add_option("--stride", bench_args.stride);
  bench->add_option("--p-at", bench_args.p_at);
  bench->add_option("--seed", bench_args.seed)->envname("SEED");
  bench->add_option("--threads", bench_args.threads, "0 = all cores");
  bench->add_option("--output", bench_args.output, "summary CSV");
  bench->add_option("--per-case", bench_args.per_case, "per-case metrics CSV");
  bench_reg.add_string("cases", &bench_args.cases_dir);
  bench_reg.add_string("methods", &bench_args.methods);
  bench_reg.add_string("windows", &bench_args.windows);
  bench_reg.add_int("bins", &bench_args.bins);
  bench_reg.add_int64("stride", &bench_args.stride);
  bench_reg.add_int64("p-at", &bench_args.p_at);
  bench_reg.add_uint64("seed", &bench_args.seed);
  bench_reg.add_int64("threads", &bench_args.threads);
  bench_reg.add_string("output", &bench_args.output);
  bench_reg.add_string("per-case", &bench_args.per_case);

  RankArgs rank_args;
  OptionRegistry rank_reg;
  auto* rank = app.add_subcommand("rank-users", "order accounts by follower anomaly");
  rank->add_option("--scores", rank_args.scores_dir, "directory of score CSVs")->required();
  rank->add_option("--mode", rank_args.mode, "mean_all or mean_top_n");
  rank->add_option("--top-n", rank_args.top_n);
  rank->add_option("--output", rank_args.output);
  rank_reg.add_string("scores", &rank_args.scores_dir);
  rank_reg.add_string("mode", &rank_args.mode);
  rank_reg.add_int64("top-n", &rank_args.top_n);
  rank_reg.add_string("output", &rank_args.output);

  NetworkArgs net_args;
  OptionRegistry net_reg;
  auto* net = app.add_subcommand("network", "shared-follower similarity communities");
  net->add_option("--scores", net_args.scores_dir, "directory of score CSVs with ids")
      ->required();
  net->add_option("--similarity-min", net_args.similarity_min);
  net->add_option("--shared-min", net_args.shared_min);
  net->add_option("--resolution", net_args.resolution);
  net->add_option("--seed", net_args.seed)->envname("SEED");
  net->add_option("--edges-out", net_args.edges_out);
  net->add_option("--communities-out", net_args.communities_out);
  net->add_option("--ranking-out", net_args.ranking_out);
  net_reg.add_string("scores", &net_args.scores_dir);
  net_reg.add_double("similarity-min", &net_args.similarity_min);
  net_reg.add_int64("shared-min", &net_args.shared_min);
  net_reg.add_double("resolution", &net_args.resolution);
  net_reg.add_uint64("seed", &net_args.seed);
  net_reg.add_string("edges-out", &net_args.edges_out);
  net_reg.add_string("communities-out", &net_args.communities_out);
  net_reg.add_string("ranking-out", &net_args.ranking_out);

  HeatmapArgs heat_args;
  OptionRegistry heat_reg;
  auto* heat = app.add_subcommand("heatmap", "rank-by-creation-date grid export");
  heat->add_option("--input", heat_args.input)->required();
  heat->add_option("--format", heat_args.format);
  heat->add_option("--kind", heat_args.kind,
                   "count, mean_anomaly_score, or shared_follower_ratio");
  heat->add_option("--nx", heat_args.nx);
  heat->add_option("--ny", heat_args.ny);
  heat->add_option("--scores", heat_args.scores);
  heat->add_option("--shared-ids", heat_args.shared_ids);
  heat->add_option("--output", heat_args.output)->required();
  heat_reg.add_string("input", &heat_args.input);
  heat_reg.add_string("format", &heat_args.format);
  heat_reg.add_string("kind", &heat_args.kind);
  heat_reg.add_int("nx", &heat_args.nx);
  heat_reg.add_int("ny", &heat_args.ny);
  heat_reg.add_string("scores", &heat_args.scores);
  heat_reg.add_string("shared-ids", &heat_args.shared_ids);
  heat_reg.add_string("output", &heat_args.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    if (isatty(fileno(stderr))) return app.exit(e);
    nlohmann::json j{{"code", "cli_parse_error"}, {"message", e.what()},
                     {"context", {{"command", "parse"}}}};
    std::cerr << j.dump() << "\n";
    return e.get_exit_code();
  }

  const std::map<std::string, const OptionRegistry*> registries{
      {"ingest", &ingest_reg},   {"clean", &clean_reg},     {"estimate-times", &est_reg},
      {"synth", &synth_reg},     {"features", &feat_reg},   {"score", &score_reg},
      {"bench", &bench_reg},     {"rank-users", &rank_reg}, {"network", &net_reg},
      {"heatmap", &heat_reg}};

  CLI::App* sub = app.get_subcommands().front();
  if (!config_path.empty()) {
    const int rc = run_subcommand(sub->get_name(), [&] {
      registries.at(sub->get_name())->apply_file(config_path);
    });
    if (rc != 0) return rc;
  }

  if (sub == ingest) return run_subcommand("ingest", [&] { cmd_ingest(ingest_args); });
  if (sub == clean) return run_subcommand("clean", [&] { cmd_clean(clean_args); });
  if (sub == est) return run_subcommand("estimate-times", [&] { cmd_estimate_times(est_args); });
  if (sub == synth) return run_subcommand("synth", [&] { cmd_synth(synth_args); });
  if (sub == feat) return run_subcommand("features", [&] { cmd_features(feat_args); });
  if (sub == score) return run_subcommand("score", [&] { cmd_score(score_args); });
  if (sub == bench) return run_subcommand("bench", [&] { cmd_bench(bench_args); });
  if (sub == rank) return run_subcommand("rank-users", [&] { cmd_rank_users(rank_args); });
  if (sub == net) return run_subcommand("network", [&] { cmd_network(net_args); });
  if (sub == heat) return run_subcommand("heatmap", [&] { cmd_heatmap(heat_args); });
  return 1;
}
