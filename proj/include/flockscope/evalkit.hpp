#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "flockscope/csvio.hpp"
#include "flockscope/detectors/ecod.hpp"
#include "flockscope/detectors/gen2out.hpp"
#include "flockscope/detectors/isolation_forest.hpp"
#include "flockscope/detectors/lof.hpp"
#include "flockscope/error.hpp"
#include "flockscope/features.hpp"
#include "flockscope/rng.hpp"
#include "flockscope/scored.hpp"
#include "flockscope/sliding_histogram.hpp"
#include "flockscope/stats.hpp"
#include "flockscope/synth.hpp"

namespace flockscope {

// Area under the ROC curve via the Mann-Whitney statistic; tied scores get
// average ranks, so a tie between a positive and a negative counts 1/2.
inline double roc_auc(const std::vector<double>& scores, const std::vector<char>& labels) {
  if (scores.size() != labels.size())
    throw ValidationError("roc_auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::int64_t n_pos = 0;
  for (char l : labels) n_pos += l != 0;
  const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw ValidationError("roc_auc needs both positive and negative labels");

  std::vector<std::int32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::int32_t a, std::int32_t b) { return scores[a] < scores[b]; });

  long double rank_sum_pos = 0.0L;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const long double avg_rank = (static_cast<long double>(i) + static_cast<long double>(j - 1)) / 2.0L + 1.0L;
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]]) rank_sum_pos += avg_rank;
    i = j;
  }
  const long double u = rank_sum_pos - static_cast<long double>(n_pos) *
                                           (static_cast<long double>(n_pos) + 1.0L) / 2.0L;
  return static_cast<double>(u / (static_cast<long double>(n_pos) *
                                  static_cast<long double>(n_neg)));
}

namespace detail {

// Indices sorted by descending score; equal scores keep their input order.
inline std::vector<std::int32_t> descending_order(const std::vector<double>& scores) {
  std::vector<std::int32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int32_t a, std::int32_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace detail

// Mean of precision@k over the positions of the positives in the descending
// score order (ties broken by input position).
inline double average_precision(const std::vector<double>& scores,
                                const std::vector<char>& labels) {
  if (scores.size() != labels.size())
    throw ValidationError("average_precision: scores and labels differ in length");
  const auto order = detail::descending_order(scores);
  std::int64_t hits = 0;
  long double ap = 0.0L;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]]) {
      ++hits;
      ap += static_cast<long double>(hits) / static_cast<long double>(k + 1);
    }
  }
  if (hits == 0) throw ValidationError("average_precision needs at least one positive");
  return static_cast<double>(ap / static_cast<long double>(hits));
}

// Fraction of the k highest-scored records that are labeled positive; k is
// clamped to the number of records.
inline double precision_at_k(const std::vector<double>& scores,
                             const std::vector<char>& labels, std::int64_t k) {
  if (scores.size() != labels.size())
    throw ValidationError("precision_at_k: scores and labels differ in length");
  if (k < 1) throw ConfigError("precision_at_k: k must be positive");
  const auto order = detail::descending_order(scores);
  const std::int64_t kk = std::min<std::int64_t>(k, static_cast<std::int64_t>(order.size()));
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < kk; ++i) hits += labels[order[i]] != 0;
  return static_cast<double>(hits) / static_cast<double>(kk);
}

struct CaseMetrics {
  std::int64_t case_index = 0;
  std::string config_id;
  Method method = Method::sliding_histogram;
  std::int64_t window = 0;
  double auc = 0.0, ap = 0.0, p_at_k = 0.0;
  bool failed = false;
  std::string error;
};

struct MethodSummary {
  Method method = Method::sliding_histogram;
  std::int64_t window = 0;
  std::int64_t n_cases = 0;
  std::int64_t n_failed = 0;
  double auc_mean = 0.0, auc_std = 0.0;
  double ap_mean = 0.0, ap_std = 0.0;
  double p_mean = 0.0, p_std = 0.0;
};

struct BenchmarkReport {
  std::vector<MethodSummary> table;      // window-major, methods in option order
  std::vector<CaseMetrics> per_case;     // case-major, then window, then method
  std::int64_t p_at = 50;
  double elapsed_seconds = 0.0;
};

struct BenchmarkOptions {
  std::vector<Method> methods{Method::sliding_histogram, Method::isolation_forest,
                              Method::lof, Method::ecod, Method::gen2out};
  std::vector<std::int64_t> windows{51, 101, 201};
  int n_bins = 10;
  std::int64_t stride = 1;
  std::int64_t p_at = 50;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = all hardware threads
  IsolationForestOptions forest;
  LofOptions lof;
  Gen2OutOptions gen2out;
};

// Scores every case at every window width with every requested method and
// summarizes per-case metrics as mean (population std). Cases are scored in
// parallel: each (case, window) pair is an independent task whose results land
// in a preassigned slot, so the report does not depend on the thread count. A
// failing method records the error and is excluded from that summary's mean.
inline BenchmarkReport run_benchmark(const std::vector<SyntheticBenchmarkCase>& cases,
                                     const BenchmarkOptions& opts) {
  if (cases.empty()) throw ValidationError("benchmark: no cases supplied");
  if (opts.methods.empty()) throw ConfigError("benchmark: no methods requested");
  if (opts.windows.empty()) throw ConfigError("benchmark: no window widths requested");
  const auto t_start = std::chrono::steady_clock::now();

  const std::int64_t n_cases = static_cast<std::int64_t>(cases.size());
  const std::int64_t n_windows = static_cast<std::int64_t>(opts.windows.size());
  const std::int64_t n_methods = static_cast<std::int64_t>(opts.methods.size());
  const std::int64_t n_tasks = n_cases * n_windows;

  std::vector<CaseMetrics> results(static_cast<std::size_t>(n_tasks) * n_methods);

  // Biggest cases first: better load balance, and the large LOF scratch
  // buffers are less likely to coexist.
  std::vector<std::int64_t> task_order(n_tasks);
  std::iota(task_order.begin(), task_order.end(), 0);
  std::stable_sort(task_order.begin(), task_order.end(),
                   [&](std::int64_t a, std::int64_t b) {
                     return cases[a / n_windows].map.size() > cases[b / n_windows].map.size();
                   });

  auto run_task = [&](std::int64_t task) {
    const std::int64_t case_idx = task / n_windows;
    const std::int64_t w_idx = task % n_windows;
    const SyntheticBenchmarkCase& c = cases[case_idx];
    const std::int64_t window = opts.windows[w_idx];
    const std::vector<char> labels = c.labels();

    FeatureMatrix raw;
    FeatureMatrix standardized;
    bool have_features = false;

    for (std::int64_t m_idx = 0; m_idx < n_methods; ++m_idx) {
      const Method method = opts.methods[m_idx];
      CaseMetrics& cm =
          results[static_cast<std::size_t>(task) * n_methods + m_idx];
      cm.case_index = case_idx;
      cm.config_id = c.config_id;
      cm.method = method;
      cm.window = window;
      try {
        if (method != Method::sliding_histogram && !have_features) {
          raw = compute_features(c.map, static_cast<int>(window));
          standardized = raw;
          standardize(standardized);
          have_features = true;
        }
        const std::uint64_t seed = derive_seed(
            opts.seed, static_cast<std::uint64_t>(case_idx),
            static_cast<std::uint64_t>(w_idx) * 16 + static_cast<std::uint64_t>(m_idx));
        ScoredFollowers scored;
        switch (method) {
          case Method::sliding_histogram:
            scored = score_followers_incremental(
                c.map, {.window_width = window, .n_bins = opts.n_bins,
                        .stride = opts.stride});
            break;
          case Method::isolation_forest:
            scored = isolation_forest_score(standardized, opts.forest, seed);
            break;
          case Method::lof:
            scored = lof_score(standardized, opts.lof);
            break;
          case Method::ecod:
            scored = ecod_score(raw);
            break;
          case Method::gen2out:
            scored = gen2out_score(standardized, opts.gen2out, seed);
            break;
        }
        cm.auc = roc_auc(scored.scores, labels);
        cm.ap = average_precision(scored.scores, labels);
        cm.p_at_k = precision_at_k(scored.scores, labels, opts.p_at);
      } catch (const Error& e) {
        cm.failed = true;
        cm.error = e.what();
      }
    }
  };

  int n_threads = opts.threads > 0
                      ? opts.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = static_cast<int>(std::min<std::int64_t>(n_threads, n_tasks));

  if (n_threads == 1) {
    for (std::int64_t t : task_order) run_task(t);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i)
      pool.emplace_back([&] {
        while (true) {
          const std::int64_t slot = next.fetch_add(1);
          if (slot >= n_tasks) return;
          run_task(task_order[slot]);
        }
      });
    for (auto& th : pool) th.join();
  }

  BenchmarkReport report;
  report.p_at = opts.p_at;
  report.per_case = std::move(results);

  for (std::int64_t w_idx = 0; w_idx < n_windows; ++w_idx)
    for (std::int64_t m_idx = 0; m_idx < n_methods; ++m_idx) {
      MethodSummary s;
      s.method = opts.methods[m_idx];
      s.window = opts.windows[w_idx];
      std::vector<double> auc, ap, p;
      for (std::int64_t c = 0; c < n_cases; ++c) {
        const CaseMetrics& cm =
            report.per_case[static_cast<std::size_t>(c * n_windows + w_idx) * n_methods +
                            m_idx];
        if (cm.failed) {
          ++s.n_failed;
          continue;
        }
        auc.push_back(cm.auc);
        ap.push_back(cm.ap);
        p.push_back(cm.p_at_k);
      }
      s.n_cases = static_cast<std::int64_t>(auc.size());
      if (!auc.empty()) {
        s.auc_mean = mean(auc);
        s.auc_std = population_stddev(auc);
        s.ap_mean = mean(ap);
        s.ap_std = population_stddev(ap);
        s.p_mean = mean(p);
        s.p_std = population_stddev(p);
      }
      report.table.push_back(s);
    }

  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

inline std::string format_results_table(const BenchmarkReport& report) {
  std::string out = "window  method    auc            ap             p@" +
                    std::to_string(report.p_at) + "\n";
  char buf[160];
  for (const MethodSummary& s : report.table) {
    std::snprintf(buf, sizeof(buf), "%-7lld %-9s %.2f (%.2f)    %.2f (%.2f)    %.2f (%.2f)",
                  static_cast<long long>(s.window), method_name(s.method), s.auc_mean,
                  s.auc_std, s.ap_mean, s.ap_std, s.p_mean, s.p_std);
    out += buf;
    if (s.n_failed > 0)
      out += "    [" + std::to_string(s.n_failed) + " failed]";
    out += "\n";
  }
  return out;
}

inline void write_results_csv(const BenchmarkReport& report, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "window,method,n_cases,n_failed,auc_mean,auc_std,ap_mean,ap_std,p_mean,p_std\n";
  for (const MethodSummary& s : report.table)
    out << s.window << ',' << method_name(s.method) << ',' << s.n_cases << ','
        << s.n_failed << ',' << format_double(s.auc_mean) << ','
        << format_double(s.auc_std) << ',' << format_double(s.ap_mean) << ','
        << format_double(s.ap_std) << ',' << format_double(s.p_mean) << ','
        << format_double(s.p_std) << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline void write_per_case_csv(const BenchmarkReport& report, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "case_index,config_id,method,window,auc,ap,p_at_k,failed\n";
  for (const CaseMetrics& cm : report.per_case) {
    out << cm.case_index << ',' << cm.config_id << ',' << method_name(cm.method) << ','
        << cm.window << ',' << format_double(cm.auc) << ',' << format_double(cm.ap)
        << ',' << format_double(cm.p_at_k) << ',' << (cm.failed ? 1 : 0) << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace flockscope
