#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "flockscope/detectors/detail/itree.hpp"
#include "flockscope/error.hpp"
#include "flockscope/features.hpp"
#include "flockscope/rng.hpp"
#include "flockscope/scored.hpp"

namespace flockscope {

struct IsolationForestOptions {
  int n_trees = 200;
  int subsample = 256;  // clamped to the number of rows when larger
};

// Classic isolation forest over the feature rows. Tree t draws from an rng
// seeded with derive_seed(seed, t): first the subsample (one draw per sampled
// slot via partial Fisher-Yates over the canonical order), then the splits.
inline ScoredFollowers isolation_forest_score(const FeatureMatrix& fm,
                                              const IsolationForestOptions& opts,
                                              std::uint64_t seed) {
  const std::int64_t n = fm.rows();
  if (n < 1) throw ValidationError("isolation forest needs at least one row");
  if (opts.n_trees < 1) throw ConfigError("isolation forest: n_trees must be positive");
  if (opts.subsample < 1) throw ConfigError("isolation forest: subsample must be positive");

  const std::int32_t m = static_cast<std::int32_t>(
      std::min<std::int64_t>(opts.subsample, n));
  const int depth_cap =
      m > 1 ? static_cast<int>(std::ceil(std::log2(static_cast<double>(m)))) : 0;
  const std::vector<std::int32_t> canonical = detail::canonical_order(fm);
  const std::vector<double> c = detail::average_path_lengths(m);

  std::vector<double> depth_sum(n, 0.0);
  std::vector<std::int32_t> sample;
  for (int t = 0; t < opts.n_trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    sample = canonical;
    rng.shuffle_prefix(sample, m);
    sample.resize(m);
    const detail::IsolationTree tree =
        detail::grow_isolation_tree(fm, sample, rng, depth_cap);
    for (std::int64_t r = 0; r < n; ++r) {
      const detail::TreeNode& leaf = tree.locate(fm.row(r));
      depth_sum[r] += static_cast<double>(leaf.depth) + c[leaf.size];
    }
  }

  ScoredFollowers out;
  out.method = Method::isolation_forest;
  out.seed = seed;
  out.params = {{"n_trees", static_cast<double>(opts.n_trees)},
                {"subsample", static_cast<double>(m)}};
  out.scores.resize(n);
  const double denom = c[m];
  for (std::int64_t r = 0; r < n; ++r) {
    const double mean_depth = depth_sum[r] / static_cast<double>(opts.n_trees);
    out.scores[r] = denom > 0.0 ? std::exp2(-mean_depth / denom) : 0.5;
  }
  out.check_finite();
  return out;
}

}  // namespace flockscope
