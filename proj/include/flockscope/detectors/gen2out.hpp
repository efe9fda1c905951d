#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "flockscope/detectors/detail/itree.hpp"
#include "flockscope/error.hpp"
#include "flockscope/features.hpp"
#include "flockscope/rng.hpp"
#include "flockscope/scored.hpp"

namespace flockscope {

struct Gen2OutOptions {
  int max_depth = 10;
  int n_trees = 100;
  int fit_trees_per_size = 5;
};

namespace detail {

// How fast isolation depth grows with subset size for THIS dataset: fully
// grown trees on subsets of doubling sizes give (log2 size, mean leaf depth)
// observations, and the through-origin least-squares slope turns any leaf
// population into an expected extra depth H(x) = slope * log2(x). The origin
// constraint pins H(1) = 0: a leaf holding one point needs no extra depth.
struct DepthRateModel {
  double slope = 0.0;

  double operator()(double size) const {
    return size <= 1.0 ? 0.0 : slope * std::log2(size);
  }
};

inline DepthRateModel fit_depth_rate(const FeatureMatrix& fm,
                                     const std::vector<std::int32_t>& canonical,
                                     const Gen2OutOptions& opts, std::uint64_t seed) {
  const std::int64_t n = fm.rows();
  std::vector<std::int64_t> sizes;
  for (std::int64_t s = n >= 16 ? 16 : 2; s <= n; s *= 2) sizes.push_back(s);
  if (sizes.empty()) sizes.push_back(n);

  double sxx = 0.0, sxy = 0.0;
  std::vector<std::int32_t> sample;
  std::uint64_t stream = 0;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::int64_t s = sizes[si];
    const double x = std::log2(static_cast<double>(s));
    for (int t = 0; t < opts.fit_trees_per_size; ++t) {
      Rng rng(derive_seed(seed, 1, stream++));
      sample = canonical;
      rng.shuffle_prefix(sample, static_cast<std::size_t>(s));
      sample.resize(s);
      const IsolationTree tree = grow_isolation_tree(fm, sample, rng, -1);
      std::int64_t depth_total = 0;
      for (const TreeNode& node : tree.nodes)
        if (node.feature < 0) depth_total += static_cast<std::int64_t>(node.depth) * node.size;
      const double y = static_cast<double>(depth_total) / static_cast<double>(s);
      sxx += x * x;
      sxy += x * y;
    }
  }

  DepthRateModel model;
  model.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  if (model.slope <= 0.0)
    throw ValidationError(
        "depth-rate fit degenerate: subsets never split (are all rows identical?)");
  return model;
}

}  // namespace detail

// Depth-capped isolation forest: trees grow on every row but stop at
// max_depth, and a point landing in a populated leaf is charged the leaf depth
// plus the fitted expected depth of isolating it among leaf_size points. The
// same fitted curve normalizes the final score, so a typical point lands near
// 2^-1.
inline ScoredFollowers gen2out_score(const FeatureMatrix& fm,
                                     const Gen2OutOptions& opts, std::uint64_t seed) {
  const std::int64_t n = fm.rows();
  if (n < 2) throw ValidationError("gen2out needs at least two rows");
  if (opts.max_depth < 1 || opts.n_trees < 1 || opts.fit_trees_per_size < 1)
    throw ConfigError("gen2out: max_depth, n_trees, and fit_trees_per_size must be positive");

  const std::vector<std::int32_t> canonical = detail::canonical_order(fm);
  const detail::DepthRateModel depth_rate =
      detail::fit_depth_rate(fm, canonical, opts, seed);

  std::vector<double> depth_sum(n, 0.0);
  std::vector<std::int32_t> idx;
  for (int t = 0; t < opts.n_trees; ++t) {
    Rng rng(derive_seed(seed, 2, static_cast<std::uint64_t>(t)));
    idx = canonical;
    const detail::IsolationTree tree =
        detail::grow_isolation_tree(fm, idx, rng, opts.max_depth);
    for (std::int64_t r = 0; r < n; ++r) {
      const detail::TreeNode& leaf = tree.locate(fm.row(r));
      depth_sum[r] += static_cast<double>(leaf.depth) +
                      depth_rate(static_cast<double>(leaf.size));
    }
  }

  const double denom = depth_rate(static_cast<double>(n));
  ScoredFollowers out;
  out.method = Method::gen2out;
  out.seed = seed;
  out.params = {{"max_depth", static_cast<double>(opts.max_depth)},
                {"n_trees", static_cast<double>(opts.n_trees)},
                {"depth_rate_slope", depth_rate.slope}};
  out.scores.resize(n);
  for (std::int64_t r = 0; r < n; ++r)
    out.scores[r] = std::exp2(-depth_sum[r] / static_cast<double>(opts.n_trees) / denom);
  out.check_finite();
  return out;
}

}  // namespace flockscope
