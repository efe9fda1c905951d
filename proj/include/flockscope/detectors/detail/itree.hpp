#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "flockscope/features.hpp"
#include "flockscope/rng.hpp"

namespace flockscope::detail {

struct TreeNode {
  std::int32_t left = -1, right = -1;
  std::int32_t feature = -1;          // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t size = 0;
  std::int32_t depth = 0;
};

struct IsolationTree {
  std::vector<TreeNode> nodes;

  // Returns the leaf reached by a feature row.
  const TreeNode& locate(const double* row) const {
    std::int32_t cur = 0;
    while (nodes[cur].feature >= 0)
      cur = row[nodes[cur].feature] < nodes[cur].threshold ? nodes[cur].left
                                                           : nodes[cur].right;
    return nodes[cur];
  }
};

// Random axis-aligned splitting of the rows named by idx: pick a feature
// uniformly among those not constant in the subset, then a threshold uniformly
// within its range. Stops at single rows, constant subsets, degenerate splits,
// or depth_cap (pass -1 for unbounded growth). Draw order is preorder,
// left child first: one index draw plus one threshold draw per internal node.
inline IsolationTree grow_isolation_tree(const FeatureMatrix& fm,
                                         std::span<std::int32_t> idx, Rng& rng,
                                         int depth_cap) {
  IsolationTree tree;
  tree.nodes.reserve(idx.size() * 2);

  struct Frame {
    std::int64_t begin, end;
    std::int32_t depth;
    std::int32_t node;
  };

  const int cols = FeatureMatrix::kColumns;
  tree.nodes.push_back({});
  std::vector<Frame> pending{{0, static_cast<std::int64_t>(idx.size()), 0, 0}};

  // Explicit stack; popping from the back visits left subtrees before right
  // ones, so push right first.
  while (!pending.empty()) {
    const Frame f = pending.back();
    pending.pop_back();
    TreeNode& node = tree.nodes[f.node];
    node.size = static_cast<std::int32_t>(f.end - f.begin);
    node.depth = f.depth;

    if (node.size <= 1 || (depth_cap >= 0 && f.depth >= depth_cap)) continue;

    double mins[FeatureMatrix::kColumns], maxs[FeatureMatrix::kColumns];
    for (int c = 0; c < cols; ++c) {
      mins[c] = std::numeric_limits<double>::infinity();
      maxs[c] = -std::numeric_limits<double>::infinity();
    }
    for (std::int64_t i = f.begin; i < f.end; ++i) {
      const double* row = fm.row(idx[i]);
      for (int c = 0; c < cols; ++c) {
        mins[c] = std::min(mins[c], row[c]);
        maxs[c] = std::max(maxs[c], row[c]);
      }
    }
    int eligible[FeatureMatrix::kColumns];
    int n_eligible = 0;
    for (int c = 0; c < cols; ++c)
      if (maxs[c] > mins[c]) eligible[n_eligible++] = c;
    if (n_eligible == 0) continue;  // all rows identical

    const int feature = eligible[rng.uniform_int(0, n_eligible - 1)];
    const double threshold = rng.uniform_real(mins[feature], maxs[feature]);

    auto* base = idx.data();
    auto* mid = std::partition(base + f.begin, base + f.end, [&](std::int32_t r) {
      return fm.at(r, feature) < threshold;
    });
    const std::int64_t split = mid - base;
    if (split == f.begin || split == f.end) continue;  // no progress; stop here

    const std::int32_t left = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.push_back({});
    TreeNode& self = tree.nodes[f.node];  // reference may have moved
    self.feature = feature;
    self.threshold = threshold;
    self.left = left;
    self.right = left + 1;
    pending.push_back({split, f.end, f.depth + 1, left + 1});
    pending.push_back({f.begin, split, f.depth + 1, left});
  }
  return tree;
}

// Indices sorted by feature values; sampling through this view makes the
// chosen value multiset — and therefore every score — independent of the
// input row order.
inline std::vector<std::int32_t> canonical_order(const FeatureMatrix& fm) {
  std::vector<std::int32_t> order(fm.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return std::lexicographical_compare(fm.row(a), fm.row(a) + FeatureMatrix::kColumns,
                                        fm.row(b), fm.row(b) + FeatureMatrix::kColumns);
  });
  return order;
}

// Average depth of an unsuccessful BST search among m points; the standard
// path-length normalizer. Exact harmonic sums, no approximation.
inline std::vector<double> average_path_lengths(std::int32_t max_size) {
  std::vector<double> c(static_cast<std::size_t>(max_size) + 1, 0.0);
  std::vector<double> harmonic(static_cast<std::size_t>(max_size) + 1, 0.0);
  for (std::int32_t i = 1; i <= max_size; ++i)
    harmonic[i] = harmonic[i - 1] + 1.0 / static_cast<double>(i);
  for (std::int32_t m = 2; m <= max_size; ++m)
    c[m] = 2.0 * harmonic[m - 1] -
           2.0 * static_cast<double>(m - 1) / static_cast<double>(m);
  return c;
}

}  // namespace flockscope::detail
