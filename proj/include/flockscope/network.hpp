#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "flockscope/csvio.hpp"
#include "flockscope/error.hpp"
#include "flockscope/follower_map.hpp"
#include "flockscope/rng.hpp"
#include "flockscope/scored.hpp"
#include "flockscope/stats.hpp"

namespace flockscope {

// Scores keyed by follower identity, so accounts can be compared through the
// followers they share.
struct ScoredAccount {
  std::string account_id;
  std::vector<std::string> follower_ids;
  std::vector<double> scores;
};

inline ScoredAccount make_scored_account(const FollowerMap& map,
                                         const ScoredFollowers& scored) {
  if (map.size() != static_cast<std::int64_t>(scored.scores.size()))
    throw ValidationError("score vector does not match map size for '" +
                          map.account_id + "'");
  ScoredAccount out;
  out.account_id = map.account_id;
  out.follower_ids.reserve(map.followers.size());
  for (const auto& r : map.followers) out.follower_ids.push_back(r.follower_id);
  out.scores = scored.scores;
  return out;
}

struct SharedFollowerEdge {
  std::string account_a, account_b;
  std::int64_t n_shared = 0;
  double similarity = 0.0;             // cosine over the shared followers' scores
  double pairwise_mean_anomaly = 0.0;  // mean score of the shared followers, both sides
};

namespace detail {

// Follower ids with their row index, sorted by id: set intersection becomes a
// linear merge and the shared score vectors align canonically.
inline std::vector<std::pair<std::string, std::int32_t>> sorted_id_index(
    const ScoredAccount& a) {
  std::vector<std::pair<std::string, std::int32_t>> v;
  v.reserve(a.follower_ids.size());
  for (std::size_t i = 0; i < a.follower_ids.size(); ++i)
    v.emplace_back(a.follower_ids[i], static_cast<std::int32_t>(i));
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace detail

// No edge is produced when the accounts share no followers or when either
// shared-score vector has zero norm (cosine undefined).
inline std::optional<SharedFollowerEdge> compute_shared_edge(const ScoredAccount& a,
                                                             const ScoredAccount& b) {
  const auto ia = detail::sorted_id_index(a);
  const auto ib = detail::sorted_id_index(b);
  double dot = 0.0, na = 0.0, nb = 0.0, score_sum = 0.0;
  std::int64_t shared = 0;
  std::size_t p = 0, q = 0;
  while (p < ia.size() && q < ib.size()) {
    const int cmp = ia[p].first.compare(ib[q].first);
    if (cmp < 0) {
      ++p;
    } else if (cmp > 0) {
      ++q;
    } else {
      const double x = a.scores[ia[p].second];
      const double y = b.scores[ib[q].second];
      dot += x * y;
      na += x * x;
      nb += y * y;
      score_sum += x + y;
      ++shared;
      ++p;
      ++q;
    }
  }
  if (shared == 0 || na <= 0.0 || nb <= 0.0) return std::nullopt;
  SharedFollowerEdge e;
  e.account_a = a.account_id;
  e.account_b = b.account_id;
  e.n_shared = shared;
  e.similarity = dot / (std::sqrt(na) * std::sqrt(nb));
  e.pairwise_mean_anomaly = score_sum / static_cast<double>(2 * shared);
  return e;
}

struct SimilarityNetwork {
  std::vector<std::string> nodes;        // all account ids, including isolated ones
  std::vector<SharedFollowerEdge> edges;
  std::vector<int> community;            // per node; -1 until detected
  double similarity_min = 0.75;
  std::int64_t shared_min = 100;

  std::int64_t node_index(const std::string& id) const {
    const auto it = std::find(nodes.begin(), nodes.end(), id);
    if (it == nodes.end()) throw ValidationError("unknown account '" + id + "'");
    return it - nodes.begin();
  }
};

inline SimilarityNetwork build_network(const std::vector<ScoredAccount>& accounts,
                                       double similarity_min = 0.75,
                                       std::int64_t shared_min = 100) {
  if (accounts.size() < 2)
    throw ValidationError("a similarity network needs at least two accounts");
  SimilarityNetwork net;
  net.similarity_min = similarity_min;
  net.shared_min = shared_min;
  for (const auto& a : accounts) {
    if (std::find(net.nodes.begin(), net.nodes.end(), a.account_id) != net.nodes.end())
      throw ValidationError("duplicate account '" + a.account_id + "'");
    net.nodes.push_back(a.account_id);
  }
  for (std::size_t i = 0; i < accounts.size(); ++i)
    for (std::size_t j = i + 1; j < accounts.size(); ++j) {
      auto e = compute_shared_edge(accounts[i], accounts[j]);
      if (e && e->similarity >= similarity_min && e->n_shared >= shared_min)
        net.edges.push_back(std::move(*e));
    }
  net.community.assign(net.nodes.size(), -1);
  return net;
}

namespace detail {

// Louvain with the usual two phases: greedy local moves in a seed-shuffled
// node order, then aggregation of communities into supernodes, repeated until
// a level makes no move. Community labels are renumbered by first appearance
// in node order, so equal seeds give identical output.
inline std::vector<int> louvain_communities(std::int64_t n,
                                            const std::vector<std::int64_t>& edge_a,
                                            const std::vector<std::int64_t>& edge_b,
                                            const std::vector<double>& edge_w,
                                            std::uint64_t seed, double resolution) {
  std::vector<std::int64_t> node_of(n);   // current supernode of each original node
  std::iota(node_of.begin(), node_of.end(), 0);

  std::vector<std::int64_t> ca = edge_a, cb = edge_b;
  std::vector<double> cw = edge_w;
  std::int64_t n_super = n;
  Rng rng(seed);

  for (int level = 0; level < 64; ++level) {
    // Adjacency of the current supernode graph; self-loops kept separate.
    std::vector<std::vector<std::pair<std::int64_t, double>>> adj(n_super);
    std::vector<double> self_loop(n_super, 0.0);
    double total_weight = 0.0;  // sum over undirected edges, self-loops once
    for (std::size_t e = 0; e < cw.size(); ++e) {
      total_weight += cw[e];
      if (ca[e] == cb[e]) {
        self_loop[ca[e]] += cw[e];
      } else {
        adj[ca[e]].emplace_back(cb[e], cw[e]);
        adj[cb[e]].emplace_back(ca[e], cw[e]);
      }
    }
    if (total_weight <= 0.0) break;

    std::vector<double> degree(n_super, 0.0);  // self-loops count twice
    for (std::int64_t u = 0; u < n_super; ++u) {
      degree[u] = 2.0 * self_loop[u];
      for (const auto& [v, w] : adj[u]) degree[u] += w;
    }

    std::vector<std::int64_t> comm(n_super);
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<double> tot(degree);  // total degree per community

    std::vector<std::int64_t> order(n_super);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    bool any_move = false;
    bool improved = true;
    std::vector<double> w_to_comm(n_super, 0.0);
    while (improved) {
      improved = false;
      for (std::int64_t u : order) {
        const std::int64_t old_c = comm[u];
        std::vector<std::int64_t> touched;
        for (const auto& [v, w] : adj[u]) {
          const std::int64_t c = comm[v];
          if (w_to_comm[c] == 0.0) touched.push_back(c);
          w_to_comm[c] += w;
        }
        tot[old_c] -= degree[u];

        // A move needs a strictly better gain than staying; among equally
        // good destinations the smallest community id wins. Ties with the
        // current community never move, so passes cannot oscillate.
        std::int64_t best_c = old_c;
        double best_gain =
            w_to_comm[old_c] - resolution * degree[u] * tot[old_c] / (2.0 * total_weight);
        for (std::int64_t c : touched) {
          if (c == old_c) continue;
          const double gain =
              w_to_comm[c] - resolution * degree[u] * tot[c] / (2.0 * total_weight);
          if (gain > best_gain + 1e-12) {
            best_gain = gain;
            best_c = c;
          } else if (best_c != old_c && std::abs(gain - best_gain) <= 1e-12 &&
                     c < best_c) {
            best_c = c;
          }
        }
        tot[best_c] += degree[u];
        comm[u] = best_c;
        if (best_c != old_c) {
          improved = true;
          any_move = true;
        }
        for (std::int64_t c : touched) w_to_comm[c] = 0.0;
        w_to_comm[old_c] = 0.0;
      }
    }
    if (!any_move) break;

    // Renumber communities compactly and aggregate.
    std::vector<std::int64_t> remap(n_super, -1);
    std::int64_t next_id = 0;
    for (std::int64_t u = 0; u < n_super; ++u)
      if (remap[comm[u]] < 0) remap[comm[u]] = next_id++;
    for (std::int64_t u = 0; u < n_super; ++u) comm[u] = remap[comm[u]];
    for (auto& s : node_of) s = comm[s];

    std::map<std::pair<std::int64_t, std::int64_t>, double> merged;
    for (std::size_t e = 0; e < cw.size(); ++e) {
      std::int64_t x = comm[ca[e]], y = comm[cb[e]];
      if (x > y) std::swap(x, y);
      merged[{x, y}] += cw[e];
    }
    ca.clear();
    cb.clear();
    cw.clear();
    for (const auto& [key, w] : merged) {
      ca.push_back(key.first);
      cb.push_back(key.second);
      cw.push_back(w);
    }
    n_super = next_id;
    if (n_super <= 1) break;
  }

  // Canonical labels: first appearance over original node order.
  std::vector<int> labels(n, -1);
  std::unordered_map<std::int64_t, int> relabel;
  int next_label = 0;
  for (std::int64_t u = 0; u < n; ++u) {
    auto [it, inserted] = relabel.try_emplace(node_of[u], next_label);
    if (inserted) ++next_label;
    labels[u] = it->second;
  }
  return labels;
}

}  // namespace detail

inline void detect_communities(SimilarityNetwork& net, std::uint64_t seed,
                               double resolution = 1.0) {
  if (net.nodes.empty()) throw ValidationError("cannot partition an empty network");
  std::vector<std::int64_t> ea, eb;
  std::vector<double> ew;
  for (const auto& e : net.edges) {
    ea.push_back(net.node_index(e.account_a));
    eb.push_back(net.node_index(e.account_b));
    ew.push_back(e.similarity);
  }
  net.community = detail::louvain_communities(
      static_cast<std::int64_t>(net.nodes.size()), ea, eb, ew, seed, resolution);
}

struct CommunityRank {
  int community = -1;
  std::int64_t n_members = 0;
  double score = 0.0;  // mean pairwise_mean_anomaly over intra-community edges
};

// Communities ordered by how anomalous the followers shared inside them look.
// Communities without internal edges (singletons) score 0 and sort last; ties
// break toward the smaller community label.
inline std::vector<CommunityRank> rank_communities(const SimilarityNetwork& net) {
  if (net.community.empty() ||
      std::any_of(net.community.begin(), net.community.end(),
                  [](int c) { return c < 0; }))
    throw ValidationError("communities have not been detected yet");

  std::map<int, CommunityRank> by_label;
  for (std::size_t u = 0; u < net.nodes.size(); ++u) {
    auto& cr = by_label[net.community[u]];
    cr.community = net.community[u];
    ++cr.n_members;
  }
  std::map<int, std::pair<double, std::int64_t>> sums;
  for (const auto& e : net.edges) {
    const int c1 = net.community[net.node_index(e.account_a)];
    const int c2 = net.community[net.node_index(e.account_b)];
    if (c1 == c2) {
      sums[c1].first += e.pairwise_mean_anomaly;
      sums[c1].second += 1;
    }
  }
  std::vector<CommunityRank> out;
  for (auto& [label, cr] : by_label) {
    const auto it = sums.find(label);
    if (it != sums.end() && it->second.second > 0)
      cr.score = it->second.first / static_cast<double>(it->second.second);
    out.push_back(cr);
  }
  std::sort(out.begin(), out.end(), [](const CommunityRank& a, const CommunityRank& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.community < b.community;
  });
  return out;
}

enum class AccountRankMode { mean_all, mean_top_n };

inline AccountRankMode parse_rank_mode(const std::string& name) {
  if (name == "mean_all") return AccountRankMode::mean_all;
  if (name == "mean_top_n") return AccountRankMode::mean_top_n;
  throw ConfigError("unknown ranking mode '" + name +
                    "' (expected mean_all or mean_top_n)");
}

struct AccountRank {
  std::string account_id;
  double score = 0.0;
};

// Accounts ordered by the average anomaly score of their followers — all of
// them, or only the top_n highest-scored (clamped to the follower count).
inline std::vector<AccountRank> rank_accounts(const std::vector<ScoredAccount>& accounts,
                                              AccountRankMode mode,
                                              std::int64_t top_n = 1000) {
  if (accounts.empty()) throw ValidationError("no accounts to rank");
  if (top_n < 1) throw ConfigError("rank_accounts: top_n must be positive");
  std::vector<AccountRank> out;
  for (const auto& a : accounts) {
    if (a.scores.empty())
      throw ValidationError("account '" + a.account_id + "' has no scores");
    AccountRank r;
    r.account_id = a.account_id;
    if (mode == AccountRankMode::mean_all) {
      r.score = mean(a.scores);
    } else {
      std::vector<double> top = a.scores;
      const std::int64_t k = std::min<std::int64_t>(top_n, static_cast<std::int64_t>(top.size()));
      std::nth_element(top.begin(), top.begin() + (k - 1), top.end(),
                       [](double x, double y) { return x > y; });
      top.resize(k);
      r.score = mean(top);
    }
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const AccountRank& a, const AccountRank& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.account_id < b.account_id;
  });
  return out;
}

inline void write_edges_csv(const SimilarityNetwork& net, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "account_a,account_b,n_shared,similarity,pairwise_mean_anomaly\n";
  for (const auto& e : net.edges) {
    check_csv_safe(e.account_a, "account_id");
    check_csv_safe(e.account_b, "account_id");
    out << e.account_a << ',' << e.account_b << ',' << e.n_shared << ','
        << format_double(e.similarity) << ',' << format_double(e.pairwise_mean_anomaly)
        << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline void write_communities_csv(const SimilarityNetwork& net, const std::string& path) {
  if (net.community.size() != net.nodes.size())
    throw ValidationError("communities have not been detected yet");
  std::ofstream out = open_output(path);
  out << "account_id,community\n";
  for (std::size_t u = 0; u < net.nodes.size(); ++u) {
    check_csv_safe(net.nodes[u], "account_id");
    out << net.nodes[u] << ',' << net.community[u] << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace flockscope
