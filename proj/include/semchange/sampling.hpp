#pragma once

// Round-based edge sampling for usage-graph annotation.
//
// Round 1 explores a small node sample densely. Later rounds combine
// unclustered uses with every multi-cluster they were not compared to,
// explore among non-assignable uses, re-annotate disagreements, resample
// around clustering conflicts and add a few confirmation edges. Sampling
// stops once every pair of clusters shares an annotated edge.

#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semchange/clustering.hpp"
#include "semchange/common.hpp"
#include "semchange/graph.hpp"

namespace semchange {

enum class PairReason { Explore, Combine, Disagree, Conflict, Confirm };

inline std::string_view to_string(PairReason r) {
  switch (r) {
    case PairReason::Explore: return "explore";
    case PairReason::Combine: return "combine";
    case PairReason::Disagree: return "disagree";
    case PairReason::Conflict: return "conflict";
    case PairReason::Confirm: return "confirm";
  }
  return "?";
}

inline PairReason parse_reason(std::string_view s) {
  for (auto r : {PairReason::Explore, PairReason::Combine, PairReason::Disagree, PairReason::Conflict,
                 PairReason::Confirm})
    if (to_string(r) == s) return r;
  throw Error("unknown pair reason '" + std::string(s) + "'");
}

struct PlannedPair {
  NodePair pair;
  std::vector<std::string> annotators;
  PairReason reason = PairReason::Explore;

  friend bool operator==(const PlannedPair&, const PlannedPair&) = default;
};

struct RoundPlan {
  int round = 1;
  std::vector<PlannedPair> items;

  std::vector<NodePair> pairs() const {
    std::vector<NodePair> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.pair);
    return out;
  }

  friend bool operator==(const RoundPlan&, const RoundPlan&) = default;
};

struct SamplerConfig {
  double node_fraction = 0.10;
  std::size_t min_round_one_nodes = 5;
  double edge_fraction = 0.30;
  double confirm_fraction = 0.02;
  std::vector<std::string> roster;
  double multi_annotation_rate = 0.5;
  int max_rounds = 5;

  void validate() const {
    auto frac = [](double f, const char* name) {
      if (!(f > 0.0 && f <= 1.0)) throw Error(std::string(name) + " must lie in (0,1]");
    };
    frac(node_fraction, "node_fraction");
    frac(edge_fraction, "edge_fraction");
    frac(confirm_fraction, "confirm_fraction");
    if (!(multi_annotation_rate >= 0.0 && multi_annotation_rate <= 1.0))
      throw Error("multi_annotation_rate must lie in [0,1]");
    if (max_rounds < 1) throw Error("max_rounds must be >= 1");
  }
};

struct SamplerState {
  UsageGraph graph;
  Clustering clustering;
  int round = 1;
  SamplerConfig config;
};

// ceil(fraction * count), robust to products like 0.3 * 190 = 57.000000000000007.
inline std::size_t ceil_share(double fraction, std::size_t count) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(count) - 1e-9));
}

inline std::size_t pair_count(std::size_t m) { return m < 2 ? 0 : m * (m - 1) / 2; }

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[a] = b;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Random walk over `nodes` that links every node into one component (edges
// already present in `graph` count towards connectivity), then random new
// pairs until `budget` pairs were emitted. Never emits a pair that already
// has an edge record.
inline std::vector<NodePair> exploration_walk(const std::vector<std::string>& nodes, const UsageGraph* graph,
                                              std::size_t budget, Rng& rng) {
  std::vector<NodePair> out;
  const std::size_t m = nodes.size();
  if (m < 2) return out;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m; ++i) index[nodes[i]] = i;
  UnionFind uf(m);
  std::set<NodePair> taken;
  if (graph) {
    for (std::size_t i = 0; i < m; ++i) {
      for (const auto& nb : graph->neighbors(nodes[i])) {
        auto it = index.find(nb);
        if (it == index.end()) continue;
        taken.insert(NodePair(nodes[i], nb));
        if (graph->has_weighted_edge(nodes[i], nb)) uf.unite(i, it->second);
      }
    }
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  for (std::size_t k = 1; k < m; ++k) {
    const std::size_t prev = order[k - 1], cur = order[k];
    if (uf.find(prev) == uf.find(cur)) continue;
    NodePair p(nodes[prev], nodes[cur]);
    if (taken.count(p)) continue;  // unweighted record; linking via it is not possible
    uf.unite(prev, cur);
    taken.insert(p);
    out.push_back(std::move(p));
  }
  // Components still split only through unweighted records: link them directly.
  for (std::size_t k = 1; k < m; ++k) {
    const std::size_t a = order[0], b = order[k];
    if (uf.find(a) == uf.find(b)) continue;
    for (std::size_t c = 0; c < m; ++c) {
      if (uf.find(order[c]) != uf.find(a)) continue;
      NodePair p(nodes[order[c]], nodes[b]);
      if (taken.count(p)) continue;
      uf.unite(a, b);
      taken.insert(p);
      out.push_back(std::move(p));
      break;
    }
  }
  if (out.size() >= budget) return out;
  std::vector<NodePair> candidates;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      NodePair p(nodes[i], nodes[j]);
      if (!taken.count(p)) candidates.push_back(std::move(p));
    }
  std::sort(candidates.begin(), candidates.end());
  shuffle(candidates, rng);
  for (std::size_t k = 0; k < candidates.size() && out.size() < budget; ++k) out.push_back(candidates[k]);
  return out;
}

inline std::vector<std::vector<std::string>> multi_clusters(const UsageGraph& graph, const Clustering& c) {
  std::vector<std::vector<std::string>> out;
  for (auto& members : c.clusters()) {
    std::size_t uses = 0;
    for (const auto& id : members)
      if (graph.has_node(id) && graph.is_use(id)) ++uses;
    if (uses >= 2) out.push_back(std::move(members));
  }
  return out;
}

inline bool compared_to(const UsageGraph& graph, const std::string& id, const std::vector<std::string>& cluster) {
  for (const auto& m : cluster)
    if (graph.has_weighted_edge(id, m)) return true;
  return false;
}

inline bool has_weighted_edge_any(const UsageGraph& graph, const std::string& id) {
  for (const auto& nb : graph.neighbors(id))
    if (graph.has_weighted_edge(id, nb)) return true;
  return false;
}

}  // namespace detail

// Each pair gets one uniformly chosen annotator; independently with
// probability `rate` a second, distinct one.
inline RoundPlan assign_annotators(const std::vector<NodePair>& pairs, const std::vector<std::string>& roster,
                                   double rate, std::uint64_t seed, PairReason reason = PairReason::Explore,
                                   int round = 1) {
  if (roster.empty()) throw Error("assign_annotators: empty roster");
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error("assign_annotators: rate must lie in [0,1]");
  if (rate > 0.0 && roster.size() < 2) throw Error("assign_annotators: multi-annotation needs >= 2 annotators");
  Rng rng(derive_seed(seed, "assign"));
  RoundPlan plan;
  plan.round = round;
  for (const auto& p : pairs) {
    PlannedPair item{p, {}, reason};
    const std::size_t first = uniform_index(rng, roster.size());
    item.annotators.push_back(roster[first]);
    if (uniform_real(rng) < rate) {
      std::size_t second = uniform_index(rng, roster.size() - 1);
      if (second >= first) ++second;
      item.annotators.push_back(roster[second]);
    }
    plan.items.push_back(std::move(item));
  }
  return plan;
}

// The annotators are drawn from cfg.roster; with an empty roster they stay empty.
inline RoundPlan round_one(const std::vector<std::string>& nodes, const SamplerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<std::string> pool(nodes);
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (pool.size() < 2) throw Error("round_one: need at least 2 nodes");
  Rng rng(derive_seed(seed, "round-one"));
  const std::size_t m = std::min(pool.size(), std::max(cfg.min_round_one_nodes, ceil_share(cfg.node_fraction, pool.size())));
  shuffle(pool, rng);
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  const auto pairs = detail::exploration_walk(pool, nullptr, ceil_share(cfg.edge_fraction, pair_count(m)), rng);
  if (cfg.roster.empty()) {
    RoundPlan plan;
    for (const auto& p : pairs) plan.items.push_back({p, {}, PairReason::Explore});
    return plan;
  }
  return assign_annotators(pairs, cfg.roster, cfg.multi_annotation_rate, derive_seed(seed, 1), PairReason::Explore, 1);
}

// One pair per (unclustered use, multi-cluster it has no annotated edge into).
inline std::vector<NodePair> combination_step(const UsageGraph& graph, const Clustering& clustering, Rng& rng) {
  std::vector<NodePair> out;
  const auto multis = detail::multi_clusters(graph, clustering);
  if (multis.empty()) return out;
  std::set<std::string> in_multi;
  for (const auto& m : multis) in_multi.insert(m.begin(), m.end());
  for (const auto& [id, node] : graph.nodes()) {
    if (!std::holds_alternative<UseNode>(node) || in_multi.count(id)) continue;
    for (const auto& m : multis) {
      if (detail::compared_to(graph, id, m)) continue;
      std::vector<std::string> partners;
      for (const auto& member : m)
        if (!graph.neighbors(id).count(member)) partners.push_back(member);
      if (partners.empty()) continue;
      out.emplace_back(id, partners[uniform_index(rng, partners.size())]);
    }
  }
  return out;
}

// Uses outside every multi-cluster that were already compared to each of them.
inline std::vector<std::string> non_assignable_uses(const UsageGraph& graph, const Clustering& clustering) {
  const auto multis = detail::multi_clusters(graph, clustering);
  std::set<std::string> in_multi;
  for (const auto& m : multis) in_multi.insert(m.begin(), m.end());
  std::vector<std::string> out;
  for (const auto& [id, node] : graph.nodes()) {
    if (!std::holds_alternative<UseNode>(node) || in_multi.count(id)) continue;
    if (!detail::has_weighted_edge_any(graph, id)) continue;
    bool all = true;
    for (const auto& m : multis)
      if (!detail::compared_to(graph, id, m)) {
        all = false;
        break;
      }
    if (all) out.push_back(id);
  }
  return out;
}

inline std::vector<NodePair> exploration_step(const UsageGraph& graph, const Clustering& clustering,
                                              double edge_fraction, Rng& rng) {
  const auto s = non_assignable_uses(graph, clustering);
  return detail::exploration_walk(s, &graph, ceil_share(edge_fraction, pair_count(s.size())), rng);
}

inline std::vector<NodePair> exploration_step(const UsageGraph& graph, const Clustering& clustering,
                                              std::uint64_t seed) {
  Rng rng(derive_seed(seed, "explore"));
  return exploration_step(graph, clustering, SamplerConfig{}.edge_fraction, rng);
}

inline bool is_disagreement(const Edge& e) {
  int lo = 5, hi = 0;
  for (const auto& j : e.judgments) {
    if (j.value == 0) continue;
    lo = std::min(lo, j.value);
    hi = std::max(hi, j.value);
  }
  if (hi == 0) return false;
  return hi - lo >= 2 || *e.weight == 2.5;
}

inline std::vector<NodePair> disagreement_pairs(const UsageGraph& graph) {
  std::vector<NodePair> out;
  for (const auto& [p, e] : graph.edges())
    if (is_disagreement(e)) out.push_back(p);
  return out;
}

// One fresh pair per node touching a conflicting edge, partner drawn from
// the node's non-neighbours.
inline std::vector<NodePair> conflict_pairs(const UsageGraph& graph, const Clustering& clustering, Rng& rng) {
  const auto cf = conflicts(graph, clustering);
  std::set<std::string> anchors;
  for (const auto* set : {&cf.across_positive, &cf.within_negative})
    for (const auto& p : *set) {
      anchors.insert(p.first());
      anchors.insert(p.second());
    }
  std::vector<NodePair> out;
  std::set<NodePair> chosen;
  const auto ids = graph.node_ids();
  for (const auto& a : anchors) {
    const auto& nb = graph.neighbors(a);
    std::vector<std::string> partners;
    for (const auto& id : ids)
      if (id != a && !nb.count(id) && !chosen.count(NodePair(a, id))) partners.push_back(id);
    if (partners.empty()) continue;
    NodePair p(a, partners[uniform_index(rng, partners.size())]);
    chosen.insert(p);
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<NodePair> conflict_pairs(const UsageGraph& graph, const Clustering& clustering,
                                            std::uint64_t seed) {
  Rng rng(derive_seed(seed, "conflict"));
  return conflict_pairs(graph, clustering, rng);
}

inline std::vector<NodePair> combination_step(const UsageGraph& graph, const Clustering& clustering,
                                              std::uint64_t seed) {
  Rng rng(derive_seed(seed, "combine"));
  return combination_step(graph, clustering, rng);
}

// A few random unjudged pairs plus one pair between every two multi-clusters
// that share fewer than two annotated edges.
inline std::vector<NodePair> confirmation_pairs(const UsageGraph& graph, const Clustering& clustering,
                                                double fraction, Rng& rng) {
  std::vector<NodePair> out;
  std::set<NodePair> chosen;
  const auto ids = graph.node_ids();
  const std::size_t n = ids.size();
  if (n < 2) return out;
  const std::size_t wanted = std::max<std::size_t>(1, ceil_share(fraction, graph.weighted_edge_count()));
  const std::size_t free_pairs = pair_count(n) - graph.edges().size();
  const std::size_t target = std::min(wanted, free_pairs);
  for (std::size_t attempts = 0; chosen.size() < target && attempts < 100 * target + 1000; ++attempts) {
    const std::size_t i = uniform_index(rng, n), j = uniform_index(rng, n);
    if (i == j) continue;
    NodePair p(ids[i], ids[j]);
    if (graph.find_edge(p) || chosen.count(p)) continue;
    chosen.insert(p);
    out.push_back(std::move(p));
  }
  const auto multis = detail::multi_clusters(graph, clustering);
  for (std::size_t a = 0; a < multis.size(); ++a) {
    for (std::size_t b = a + 1; b < multis.size(); ++b) {
      std::size_t shared = 0;
      std::vector<NodePair> fresh;
      for (const auto& x : multis[a])
        for (const auto& y : multis[b]) {
          if (graph.has_weighted_edge(x, y)) ++shared;
          else if (!graph.find_edge(NodePair(x, y)) && !chosen.count(NodePair(x, y))) fresh.emplace_back(x, y);
        }
      if (shared >= 2 || fresh.empty()) continue;
      NodePair p = fresh[uniform_index(rng, fresh.size())];
      chosen.insert(p);
      out.push_back(std::move(p));
    }
  }
  return out;
}

// True once every two clusters share at least one annotated edge.
inline bool all_clusters_compared(const UsageGraph& graph, const Clustering& clustering) {
  std::map<int, int> dense;
  for (const auto& [_, c] : clustering.assignment()) dense.try_emplace(c, static_cast<int>(dense.size()));
  const std::size_t k = dense.size();
  if (k < 2) return true;
  std::vector<char> seen(k * k, 0);
  std::size_t covered = 0;
  for (const auto& [p, e] : graph.edges()) {
    if (!e.weighted() || !clustering.contains(p.first()) || !clustering.contains(p.second())) continue;
    std::size_t a = dense.at(clustering.cluster_of(p.first())), b = dense.at(clustering.cluster_of(p.second()));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!seen[a * k + b]) {
      seen[a * k + b] = 1;
      ++covered;
    }
  }
  return covered == pair_count(k);
}

// Next round's plan, or nullopt when sampling is done.
inline std::optional<RoundPlan> next_round(const SamplerState& state, std::uint64_t seed) {
  state.config.validate();
  if (state.round < 1) throw Error("next_round: round must be >= 1");
  if (state.round >= state.config.max_rounds) return std::nullopt;
  const auto& g = state.graph;
  // Nodes the clustering has not seen (e.g. untouched uses) count as singletons.
  Clustering c = state.clustering;
  {
    int next = 0;
    for (const auto& [_, l] : c.assignment()) next = std::max(next, l + 1);
    Clustering restricted;
    for (const auto& [id, _] : g.nodes()) restricted.assign(id, c.contains(id) ? c.cluster_of(id) : next++);
    c = restricted;
  }
  if (all_clusters_compared(g, c)) return std::nullopt;

  const int round = state.round + 1;
  Rng rng(derive_seed(seed, "next-round", round));
  std::vector<std::pair<NodePair, PairReason>> ordered;
  std::set<NodePair> seen;
  auto add = [&](const std::vector<NodePair>& ps, PairReason r) {
    for (const auto& p : ps)
      if (seen.insert(p).second) ordered.emplace_back(p, r);
  };
  add(combination_step(g, c, rng), PairReason::Combine);
  add(exploration_step(g, c, state.config.edge_fraction, rng), PairReason::Explore);
  add(conflict_pairs(g, c, rng), PairReason::Conflict);
  add(confirmation_pairs(g, c, state.config.confirm_fraction, rng), PairReason::Confirm);
  add(disagreement_pairs(g), PairReason::Disagree);

  RoundPlan plan;
  plan.round = round;
  const auto& roster = state.config.roster;
  std::vector<NodePair> fresh;
  std::vector<PairReason> fresh_reasons;
  for (const auto& [p, r] : ordered) {
    if (r == PairReason::Disagree) continue;
    fresh.push_back(p);
    fresh_reasons.push_back(r);
  }
  if (roster.empty()) {
    for (std::size_t i = 0; i < fresh.size(); ++i) plan.items.push_back({fresh[i], {}, fresh_reasons[i]});
  } else {
    auto assigned = assign_annotators(fresh, roster, state.config.multi_annotation_rate,
                                      derive_seed(seed, "assign-round", round), PairReason::Explore, round);
    for (std::size_t i = 0; i < assigned.items.size(); ++i) {
      assigned.items[i].reason = fresh_reasons[i];
      plan.items.push_back(std::move(assigned.items[i]));
    }
  }
  // Redistribute disagreements to someone who has not judged the pair yet.
  for (const auto& [p, r] : ordered) {
    if (r != PairReason::Disagree) continue;
    if (roster.empty()) {
      plan.items.push_back({p, {}, r});
      continue;
    }
    std::set<std::string> judged;
    for (const auto& j : g.find_edge(p)->judgments) judged.insert(j.annotator);
    std::vector<std::string> free;
    for (const auto& a : roster)
      if (!judged.count(a)) free.push_back(a);
    if (free.empty()) continue;
    plan.items.push_back({p, {free[uniform_index(rng, free.size())]}, r});
  }
  return plan;
}

}  // namespace semchange
