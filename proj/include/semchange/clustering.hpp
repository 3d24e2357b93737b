#pragma once

// Correlation clustering of usage graphs. The objective is the conflict
// loss over shifted edge weights w = W(e) - 2.5:
//
//   L(C) = sum of w over positive edges across clusters
//        + sum of |w| over negative edges within clusters
//
// and is minimized by simulated annealing over several cluster caps,
// initial states and restarts.

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "semchange/common.hpp"
#include "semchange/graph.hpp"

namespace semchange {

class Clustering {
 public:
  Clustering() = default;
  explicit Clustering(std::map<std::string, int> assignment) : assignment_(std::move(assignment)) {}

  const std::map<std::string, int>& assignment() const { return assignment_; }

  int cluster_of(const std::string& id) const {
    auto it = assignment_.find(id);
    if (it == assignment_.end()) throw Error("node '" + id + "' missing from clustering");
    return it->second;
  }
  bool contains(const std::string& id) const { return assignment_.count(id) > 0; }
  void assign(const std::string& id, int cluster) { assignment_[id] = cluster; }

  // Non-empty clusters in ascending cluster-id order, members in id order.
  std::vector<std::vector<std::string>> clusters() const {
    std::map<int, std::vector<std::string>> by;
    for (const auto& [id, c] : assignment_) by[c].push_back(id);
    std::vector<std::vector<std::string>> out;
    out.reserve(by.size());
    for (auto& [_, members] : by) out.push_back(std::move(members));
    return out;
  }

  std::size_t cluster_count() const {
    std::set<int> ids;
    for (const auto& [_, c] : assignment_) ids.insert(c);
    return ids.size();
  }

  // Relabels clusters 0, 1, ... in order of first appearance over sorted node ids.
  Clustering canonical() const {
    std::map<int, int> relabel;
    std::map<std::string, int> out;
    for (const auto& [id, c] : assignment_) {
      auto [it, _] = relabel.try_emplace(c, static_cast<int>(relabel.size()));
      out[id] = it->second;
    }
    return Clustering(std::move(out));
  }

  friend bool operator==(const Clustering&, const Clustering&) = default;

 private:
  std::map<std::string, int> assignment_;
};

enum class InitialState { Random, Singletons, PositiveComponents };

inline std::string_view to_string(InitialState s) {
  switch (s) {
    case InitialState::Random: return "random";
    case InitialState::Singletons: return "singletons";
    case InitialState::PositiveComponents: return "positive-components";
  }
  return "?";
}

struct AnnealingSchedule {
  double initial_temperature = 1.0;
  double decay = 0.99;
  int iterations = 20000;
};

struct ClusterConfig {
  // 0 stands for "no cap" (the number of clustered nodes).
  std::vector<int> max_clusters_values{2, 4, 8, 0};
  int restarts = 5;
  std::vector<InitialState> initial_states{InitialState::Random, InitialState::Singletons,
                                           InitialState::PositiveComponents};
  AnnealingSchedule schedule;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_clusters_values.empty()) throw Error("max_clusters_values must not be empty");
    for (int m : max_clusters_values)
      if (m < 0) throw Error("max_clusters values must be >= 1 (or 0 for no cap)");
    if (restarts < 1) throw Error("restarts must be >= 1");
    if (initial_states.empty()) throw Error("at least one initial state is required");
    if (!(schedule.decay > 0.0 && schedule.decay < 1.0)) throw Error("decay factor must lie in (0,1)");
    if (schedule.iterations < 1) throw Error("iterations must be >= 1");
    if (!(schedule.initial_temperature > 0.0)) throw Error("initial temperature must be > 0");
  }
};

inline double edge_cost(double shifted, bool same_cluster) {
  if (shifted >= 0.0) return same_cluster ? 0.0 : shifted;
  return same_cluster ? -shifted : 0.0;
}

inline double loss(const UsageGraph& graph, const Clustering& c) {
  double total = 0.0;
  for (const auto& [p, e] : graph.edges()) {
    if (!e.weighted()) continue;
    total += edge_cost(*e.shifted_weight(), c.cluster_of(p.first()) == c.cluster_of(p.second()));
  }
  return total;
}

inline double normalized_loss(const UsageGraph& graph, const Clustering& c) {
  double denom = 0.0;
  bool any = false;
  for (const auto& [_, e] : graph.edges()) {
    if (!e.weighted()) continue;
    any = true;
    denom += std::abs(*e.shifted_weight());
  }
  if (!any) throw Error("normalized_loss: graph has no weighted edges");
  const double l = loss(graph, c);
  return denom == 0.0 ? 0.0 : l / denom;
}

struct Conflicts {
  std::vector<NodePair> across_positive;
  std::vector<NodePair> within_negative;
  bool empty() const { return across_positive.empty() && within_negative.empty(); }
};

inline Conflicts conflicts(const UsageGraph& graph, const Clustering& c) {
  Conflicts out;
  for (const auto& [p, e] : graph.edges()) {
    if (!e.weighted()) continue;
    const bool same = c.cluster_of(p.first()) == c.cluster_of(p.second());
    if (e.positive() && !same) out.across_positive.push_back(p);
    if (e.negative() && same) out.within_negative.push_back(p);
  }
  return out;
}

namespace detail {

// Index-based view of the weighted part of a graph.
struct CompactGraph {
  std::vector<std::string> ids;      // nodes with at least one weighted edge
  std::vector<std::string> isolated;  // nodes without weighted edges
  std::vector<std::vector<std::pair<int, double>>> adj;
  struct WEdge {
    int a, b;
    double w;
  };
  std::vector<WEdge> edges;

  explicit CompactGraph(const UsageGraph& g) {
    std::set<std::string> touched;
    for (const auto& [p, e] : g.edges()) {
      if (!e.weighted()) continue;
      touched.insert(p.first());
      touched.insert(p.second());
    }
    std::map<std::string, int> index;
    for (const auto& [id, _] : g.nodes()) {
      if (touched.count(id)) {
        index[id] = static_cast<int>(ids.size());
        ids.push_back(id);
      } else {
        isolated.push_back(id);
      }
    }
    adj.resize(ids.size());
    for (const auto& [p, e] : g.edges()) {
      if (!e.weighted()) continue;
      const int a = index.at(p.first()), b = index.at(p.second());
      const double w = *e.shifted_weight();
      adj[a].emplace_back(b, w);
      adj[b].emplace_back(a, w);
      edges.push_back({a, b, w});
    }
  }

  std::size_t size() const { return ids.size(); }

  double loss(const std::vector<int>& labels) const {
    double total = 0.0;
    for (const auto& e : edges) total += edge_cost(e.w, labels[e.a] == labels[e.b]);
    return total;
  }
};

// Relabels 0, 1, ... by first appearance; returns the cluster count.
inline int canonicalize(std::vector<int>& labels) {
  std::map<int, int> relabel;
  for (int& l : labels) {
    auto [it, _] = relabel.try_emplace(l, static_cast<int>(relabel.size()));
    l = it->second;
  }
  return static_cast<int>(relabel.size());
}

struct Candidate {
  double loss = std::numeric_limits<double>::infinity();
  int clusters = 0;
  std::vector<int> labels;  // canonical
};

inline constexpr double kLossTolerance = 1e-9;

// Strict preference: lower loss, then fewer clusters, then lexicographically smaller labels.
inline bool better(const Candidate& a, const Candidate& b) {
  if (a.loss < b.loss - kLossTolerance) return true;
  if (a.loss > b.loss + kLossTolerance) return false;
  if (a.clusters != b.clusters) return a.clusters < b.clusters;
  return a.labels < b.labels;
}

inline std::vector<int> positive_components(const CompactGraph& g) {
  const int n = static_cast<int>(g.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges)
    if (e.w >= 0.0) parent[find(e.a)] = find(e.b);
  std::map<int, std::vector<int>> comps;
  for (int i = 0; i < n; ++i) comps[find(i)].push_back(i);
  std::vector<std::vector<int>> ordered;
  for (auto& [_, m] : comps) ordered.push_back(std::move(m));
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::vector<int> labels(n);
  for (std::size_t c = 0; c < ordered.size(); ++c)
    for (int v : ordered[c]) labels[v] = static_cast<int>(c);
  return labels;
}

inline std::vector<int> initial_labels(const CompactGraph& g, InitialState s, int cap, Rng& rng) {
  const int n = static_cast<int>(g.size());
  std::vector<int> labels(n);
  switch (s) {
    case InitialState::Random:
      for (int i = 0; i < n; ++i) labels[i] = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(cap)));
      break;
    case InitialState::Singletons:
      for (int i = 0; i < n; ++i) labels[i] = std::min(i, cap - 1);
      break;
    case InitialState::PositiveComponents:
      labels = positive_components(g);
      for (int& l : labels) l = std::min(l, cap - 1);
      break;
  }
  return labels;
}

// One annealing run from `labels`; returns the best state visited.
inline Candidate anneal(const CompactGraph& g, std::vector<int> labels, int cap, const AnnealingSchedule& sched,
                        Rng& rng) {
  const int n = static_cast<int>(g.size());
  std::vector<int> size(n, 0);
  for (int l : labels) ++size[l];
  // Non-empty cluster ids with O(1) insert/erase.
  std::vector<int> active, pos(n, -1), free_ids;
  for (int c = 0; c < n; ++c) {
    if (size[c] > 0) {
      pos[c] = static_cast<int>(active.size());
      active.push_back(c);
    } else {
      free_ids.push_back(c);
    }
  }
  auto deactivate = [&](int c) {
    const int i = pos[c];
    active[i] = active.back();
    pos[active[i]] = i;
    active.pop_back();
    pos[c] = -1;
    free_ids.push_back(c);
  };
  auto activate = [&](int c) {
    pos[c] = static_cast<int>(active.size());
    active.push_back(c);
  };

  double current = g.loss(labels);
  Candidate best{current, static_cast<int>(active.size()), labels};
  double temperature = sched.initial_temperature;

  for (int it = 0; it < sched.iterations; ++it, temperature *= sched.decay) {
    const int v = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n)));
    const int from = labels[v];
    const bool alone = size[from] == 1;
    const int existing = static_cast<int>(active.size()) - 1;  // clusters other than v's
    const bool can_open = !alone && static_cast<int>(active.size()) < cap;
    const int options = existing + (can_open ? 1 : 0);
    if (options == 0) continue;
    int pick = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(options)));
    int to;
    if (pick < existing) {
      to = active[pick];
      if (to == from) to = active[existing];  // skip v's own cluster
    } else {
      to = free_ids.back();
    }
    double delta = 0.0;
    for (const auto& [u, w] : g.adj[v]) {
      const int lu = labels[u];
      delta += edge_cost(w, lu == to) - edge_cost(w, lu == from);
    }
    if (delta > 0.0) {
      const double x = delta / temperature;
      if (!(x < 50.0) || uniform_real(rng) >= std::exp(-x)) continue;
    }
    if (pick >= existing) {
      free_ids.pop_back();
      activate(to);
    }
    labels[v] = to;
    ++size[to];
    if (--size[from] == 0) deactivate(from);
    current += delta;
    if (current < best.loss - kLossTolerance) {
      best.loss = current;
      best.labels = labels;
      best.clusters = static_cast<int>(active.size());
    }
  }
  best.clusters = canonicalize(best.labels);
  best.loss = g.loss(best.labels);  // drop accumulated rounding
  return best;
}

// Splits every cluster into the components of its internal positive edges.
// Only negative edges can join two such components, so the loss never grows.
inline void split_unsupported(const CompactGraph& g, std::vector<int>& labels) {
  const int n = static_cast<int>(g.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges)
    if (e.w >= 0.0 && labels[e.a] == labels[e.b]) parent[find(e.a)] = find(e.b);
  for (int i = 0; i < n; ++i) labels[i] = find(i);
  canonicalize(labels);
}

inline Clustering to_clustering(const CompactGraph& g, const std::vector<int>& labels) {
  std::map<std::string, int> assignment;
  int next = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    assignment[g.ids[i]] = labels[i];
    next = std::max(next, labels[i] + 1);
  }
  for (const auto& id : g.isolated) assignment[id] = next++;
  return Clustering(std::move(assignment)).canonical();
}

}  // namespace detail

// Seeded simulated annealing; the best state over all (cap, initial state,
// restart) runs wins. Clusters are then split into their positive-edge
// components, and nodes without weighted edges end up as singletons.
inline Clustering cluster(const UsageGraph& graph, const ClusterConfig& cfg) {
  cfg.validate();
  if (graph.nodes().empty()) throw Error("cluster: empty graph");
  const detail::CompactGraph g(graph);
  const int n = static_cast<int>(g.size());
  detail::Candidate best;
  if (n == 0) return detail::to_clustering(g, {});
  for (int requested : cfg.max_clusters_values) {
    const int cap = requested == 0 ? n : std::min(requested, n);
    for (InitialState s : cfg.initial_states) {
      for (int r = 0; r < cfg.restarts; ++r) {
        Rng rng(derive_seed(cfg.seed, requested, static_cast<int>(s), r));
        auto init = detail::initial_labels(g, s, cap, rng);
        auto cand = detail::anneal(g, std::move(init), cap, cfg.schedule, rng);
        if (detail::better(cand, best)) best = std::move(cand);
      }
    }
  }
  detail::split_unsupported(g, best.labels);
  return detail::to_clustering(g, best.labels);
}

inline constexpr std::size_t kBruteForceNodeLimit = 12;

// Exhaustive minimizer of the conflict loss over all set partitions, with the
// same tie-breaking as cluster().
inline Clustering brute_force_cluster(const UsageGraph& graph) {
  if (graph.nodes().size() > kBruteForceNodeLimit)
    throw Error("brute_force_cluster: more than " + std::to_string(kBruteForceNodeLimit) + " nodes");
  const detail::CompactGraph g(graph);
  const int n = static_cast<int>(g.size());
  if (n == 0) return detail::to_clustering(g, {});

  std::vector<std::vector<std::pair<int, double>>> earlier(n);  // edges to lower indices
  for (const auto& e : g.edges) {
    const int hi = std::max(e.a, e.b), lo = std::min(e.a, e.b);
    earlier[hi].emplace_back(lo, e.w);
  }
  detail::Candidate best;
  std::vector<int> labels(n, 0);
  // Restricted growth strings enumerate each partition once, already canonical.
  auto rec = [&](auto&& self, int i, int used, double acc) -> void {
    if (acc > best.loss + detail::kLossTolerance) return;
    if (i == n) {
      detail::Candidate c{acc, used, labels};
      if (detail::better(c, best)) best = std::move(c);
      return;
    }
    for (int k = 0; k <= used; ++k) {
      labels[i] = k;
      double add = 0.0;
      for (const auto& [j, w] : earlier[i]) add += edge_cost(w, labels[j] == k);
      self(self, i + 1, std::max(used, k + 1), acc + add);
    }
  };
  rec(rec, 0, 0, 0.0);
  detail::split_unsupported(g, best.labels);
  return detail::to_clustering(g, best.labels);
}

}  // namespace semchange
