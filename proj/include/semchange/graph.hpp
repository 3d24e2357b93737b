#pragma once

// Usage graphs: word uses (and optional sense definitions) as nodes,
// relatedness judgments aggregated into median-weighted edges.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semchange/common.hpp"

namespace semchange {

enum class Epoch { C1, C2 };

inline std::string_view to_string(Epoch e) { return e == Epoch::C1 ? "C1" : "C2"; }

inline Epoch parse_epoch(std::string_view s) {
  if (s == "C1") return Epoch::C1;
  if (s == "C2") return Epoch::C2;
  throw Error("unknown epoch tag '" + std::string(s) + "'");
}

struct UseNode {
  std::string id;
  Epoch corpus = Epoch::C1;
  std::vector<std::string> tokens;
  std::size_t target_index = 0;
  std::string word;

  friend bool operator==(const UseNode&, const UseNode&) = default;
};

struct SenseDefNode {
  std::string id;
  std::string gloss;
  std::string word;

  friend bool operator==(const SenseDefNode&, const SenseDefNode&) = default;
};

using Node = std::variant<UseNode, SenseDefNode>;

inline const std::string& node_id(const Node& n) {
  return std::visit([](const auto& x) -> const std::string& { return x.id; }, n);
}

// Unordered pair of distinct node ids, stored with first < second.
class NodePair {
 public:
  NodePair() = default;
  NodePair(std::string a, std::string b) {
    if (a == b) throw Error("self-loop pair on node '" + a + "'");
    if (b < a) std::swap(a, b);
    first_ = std::move(a);
    second_ = std::move(b);
  }

  const std::string& first() const { return first_; }
  const std::string& second() const { return second_; }
  bool contains(std::string_view id) const { return first_ == id || second_ == id; }
  const std::string& other(std::string_view id) const { return first_ == id ? second_ : first_; }

  friend auto operator<=>(const NodePair&, const NodePair&) = default;
  friend bool operator==(const NodePair&, const NodePair&) = default;

 private:
  std::string first_;
  std::string second_;
};

// DURel value: 1 unrelated .. 4 identical; 0 means "cannot decide".
struct Judgment {
  NodePair pair;
  std::string annotator;
  int value = 0;
  int round = 1;

  friend bool operator==(const Judgment&, const Judgment&) = default;
};

inline constexpr double kShift = 2.5;

// Median of the non-zero values; unset when every value is 0.
inline std::optional<double> median_weight(const std::vector<Judgment>& judgments) {
  std::vector<int> vals;
  vals.reserve(judgments.size());
  for (const auto& j : judgments)
    if (j.value != 0) vals.push_back(j.value);
  if (vals.empty()) return std::nullopt;
  std::sort(vals.begin(), vals.end());
  const std::size_t n = vals.size();
  if (n % 2 == 1) return static_cast<double>(vals[n / 2]);
  return (vals[n / 2 - 1] + vals[n / 2]) / 2.0;
}

struct Edge {
  NodePair pair;
  std::vector<Judgment> judgments;
  std::optional<double> weight;

  std::optional<double> shifted_weight() const {
    if (!weight) return std::nullopt;
    return *weight - kShift;
  }
  bool weighted() const { return weight.has_value(); }
  bool positive() const { return weight && *weight - kShift >= 0.0; }
  bool negative() const { return weight && *weight - kShift < 0.0; }

  friend bool operator==(const Edge&, const Edge&) = default;
};

class UsageGraph {
 public:
  UsageGraph() = default;
  explicit UsageGraph(std::string word) : word_(std::move(word)) {}

  const std::string& word() const { return word_; }
  const std::map<std::string, Node>& nodes() const { return nodes_; }
  const std::map<NodePair, Edge>& edges() const { return edges_; }

  bool has_node(std::string_view id) const { return nodes_.find(std::string(id)) != nodes_.end(); }

  const Node& node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error("unknown node id '" + id + "'");
    return it->second;
  }

  bool is_use(const std::string& id) const { return std::holds_alternative<UseNode>(node(id)); }

  std::optional<Epoch> epoch_of(const std::string& id) const {
    if (const auto* u = std::get_if<UseNode>(&node(id))) return u->corpus;
    return std::nullopt;
  }

  void add_node(Node n) {
    if (const auto* u = std::get_if<UseNode>(&n)) {
      if (u->id.empty()) throw Error("use node with empty id");
      if (u->target_index >= u->tokens.size())
        throw Error("use node '" + u->id + "': target_index out of bounds");
    } else {
      const auto& s = std::get<SenseDefNode>(n);
      if (s.id.empty()) throw Error("sense node with empty id");
      if (s.gloss.empty()) throw Error("sense node '" + s.id + "': empty gloss");
    }
    const std::string id = node_id(n);
    if (!nodes_.emplace(id, std::move(n)).second) throw Error("duplicate node id '" + id + "'");
    adjacency_.try_emplace(id);
  }

  // In-place accumulation; the free add_judgment() wraps this with value semantics.
  void add_judgment(const Judgment& j) {
    if (j.value < 0 || j.value > 4) throw Error("judgment value out of range: " + std::to_string(j.value));
    if (j.round < 1) throw Error("judgment round must be >= 1");
    if (!has_node(j.pair.first())) throw Error("unknown node id '" + j.pair.first() + "'");
    if (!has_node(j.pair.second())) throw Error("unknown node id '" + j.pair.second() + "'");
    auto [it, inserted] = edges_.try_emplace(j.pair);
    Edge& e = it->second;
    if (inserted) {
      e.pair = j.pair;
      adjacency_[j.pair.first()].insert(j.pair.second());
      adjacency_[j.pair.second()].insert(j.pair.first());
    }
    e.judgments.push_back(j);
    e.weight = median_weight(e.judgments);
  }

  // Nodes sharing an edge record (weighted or not) with id.
  const std::set<std::string>& neighbors(const std::string& id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) throw Error("unknown node id '" + id + "'");
    return it->second;
  }

  const Edge* find_edge(const NodePair& p) const {
    auto it = edges_.find(p);
    return it == edges_.end() ? nullptr : &it->second;
  }

  bool has_weighted_edge(const std::string& a, const std::string& b) const {
    if (a == b) return false;
    const Edge* e = find_edge(NodePair(a, b));
    return e && e->weighted();
  }

  std::vector<std::string> node_ids() const {
    std::vector<std::string> out;
    out.reserve(nodes_.size());
    for (const auto& [id, _] : nodes_) out.push_back(id);
    return out;
  }

  std::size_t weighted_edge_count() const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [](const auto& kv) { return kv.second.weighted(); }));
  }

  std::size_t judgment_count() const {
    std::size_t n = 0;
    for (const auto& [_, e] : edges_) n += e.judgments.size();
    return n;
  }

  friend bool operator==(const UsageGraph& a, const UsageGraph& b) {
    return a.word_ == b.word_ && a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  friend UsageGraph subgraph(const UsageGraph&, Epoch);
  friend UsageGraph remove_undecidable_nodes(const UsageGraph&);
  friend UsageGraph induced_subgraph(const UsageGraph&, const std::set<std::string>&);

  std::string word_;
  std::map<std::string, Node> nodes_;
  std::map<NodePair, Edge> edges_;
  std::map<std::string, std::set<std::string>> adjacency_;
};

inline UsageGraph add_judgment(UsageGraph graph, const Judgment& j) {
  graph.add_judgment(j);
  return graph;
}

inline UsageGraph induced_subgraph(const UsageGraph& graph, const std::set<std::string>& keep) {
  UsageGraph out(graph.word_);
  for (const auto& [id, n] : graph.nodes_)
    if (keep.count(id)) out.add_node(n);
  for (const auto& [p, e] : graph.edges_) {
    if (!keep.count(p.first()) || !keep.count(p.second())) continue;
    out.edges_.emplace(p, e);
    out.adjacency_[p.first()].insert(p.second());
    out.adjacency_[p.second()].insert(p.first());
  }
  return out;
}

// Time-specific subgraph: use nodes of one epoch; sense definitions dropped.
inline UsageGraph subgraph(const UsageGraph& graph, Epoch corpus) {
  std::set<std::string> keep;
  for (const auto& [id, n] : graph.nodes_) {
    if (const auto* u = std::get_if<UseNode>(&n); u && u->corpus == corpus) keep.insert(id);
  }
  return induced_subgraph(graph, keep);
}

// Drops nodes whose 0-judgments are a strict majority of all judgments touching them.
inline UsageGraph remove_undecidable_nodes(const UsageGraph& graph) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // zeros, total
  for (const auto& [p, e] : graph.edges_) {
    for (const auto& j : e.judgments) {
      for (const auto* id : {&p.first(), &p.second()}) {
        auto& t = tally[*id];
        t.second += 1;
        if (j.value == 0) t.first += 1;
      }
    }
  }
  std::set<std::string> keep;
  for (const auto& [id, _] : graph.nodes_) {
    auto it = tally.find(id);
    if (it != tally.end() && 2 * it->second.first > it->second.second) continue;
    keep.insert(id);
  }
  return induced_subgraph(graph, keep);
}

}  // namespace semchange
