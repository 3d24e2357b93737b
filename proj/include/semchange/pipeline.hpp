#pragma once

// Per-word annotation loop: plan a round, collect judgments, then
// prune undecidable nodes, re-cluster and plan again until sampling stops.
// The annotation service and the simulation both drive this type, so a
// campaign and a simulated run with equal seeds take identical steps.

#include <optional>
#include <string>
#include <vector>

#include "semchange/clustering.hpp"
#include "semchange/graph.hpp"
#include "semchange/measures.hpp"
#include "semchange/sampling.hpp"

namespace semchange {

struct PipelineConfig {
  SamplerConfig sampler;
  ClusterConfig clustering;
  std::uint64_t seed = 0;
};

enum class StopReason { None, AllClustersCompared, RoundLimit };

// Round 1 for graphs with sense definitions: every use against every definition.
inline RoundPlan sense_definition_round(const UsageGraph& g, const SamplerConfig& cfg, std::uint64_t seed) {
  std::vector<NodePair> pairs;
  for (const auto& [uid, un] : g.nodes()) {
    if (!std::holds_alternative<UseNode>(un)) continue;
    for (const auto& [sid, sn] : g.nodes())
      if (std::holds_alternative<SenseDefNode>(sn)) pairs.emplace_back(uid, sid);
  }
  if (pairs.empty()) throw Error("sense_definition_round: graph needs uses and sense definitions");
  if (cfg.roster.empty()) {
    RoundPlan plan;
    for (auto& p : pairs) plan.items.push_back({p, {}, PairReason::Explore});
    return plan;
  }
  return assign_annotators(pairs, cfg.roster, cfg.multi_annotation_rate, derive_seed(seed, 1), PairReason::Explore,
                           1);
}

class WordPipeline {
 public:
  WordPipeline(UsageGraph initial, PipelineConfig cfg) : cfg_(std::move(cfg)), graph_(std::move(initial)) {
    cfg_.sampler.validate();
    cfg_.clustering.validate();
    bool has_senses = false;
    std::vector<std::string> uses;
    for (const auto& [id, n] : graph_.nodes()) {
      if (std::holds_alternative<SenseDefNode>(n)) has_senses = true;
      else uses.push_back(id);
    }
    plan_ = has_senses ? sense_definition_round(graph_, cfg_.sampler, derive_seed(cfg_.seed, "plan"))
                       : round_one(uses, cfg_.sampler, derive_seed(cfg_.seed, "plan"));
  }

  const PipelineConfig& config() const { return cfg_; }
  const UsageGraph& graph() const { return graph_; }
  const Clustering& clustering() const { return clustering_; }
  const RoundPlan& plan() const { return plan_; }
  int round() const { return plan_.round; }
  bool done() const { return stop_ != StopReason::None; }
  StopReason stop_reason() const { return stop_; }
  const std::optional<ChangeScores>& scores() const { return scores_; }

  // Appends a judgment for the current round.
  void record(const Judgment& j) {
    if (done()) throw Error("word '" + graph_.word() + "' is finished");
    if (j.round != plan_.round) throw Error("judgment for round " + std::to_string(j.round) + " but current round is " +
                                            std::to_string(plan_.round));
    graph_.add_judgment(j);
  }

  // Closes the current round. Returns the next plan, or nullopt when done.
  std::optional<RoundPlan> advance() {
    if (done()) throw Error("word '" + graph_.word() + "' is finished");
    graph_ = remove_undecidable_nodes(graph_);
    const int r = plan_.round;
    if (!graph_.nodes().empty()) {
      ClusterConfig cc = cfg_.clustering;
      cc.seed = derive_seed(cfg_.seed, "cluster", r);
      clustering_ = cluster(graph_, cc);
    } else {
      clustering_ = Clustering{};
    }
    SamplerState state{graph_, clustering_, r, cfg_.sampler};
    auto next = graph_.nodes().size() < 2 ? std::nullopt : next_round(state, derive_seed(cfg_.seed, "sample"));
    if (next) {
      plan_ = std::move(*next);
      return plan_;
    }
    stop_ = (graph_.nodes().size() < 2 || all_clusters_compared(graph_, clustering_)) ? StopReason::AllClustersCompared
                                                                                       : StopReason::RoundLimit;
    long n1 = 0, n2 = 0;
    for (const auto& [_, n] : graph_.nodes())
      if (const auto* u = std::get_if<UseNode>(&n)) (u->corpus == Epoch::C1 ? n1 : n2) += 1;
    if (n1 > 0 && n2 > 0) scores_ = change_scores(graph_, clustering_);
    return std::nullopt;
  }

 private:
  PipelineConfig cfg_;
  UsageGraph graph_;
  Clustering clustering_;
  RoundPlan plan_;
  StopReason stop_ = StopReason::None;
  std::optional<ChangeScores> scores_;
};

}  // namespace semchange
