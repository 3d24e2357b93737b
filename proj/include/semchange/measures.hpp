#pragma once

// Change scores from sense clusterings: per-corpus sense frequency
// distributions, binary change and graded (Jensen-Shannon) change.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "semchange/clustering.hpp"
#include "semchange/graph.hpp"

namespace semchange {

struct SenseFrequencyDistribution {
  std::vector<long> d;  // C1 counts per cluster
  std::vector<long> e;  // C2 counts per cluster

  friend bool operator==(const SenseFrequencyDistribution&, const SenseFrequencyDistribution&) = default;
};

struct ChangeThresholds {
  long k = 2;
  long n = 5;
};

struct ChangeScores {
  std::string word;
  int binary = 0;
  double graded = 0.0;
  ChangeThresholds thresholds;
};

// Clusters in Clustering::clusters() order; sense definitions are not counted.
inline SenseFrequencyDistribution sfd_from_clustering(const UsageGraph& graph, const Clustering& c) {
  SenseFrequencyDistribution out;
  for (const auto& members : c.clusters()) {
    long c1 = 0, c2 = 0;
    for (const auto& id : members) {
      if (!graph.has_node(id)) continue;
      if (auto ep = graph.epoch_of(id)) (*ep == Epoch::C1 ? c1 : c2) += 1;
    }
    out.d.push_back(c1);
    out.e.push_back(c2);
  }
  return out;
}

// Small samples (<= 30 uses per corpus) get the permissive thresholds.
inline ChangeThresholds thresholds_for_sample_size(long max_sample_size) {
  if (max_sample_size < 1) throw Error("sample size must be >= 1");
  return max_sample_size <= 30 ? ChangeThresholds{0, 1} : ChangeThresholds{2, 5};
}

inline int binary_change(const std::vector<long>& d, const std::vector<long>& e, long k, long n) {
  if (d.size() != e.size()) throw Error("binary_change: distributions differ in length");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if ((d[i] <= k && e[i] >= n) || (e[i] <= k && d[i] >= n)) return 1;
  }
  return 0;
}

// Jensen-Shannon distance with base-2 logarithms, in [0, 1].
// Senses absent from both corpora are ignored.
inline double graded_change(const std::vector<long>& d, const std::vector<long>& e) {
  if (d.size() != e.size()) throw Error("graded_change: distributions differ in length");
  double sd = 0.0, se = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] < 0 || e[i] < 0) throw Error("graded_change: negative count");
    sd += static_cast<double>(d[i]);
    se += static_cast<double>(e[i]);
  }
  if (sd <= 0.0 || se <= 0.0) throw Error("graded_change: empty distribution");
  // A sense seen on one side only contributes exactly half its probability;
  // summing those counts first makes disjoint supports come out at exactly 1.
  long only_d = 0, only_e = 0;
  double shared = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0 && e[i] == 0) continue;
    if (e[i] == 0) {
      only_d += d[i];
    } else if (d[i] == 0) {
      only_e += e[i];
    } else {
      const double p = d[i] / sd, q = e[i] / se, m = 0.5 * (p + q);
      shared += 0.5 * p * std::log2(p / m) + 0.5 * q * std::log2(q / m);
    }
  }
  const double js = 0.5 * (static_cast<double>(only_d) / sd) + 0.5 * (static_cast<double>(only_e) / se) + shared;
  // Rounding can leave tiny negatives or values just above 1.
  return std::sqrt(std::clamp(js, 0.0, 1.0));
}

inline ChangeScores change_scores(const std::string& word, const SenseFrequencyDistribution& sfd,
                                  ChangeThresholds t) {
  return ChangeScores{word, binary_change(sfd.d, sfd.e, t.k, t.n), graded_change(sfd.d, sfd.e), t};
}

// Thresholds chosen from the larger per-corpus use count in the graph.
inline ChangeScores change_scores(const UsageGraph& graph, const Clustering& c) {
  const auto sfd = sfd_from_clustering(graph, c);
  long n1 = 0, n2 = 0;
  for (const auto& [id, n] : graph.nodes())
    if (const auto* u = std::get_if<UseNode>(&n)) (u->corpus == Epoch::C1 ? n1 : n2) += 1;
  return change_scores(graph.word(), sfd, thresholds_for_sample_size(std::max<long>({n1, n2, 1})));
}

}  // namespace semchange
