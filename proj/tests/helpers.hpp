#pragma once

// Fixture builders shared by the unit tests.

#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "semchange/clustering.hpp"
#include "semchange/graph.hpp"

namespace testing_helpers {

using namespace semchange;

inline UseNode use(const std::string& id, Epoch e = Epoch::C1, const std::string& word = "w") {
  return UseNode{id, e, {"a", word, "b"}, 1, word};
}

inline std::string nid(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "n%02d", i);
  return buf;
}

// n C1 uses n00..n{n-1}.
inline UsageGraph graph_with(int n, const std::string& word = "w") {
  UsageGraph g(word);
  for (int i = 0; i < n; ++i) g.add_node(use(nid(i), Epoch::C1, word));
  return g;
}

inline void judge(UsageGraph& g, const std::string& a, const std::string& b, int v, const std::string& ann = "a1",
                  int round = 1) {
  g.add_judgment(Judgment{NodePair(a, b), ann, v, round});
}

inline void judge(UsageGraph& g, int a, int b, int v, const std::string& ann = "a1") {
  judge(g, nid(a), nid(b), v, ann);
}

// Random graph: each pair present with probability `density`, weight uniform in 1..4.
inline UsageGraph random_graph(int n, double density, Rng& rng) {
  auto g = graph_with(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (uniform_real(rng) < density) judge(g, i, j, 1 + static_cast<int>(uniform_index(rng, 4)));
  return g;
}

// All set partitions of ids (restricted growth strings).
inline std::vector<Clustering> all_partitions(const std::vector<std::string>& ids) {
  std::vector<Clustering> out;
  std::vector<int> rgs(ids.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int maxc) {
    if (i == ids.size()) {
      std::map<std::string, int> a;
      for (std::size_t k = 0; k < ids.size(); ++k) a[ids[k]] = rgs[k];
      out.emplace_back(std::move(a));
      return;
    }
    for (int c = 0; c <= maxc + 1; ++c) {
      rgs[i] = c;
      rec(i + 1, std::max(maxc, c));
    }
  };
  if (!ids.empty()) {
    rgs[0] = 0;
    rec(1, 0);
  }
  return out;
}

}  // namespace testing_helpers
