#pragma once

// Simulated annotation campaigns over ground-truth usage graphs with
// zipfian sense frequencies and noisy annotators, scored by the adjusted
// Rand index against the true senses.

#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "semchange/clustering.hpp"
#include "semchange/common.hpp"
#include "semchange/graph.hpp"
#include "semchange/pipeline.hpp"

namespace semchange {

struct GroundTruth {
  std::string word;
  std::vector<UseNode> nodes;
  std::map<std::string, int> sense;  // node id -> true sense
  std::vector<long> true_d1;
  std::vector<long> true_d2;
  bool changed = false;
};

struct AnnotatorModel {
  double sigma = 0.5;
  std::uint64_t seed = 0;
};

struct SimulationConfig {
  int n_words = 40;
  long freq_lo = 50;
  long freq_hi = 1000;
  double zipf_exponent = 1.0;
  int senses_lo = 1;
  int senses_hi = 5;
  double change_share = 0.5;
  double sigma = 0.5;
  int annotators = 4;
  SamplerConfig sampler = [] {
    SamplerConfig s;
    s.max_rounds = 8;
    return s;
  }();
  ClusterConfig clustering;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const {
    if (n_words < 1) throw Error("n_words must be >= 1");
    if (freq_lo < 2) throw Error("freq_range low must be >= 2");
    if (freq_hi < freq_lo) throw Error("freq_range is empty");
    if (senses_lo < 1 || senses_hi < senses_lo) throw Error("bad senses_per_word range");
    if (freq_lo < senses_hi) throw Error("infeasible range: freq_range low below the sense count");
    if (!(change_share >= 0.0 && change_share <= 1.0)) throw Error("change_share must lie in [0,1]");
    if (change_share > 0.0 && senses_hi < 2) throw Error("infeasible range: change needs >= 2 senses");
    if (sigma < 0.0) throw Error("sigma must be >= 0");
    if (annotators < 1) throw Error("annotators must be >= 1");
    if (zipf_exponent < 0.0) throw Error("zipf exponent must be >= 0");
  }

  std::vector<std::string> roster() const {
    std::vector<std::string> r;
    for (int i = 0; i < annotators; ++i) r.push_back("a" + std::to_string(i + 1));
    return r;
  }
};

// Splits `total` over senses with weights 1/rank^exponent (zero weight for
// `excluded`) by largest remainder. Every weighted sense keeps >= 1.
inline std::vector<long> zipf_split(long total, int k, double exponent, int excluded = -1) {
  std::vector<double> w(k);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    w[i] = i == excluded ? 0.0 : 1.0 / std::pow(i + 1.0, exponent);
    sum += w[i];
  }
  std::vector<long> out(k, 0);
  std::vector<std::pair<double, int>> rema;
  long assigned = 0;
  for (int i = 0; i < k; ++i) {
    const double exact = total * w[i] / sum;
    out[i] = static_cast<long>(std::floor(exact));
    assigned += out[i];
    rema.emplace_back(exact - out[i], i);
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (long r = 0; r < total - assigned; ++r) out[rema[r].second] += 1;
  for (int i = 0; i < k; ++i) {
    if (i == excluded || out[i] > 0) continue;
    auto big = std::max_element(out.begin(), out.end());
    *big -= 1;
    out[i] = 1;
  }
  return out;
}

inline std::vector<GroundTruth> generate_ground_truth(const SimulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(derive_seed(seed, "ground-truth"));
  const auto n = static_cast<std::size_t>(cfg.n_words);
  const std::size_t n_changed = ceil_share(cfg.change_share, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  std::vector<bool> change(n, false);
  for (std::size_t i = 0; i < n_changed; ++i) change[order[i]] = true;

  std::vector<GroundTruth> out;
  for (std::size_t w = 0; w < n; ++w) {
    GroundTruth gt;
    gt.word = "w" + std::to_string(w + 1);
    const int lo = change[w] ? std::max(2, cfg.senses_lo) : cfg.senses_lo;
    const int k = lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(cfg.senses_hi - lo + 1)));
    const auto span = static_cast<std::size_t>(cfg.freq_hi - cfg.freq_lo + 1);
    const long t1 = cfg.freq_lo + static_cast<long>(uniform_index(rng, span));
    const long t2 = cfg.freq_lo + static_cast<long>(uniform_index(rng, span));
    int zero_sense = -1, zero_corpus = -1;
    if (change[w]) {
      zero_sense = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(k - 1)));
      zero_corpus = static_cast<int>(uniform_index(rng, 2));
    }
    gt.true_d1 = zipf_split(t1, k, cfg.zipf_exponent, zero_corpus == 0 ? zero_sense : -1);
    gt.true_d2 = zipf_split(t2, k, cfg.zipf_exponent, zero_corpus == 1 ? zero_sense : -1);
    gt.changed = change[w];
    for (int c = 0; c < 2; ++c) {
      const auto& freqs = c == 0 ? gt.true_d1 : gt.true_d2;
      long idx = 0;
      for (int s = 0; s < k; ++s) {
        for (long i = 0; i < freqs[s]; ++i, ++idx) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%s_%04ld", c == 0 ? "c1" : "c2", idx);
          UseNode u{buf, c == 0 ? Epoch::C1 : Epoch::C2, {gt.word}, 0, gt.word};
          gt.sense[u.id] = s;
          gt.nodes.push_back(std::move(u));
        }
      }
    }
    out.push_back(std::move(gt));
  }
  return out;
}

inline double standard_normal(Rng& rng) {
  double u1;
  do {
    u1 = uniform_real(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform_real(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// 4 for the same sense, 1 otherwise, plus Gaussian noise; clipped to [1,4],
// then rounded half up.
inline int simulate_judgment(const AnnotatorModel& model, int sense_u, int sense_v, std::uint64_t seed) {
  const double base = sense_u == sense_v ? 4.0 : 1.0;
  double x = base;
  if (model.sigma > 0.0) {
    Rng rng(derive_seed(model.seed, seed));
    x += model.sigma * standard_normal(rng);
  }
  x = std::clamp(x, 1.0, 4.0);
  return static_cast<int>(std::floor(x + 0.5));
}

// Permutation-adjusted Rand index; both clusterings must cover the same nodes.
inline double adjusted_rand_index(const Clustering& a, const Clustering& b) {
  if (a.assignment().size() != b.assignment().size()) throw Error("adjusted_rand_index: node sets differ");
  std::map<std::pair<int, int>, long> joint;
  std::map<int, long> ra, rb;
  for (auto ia = a.assignment().begin(), ib = b.assignment().begin(); ia != a.assignment().end(); ++ia, ++ib) {
    if (ia->first != ib->first) throw Error("adjusted_rand_index: node sets differ");
    ++joint[{ia->second, ib->second}];
    ++ra[ia->second];
    ++rb[ib->second];
  }
  auto c2 = [](long x) { return static_cast<double>(x) * static_cast<double>(x - 1) / 2.0; };
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [_, v] : joint) index += c2(v);
  for (const auto& [_, v] : ra) sa += c2(v);
  for (const auto& [_, v] : rb) sb += c2(v);
  const double total = c2(static_cast<long>(a.assignment().size()));
  if (total == 0.0) return 1.0;
  const double expected = sa * sb / total;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;  // only reachable for identical trivial partitions
  return (index - expected) / (max_index - expected);
}

struct WordResult {
  std::string word;
  double ari = 0.0;
  int rounds = 0;
  long judgments = 0;
  bool converged = false;
  bool changed = false;
  std::size_t surviving_nodes = 0;
  std::map<std::string, long> judgments_by_annotator;
  std::optional<ChangeScores> scores;
};

struct SimulationReport {
  std::vector<WordResult> words;
  double mean_ari = 0.0;
  double mean_judgments_per_annotator = 0.0;
  double mean_rounds = 0.0;
};

inline UsageGraph ground_truth_graph(const GroundTruth& gt) {
  UsageGraph g(gt.word);
  for (const auto& u : gt.nodes) g.add_node(u);
  return g;
}

// Seed of a single simulated judgment; independent of the order of submission.
inline std::uint64_t judgment_seed(const std::string& word, const NodePair& p, const std::string& annotator,
                                   int round) {
  return derive_seed(0, word, p.first(), p.second(), annotator, round);
}

inline WordResult run_word(const GroundTruth& gt, const SimulationConfig& cfg, std::uint64_t word_seed) {
  PipelineConfig pc{cfg.sampler, cfg.clustering, word_seed};
  pc.sampler.roster = cfg.roster();
  WordPipeline pipe(ground_truth_graph(gt), pc);
  const AnnotatorModel model{cfg.sigma, derive_seed(word_seed, "annotators")};
  WordResult res;
  res.word = gt.word;
  res.changed = gt.changed;
  while (true) {
    const RoundPlan plan = pipe.plan();
    for (const auto& item : plan.items) {
      for (const auto& a : item.annotators) {
        const int v = simulate_judgment(model, gt.sense.at(item.pair.first()), gt.sense.at(item.pair.second()),
                                        judgment_seed(gt.word, item.pair, a, plan.round));
        pipe.record(Judgment{item.pair, a, v, plan.round});
        ++res.judgments;
        ++res.judgments_by_annotator[a];
      }
    }
    if (!pipe.advance()) break;
  }
  res.rounds = pipe.round();
  res.converged = pipe.stop_reason() == StopReason::AllClustersCompared;
  res.scores = pipe.scores();
  std::map<std::string, int> truth;
  for (const auto& [id, _] : pipe.clustering().assignment()) truth[id] = gt.sense.at(id);
  res.surviving_nodes = truth.size();
  res.ari = adjusted_rand_index(pipe.clustering(), Clustering(std::move(truth)));
  return res;
}

inline SimulationReport run_simulation(const SimulationConfig& cfg) {
  cfg.validate();
  const auto truths = generate_ground_truth(cfg, cfg.seed);
  std::vector<WordResult> results(truths.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < truths.size(); i = next++)
      results[i] = run_word(truths[i], cfg, derive_seed(cfg.seed, "word", i));
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(truths.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  SimulationReport rep;
  rep.words = std::move(results);
  std::map<std::string, long> per_annotator;
  for (const auto& w : rep.words) {
    rep.mean_ari += w.ari;
    rep.mean_rounds += w.rounds;
    for (const auto& [a, n] : w.judgments_by_annotator) per_annotator[a] += n;
  }
  rep.mean_ari /= static_cast<double>(rep.words.size());
  rep.mean_rounds /= static_cast<double>(rep.words.size());
  long total = 0;
  for (const auto& [_, n] : per_annotator) total += n;
  rep.mean_judgments_per_annotator = static_cast<double>(total) / static_cast<double>(cfg.annotators);
  return rep;
}

inline void write_report(std::ostream& os, const SimulationReport& rep) {
  os << "word\tari\trounds\tjudgments\tconverged\tchanged\n";
  char buf[64];
  for (const auto& w : rep.words) {
    std::snprintf(buf, sizeof buf, "%.6f", w.ari);
    os << w.word << '\t' << buf << '\t' << w.rounds << '\t' << w.judgments << '\t' << (w.converged ? 1 : 0) << '\t'
       << (w.changed ? 1 : 0) << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.6f", rep.mean_ari);
  os << "# mean_ari=" << buf;
  std::snprintf(buf, sizeof buf, "%.3f", rep.mean_rounds);
  os << " mean_rounds=" << buf;
  std::snprintf(buf, sizeof buf, "%.1f", rep.mean_judgments_per_annotator);
  os << " mean_judgments_per_annotator=" << buf << " words=" << rep.words.size() << '\n';
}

}  // namespace semchange
