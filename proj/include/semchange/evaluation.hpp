#pragma once

// Shared-task scoring: accuracy, tie-corrected Spearman, precision/recall/F1,
// the frequency / count / majority baselines, and the frequency-polysemy bias
// and per-word difficulty analyses. Undefined metrics come back as nullopt.

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semchange/common.hpp"
#include "semchange/corpus.hpp"

namespace semchange {

struct AnswerSet {
  int subtask = 2;
  std::map<std::string, double> entries;

  std::set<std::string> words() const {
    std::set<std::string> out;
    for (const auto& [w, _] : entries) out.insert(w);
    return out;
  }
};

inline void validate_answers(const AnswerSet& a) {
  if (a.subtask != 1 && a.subtask != 2) throw Error("subtask must be 1 or 2");
  if (a.subtask == 1)
    for (const auto& [w, v] : a.entries)
      if (v != 0.0 && v != 1.0) throw Error("subtask 1 label for '" + w + "' is not 0/1");
}

// `word<TAB>value` per line.
inline AnswerSet read_answers(std::istream& is, int subtask) {
  AnswerSet a;
  a.subtask = subtask;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 2) throw Error("answer line " + std::to_string(lineno) + ": expected word<TAB>value");
    double v;
    std::size_t used = 0;
    try {
      v = std::stod(f[1], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != f[1].size()) throw Error("answer line " + std::to_string(lineno) + ": bad value");
    if (subtask == 1 && f[1] != "0" && f[1] != "1")
      throw Error("answer line " + std::to_string(lineno) + ": subtask 1 values must be 0 or 1");
    if (!a.entries.emplace(f[0], v).second) throw Error("duplicate word '" + f[0] + "'");
  }
  return a;
}

inline AnswerSet load_answers(const std::string& path, int subtask) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open answer file '" + path + "'");
  return read_answers(in, subtask);
}

inline void write_answers(std::ostream& os, const AnswerSet& a) {
  for (const auto& [w, v] : a.entries) {
    if (a.subtask == 1) {
      os << w << '\t' << static_cast<int>(v) << '\n';
    } else {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << w << '\t' << buf << '\n';
    }
  }
}

namespace detail {
inline void require_same_words(const AnswerSet& pred, const AnswerSet& gold) {
  if (pred.words() != gold.words()) throw Error("prediction and gold cover different word sets");
}
}  // namespace detail

inline double accuracy(const AnswerSet& pred, const AnswerSet& gold) {
  detail::require_same_words(pred, gold);
  validate_answers(pred);
  validate_answers(gold);
  if (gold.entries.empty()) throw Error("accuracy: no words");
  std::size_t hit = 0;
  for (const auto& [w, g] : gold.entries)
    if (pred.entries.at(w) == g) ++hit;
  return static_cast<double>(hit) / static_cast<double>(gold.entries.size());
}

// 1-based ascending ranks; ties share the mean of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n == 0) throw Error("pearson: length mismatch");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

// Tie-corrected Spearman over paired values; nullopt when either side is constant.
inline std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("spearman: length mismatch");
  if (x.size() < 3) throw Error("spearman: need at least 3 values");
  return pearson(average_ranks(x), average_ranks(y));
}

inline std::optional<double> spearman(const AnswerSet& pred, const AnswerSet& gold) {
  detail::require_same_words(pred, gold);
  std::vector<double> p, g;
  for (const auto& [w, v] : gold.entries) {
    g.push_back(v);
    p.push_back(pred.entries.at(w));
  }
  return spearman(p, g);
}

struct PrecisionRecallF1 {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

inline std::optional<double> f1_score(std::optional<double> p, std::optional<double> r) {
  if (!p || !r || *p + *r == 0.0) return std::nullopt;
  return 2.0 * *p * *r / (*p + *r);
}

inline PrecisionRecallF1 precision_recall_f1(const AnswerSet& pred, const AnswerSet& gold, double positive = 1.0) {
  detail::require_same_words(pred, gold);
  validate_answers(pred);
  validate_answers(gold);
  long tp = 0, fp = 0, fn = 0;
  for (const auto& [w, g] : gold.entries) {
    const bool pp = pred.entries.at(w) == positive, gp = g == positive;
    if (pp && gp) ++tp;
    else if (pp) ++fp;
    else if (gp) ++fn;
  }
  PrecisionRecallF1 out;
  if (tp + fp > 0) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  out.f1 = f1_score(out.precision, out.recall);
  return out;
}

inline AnswerSet freq_baseline(const Corpus& c1, const Corpus& c2, const std::vector<std::string>& targets) {
  const auto p1 = frequency_profile(c1), p2 = frequency_profile(c2);
  if (p1.total == 0 || p2.total == 0) throw Error("freq_baseline: empty corpus");
  AnswerSet out;
  out.subtask = 2;
  for (const auto& t : targets) {
    const double f1 = static_cast<double>(p1.count(t)) / static_cast<double>(p1.total);
    const double f2 = static_cast<double>(p2.count(t)) / static_cast<double>(p2.total);
    out.entries[t] = std::abs(f1 - f2);
  }
  return out;
}

// Symmetric co-occurrence counts of `target` within +-window tokens, per sentence.
inline std::map<std::string, double> cooccurrence_vector(const Corpus& c, const std::string& target, int window) {
  std::map<std::string, double> v;
  for (const auto& s : c.sentences) {
    const auto n = static_cast<long>(s.size());
    for (long i = 0; i < n; ++i) {
      if (s[i] != target) continue;
      for (long j = std::max(0L, i - window); j <= std::min(n - 1, i + window); ++j)
        if (j != i) v[s[j]] += 1.0;
    }
  }
  return v;
}

struct CountBaselineResult {
  AnswerSet scores;                  // subtask 2, defined words only
  std::vector<std::string> undefined;  // zero vector after column intersection
};

// Cosine distance between target count vectors restricted to the context
// columns (word types) both corpora share.
inline CountBaselineResult count_baseline(const Corpus& c1, const Corpus& c2, const std::vector<std::string>& targets,
                                          int window = 4) {
  if (window < 1) throw Error("count_baseline: window must be >= 1");
  if (c1.sentences.empty() || c2.sentences.empty()) throw Error("count_baseline: empty corpus");
  const auto p1 = frequency_profile(c1), p2 = frequency_profile(c2);
  CountBaselineResult out;
  out.scores.subtask = 2;
  for (const auto& t : targets) {
    const auto v1 = cooccurrence_vector(c1, t, window), v2 = cooccurrence_vector(c2, t, window);
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (const auto& [w, x] : v1) {
      if (!p2.counts.count(w)) continue;
      n1 += x * x;
      if (auto it = v2.find(w); it != v2.end()) dot += x * it->second;
    }
    for (const auto& [w, y] : v2)
      if (p1.counts.count(w)) n2 += y * y;
    if (n1 == 0.0 || n2 == 0.0) {
      out.undefined.push_back(t);
      continue;
    }
    out.scores.entries[t] = 1.0 - dot / (std::sqrt(n1) * std::sqrt(n2));
  }
  return out;
}

inline AnswerSet majority_baseline(const std::vector<std::string>& targets) {
  AnswerSet out;
  out.subtask = 1;
  for (const auto& t : targets) out.entries[t] = 0.0;
  return out;
}

// Label 1 iff the score exceeds the mean score.
inline AnswerSet binarize_scores(const AnswerSet& scores) {
  AnswerSet out;
  out.subtask = 1;
  if (scores.entries.empty()) return out;
  double mean = 0.0;
  for (const auto& [_, v] : scores.entries) mean += v;
  mean /= static_cast<double>(scores.entries.size());
  for (const auto& [w, v] : scores.entries) out.entries[w] = v > mean ? 1.0 : 0.0;
  return out;
}

struct WordStats {
  double freq1 = 0.0;  // normalized frequency in C1
  double freq2 = 0.0;
  double senses1 = 0.0;
  double senses2 = 0.0;
};

struct BiasCorrelations {
  std::optional<double> frq_d;  // vs |ln f1 - ln f2|
  std::optional<double> frq_m;  // vs min(ln f1, ln f2)
  std::optional<double> ply_m;  // vs min sense count
  std::vector<std::string> excluded;
};

// Stats file: `word<TAB>freq1<TAB>freq2<TAB>senses1<TAB>senses2`.
inline std::map<std::string, WordStats> load_word_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stats file '" + path + "'");
  std::map<std::string, WordStats> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 5) throw Error("stats line " + std::to_string(lineno) + ": expected 5 fields");
    try {
      out[f[0]] = WordStats{std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])};
    } catch (const std::exception&) {
      throw Error("stats line " + std::to_string(lineno) + ": bad number");
    }
  }
  return out;
}

inline BiasCorrelations bias_correlations(const AnswerSet& scores, const std::map<std::string, WordStats>& stats) {
  BiasCorrelations out;
  std::vector<double> s, d, m, p;
  for (const auto& [w, v] : scores.entries) {
    auto it = stats.find(w);
    if (it == stats.end()) throw Error("bias_correlations: no stats for '" + w + "'");
    const auto& st = it->second;
    if (st.freq1 <= 0.0 || st.freq2 <= 0.0) {
      out.excluded.push_back(w);
      continue;
    }
    const double l1 = std::log(st.freq1), l2 = std::log(st.freq2);
    s.push_back(v);
    d.push_back(std::abs(l1 - l2));
    m.push_back(std::min(l1, l2));
    p.push_back(std::min(st.senses1, st.senses2));
  }
  if (s.size() < 3) return out;
  out.frq_d = spearman(s, d);
  out.frq_m = spearman(s, m);
  out.ply_m = spearman(s, p);
  return out;
}

// Mean absolute error of gold rank r over uniformly random ranks 1..n.
inline double expected_rank_error(double r, std::size_t n) {
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += std::abs(r - static_cast<double>(j));
  return total / static_cast<double>(n);
}

// Subtask 1: mean |pred - gold| over systems. Subtask 2: mean rank error
// (rank 1 = highest score) divided by the expected rank error.
inline std::map<std::string, double> prediction_difficulty(const std::vector<AnswerSet>& systems,
                                                           const AnswerSet& gold, int subtask) {
  if (systems.empty()) throw Error("prediction_difficulty: no system answers");
  for (const auto& s : systems) detail::require_same_words(s, gold);
  std::vector<std::string> words;
  std::vector<double> g;
  for (const auto& [w, v] : gold.entries) {
    words.push_back(w);
    g.push_back(v);
  }
  std::map<std::string, double> out;
  for (const auto& w : words) out[w] = 0.0;
  if (subtask == 1) {
    for (const auto& s : systems)
      for (std::size_t i = 0; i < words.size(); ++i) out[words[i]] += std::abs(s.entries.at(words[i]) - g[i]);
  } else {
    auto desc_ranks = [](std::vector<double> v) {
      for (double& x : v) x = -x;
      return average_ranks(v);
    };
    const auto gr = desc_ranks(g);
    for (const auto& s : systems) {
      std::vector<double> pv;
      for (const auto& w : words) pv.push_back(s.entries.at(w));
      const auto pr = desc_ranks(pv);
      for (std::size_t i = 0; i < words.size(); ++i) out[words[i]] += std::abs(pr[i] - gr[i]);
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      const double e = expected_rank_error(gr[i], words.size());
      out[words[i]] = e == 0.0 ? 0.0 : out[words[i]] / e;
    }
  }
  for (auto& [_, v] : out) v /= static_cast<double>(systems.size());
  return out;
}

struct EvalReport {
  std::map<std::string, std::optional<double>> per_language;
  std::optional<double> average;  // over languages with a defined score
};

// Accuracy for subtask 1, Spearman for subtask 2, averaged across languages.
inline EvalReport evaluate(const std::map<std::string, std::pair<AnswerSet, AnswerSet>>& by_language, int subtask) {
  EvalReport rep;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [lang, pg] : by_language) {
    std::optional<double> v = subtask == 1 ? std::optional<double>(accuracy(pg.first, pg.second))
                                           : spearman(pg.first, pg.second);
    rep.per_language[lang] = v;
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n > 0) rep.average = sum / static_cast<double>(n);
  return rep;
}

}  // namespace semchange
