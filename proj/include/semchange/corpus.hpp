#pragma once

// Corpus ingestion (one sentence per line, whitespace tokens), sentence
// filtering, use sampling, size matching, type-token statistics and
// frequency-matched control word selection.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "semchange/common.hpp"
#include "semchange/graph.hpp"

namespace semchange {

struct Corpus {
  std::vector<std::vector<std::string>> sentences;
  std::optional<Epoch> epoch;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += len;
  }
  return true;
}

inline Corpus parse_corpus(std::string_view text, std::optional<Epoch> epoch = std::nullopt) {
  if (!valid_utf8(text)) throw Error("corpus is not valid UTF-8");
  Corpus c;
  c.epoch = epoch;
  for (const auto& line : split(text, '\n')) {
    auto toks = split_ws(line);
    if (!toks.empty()) c.sentences.push_back(std::move(toks));
  }
  return c;
}

inline Corpus load_corpus(const std::string& path, std::optional<Epoch> epoch = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read corpus file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_corpus(text, epoch);
}

inline void write_corpus(std::ostream& os, const Corpus& c) {
  for (const auto& s : c.sentences) os << join(s, " ") << '\n';
}

inline void save_corpus(const std::string& path, const Corpus& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file '" + path + "'");
  write_corpus(out, c);
}

inline std::vector<std::string> load_targets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read targets file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = split_ws(line);
    if (t.empty()) continue;
    if (t.size() != 1) throw Error("targets file: one lemma per line expected, got '" + line + "'");
    out.push_back(t[0]);
  }
  return out;
}

inline Corpus filter_sentences(const Corpus& c, std::size_t min_tokens) {
  if (min_tokens < 1) throw Error("min_tokens must be >= 1");
  Corpus out;
  out.epoch = c.epoch;
  for (const auto& s : c.sentences)
    if (s.size() >= min_tokens) out.sentences.push_back(s);
  return out;
}

struct FrequencyProfile {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;

  std::size_t count(const std::string& w) const {
    auto it = counts.find(w);
    return it == counts.end() ? 0 : it->second;
  }
};

inline FrequencyProfile frequency_profile(const Corpus& c) {
  FrequencyProfile p;
  for (const auto& s : c.sentences)
    for (const auto& t : s) {
      ++p.counts[t];
      ++p.total;
    }
  return p;
}

// Types per thousand tokens.
inline double ttr_from_counts(double tokens, double types) {
  if (tokens <= 0.0) throw Error("ttr: no tokens");
  return types / tokens * 1000.0;
}

inline double ttr(const Corpus& c) {
  const auto p = frequency_profile(c);
  if (p.total == 0) throw Error("ttr: empty corpus");
  return ttr_from_counts(static_cast<double>(p.total), static_cast<double>(p.counts.size()));
}

// Uniform sample of min(n, occurrences) target occurrences; every occurrence
// is a candidate, so a sentence may contribute several uses. Ids are
// `<epoch>_<sentence>_<position>`; the result is ordered by position.
inline std::vector<UseNode> sample_uses(const Corpus& c, const std::string& target, std::size_t n,
                                        std::uint64_t seed) {
  if (n < 1) throw Error("sample_uses: n must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> occ;
  for (std::size_t s = 0; s < c.sentences.size(); ++s)
    for (std::size_t t = 0; t < c.sentences[s].size(); ++t)
      if (c.sentences[s][t] == target) occ.emplace_back(s, t);
  Rng rng(derive_seed(seed, "sample-uses", target));
  const std::size_t k = std::min(n, occ.size());
  for (std::size_t i = 0; i < k; ++i) std::swap(occ[i], occ[i + uniform_index(rng, occ.size() - i)]);
  occ.resize(k);
  std::sort(occ.begin(), occ.end());
  const Epoch ep = c.epoch.value_or(Epoch::C1);
  std::vector<UseNode> out;
  for (const auto& [s, t] : occ) {
    UseNode u;
    u.id = std::string(to_string(ep)) + "_" + std::to_string(s) + "_" + std::to_string(t);
    u.corpus = ep;
    u.tokens = c.sentences[s];
    u.target_index = t;
    u.word = target;
    out.push_back(std::move(u));
  }
  return out;
}

inline bool contains_target(const std::vector<std::string>& sentence, const std::set<std::string>& targets) {
  return std::any_of(sentence.begin(), sentence.end(), [&](const auto& t) { return targets.count(t) > 0; });
}

// Shrinks the larger corpus to the smaller one's sentence count: every
// target-bearing sentence is kept, the rest is a uniform sample of the
// remaining sentences. Original sentence order is preserved.
inline std::pair<Corpus, Corpus> downsample_matched(const Corpus& a, const Corpus& b,
                                                    const std::vector<std::string>& targets, std::uint64_t seed) {
  if (a.sentences.size() == b.sentences.size()) return {a, b};
  const bool a_larger = a.sentences.size() > b.sentences.size();
  const Corpus& big = a_larger ? a : b;
  const std::size_t quota = (a_larger ? b : a).sentences.size();
  const std::set<std::string> tset(targets.begin(), targets.end());
  std::vector<std::size_t> keep, rest;
  for (std::size_t i = 0; i < big.sentences.size(); ++i)
    (contains_target(big.sentences[i], tset) ? keep : rest).push_back(i);
  if (keep.size() > quota)
    throw Error("downsample_matched: " + std::to_string(keep.size()) + " target sentences exceed the quota of " +
                std::to_string(quota));
  Rng rng(derive_seed(seed, "downsample"));
  const std::size_t fill = quota - keep.size();
  for (std::size_t i = 0; i < fill; ++i) std::swap(rest[i], rest[i + uniform_index(rng, rest.size() - i)]);
  keep.insert(keep.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(fill));
  std::sort(keep.begin(), keep.end());
  Corpus reduced;
  reduced.epoch = big.epoch;
  for (std::size_t i : keep) reduced.sentences.push_back(big.sentences[i]);
  return a_larger ? std::pair{reduced, b} : std::pair{a, reduced};
}

struct ControlCandidate {
  std::string word;
  double freq1 = 0.0;
  double freq2 = 0.0;
  std::string pos;
};

struct ControlChoice {
  std::string word;
  double p = 0.0;
};

// Candidate qualifies at p when each of its frequencies lies within
// p times the changed word's frequency of the changed word's frequency.
inline bool control_qualifies(double ft1, double ft2, const ControlCandidate& c, double p) {
  constexpr double eps = 1e-9;
  return std::abs(c.freq1 - ft1) <= p * ft1 + eps && std::abs(c.freq2 - ft2) <= p * ft2 + eps;
}

// Scans p = p_min, p_min + step, ... <= p_max and returns the first p with a
// qualifying same-POS candidate (chosen uniformly among them).
inline ControlChoice select_control(double ft1, double ft2, const std::vector<ControlCandidate>& candidates,
                                    const std::string& pos, double p_min, double p_max, double step,
                                    std::uint64_t seed = 0) {
  if (!(p_min <= p_max)) throw Error("select_control: p_min > p_max");
  if (!(step > 0.0)) throw Error("select_control: step must be > 0");
  Rng rng(derive_seed(seed, "control"));
  for (long i = 0;; ++i) {
    const double p = p_min + static_cast<double>(i) * step;
    if (p > p_max + 1e-12) break;
    std::vector<const ControlCandidate*> ok;
    for (const auto& c : candidates)
      if (c.pos == pos && control_qualifies(ft1, ft2, c, p)) ok.push_back(&c);
    if (!ok.empty()) return {ok[uniform_index(rng, ok.size())]->word, p};
  }
  throw Error("select_control: no control candidate within p <= " + std::to_string(p_max));
}

}  // namespace semchange
