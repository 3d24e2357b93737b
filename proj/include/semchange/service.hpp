#pragma once

// Annotation campaigns backed by an append-only event log.
//
// Layout of a campaign directory:
//   campaign.json                    creation request, written once
//   events.log                       one JSON event per line, append-only
//   snapshots/<word>/round-<r>.graph     graph after closing round r
//   snapshots/<word>/round-<r>.clusters  node-id TAB cluster-id
//
// Opening a directory replays events.log through the same code paths the
// live service uses, so the replayed state equals the state before shutdown.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <string>
#include <vector>

#include <json.hpp>

#include "semchange/graph_io.hpp"
#include "semchange/json_io.hpp"
#include "semchange/pipeline.hpp"

namespace semchange {

// Service-level failure with the HTTP status the API maps it to.
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string& msg) : Error(msg), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

inline constexpr int kApiVersion = 1;

struct AnnotatorEntry {
  std::string id;
  std::string token;
};

struct WordSpec {
  std::string word;
  std::vector<UseNode> uses;
  std::vector<SenseDefNode> senses;
};

struct CampaignSpec {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<AnnotatorEntry> roster;
  SamplerConfig sampler;
  ClusterConfig clustering;
  std::vector<WordSpec> words;
};

// ---- JSON mapping -------------------------------------------------------

inline json to_json(const UseNode& u) {
  return json{{"id", u.id}, {"corpus", std::string(to_string(u.corpus))}, {"tokens", u.tokens},
              {"target_index", u.target_index}};
}

inline json to_json(const CampaignSpec& s) {
  json words = json::array();
  for (const auto& w : s.words) {
    json uses = json::array(), senses = json::array();
    for (const auto& u : w.uses) uses.push_back(to_json(u));
    for (const auto& d : w.senses) senses.push_back({{"id", d.id}, {"gloss", d.gloss}});
    words.push_back({{"word", w.word}, {"uses", uses}, {"senses", senses}});
  }
  json roster = json::array();
  for (const auto& a : s.roster) roster.push_back({{"id", a.id}, {"token", a.token}});
  std::vector<std::string> states;
  for (auto st : s.clustering.initial_states) states.emplace_back(to_string(st));
  return json{{"api_version", kApiVersion},
              {"id", s.id},
              {"seed", s.seed},
              {"roster", roster},
              {"sampler",
               {{"node_fraction", s.sampler.node_fraction},
                {"min_round_one_nodes", s.sampler.min_round_one_nodes},
                {"edge_fraction", s.sampler.edge_fraction},
                {"confirm_fraction", s.sampler.confirm_fraction},
                {"multi_annotation_rate", s.sampler.multi_annotation_rate},
                {"max_rounds", s.sampler.max_rounds}}},
              {"clustering",
               {{"max_clusters", s.clustering.max_clusters_values},
                {"restarts", s.clustering.restarts},
                {"initial_states", states},
                {"initial_temperature", s.clustering.schedule.initial_temperature},
                {"decay", s.clustering.schedule.decay},
                {"iterations", s.clustering.schedule.iterations}}},
              {"words", words}};
}

inline CampaignSpec campaign_spec_from_json(const json& j) {
  try {
    CampaignSpec s;
    s.id = j.at("id").get<std::string>();
    s.seed = j.value("seed", std::uint64_t{0});
    for (const auto& a : j.at("roster")) s.roster.push_back({a.at("id").get<std::string>(), a.at("token").get<std::string>()});
    if (j.contains("sampler")) sampler_from_json(j.at("sampler"), s.sampler);
    if (j.contains("clustering")) clustering_from_json(j.at("clustering"), s.clustering);
    for (const auto& w : j.at("words")) {
      WordSpec ws;
      ws.word = w.at("word").get<std::string>();
      for (const auto& u : w.at("uses")) {
        UseNode node;
        node.id = u.at("id").get<std::string>();
        node.corpus = parse_epoch(u.at("corpus").get<std::string>());
        node.tokens = u.at("tokens").get<std::vector<std::string>>();
        node.target_index = u.at("target_index").get<std::size_t>();
        node.word = ws.word;
        ws.uses.push_back(std::move(node));
      }
      if (w.contains("senses"))
        for (const auto& d : w.at("senses"))
          ws.senses.push_back({d.at("id").get<std::string>(), d.at("gloss").get<std::string>(), ws.word});
      s.words.push_back(std::move(ws));
    }
    return s;
  } catch (const json::exception& e) {
    throw ServiceError(400, std::string("invalid campaign spec: ") + e.what());
  }
}

inline void validate_spec(const CampaignSpec& s) {
  auto bad = [](const std::string& m) { return ServiceError(400, "invalid campaign spec: " + m); };
  if (s.id.empty() || s.id.find_first_of("/\\. \t") != std::string::npos) throw bad("id must be a plain name");
  if (s.roster.empty()) throw bad("roster is empty");
  std::set<std::string> ids, tokens, words;
  for (const auto& a : s.roster) {
    if (a.id.empty() || a.token.empty()) throw bad("annotator id and token must be non-empty");
    if (!ids.insert(a.id).second) throw bad("duplicate annotator '" + a.id + "'");
    if (!tokens.insert(a.token).second) throw bad("duplicate annotator token");
  }
  if (s.words.empty()) throw bad("no words");
  for (const auto& w : s.words) {
    if (w.word.empty() || w.word.find_first_of("/\\ \t") != std::string::npos) throw bad("bad word '" + w.word + "'");
    if (!words.insert(w.word).second) throw bad("duplicate word '" + w.word + "'");
    if (w.uses.size() < 2) throw bad("word '" + w.word + "' needs at least 2 uses");
  }
  try {
    s.sampler.validate();
    s.clustering.validate();
  } catch (const Error& e) {
    throw bad(e.what());
  }
  if (s.sampler.multi_annotation_rate > 0.0 && s.roster.size() < 2)
    throw bad("multi-annotation needs at least 2 annotators");
}

// The per-word pipeline configuration a campaign uses; exposed so a plain
// library run can reproduce a campaign exactly.
inline PipelineConfig campaign_pipeline_config(const CampaignSpec& s, const std::string& word) {
  PipelineConfig pc{s.sampler, s.clustering, derive_seed(s.seed, "word", word)};
  pc.sampler.roster.clear();
  for (const auto& a : s.roster) pc.sampler.roster.push_back(a.id);
  return pc;
}

inline UsageGraph initial_graph(const WordSpec& w) {
  UsageGraph g(w.word);
  for (const auto& u : w.uses) g.add_node(u);
  for (const auto& d : w.senses) g.add_node(d);
  return g;
}

inline std::string clusters_to_string(const Clustering& c) {
  std::string out;
  for (const auto& [id, k] : c.assignment()) out += id + "\t" + std::to_string(k) + "\n";
  return out;
}

enum class WordStatus { Collecting, RoundComplete, Done };

inline std::string_view to_string(WordStatus s) {
  switch (s) {
    case WordStatus::Collecting: return "collecting";
    case WordStatus::RoundComplete: return "round-complete";
    case WordStatus::Done: return "done";
  }
  return "?";
}

struct QueueItem {
  std::string campaign;
  std::string word;
  int round = 0;
  NodePair pair;
};

struct AssignmentKey {
  NodePair pair;
  std::string annotator;
  friend auto operator<=>(const AssignmentKey&, const AssignmentKey&) = default;
};

class Campaign {
 public:
  // Creates a new campaign directory. Fails if it already exists.
  static std::unique_ptr<Campaign> create(const std::filesystem::path& root, const CampaignSpec& spec) {
    validate_spec(spec);
    const auto dir = root / spec.id;
    if (std::filesystem::exists(dir)) throw ServiceError(409, "campaign '" + spec.id + "' already exists");
    auto c = std::unique_ptr<Campaign>(new Campaign(dir, spec));
    std::filesystem::create_directories(dir / "snapshots");
    {
      std::ofstream out(dir / "campaign.json");
      out << to_json(spec).dump(2) << '\n';
      if (!out) throw Error("cannot write campaign.json");
    }
    std::ofstream(dir / "events.log", std::ios::app).flush();
    c->open_log();
    return c;
  }

  // Rebuilds a campaign from its directory by replaying the event log. With
  // `rebuild_snapshots` the per-round snapshot files are rewritten as well.
  static std::unique_ptr<Campaign> open(const std::filesystem::path& dir, bool rebuild_snapshots = false) {
    std::ifstream in(dir / "campaign.json");
    if (!in) throw Error("no campaign.json in '" + dir.string() + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(std::string("corrupt campaign.json: ") + e.what());
    }
    auto c = std::unique_ptr<Campaign>(new Campaign(dir, campaign_spec_from_json(j)));
    c->replay(rebuild_snapshots);
    c->open_log();
    return c;
  }

  const CampaignSpec& spec() const { return spec_; }
  const std::string& id() const { return spec_.id; }
  std::filesystem::path dir() const { return dir_; }

  std::string annotator_for_token(const std::string& token) const {
    for (const auto& a : spec_.roster)
      if (a.token == token) return a.id;
    throw ServiceError(401, "unknown annotator token");
  }

  void require_annotator(const std::string& id) const {
    for (const auto& a : spec_.roster)
      if (a.id == id) return;
    throw ServiceError(404, "unknown annotator '" + id + "'");
  }

  // The annotator's current head item; the same item comes back until it is judged.
  std::optional<QueueItem> next_item(const std::string& annotator) {
    std::lock_guard lock(mu_);
    require_annotator(annotator);
    auto h = heads_.find(annotator);
    if (h != heads_.end() && is_pending(h->second.first, h->second.second, annotator)) {
      return QueueItem{spec_.id, h->second.first, words_.at(h->second.first).pipe.round(), h->second.second};
    }
    std::optional<std::tuple<std::uint64_t, std::string, NodePair>> best;
    for (const auto& [word, ws] : words_) {
      if (ws.status != WordStatus::Collecting) continue;
      for (const auto& [key, judged] : ws.assigned) {
        if (judged || key.annotator != annotator) continue;
        // Fixed pseudo-random priority per item gives a per-annotator shuffled order.
        const std::uint64_t prio =
            derive_seed(spec_.seed, "queue", annotator, word, ws.pipe.round(), key.pair.first(), key.pair.second());
        std::tuple<std::uint64_t, std::string, NodePair> cand{prio, word, key.pair};
        if (!best || cand < *best) best = cand;
      }
    }
    if (!best) {
      if (h != heads_.end()) heads_.erase(h);
      return std::nullopt;
    }
    const auto& [_, word, pair] = *best;
    append({{"type", "serve"}, {"annotator", annotator}, {"word", word}, {"pair", {pair.first(), pair.second()}}});
    heads_[annotator] = {word, pair};
    return QueueItem{spec_.id, word, words_.at(word).pipe.round(), pair};
  }

  void submit_judgment(const std::string& annotator, const std::string& word, const NodePair& pair, int value) {
    std::lock_guard lock(mu_);
    check_judgment(annotator, word, pair, value);
    const int round = words_.at(word).pipe.round();
    append({{"type", "judgment"},
            {"annotator", annotator},
            {"word", word},
            {"pair", {pair.first(), pair.second()}},
            {"value", value},
            {"round", round}});
    apply_judgment(annotator, word, pair, value);
  }

  // Word owning the annotator's pending assignment of `pair` (for requests that omit the word).
  std::string word_for_pair(const std::string& annotator, const NodePair& pair) const {
    std::lock_guard lock(mu_);
    // Pending assignments win; an already judged one still resolves (to a duplicate).
    for (const bool want_judged : {false, true}) {
      std::optional<std::string> found;
      for (const auto& [word, ws] : words_) {
        if (ws.status == WordStatus::Done) continue;
        auto it = ws.assigned.find({pair, annotator});
        if (it == ws.assigned.end() || it->second != want_judged) continue;
        if (found) throw ServiceError(400, "pair is ambiguous across words; specify the word");
        found = word;
      }
      if (found) return *found;
    }
    throw ServiceError(403, "pair is not assigned to this annotator");
  }

  // Closes the word's round. Returns the new plan, or nullopt when the word is done.
  std::optional<RoundPlan> advance_round(const std::string& word) {
    std::lock_guard lock(mu_);
    auto& ws = word_state(word);
    if (ws.status == WordStatus::Done) throw ServiceError(409, "word '" + word + "' is finished");
    for (const auto& [_, judged] : ws.assigned)
      if (!judged) throw ServiceError(409, "round incomplete");
    append({{"type", "advance"}, {"word", word}});
    return apply_advance(word, true);
  }

  // Advances every unfinished word whose round is complete; the per-word
  // re-clustering runs in parallel. Returns the advanced words.
  std::vector<std::string> advance_all() {
    std::lock_guard lock(mu_);
    std::vector<std::string> ready;
    for (const auto& [word, ws] : words_)
      if (ws.status == WordStatus::RoundComplete) ready.push_back(word);
    std::vector<int> closed(ready.size());
    std::vector<char> more(ready.size());
    std::vector<std::exception_ptr> errors(ready.size());
    {
      std::vector<std::jthread> jobs;
      for (std::size_t i = 0; i < ready.size(); ++i)
        jobs.emplace_back([&, i] {
          try {
            auto& pipe = words_.at(ready[i]).pipe;
            closed[i] = pipe.round();
            more[i] = pipe.advance().has_value();
          } catch (...) {
            errors[i] = std::current_exception();
          }
        });
    }
    std::exception_ptr first;
    std::vector<std::string> advanced;
    for (std::size_t i = 0; i < ready.size(); ++i) {
      if (errors[i]) {
        if (!first) first = errors[i];
        continue;
      }
      append({{"type", "advance"}, {"word", ready[i]}});
      finish_advance(ready[i], closed[i], more[i], true);
      advanced.push_back(ready[i]);
    }
    if (first) std::rethrow_exception(first);
    return advanced;
  }

  // Moves a pending assignment to another annotator, or expires it when `to` is empty.
  void reassign(const std::string& word, const NodePair& pair, const std::string& from, const std::string& to) {
    std::lock_guard lock(mu_);
    check_reassign(word, pair, from, to);
    append({{"type", "reassign"}, {"word", word}, {"pair", {pair.first(), pair.second()}}, {"from", from}, {"to", to}});
    apply_reassign(word, pair, from, to);
  }

  struct WordView {
    UsageGraph graph;
    Clustering clustering;
    WordStatus status;
    int round;
    std::size_t assigned;
    std::size_t judged;
    std::optional<ChangeScores> scores;
  };

  // Immutable snapshot of a word, published after every write; readers never block writers.
  std::shared_ptr<const WordView> view(const std::string& word) const {
    auto it = views_.find(word);
    if (it == views_.end()) throw ServiceError(404, "unknown word '" + word + "'");
    return std::atomic_load(&it->second);
  }

  // (judged, assigned) for the annotator over all unfinished words' current rounds.
  std::pair<std::size_t, std::size_t> progress(const std::string& annotator) const {
    std::lock_guard lock(mu_);
    require_annotator(annotator);
    std::size_t judged = 0, assigned = 0;
    for (const auto& [_, ws] : words_)
      for (const auto& [key, j] : ws.assigned)
        if (key.annotator == annotator) {
          ++assigned;
          judged += j ? 1 : 0;
        }
    return {judged, assigned};
  }

  std::vector<std::string> words() const {
    std::vector<std::string> out;
    for (const auto& w : spec_.words) out.push_back(w.word);
    return out;
  }

  std::string status() const {
    for (const auto& w : spec_.words)
      if (view(w.word)->status != WordStatus::Done) return "collecting";
    return "done";
  }

  std::size_t event_count() const {
    std::lock_guard lock(mu_);
    return events_;
  }

 private:
  struct WordState {
    WordPipeline pipe;
    WordStatus status = WordStatus::Collecting;
    std::map<AssignmentKey, bool> assigned;  // current round; true once judged
  };

  Campaign(std::filesystem::path dir, CampaignSpec spec) : dir_(std::move(dir)), spec_(std::move(spec)) {
    validate_spec(spec_);
    for (const auto& w : spec_.words) {
      WordState ws{WordPipeline(initial_graph(w), campaign_pipeline_config(spec_, w.word)), WordStatus::Collecting, {}};
      load_assignments(ws);
      words_.emplace(w.word, std::move(ws));
      views_.emplace(w.word, nullptr);
      publish(w.word);
    }
  }

  void publish(const std::string& word) {
    const auto& ws = words_.at(word);
    std::size_t judged = 0;
    for (const auto& [_, j] : ws.assigned) judged += j ? 1 : 0;
    auto v = std::make_shared<const WordView>(WordView{ws.pipe.graph(), ws.pipe.clustering(), ws.status,
                                                       ws.pipe.round(), ws.assigned.size(), judged, ws.pipe.scores()});
    std::atomic_store(&views_.at(word), std::shared_ptr<const WordView>(std::move(v)));
  }

  static void update_status(WordState& ws) {
    if (ws.status == WordStatus::Done) return;
    bool complete = true;
    for (const auto& [_, j] : ws.assigned) complete = complete && j;
    ws.status = complete ? WordStatus::RoundComplete : WordStatus::Collecting;
  }

  static void load_assignments(WordState& ws) {
    ws.assigned.clear();
    for (const auto& item : ws.pipe.plan().items)
      for (const auto& a : item.annotators) ws.assigned[{item.pair, a}] = false;
    ws.status = WordStatus::Collecting;
    update_status(ws);
  }

  WordState& word_state(const std::string& word) {
    auto it = words_.find(word);
    if (it == words_.end()) throw ServiceError(404, "unknown word '" + word + "'");
    return it->second;
  }
  const WordState& word_state(const std::string& word) const {
    auto it = words_.find(word);
    if (it == words_.end()) throw ServiceError(404, "unknown word '" + word + "'");
    return it->second;
  }

  bool is_pending(const std::string& word, const NodePair& pair, const std::string& annotator) const {
    auto wit = words_.find(word);
    if (wit == words_.end() || wit->second.status != WordStatus::Collecting) return false;
    auto it = wit->second.assigned.find({pair, annotator});
    return it != wit->second.assigned.end() && !it->second;
  }

  void check_judgment(const std::string& annotator, const std::string& word, const NodePair& pair, int value) {
    require_annotator(annotator);
    if (value < 0 || value > 4) throw ServiceError(400, "judgment value must be in 0..4");
    auto& ws = word_state(word);
    if (ws.status == WordStatus::Done) throw ServiceError(409, "word '" + word + "' is finished");
    auto it = ws.assigned.find({pair, annotator});
    if (it == ws.assigned.end()) throw ServiceError(403, "pair is not assigned to this annotator in this round");
    if (it->second) throw ServiceError(409, "duplicate judgment");
  }

  void apply_judgment(const std::string& annotator, const std::string& word, const NodePair& pair, int value) {
    auto& ws = word_state(word);
    ws.pipe.record(Judgment{pair, annotator, value, ws.pipe.round()});
    ws.assigned[{pair, annotator}] = true;
    update_status(ws);
    publish(word);
    if (auto h = heads_.find(annotator); h != heads_.end() && h->second.first == word && h->second.second == pair)
      heads_.erase(h);
  }

  std::optional<RoundPlan> apply_advance(const std::string& word, bool write_snapshots) {
    auto& ws = word_state(word);
    const int closed = ws.pipe.round();
    auto next = ws.pipe.advance();
    finish_advance(word, closed, next.has_value(), write_snapshots);
    return next;
  }

  void finish_advance(const std::string& word, int closed, bool more, bool write_snapshots) {
    auto& ws = word_state(word);
    if (write_snapshots) {
      const auto sdir = dir_ / "snapshots" / word;
      std::filesystem::create_directories(sdir);
      save_graph((sdir / ("round-" + std::to_string(closed) + ".graph")).string(), ws.pipe.graph());
      std::ofstream(sdir / ("round-" + std::to_string(closed) + ".clusters"), std::ios::binary)
          << clusters_to_string(ws.pipe.clustering());
    }
    if (more) {
      load_assignments(ws);
    } else {
      ws.assigned.clear();
      ws.status = WordStatus::Done;
    }
    publish(word);
  }

  void check_reassign(const std::string& word, const NodePair& pair, const std::string& from, const std::string& to) {
    auto& ws = word_state(word);
    require_annotator(from);
    auto it = ws.assigned.find({pair, from});
    if (it == ws.assigned.end()) throw ServiceError(404, "no such assignment");
    if (it->second) throw ServiceError(409, "assignment already judged");
    if (!to.empty()) {
      require_annotator(to);
      if (ws.assigned.count({pair, to})) throw ServiceError(409, "target annotator already holds this pair");
    }
  }

  void apply_reassign(const std::string& word, const NodePair& pair, const std::string& from, const std::string& to) {
    auto& ws = word_state(word);
    ws.assigned.erase({pair, from});
    if (!to.empty()) ws.assigned[{pair, to}] = false;
    update_status(ws);
    publish(word);
    if (auto h = heads_.find(from); h != heads_.end() && h->second.first == word && h->second.second == pair)
      heads_.erase(h);
  }

  void open_log() {
    log_.open(dir_ / "events.log", std::ios::app | std::ios::binary);
    if (!log_) throw Error("cannot open event log in '" + dir_.string() + "'");
  }

  void append(json ev) {
    ev["seq"] = events_ + 1;
    log_ << ev.dump() << '\n';
    log_.flush();
    if (!log_) throw Error("event log write failed");
    ++events_;
  }

  void replay(bool write_snapshots) {
    std::ifstream in(dir_ / "events.log");
    if (!in) throw Error("no events.log in '" + dir_.string() + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json ev;
      try {
        ev = json::parse(line);
      } catch (const json::exception&) {
        // A torn final record from a crash mid-write is dropped.
        if (in.peek() == EOF) break;
        throw Error("corrupt event log record " + std::to_string(events_ + 1));
      }
      const std::string type = ev.at("type");
      const std::string word = ev.at("word");
      if (type == "judgment") {
        const NodePair p(ev["pair"][0], ev["pair"][1]);
        check_judgment(ev["annotator"], word, p, ev["value"]);
        if (ev["round"].get<int>() != words_.at(word).pipe.round()) throw Error("event log round mismatch");
        apply_judgment(ev["annotator"], word, p, ev["value"]);
      } else if (type == "advance") {
        apply_advance(word, write_snapshots);
      } else if (type == "reassign") {
        const NodePair p(ev["pair"][0], ev["pair"][1]);
        check_reassign(word, p, ev["from"], ev["to"]);
        apply_reassign(word, p, ev["from"], ev["to"]);
      } else if (type == "serve") {
        heads_[ev["annotator"]] = {word, NodePair(ev["pair"][0], ev["pair"][1])};
      } else {
        throw Error("unknown event type '" + type + "'");
      }
      ++events_;
    }
  }

  std::filesystem::path dir_;
  CampaignSpec spec_;
  std::map<std::string, WordState> words_;
  std::map<std::string, std::shared_ptr<const WordView>> views_;  // keys fixed at construction
  std::map<std::string, std::pair<std::string, NodePair>> heads_;  // annotator -> (word, pair)
  std::ofstream log_;
  std::size_t events_ = 0;
  mutable std::mutex mu_;
};

// All campaigns under one data directory.
class AnnotationService {
 public:
  explicit AnnotationService(std::filesystem::path data_dir) : root_(std::move(data_dir)) {
    std::filesystem::create_directories(root_);
    for (const auto& entry : std::filesystem::directory_iterator(root_)) {
      if (!entry.is_directory() || !std::filesystem::exists(entry.path() / "campaign.json")) continue;
      auto c = Campaign::open(entry.path());
      campaigns_.emplace(c->id(), std::move(c));
    }
  }

  Campaign& create_campaign(const CampaignSpec& spec) {
    std::lock_guard lock(mu_);
    if (campaigns_.count(spec.id)) throw ServiceError(409, "campaign '" + spec.id + "' already exists");
    auto c = Campaign::create(root_, spec);
    auto& ref = *c;
    campaigns_.emplace(spec.id, std::move(c));
    return ref;
  }

  Campaign& campaign(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = campaigns_.find(id);
    if (it == campaigns_.end()) throw ServiceError(404, "unknown campaign '" + id + "'");
    return *it->second;
  }

  std::vector<std::string> campaign_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : campaigns_) out.push_back(id);
    return out;
  }

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::map<std::string, std::unique_ptr<Campaign>> campaigns_;
  mutable std::mutex mu_;
};

}  // namespace semchange
