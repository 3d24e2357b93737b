#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch_amalgamated.hpp>

#include "campaign_driver.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "semchange/evaluation.hpp"

using namespace semchange;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() / ("semchange_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

CampaignSpec tiny_spec(const std::string& id = "tiny") {
  CampaignSpec s;
  s.id = id;
  s.seed = 7;
  s.roster = {{"a1", "tok-a1"}, {"a2", "tok-a2"}};
  s.clustering.restarts = 1;
  s.clustering.schedule.iterations = 2000;
  WordSpec w{"cell", {}, {}};
  for (int i = 0; i < 8; ++i)
    w.uses.push_back(UseNode{"u" + std::to_string(i), i < 4 ? Epoch::C1 : Epoch::C2, {"a", "cell", "b"}, 1, "cell"});
  s.words.push_back(w);
  return s;
}

int status_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 0;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Pending (pair, annotator) assignments of a word in the current round.
std::vector<std::pair<NodePair, std::string>> pending(Campaign& c, const std::string& word) {
  std::vector<std::pair<NodePair, std::string>> out;
  // Drain through next_item for every annotator without judging: the sticky head
  // only ever exposes one item, so inspect the plan via a fresh pipeline instead.
  WordPipeline pipe(initial_graph(c.spec().words.front()), campaign_pipeline_config(c.spec(), word));
  for (const auto& it : pipe.plan().items)
    for (const auto& a : it.annotators) out.emplace_back(it.pair, a);
  return out;
}

}  // namespace

TEST_CASE("campaign spec validation") {
  TempDir tmp("spec");
  auto ok = tiny_spec();
  CHECK_NOTHROW(validate_spec(ok));
  auto bad = ok;
  bad.id = "../escape";
  CHECK(status_of([&] { validate_spec(bad); }) == 400);
  bad = ok;
  bad.roster.clear();
  CHECK(status_of([&] { validate_spec(bad); }) == 400);
  bad = ok;
  bad.roster.push_back({"a1", "other"});
  CHECK(status_of([&] { validate_spec(bad); }) == 400);
  bad = ok;
  bad.roster.push_back({"a3", "tok-a1"});
  CHECK(status_of([&] { validate_spec(bad); }) == 400);
  bad = ok;
  bad.words.push_back(ok.words[0]);
  CHECK(status_of([&] { validate_spec(bad); }) == 400);
  bad = ok;
  bad.words[0].uses.resize(1);
  CHECK(status_of([&] { validate_spec(bad); }) == 400);
  bad = ok;
  bad.roster.resize(1);
  CHECK(status_of([&] { validate_spec(bad); }) == 400);  // multi-annotation needs 2
  bad.sampler.multi_annotation_rate = 0.0;
  CHECK_NOTHROW(validate_spec(bad));
  bad = ok;
  bad.clustering.schedule.decay = 2.0;
  CHECK(status_of([&] { validate_spec(bad); }) == 400);
  CHECK(status_of([] { campaign_spec_from_json(json::parse(R"({"id": "x"})")); }) == 400);

  AnnotationService svc(tmp.path);
  svc.create_campaign(ok);
  CHECK(status_of([&] { svc.create_campaign(ok); }) == 409);
  CHECK(status_of([&] { svc.campaign("nope"); }) == 404);
  CHECK(svc.campaign_ids() == std::vector<std::string>{"tiny"});
}

TEST_CASE("campaign spec JSON round-trips") {
  auto s = driver::make_scenario("rt", 3).spec;
  s.words[0].senses.push_back({"def1", "a gloss", s.words[0].word});
  const json j = to_json(s);
  CHECK(j["api_version"] == kApiVersion);
  CHECK(to_json(campaign_spec_from_json(j)) == j);
}

TEST_CASE("queue: sticky head, per-annotator items, empty at the end of a round") {
  TempDir tmp("queue");
  AnnotationService svc(tmp.path);
  auto& c = svc.create_campaign(tiny_spec());
  const auto first = c.next_item("a1");
  REQUIRE(first);
  const auto events = c.event_count();
  const auto again = c.next_item("a1");
  REQUIRE(again);
  CHECK(again->pair == first->pair);
  CHECK(c.event_count() == events);  // re-serving the head is not a new event
  CHECK(first->round == 1);
  CHECK(first->campaign == "tiny");

  std::size_t judged = 0;
  for (const auto& a : {"a1", "a2"}) {
    std::set<NodePair> seen;
    while (auto item = c.next_item(a)) {
      CHECK(seen.insert(item->pair).second);
      c.submit_judgment(a, item->word, item->pair, 3);
      ++judged;
    }
  }
  const auto v = c.view("cell");
  CHECK(v->status == WordStatus::RoundComplete);
  CHECK(v->judged == judged);
  CHECK(v->assigned == judged);
  CHECK(c.progress("a1").first == c.progress("a1").second);
  CHECK_FALSE(c.next_item("a1"));
  CHECK(status_of([&] { c.next_item("zz"); }) == 404);
  CHECK(status_of([&] { c.annotator_for_token("wrong"); }) == 401);
  CHECK(c.annotator_for_token("tok-a2") == "a2");
}

TEST_CASE("judgment submission errors") {
  TempDir tmp("submit");
  AnnotationService svc(tmp.path);
  auto& c = svc.create_campaign(tiny_spec());
  const auto item = c.next_item("a1");
  REQUIRE(item);
  CHECK(status_of([&] { c.submit_judgment("a1", "cell", item->pair, 5); }) == 400);
  CHECK(status_of([&] { c.submit_judgment("a1", "cell", item->pair, -1); }) == 400);
  CHECK(status_of([&] { c.submit_judgment("a1", "nope", item->pair, 3); }) == 404);
  CHECK(status_of([&] { c.submit_judgment("zz", "cell", item->pair, 3); }) == 404);
  // A pair nobody planned.
  NodePair unplanned("u0", "u1");
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) {
      NodePair p("u" + std::to_string(i), "u" + std::to_string(j));
      bool planned = false;
      for (const auto& [q, _] : pending(c, "cell")) planned = planned || q == p;
      if (!planned) unplanned = p;
    }
  CHECK(status_of([&] { c.submit_judgment("a1", "cell", unplanned, 3); }) == 403);
  CHECK(status_of([&] { c.word_for_pair("a1", unplanned); }) == 403);
  CHECK(c.word_for_pair("a1", item->pair) == "cell");
  c.submit_judgment("a1", "cell", item->pair, 0);
  CHECK(status_of([&] { c.submit_judgment("a1", "cell", item->pair, 3); }) == 409);
}

TEST_CASE("advance requires a complete round and stops at done") {
  TempDir tmp("advance");
  AnnotationService svc(tmp.path);
  auto& c = svc.create_campaign(tiny_spec());
  CHECK(status_of([&] { c.advance_round("cell"); }) == 409);
  CHECK(status_of([&] { c.advance_round("nope"); }) == 404);
  CHECK(c.advance_all().empty());
  for (int guard = 0; c.status() != "done" && guard < 20; ++guard) {
    for (const auto& a : {"a1", "a2"})
      while (auto item = c.next_item(a)) c.submit_judgment(a, item->word, item->pair, 4);
    const int round = c.view("cell")->round;
    auto plan = c.advance_round("cell");
    CHECK(fs::exists(tmp.path / "tiny" / "snapshots" / "cell" / ("round-" + std::to_string(round) + ".graph")));
    CHECK(fs::exists(tmp.path / "tiny" / "snapshots" / "cell" / ("round-" + std::to_string(round) + ".clusters")));
    if (plan) CHECK(plan->round == round + 1);
  }
  REQUIRE(c.status() == "done");
  const auto v = c.view("cell");
  CHECK(v->status == WordStatus::Done);
  REQUIRE(v->scores);
  // All judgments were 4: a single sense, no change.
  CHECK(v->clustering.cluster_count() == 1);
  CHECK(v->scores->binary == 0);
  CHECK(v->scores->graded == Catch::Approx(0.0).margin(1e-12));
  CHECK(status_of([&] { c.advance_round("cell"); }) == 409);
  CHECK(status_of([&] { c.submit_judgment("a1", "cell", NodePair("u0", "u1"), 3); }) == 409);
  CHECK_FALSE(c.next_item("a1"));
}

TEST_CASE("reassign and expire") {
  TempDir tmp("reassign");
  AnnotationService svc(tmp.path);
  auto spec = tiny_spec();
  spec.sampler.multi_annotation_rate = 0.0;
  auto& c = svc.create_campaign(spec);
  const auto item = c.next_item("a1");
  REQUIRE(item);
  CHECK(status_of([&] { c.reassign("cell", item->pair, "a2", "a1"); }) == 404);
  CHECK(status_of([&] { c.reassign("cell", item->pair, "a1", "zz"); }) == 404);
  c.reassign("cell", item->pair, "a1", "a2");
  CHECK(status_of([&] { c.submit_judgment("a1", "cell", item->pair, 3); }) == 403);
  // a1's head moved away with the reassignment.
  if (auto n = c.next_item("a1")) CHECK(n->pair != item->pair);
  c.submit_judgment("a2", "cell", item->pair, 3);
  CHECK(status_of([&] { c.reassign("cell", item->pair, "a2", "a1"); }) == 409);

  // Expire everything else that is pending: the round completes without it.
  const auto assigned_before = c.view("cell")->assigned;
  std::size_t expired = 0;
  for (const auto& a : {"a1", "a2"})
    while (auto n = c.next_item(a)) {
      c.reassign("cell", n->pair, a, "");
      ++expired;
    }
  const auto v = c.view("cell");
  CHECK(v->assigned == assigned_before - expired);
  CHECK(v->judged == 1);
  CHECK(v->status == WordStatus::RoundComplete);
  CHECK_NOTHROW(c.advance_round("cell"));
}

TEST_CASE("campaign state survives a restart") {
  TempDir tmp("durable");
  std::optional<QueueItem> head;
  std::string graph_before;
  std::size_t events = 0;
  {
    AnnotationService svc(tmp.path);
    auto& c = svc.create_campaign(tiny_spec());
    for (int i = 0; i < 3; ++i) {
      auto item = c.next_item("a1");
      REQUIRE(item);
      c.submit_judgment("a1", item->word, item->pair, 1 + i);
    }
    head = c.next_item("a2");
    REQUIRE(head);
    graph_before = graph_to_string(c.view("cell")->graph);
    events = c.event_count();
  }
  AnnotationService svc(tmp.path);
  auto& c = svc.campaign("tiny");
  CHECK(c.event_count() == events);
  CHECK(graph_to_string(c.view("cell")->graph) == graph_before);
  const auto h = c.next_item("a2");
  REQUIRE(h);
  CHECK(h->pair == head->pair);  // the served head is persisted
  CHECK(c.event_count() == events);

  // Every line is a JSON event with a running sequence number.
  std::istringstream log(read_file(tmp.path / "tiny" / "events.log"));
  std::string line;
  std::size_t seq = 0;
  while (std::getline(log, line)) {
    const auto ev = json::parse(line);
    CHECK(ev["seq"] == ++seq);
    CHECK(ev.contains("type"));
  }
  CHECK(seq == events);
}

TEST_CASE("a torn final record is dropped; a corrupt middle record is an error") {
  TempDir tmp("torn");
  {
    AnnotationService svc(tmp.path);
    auto& c = svc.create_campaign(tiny_spec());
    auto item = c.next_item("a1");
    c.submit_judgment("a1", item->word, item->pair, 3);
  }
  const auto log = tmp.path / "tiny" / "events.log";
  const std::string good = read_file(log);
  std::ofstream(log, std::ios::app | std::ios::binary) << R"({"type":"judgment","ann)";
  {
    auto c = Campaign::open(tmp.path / "tiny");
    CHECK(c->event_count() == 2);
    CHECK(c->view("cell")->judged == 1);
  }
  std::ofstream(log, std::ios::binary) << "garbage\n" << good;
  CHECK_THROWS_AS(Campaign::open(tmp.path / "tiny"), Error);
}

TEST_CASE("replaying the log reproduces snapshots byte for byte") {
  TempDir tmp("replay");
  const auto scn = driver::make_scenario("rep", 11);
  AnnotationService svc(tmp.path / "live");
  auto& live = svc.create_campaign(scn.spec);
  driver::service_run(live, scn);
  const auto live_snaps = driver::snapshot_files(live.dir());
  REQUIRE_FALSE(live_snaps.empty());

  const auto copy = tmp.path / "copy" / "rep";
  fs::create_directories(copy);
  fs::copy_file(live.dir() / "campaign.json", copy / "campaign.json");
  fs::copy_file(live.dir() / "events.log", copy / "events.log");
  const auto replayed = Campaign::open(copy, true);
  CHECK(driver::snapshot_files(copy) == live_snaps);
  CHECK(driver::final_snapshots(*replayed) == driver::final_snapshots(live));
  CHECK(driver::same_outcomes(driver::campaign_outcome(*replayed), driver::campaign_outcome(live)));
  CHECK(replayed->status() == "done");
}

TEST_CASE("a service-driven campaign matches the pure pipeline") {
  TempDir tmp("equiv");
  const auto scn = driver::make_scenario("eq", 5);
  AnnotationService svc(tmp.path);
  auto& c = svc.create_campaign(scn.spec);
  driver::service_run(c, scn);
  const auto lib = driver::library_run(scn);
  CHECK(driver::same_outcomes(driver::campaign_outcome(c), lib));
  for (const auto& [w, o] : lib) CHECK(o.scores.has_value());
}

TEST_CASE("readers see consistent snapshots while a writer submits") {
  TempDir tmp("readers");
  const auto scn = driver::make_scenario("rd", 9, 2);
  AnnotationService svc(tmp.path);
  auto& c = svc.create_campaign(scn.spec);
  std::atomic<bool> stop{false};
  std::atomic<long> reads{0};
  std::atomic<int> bad{0};
  std::vector<std::jthread> readers;
  for (int r = 0; r < 3; ++r)
    readers.emplace_back([&] {
      while (!stop) {
        for (const auto& w : c.words()) {
          const auto v = c.view(w);
          if (v->judged > v->assigned) ++bad;
          ++reads;
        }
      }
    });
  driver::service_run(c, scn);
  stop = true;
  readers.clear();
  CHECK(bad == 0);
  CHECK(reads > 0);
}

// ---- HTTP API --------------------------------------------------------------

TEST_CASE("HTTP API: authentication, payloads and every endpoint") {
  TempDir tmp("http");
  AnnotationService svc(tmp.path);
  driver::TestServer server(svc, "op-secret");
  auto cl = server.client();
  using driver::auth;
  const auto spec = tiny_spec("web");
  const std::string body = to_json(spec).dump();

  auto r = cl.Post("/campaigns", body, "application/json");
  REQUIRE(r);
  CHECK(r->status == 401);
  CHECK(json::parse(r->body)["api_version"] == kApiVersion);
  CHECK(json::parse(r->body).contains("error"));
  r = cl.Post("/campaigns", auth("wrong"), body, "application/json");
  CHECK(r->status == 403);
  r = cl.Post("/campaigns", auth("tok-a1"), body, "application/json");
  CHECK(r->status == 403);
  r = cl.Post("/campaigns", auth("op-secret"), "{not json", "application/json");
  CHECK(r->status == 400);
  r = cl.Post("/campaigns", auth("op-secret"), body, "application/json");
  REQUIRE(r->status == 201);
  auto j = json::parse(r->body);
  CHECK(j["id"] == "web");
  CHECK(j["status"] == "collecting");
  CHECK(j["words"][0]["word"] == "cell");
  CHECK(cl.Post("/campaigns", auth("op-secret"), body, "application/json")->status == 409);

  r = cl.Get("/campaigns/web/status", auth("op-secret"));
  REQUIRE(r->status == 200);
  j = json::parse(r->body);
  CHECK(j["words"][0]["round"] == 1);
  CHECK(j["words"][0]["status"] == "collecting");
  CHECK(cl.Get("/campaigns/web/status", auth("tok-a1"))->status == 403);
  CHECK(cl.Get("/campaigns/nope/status", auth("op-secret"))->status == 404);

  // next: own token only
  CHECK(cl.Get("/campaigns/web/annotators/a1/next")->status == 401);
  CHECK(cl.Get("/campaigns/web/annotators/a1/next", auth("tok-a2"))->status == 403);
  CHECK(cl.Get("/campaigns/web/annotators/a1/next", auth("bogus"))->status == 401);
  CHECK(cl.Get("/campaigns/web/annotators/zz/next", auth("tok-a1"))->status == 404);
  r = cl.Get("/campaigns/web/annotators/a1/next", auth("tok-a1"));
  REQUIRE(r->status == 200);
  const auto item = json::parse(r->body);
  CHECK(item["api_version"] == kApiVersion);
  CHECK(item["empty"] == false);
  CHECK(item["word"] == "cell");
  CHECK(item["round"] == 1);
  CHECK(item["mode"] == "pair");
  CHECK(item["left"]["kind"] == "use");
  CHECK(item["left"]["text"] == "a [[cell]] b");
  CHECK(item["left"]["target_index"] == 1);
  CHECK(item["scale"].size() == 5);
  CHECK(item["scale"][0]["label"] == "Identical");
  CHECK(item["progress"]["judged"] == 0);
  CHECK_FALSE(item.contains("weight"));
  CHECK_FALSE(item.contains("clusters"));
  // Same head until judged.
  CHECK(json::parse(cl.Get("/campaigns/web/annotators/a1/next", auth("tok-a1"))->body)["pair"] == item["pair"]);

  // judgments
  const json bad_value{{"pair", item["pair"]}, {"value", 7}};
  CHECK(cl.Post("/campaigns/web/judgments", auth("tok-a1"), bad_value.dump(), "application/json")->status == 400);
  const json frac{{"pair", item["pair"]}, {"value", 2.5}};
  CHECK(cl.Post("/campaigns/web/judgments", auth("tok-a1"), frac.dump(), "application/json")->status == 400);
  const json bad_pair{{"pair", {"u0"}}, {"value", 3}};
  CHECK(cl.Post("/campaigns/web/judgments", auth("tok-a1"), bad_pair.dump(), "application/json")->status == 400);
  const json good{{"pair", item["pair"]}, {"value", 3}};
  CHECK(cl.Post("/campaigns/web/judgments", good.dump(), "application/json")->status == 401);
  r = cl.Post("/campaigns/web/judgments", auth("tok-a1"), good.dump(), "application/json");
  REQUIRE(r->status == 201);
  CHECK(json::parse(r->body)["word"] == "cell");
  CHECK(cl.Post("/campaigns/web/judgments", auth("tok-a1"), good.dump(), "application/json")->status == 409);
  const json with_word{{"pair", item["pair"]}, {"value", 3}, {"word", "cell"}};
  CHECK(cl.Post("/campaigns/web/judgments", auth("tok-a1"), with_word.dump(), "application/json")->status == 409);

  // graph (operator only, never for annotators)
  CHECK(cl.Get("/campaigns/web/words/cell/graph", auth("tok-a1"))->status == 403);
  r = cl.Get("/campaigns/web/words/cell/graph", auth("op-secret"));
  REQUIRE(r->status == 200);
  j = json::parse(r->body);
  CHECK(j["nodes"].size() == 8);
  CHECK(j["edges"].size() == 1);
  CHECK(j["edges"][0]["weight"] == 3.0);
  CHECK(j["judged"] == 1);
  CHECK(cl.Get("/campaigns/web/words/nope/graph", auth("op-secret"))->status == 404);

  // advance before the round is complete; scores before done
  r = cl.Post("/campaigns/web/words/cell/advance", auth("op-secret"), "", "application/json");
  CHECK(r->status == 409);
  CHECK(json::parse(r->body)["error"] == "round incomplete");
  CHECK(cl.Get("/campaigns/web/words/cell/scores", auth("op-secret"))->status == 409);

  // reassign one of a2's items to a1, then expire another
  auto a2 = json::parse(cl.Get("/campaigns/web/annotators/a2/next", auth("tok-a2"))->body);
  const json re{{"word", "cell"}, {"pair", a2["pair"]}, {"from", "a2"}, {"to", "a1"}};
  CHECK(cl.Post("/campaigns/web/reassign", auth("tok-a1"), re.dump(), "application/json")->status == 403);
  r = cl.Post("/campaigns/web/reassign", auth("op-secret"), re.dump(), "application/json");
  if (r->status == 409) {
    // a1 already holds that pair: expire it instead.
    const json ex{{"word", "cell"}, {"pair", a2["pair"]}, {"from", "a2"}};
    r = cl.Post("/campaigns/web/reassign", auth("op-secret"), ex.dump(), "application/json");
    CHECK(json::parse(r->body)["expired"] == true);
  } else {
    CHECK(json::parse(r->body)["expired"] == false);
  }
  CHECK(r->status == 200);

  // finish the word through the per-word endpoint
  for (int guard = 0; guard < 20; ++guard) {
    for (const auto& [aid, tok] : std::vector<std::pair<std::string, std::string>>{{"a1", "tok-a1"}, {"a2", "tok-a2"}}) {
      while (true) {
        auto n = json::parse(cl.Get("/campaigns/web/annotators/" + aid + "/next", auth(tok))->body);
        if (n["empty"] == true) {
          CHECK(n["progress"]["judged"] == n["progress"]["assigned"]);
          break;
        }
        const json jb{{"pair", n["pair"]}, {"value", 4}, {"word", n["word"]}};
        REQUIRE(cl.Post("/campaigns/web/judgments", auth(tok), jb.dump(), "application/json")->status == 201);
      }
    }
    r = cl.Post("/campaigns/web/words/cell/advance", auth("op-secret"), "", "application/json");
    REQUIRE(r->status == 200);
    j = json::parse(r->body);
    if (j["status"] == "done") break;
    CHECK(j["items"].size() > 0);
    CHECK(j["items"][0].contains("reason"));
  }
  REQUIRE(j["status"] == "done");
  CHECK(j["scores"]["binary"] == 0);
  r = cl.Get("/campaigns/web/words/cell/scores", auth("op-secret"));
  REQUIRE(r->status == 200);
  j = json::parse(r->body);
  CHECK(j["binary"] == 0);
  CHECK(j["graded"].get<double>() == Catch::Approx(0.0).margin(1e-12));
  CHECK(j["k"] == 0);  // fewer than 31 uses
  CHECK(j["n"] == 1);
  r = cl.Post("/campaigns/web/advance", auth("op-secret"), "", "application/json");
  j = json::parse(r->body);
  CHECK(j["advanced"].empty());
  CHECK(j["status"] == "done");
  CHECK(cl.Post("/campaigns/web/words/cell/advance", auth("op-secret"), "", "application/json")->status == 409);
}

TEST_CASE("HTTP API: sense-definition items put the use on the left") {
  TempDir tmp("http_sense");
  AnnotationService svc(tmp.path);
  driver::TestServer server(svc, "op");
  auto cl = server.client();
  auto spec = tiny_spec("latin");
  spec.words[0].senses = {{"s_prison", "a prison cell", "cell"}, {"s_bio", "a biological cell", "cell"}};
  REQUIRE(cl.Post("/campaigns", driver::auth("op"), to_json(spec).dump(), "application/json")->status == 201);
  const auto item = json::parse(cl.Get("/campaigns/latin/annotators/a1/next", driver::auth("tok-a1"))->body);
  CHECK(item["mode"] == "sense");
  CHECK(item["left"]["kind"] == "use");
  CHECK(item["right"]["kind"] == "sense");
  CHECK(item["right"]["gloss"].get<std::string>().find("cell") != std::string::npos);
  // Every use is paired with every definition in round 1.
  const auto st = json::parse(cl.Get("/campaigns/latin/status", driver::auth("op"))->body);
  WordPipeline pipe(initial_graph(spec.words[0]), campaign_pipeline_config(spec, "cell"));
  CHECK(pipe.plan().items.size() == 16);
  CHECK(st["words"][0]["assigned"].get<std::size_t>() >= 16);
}

TEST_CASE("HTTP API: a two-annotator campaign equals the pure pipeline and survives restart") {
  TempDir tmp("http_equiv");
  const auto scn = driver::make_scenario("net", 21);
  std::map<std::string, driver::WordOutcome> via_http;
  {
    AnnotationService svc(tmp.path);
    driver::TestServer server(svc, "op");
    auto cl = server.client();
    REQUIRE(cl.Post("/campaigns", driver::auth("op"), to_json(scn.spec).dump(), "application/json")->status == 201);
    CHECK(driver::http_run(cl, scn, "op") == 0);
    via_http = driver::campaign_outcome(svc.campaign("net"));
    for (const auto& w : svc.campaign("net").words()) {
      auto r = cl.Get("/campaigns/net/words/" + w + "/scores", driver::auth("op"));
      REQUIRE(r->status == 200);
      const auto j = json::parse(r->body);
      REQUIRE(via_http.at(w).scores);
      CHECK(j["binary"] == via_http.at(w).scores->binary);
      CHECK(j["graded"].get<double>() == via_http.at(w).scores->graded);
    }
  }
  CHECK(driver::same_outcomes(via_http, driver::library_run(scn)));
  AnnotationService reopened(tmp.path);
  CHECK(driver::same_outcomes(driver::campaign_outcome(reopened.campaign("net")), via_http));
}

// ---- command line ----------------------------------------------------------

namespace {

std::pair<int, std::string> run_cli(const std::string& args) {
  const std::string cmd = std::string(SEMCHANGE_CLI) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
  const int rc = pclose(p);
  return {WEXITSTATUS(rc), out};
}

}  // namespace

TEST_CASE("CLI: scoring, baselines and corpus tools") {
  TempDir tmp("cli");
  const auto d = tmp.path.string();
  std::ofstream(tmp.path / "sfd.tsv") << "ledning\t58,0,4,0\t52,14,5,1\nEintagsfliege\t12,45,0,1\t85,6,1,1\n";
  auto [rc, out] = run_cli("score-change --sfd " + d + "/sfd.tsv");
  CHECK(rc == 0);
  CHECK(out == "ledning\t1\t0.337868\nEintagsfliege\t0\t0.660060\n");

  std::ofstream(tmp.path / "gold1.tsv") << "a\t1\nb\t0\nc\t1\nd\t0\n";
  std::ofstream(tmp.path / "pred1.tsv") << "a\t0\nb\t0\nc\t0\nd\t0\n";
  std::tie(rc, out) = run_cli("score --subtask 1 --answers " + d + "/pred1.tsv --gold " + d + "/gold1.tsv");
  CHECK(rc == 0);
  CHECK(out == "accuracy\t0.500000\nprecision\t-\nrecall\t0.000000\nf1\t-\n");

  std::ofstream(tmp.path / "gold2.tsv") << "a\t4\nb\t3\nc\t2\nd\t1\n";
  std::ofstream(tmp.path / "pred2.tsv") << "a\t1.0\nb\t1.0\nc\t0.5\nd\t0\n";
  std::tie(rc, out) = run_cli("score --subtask 2 --answers " + d + "/pred2.tsv --gold " + d + "/gold2.tsv");
  CHECK(out == "spearman\t0.948683\n");
  std::tie(rc, out) = run_cli("score --subtask 2 --answers " + d + "/pred2.tsv --gold " + d + "/gold1.tsv");
  CHECK(rc == 0);
  std::tie(rc, out) = run_cli("score --subtask 1 --answers " + d + "/pred2.tsv --gold " + d + "/gold1.tsv");
  CHECK(rc == 1);
  CHECK(out.rfind("error:", 0) == 0);

  std::ofstream(tmp.path / "c1.txt") << oracles::kCountCorpus1;
  std::ofstream(tmp.path / "c2.txt") << oracles::kCountCorpus2;
  std::ofstream(tmp.path / "targets.txt") << "cell\nphone\nold\nrang\ndark\n";
  std::tie(rc, out) = run_cli("baseline count --corpus1 " + d + "/c1.txt --corpus2 " + d + "/c2.txt --targets " + d +
                              "/targets.txt --window 2 --out " + d + "/count.tsv");
  CHECK(rc == 0);
  CHECK(out == "undefined: dark (no shared context columns)\n");
  const auto count = load_answers(d + "/count.tsv", 2);
  CHECK(count.entries.at("phone") == Catch::Approx(0.29289321881345254).margin(1e-12));
  std::tie(rc, out) = run_cli("baseline majority --targets " + d + "/targets.txt");
  CHECK(out == "cell\t0\ndark\t0\nold\t0\nphone\t0\nrang\t0\n");
  std::tie(rc, out) = run_cli("baseline freq --corpus1 " + d + "/c1.txt --corpus2 " + d + "/c2.txt --targets " + d +
                              "/targets.txt --binary");
  CHECK(rc == 0);
  CHECK(out.find("dark\t1\n") != std::string::npos);

  std::tie(rc, out) = run_cli("stats --corpus " + d + "/c1.txt");
  CHECK(out == "tokens\t10\ntypes\t9\nttr\t900.00\n");
  std::tie(rc, out) = run_cli("sample-uses --corpus " + d + "/c1.txt --target cell --n 5 --epoch C2");
  CHECK(out == "C2_0_2\t2\tthe old cell was dark\nC2_1_1\t1\ta cell phone rang loud\n");

  fs::create_directories(tmp.path / "answers");
  fs::copy_file(tmp.path / "pred1.tsv", tmp.path / "answers" / "sys1.tsv");
  std::tie(rc, out) = run_cli("analyze --subtask 1 --answers-dir " + d + "/answers --gold " + d + "/gold1.tsv");
  CHECK(rc == 0);
  CHECK(out.find("sys1.tsv\t0.500") != std::string::npos);
  CHECK(out.find("# word\tdifficulty") != std::string::npos);
  CHECK(run_cli("").first != 0);
}

TEST_CASE("CLI: cluster and sample-round on a graph file") {
  TempDir tmp("cli_graph");
  auto g = testing_helpers::graph_with(6);
  testing_helpers::judge(g, 0, 1, 4);
  testing_helpers::judge(g, 1, 2, 4);
  testing_helpers::judge(g, 3, 4, 4);
  testing_helpers::judge(g, 4, 5, 3);
  save_graph((tmp.path / "graph").string(), g);
  const auto d = tmp.path.string();
  auto [rc, out] = run_cli("cluster --graph " + d + "/graph --seed 3 --restarts 1 --out " + d + "/clusters");
  CHECK(rc == 0);
  CHECK(out == "# loss=0.000000 normalized_loss=0.000000 clusters=2\n");
  const auto clusters = read_file(tmp.path / "clusters");
  CHECK(std::count(clusters.begin(), clusters.end(), '\n') == 6);

  std::ofstream(tmp.path / "state.json") << R"({"round": 1, "roster": ["a1", "a2"]})";
  std::tie(rc, out) = run_cli("sample-round --state " + d + " --seed 4");
  CHECK(rc == 0);
  CHECK(out.rfind("# round 2\n", 0) == 0);
  std::istringstream lines(out);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    const auto f = split(line, '\t');
    REQUIRE(f.size() == 3);
    CHECK(split(f[0], ',').size() == 2);
    CHECK_FALSE(f[1].empty());
  }
  CHECK(run_cli("cluster --graph " + d + "/missing").first == 1);
}

TEST_CASE("CLI: serve answers HTTP requests") {
  TempDir tmp("cli_serve");
  // Pick a free port by binding and releasing it.
  int port;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  const std::string cmd = "SEMCHANGE_OPERATOR_TOKEN=op " + std::string(SEMCHANGE_CLI) + " serve --listen 127.0.0.1:" +
                          std::to_string(port) + " --data-dir " + tmp.path.string() + " >/dev/null 2>&1 & echo $!";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[64] = {};
  REQUIRE(std::fgets(buf, sizeof buf, p));
  pclose(p);
  const long pid = std::stol(buf);
  httplib::Client cl("127.0.0.1", port);
  httplib::Result r;
  for (int i = 0; i < 100 && !r; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    r = cl.Post("/campaigns", driver::auth("op"), to_json(tiny_spec("cli")).dump(), "application/json");
  }
  REQUIRE(r);
  CHECK(r->status == 201);
  CHECK(cl.Get("/campaigns/cli/status", driver::auth("op"))->status == 200);
  CHECK(std::system(("kill " + std::to_string(pid)).c_str()) == 0);
  CHECK(fs::exists(tmp.path / "cli" / "events.log"));
}
