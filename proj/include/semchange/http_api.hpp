#pragma once

// HTTP+JSON front end of the annotation service. Every response body carries
// "api_version"; errors are {"api_version", "error"} with a 4xx status.
//
// Operator endpoints take `Authorization: Bearer <operator token>`; the
// annotator endpoints take the annotator's own token. Annotator payloads
// never expose edge weights, clusters or other annotators' judgments.

#include <functional>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "semchange/service.hpp"

namespace semchange {

inline const json& durel_scale() {
  static const json scale = json::array({{{"value", 4}, {"label", "Identical"}},
                                         {{"value", 3}, {"label", "Closely Related"}},
                                         {{"value", 2}, {"label", "Distantly Related"}},
                                         {{"value", 1}, {"label", "Unrelated"}},
                                         {{"value", 0}, {"label", "Cannot decide"}}});
  return scale;
}

inline json render_node(const Node& n) {
  if (const auto* u = std::get_if<UseNode>(&n)) {
    // Target token wrapped in [[ ]] for clients that only show text.
    std::string text;
    for (std::size_t i = 0; i < u->tokens.size(); ++i) {
      if (i) text += ' ';
      text += i == u->target_index ? "[[" + u->tokens[i] + "]]" : u->tokens[i];
    }
    return {{"id", u->id}, {"kind", "use"}, {"tokens", u->tokens}, {"target_index", u->target_index}, {"text", text}};
  }
  const auto& d = std::get<SenseDefNode>(n);
  return {{"id", d.id}, {"kind", "sense"}, {"gloss", d.gloss}};
}

inline json item_json(const Campaign& c, const QueueItem& item, std::pair<std::size_t, std::size_t> progress) {
  const UsageGraph g = initial_graph(*std::find_if(c.spec().words.begin(), c.spec().words.end(),
                                                   [&](const WordSpec& w) { return w.word == item.word; }));
  const Node& a = g.nodes().at(item.pair.first());
  const Node& b = g.nodes().at(item.pair.second());
  const bool sense_mode = std::holds_alternative<SenseDefNode>(a) || std::holds_alternative<SenseDefNode>(b);
  // In sense mode the use always goes left, the gloss right.
  const bool swap = std::holds_alternative<SenseDefNode>(a);
  return {{"api_version", kApiVersion},
          {"empty", false},
          {"campaign", item.campaign},
          {"word", item.word},
          {"round", item.round},
          {"pair", {item.pair.first(), item.pair.second()}},
          {"mode", sense_mode ? "sense" : "pair"},
          {"left", render_node(swap ? b : a)},
          {"right", render_node(swap ? a : b)},
          {"scale", durel_scale()},
          {"progress", {{"judged", progress.first}, {"assigned", progress.second}}}};
}

inline json graph_json(const std::string& word, const Campaign::WordView& v) {
  json nodes = json::array(), edges = json::array(), clusters = json::object();
  for (const auto& [id, n] : v.graph.nodes()) {
    json node{{"id", id}};
    if (const auto* u = std::get_if<UseNode>(&n)) {
      node["kind"] = "use";
      node["corpus"] = std::string(to_string(u->corpus));
    } else {
      node["kind"] = "sense";
    }
    nodes.push_back(node);
  }
  for (const auto& [pair, e] : v.graph.edges())
    if (e.weighted())
      edges.push_back({{"pair", {pair.first(), pair.second()}}, {"weight", *e.weight}, {"judgments", e.judgments.size()}});
  for (const auto& [id, k] : v.clustering.assignment()) clusters[id] = k;
  return {{"api_version", kApiVersion},
          {"word", word},
          {"round", v.round},
          {"status", std::string(to_string(v.status))},
          {"judged", v.judged},
          {"assigned", v.assigned},
          {"nodes", nodes},
          {"edges", edges},
          {"clusters", clusters}};
}

inline json plan_json(const std::string& word, const std::optional<RoundPlan>& plan) {
  if (!plan) return {{"api_version", kApiVersion}, {"word", word}, {"status", "done"}};
  json items = json::array();
  for (const auto& it : plan->items)
    items.push_back({{"pair", {it.pair.first(), it.pair.second()}},
                     {"annotators", it.annotators},
                     {"reason", std::string(to_string(it.reason))}});
  return {{"api_version", kApiVersion}, {"word", word}, {"status", "collecting"}, {"round", plan->round}, {"items", items}};
}

inline NodePair pair_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ServiceError(400, "pair must be a two-element array of node ids");
  return NodePair(j[0].get<std::string>(), j[1].get<std::string>());
}

namespace detail {

inline std::string bearer(const httplib::Request& req) {
  const auto h = req.get_header_value("Authorization");
  const std::string prefix = "Bearer ";
  if (h.rfind(prefix, 0) != 0) throw ServiceError(401, "missing bearer token");
  return h.substr(prefix.size());
}

inline void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void guarded(httplib::Response& res, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    send(res, e.status(), {{"api_version", kApiVersion}, {"error", e.what()}});
  } catch (const json::exception& e) {
    send(res, 400, {{"api_version", kApiVersion}, {"error", std::string("malformed request: ") + e.what()}});
  } catch (const Error& e) {
    send(res, 400, {{"api_version", kApiVersion}, {"error", e.what()}});
  }
}

}  // namespace detail

inline void register_routes(httplib::Server& server, AnnotationService& service, const std::string& operator_token) {
  using detail::guarded;
  using detail::send;
  AnnotationService* svc = &service;
  auto require_operator = [operator_token](const httplib::Request& req) {
    if (operator_token.empty() || detail::bearer(req) != operator_token) throw ServiceError(403, "operator token required");
  };

  server.Post("/campaigns", [svc, require_operator](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      require_operator(req);
      auto& c = svc->create_campaign(campaign_spec_from_json(json::parse(req.body)));
      json words = json::array();
      for (const auto& w : c.words()) {
        auto v = c.view(w);
        words.push_back({{"word", w}, {"round", v->round}, {"assigned", v->assigned}});
      }
      send(res, 201, {{"api_version", kApiVersion}, {"id", c.id()}, {"status", c.status()}, {"words", words}});
    });
  });

  server.Get(R"(/campaigns/([^/]+)/status)", [svc, require_operator](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      require_operator(req);
      auto& c = svc->campaign(req.matches[1]);
      json words = json::array();
      for (const auto& w : c.words()) {
        auto v = c.view(w);
        json entry{{"word", w},
                   {"round", v->round},
                   {"status", std::string(to_string(v->status))},
                   {"judged", v->judged},
                   {"assigned", v->assigned}};
        if (v->scores) entry["scores"] = {{"binary", v->scores->binary}, {"graded", v->scores->graded}};
        words.push_back(entry);
      }
      send(res, 200, {{"api_version", kApiVersion}, {"id", c.id()}, {"status", c.status()}, {"words", words}});
    });
  });

  server.Get(R"(/campaigns/([^/]+)/annotators/([^/]+)/next)", [svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto& c = svc->campaign(req.matches[1]);
      const std::string aid = req.matches[2];
      c.require_annotator(aid);
      if (c.annotator_for_token(detail::bearer(req)) != aid) throw ServiceError(403, "token does not belong to annotator");
      auto item = c.next_item(aid);
      const auto progress = c.progress(aid);
      if (!item) {
        send(res, 200,
             {{"api_version", kApiVersion},
              {"empty", true},
              {"progress", {{"judged", progress.first}, {"assigned", progress.second}}}});
        return;
      }
      send(res, 200, item_json(c, *item, progress));
    });
  });

  server.Post(R"(/campaigns/([^/]+)/judgments)", [svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto& c = svc->campaign(req.matches[1]);
      const std::string aid = c.annotator_for_token(detail::bearer(req));
      const json body = json::parse(req.body);
      const NodePair pair = pair_from_json(body.at("pair"));
      const json& value = body.at("value");
      if (!value.is_number_integer()) throw ServiceError(400, "judgment value must be an integer in 0..4");
      const std::string word = body.contains("word") ? body["word"].get<std::string>() : c.word_for_pair(aid, pair);
      c.submit_judgment(aid, word, pair, value.get<int>());
      send(res, 201, {{"api_version", kApiVersion}, {"ok", true}, {"word", word}, {"pair", {pair.first(), pair.second()}}});
    });
  });

  server.Post(R"(/campaigns/([^/]+)/words/([^/]+)/advance)",
              [svc, require_operator](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  require_operator(req);
                  auto& c = svc->campaign(req.matches[1]);
                  const std::string word = req.matches[2];
                  auto plan = c.advance_round(word);
                  json body = plan_json(word, plan);
                  if (auto v = c.view(word); v->scores)
                    body["scores"] = {{"binary", v->scores->binary}, {"graded", v->scores->graded}};
                  send(res, 200, body);
                });
              });

  server.Post(R"(/campaigns/([^/]+)/advance)", [svc, require_operator](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      require_operator(req);
      auto& c = svc->campaign(req.matches[1]);
      send(res, 200, {{"api_version", kApiVersion}, {"advanced", c.advance_all()}, {"status", c.status()}});
    });
  });

  server.Get(R"(/campaigns/([^/]+)/words/([^/]+)/graph)",
             [svc, require_operator](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 require_operator(req);
                 auto& c = svc->campaign(req.matches[1]);
                 send(res, 200, graph_json(req.matches[2], *c.view(req.matches[2])));
               });
             });

  server.Get(R"(/campaigns/([^/]+)/words/([^/]+)/scores)",
             [svc, require_operator](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 require_operator(req);
                 auto& c = svc->campaign(req.matches[1]);
                 const std::string word = req.matches[2];
                 auto v = c.view(word);
                 if (v->status != WordStatus::Done) throw ServiceError(409, "word '" + word + "' is not finished");
                 json body{{"api_version", kApiVersion}, {"word", word}, {"rounds", v->round}};
                 if (v->scores) {
                   body["binary"] = v->scores->binary;
                   body["graded"] = v->scores->graded;
                   body["k"] = v->scores->thresholds.k;
                   body["n"] = v->scores->thresholds.n;
                 } else {
                   // Scores need uses from both corpora.
                   body["binary"] = nullptr;
                   body["graded"] = nullptr;
                 }
                 send(res, 200, body);
               });
             });

  server.Post(R"(/campaigns/([^/]+)/reassign)", [svc, require_operator](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      require_operator(req);
      auto& c = svc->campaign(req.matches[1]);
      const json body = json::parse(req.body);
      const std::string word = body.at("word");
      const NodePair pair = pair_from_json(body.at("pair"));
      const std::string from = body.at("from");
      const std::string to = body.contains("to") && !body["to"].is_null() ? body["to"].get<std::string>() : "";
      c.reassign(word, pair, from, to);
      send(res, 200, {{"api_version", kApiVersion}, {"ok", true}, {"expired", to.empty()}});
    });
  });
}

}  // namespace semchange
