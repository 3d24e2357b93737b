// Command-line front end: clustering, sampling, simulation, change scores,
// evaluation, baselines, corpus statistics and the annotation server.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "semchange/evaluation.hpp"
#include "semchange/graph_io.hpp"
#include "semchange/http_api.hpp"
#include "semchange/json_io.hpp"
#include "semchange/service.hpp"

namespace sc = semchange;

namespace {

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fmt(const std::optional<double>& v, int digits = 6) { return v ? fmt(*v, digits) : "-"; }

// Writes to `path`, or stdout when empty.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sc::Error("cannot write '" + path + "'");
  write(out);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& part : sc::split(s, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(part, &pos));
      if (pos != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw sc::Error("bad integer list '" + s + "'");
    }
  }
  return out;
}

std::vector<long> parse_counts(const std::string& s) {
  std::vector<long> out;
  for (const auto& part : sc::split(s, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stol(part, &pos));
      if (pos != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw sc::Error("bad count list '" + s + "'");
    }
  }
  return out;
}

sc::Clustering load_clusters(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sc::Error("cannot read clustering '" + path + "'");
  std::map<std::string, int> a;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto f = sc::split(line, '\t');
    if (f.size() != 2) throw sc::Error("clustering line must be node-id TAB cluster-id: '" + line + "'");
    a[f[0]] = static_cast<int>(sc::detail::parse_long(f[1], "cluster id"));
  }
  return sc::Clustering(std::move(a));
}

sc::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sc::Error("cannot read '" + path + "'");
  try {
    return sc::json::parse(in);
  } catch (const sc::json::exception& e) {
    throw sc::Error("'" + path + "': " + e.what());
  }
}

void write_answers_file(const std::string& path, const sc::AnswerSet& a) {
  emit(path, [&](std::ostream& os) { sc::write_answers(os, a); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semchange: usage graphs, change scores and shared-task evaluation"};
  app.require_subcommand(1);

  // cluster
  std::string graph_path, out_path;
  std::uint64_t seed = 0;
  std::string max_clusters = "2,4,8,0";
  int restarts = 5;
  auto* cl = app.add_subcommand("cluster", "correlation-cluster a usage graph");
  cl->add_option("--graph", graph_path, "usage graph file")->required();
  cl->add_option("--seed", seed);
  cl->add_option("--max-clusters", max_clusters, "comma list of caps, 0 = uncapped");
  cl->add_option("--restarts", restarts);
  cl->add_option("--out", out_path, "assignment file (default stdout)");

  // sample-round
  std::string state_dir;
  auto* sr = app.add_subcommand("sample-round", "plan the next annotation round from a state directory");
  sr->add_option("--state", state_dir, "directory with graph, clusters and state.json")->required();
  sr->add_option("--seed", seed);
  sr->add_option("--out", out_path);

  // simulate
  std::string config_path, report_path;
  auto* sim = app.add_subcommand("simulate", "simulated annotation campaign");
  sim->add_option("--config", config_path, "JSON simulation config");
  sim->add_option("--seed", seed);
  sim->add_option("--report", report_path, "report file (default stdout)");

  // score-change
  std::string sfd_path;
  long k = 2, n = 5;
  auto* scg = app.add_subcommand("score-change", "binary and graded change from sense frequency distributions");
  scg->add_option("--sfd", sfd_path, "lines: word TAB d1,d2,.. TAB e1,e2,..")->required();
  scg->add_option("--k", k);
  scg->add_option("--n", n);

  // score
  int subtask = 2;
  std::string answers_path, gold_path;
  auto* score = app.add_subcommand("score", "score an answer file against gold");
  score->add_option("--subtask", subtask)->required()->check(CLI::IsMember({1, 2}));
  score->add_option("--answers", answers_path)->required();
  score->add_option("--gold", gold_path)->required();

  // baseline
  std::string kind, corpus1, corpus2, targets_path;
  int window = 4;
  bool binary = false;
  auto* bl = app.add_subcommand("baseline", "frequency, count-vector or majority baseline");
  bl->add_option("kind", kind)->required()->check(CLI::IsMember({"freq", "count", "majority"}));
  bl->add_option("--corpus1", corpus1);
  bl->add_option("--corpus2", corpus2);
  bl->add_option("--targets", targets_path)->required();
  bl->add_option("--window", window);
  bl->add_flag("--binary", binary, "threshold scores at their mean (subtask 1 labels)");
  bl->add_option("--out", out_path);

  // analyze
  std::string answers_dir, stats_path;
  auto* an = app.add_subcommand("analyze", "system scores, bias correlations and per-word difficulty");
  an->add_option("--answers-dir", answers_dir)->required();
  an->add_option("--gold", gold_path)->required();
  an->add_option("--stats", stats_path);
  an->add_option("--subtask", subtask)->check(CLI::IsMember({1, 2}));

  // stats
  std::string corpus_path;
  auto* st = app.add_subcommand("stats", "tokens, types and TTR of a corpus");
  st->add_option("--corpus", corpus_path)->required();

  // sample-uses
  std::string target, epoch = "C1";
  std::size_t n_uses = 100;
  auto* su = app.add_subcommand("sample-uses", "sample target uses from a corpus");
  su->add_option("--corpus", corpus_path)->required();
  su->add_option("--target", target)->required();
  su->add_option("--n", n_uses);
  su->add_option("--seed", seed);
  su->add_option("--epoch", epoch)->check(CLI::IsMember({"C1", "C2"}));

  // serve
  std::string listen = "127.0.0.1:8080", data_dir = "data", op_token;
  if (const char* v = std::getenv("SEMCHANGE_LISTEN")) listen = v;
  if (const char* v = std::getenv("SEMCHANGE_DATA_DIR")) data_dir = v;
  if (const char* v = std::getenv("SEMCHANGE_OPERATOR_TOKEN")) op_token = v;
  auto* sv = app.add_subcommand("serve", "run the annotation service");
  sv->add_option("--listen", listen, "host:port (env SEMCHANGE_LISTEN)");
  sv->add_option("--data-dir", data_dir, "campaign directory (env SEMCHANGE_DATA_DIR)");
  sv->add_option("--operator-token", op_token, "operator bearer token (env SEMCHANGE_OPERATOR_TOKEN)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cl) {
      const auto g = sc::load_graph(graph_path);
      sc::ClusterConfig cfg;
      cfg.seed = seed;
      cfg.max_clusters_values = parse_int_list(max_clusters);
      cfg.restarts = restarts;
      const auto c = sc::cluster(g, cfg);
      const std::string stats = "# loss=" + fmt(sc::loss(g, c)) + " normalized_loss=" +
                                (g.weighted_edge_count() ? fmt(sc::normalized_loss(g, c)) : "-") +
                                " clusters=" + std::to_string(c.cluster_count());
      emit(out_path, [&](std::ostream& os) {
        os << sc::clusters_to_string(c);
        if (out_path.empty()) os << stats << '\n';
      });
      if (!out_path.empty()) std::cout << stats << '\n';
    } else if (*sr) {
      const std::filesystem::path dir(state_dir);
      sc::SamplerState state{sc::load_graph((dir / "graph").string()), load_clusters((dir / "clusters").string()), 1,
                             {}};
      if (std::filesystem::exists(dir / "state.json")) {
        const auto j = load_json((dir / "state.json").string());
        state.round = j.value("round", 1);
        if (j.contains("sampler")) sc::sampler_from_json(j.at("sampler"), state.config);
        if (j.contains("roster")) state.config.roster = j.at("roster").get<std::vector<std::string>>();
      }
      const auto plan = sc::next_round(state, seed);
      emit(out_path, [&](std::ostream& os) {
        if (!plan) {
          os << "# done\n";
          return;
        }
        os << "# round " << plan->round << '\n';
        for (const auto& it : plan->items)
          os << it.pair.first() << ',' << it.pair.second() << '\t' << sc::join(it.annotators, ",") << '\t'
             << sc::to_string(it.reason) << '\n';
      });
    } else if (*sim) {
      sc::SimulationConfig cfg = config_path.empty() ? sc::SimulationConfig{}
                                                     : sc::simulation_config_from_json(load_json(config_path));
      if (sim->count("--seed")) cfg.seed = seed;
      const auto rep = sc::run_simulation(cfg);
      emit(report_path, [&](std::ostream& os) { sc::write_report(os, rep); });
    } else if (*scg) {
      std::ifstream in(sfd_path);
      if (!in) throw sc::Error("cannot read '" + sfd_path + "'");
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto f = sc::split(line, '\t');
        if (f.size() != 3) throw sc::Error("sfd line must be word TAB d TAB e: '" + line + "'");
        const auto s = sc::change_scores(f[0], {parse_counts(f[1]), parse_counts(f[2])}, {k, n});
        std::cout << s.word << '\t' << s.binary << '\t' << fmt(s.graded) << '\n';
      }
    } else if (*score) {
      const auto pred = sc::load_answers(answers_path, subtask);
      const auto gold = sc::load_answers(gold_path, subtask);
      if (subtask == 1) {
        const auto prf = sc::precision_recall_f1(pred, gold);
        std::cout << "accuracy\t" << fmt(sc::accuracy(pred, gold)) << "\nprecision\t" << fmt(prf.precision)
                  << "\nrecall\t" << fmt(prf.recall) << "\nf1\t" << fmt(prf.f1) << '\n';
      } else {
        const auto rho = sc::spearman(pred, gold);
        std::cout << "spearman\t" << fmt(rho) << '\n';
        if (!rho) std::cerr << "spearman undefined: constant ranking\n";
      }
    } else if (*bl) {
      const auto targets = sc::load_targets(targets_path);
      sc::AnswerSet out;
      if (kind == "majority") {
        out = sc::majority_baseline(targets);
      } else {
        if (corpus1.empty() || corpus2.empty()) throw sc::Error("--corpus1 and --corpus2 are required");
        const auto c1 = sc::load_corpus(corpus1, sc::Epoch::C1), c2 = sc::load_corpus(corpus2, sc::Epoch::C2);
        if (kind == "freq") {
          out = sc::freq_baseline(c1, c2, targets);
        } else {
          auto r = sc::count_baseline(c1, c2, targets, window);
          for (const auto& w : r.undefined) std::cerr << "undefined: " << w << " (no shared context columns)\n";
          out = std::move(r.scores);
        }
        if (binary) out = sc::binarize_scores(out);
      }
      write_answers_file(out_path, out);
    } else if (*an) {
      const auto gold = sc::load_answers(gold_path, subtask);
      std::vector<std::pair<std::string, sc::AnswerSet>> systems;
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::directory_iterator(answers_dir))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) systems.emplace_back(f.filename().string(), sc::load_answers(f.string(), subtask));
      if (systems.empty()) throw sc::Error("no answer files in '" + answers_dir + "'");
      const auto stats = stats_path.empty() ? std::map<std::string, sc::WordStats>{} : sc::load_word_stats(stats_path);
      std::cout << "# system\t" << (subtask == 1 ? "accuracy" : "spearman");
      if (!stats.empty()) std::cout << "\tFRQ_d\tFRQ_m\tPLY_m";
      std::cout << '\n';
      std::vector<sc::AnswerSet> sets;
      for (const auto& [name, a] : systems) {
        std::cout << name << '\t'
                  << (subtask == 1 ? fmt(sc::accuracy(a, gold), 3) : fmt(sc::spearman(a, gold), 3));
        if (!stats.empty()) {
          const auto b = sc::bias_correlations(a, stats);
          std::cout << '\t' << fmt(b.frq_d, 3) << '\t' << fmt(b.frq_m, 3) << '\t' << fmt(b.ply_m, 3);
        }
        std::cout << '\n';
        sets.push_back(a);
      }
      if (!stats.empty()) {
        const auto b = sc::bias_correlations(gold, stats);
        std::cout << "gold\t-\t" << fmt(b.frq_d, 3) << '\t' << fmt(b.frq_m, 3) << '\t' << fmt(b.ply_m, 3) << '\n';
      }
      std::cout << "# word\tdifficulty\n";
      for (const auto& [w, d] : sc::prediction_difficulty(sets, gold, subtask)) std::cout << w << '\t' << fmt(d, 4) << '\n';
    } else if (*st) {
      const auto c = sc::load_corpus(corpus_path);
      const auto p = sc::frequency_profile(c);
      std::cout << "tokens\t" << p.total << "\ntypes\t" << p.counts.size() << "\nttr\t"
                << (p.total ? fmt(sc::ttr_from_counts(p.total, p.counts.size()), 2) : "-") << '\n';
    } else if (*su) {
      const auto c = sc::load_corpus(corpus_path, sc::parse_epoch(epoch));
      for (const auto& u : sc::sample_uses(c, target, n_uses, seed))
        std::cout << u.id << '\t' << u.target_index << '\t' << sc::join(u.tokens, " ") << '\n';
    } else if (*sv) {
      const auto colon = listen.rfind(':');
      if (colon == std::string::npos) throw sc::Error("listen address must be host:port");
      const std::string host = listen.substr(0, colon);
      const int port = static_cast<int>(sc::detail::parse_long(listen.substr(colon + 1), "port"));
      if (op_token.empty()) std::cerr << "warning: no operator token set; operator endpoints are disabled\n";
      sc::AnnotationService service(data_dir);
      httplib::Server server;
      sc::register_routes(server, service, op_token);
      std::cerr << "listening on " << host << ':' << port << ", data in " << data_dir << '\n';
      if (!server.listen(host, port)) throw sc::Error("cannot listen on " + listen);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
