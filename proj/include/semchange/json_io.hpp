#pragma once

// JSON mapping of sampler, clustering and simulation settings. Absent keys
// keep their defaults.

#include <json.hpp>

#include "semchange/simulation.hpp"

namespace semchange {

using json = nlohmann::json;

inline InitialState parse_initial_state(std::string_view s) {
  for (auto st : {InitialState::Random, InitialState::Singletons, InitialState::PositiveComponents})
    if (to_string(st) == s) return st;
  throw Error("unknown initial state '" + std::string(s) + "'");
}

inline void sampler_from_json(const json& j, SamplerConfig& c) {
  c.node_fraction = j.value("node_fraction", c.node_fraction);
  c.min_round_one_nodes = j.value("min_round_one_nodes", c.min_round_one_nodes);
  c.edge_fraction = j.value("edge_fraction", c.edge_fraction);
  c.confirm_fraction = j.value("confirm_fraction", c.confirm_fraction);
  c.multi_annotation_rate = j.value("multi_annotation_rate", c.multi_annotation_rate);
  c.max_rounds = j.value("max_rounds", c.max_rounds);
}

inline void clustering_from_json(const json& j, ClusterConfig& c) {
  if (j.contains("max_clusters")) c.max_clusters_values = j.at("max_clusters").get<std::vector<int>>();
  c.restarts = j.value("restarts", c.restarts);
  if (j.contains("initial_states")) {
    c.initial_states.clear();
    for (const auto& s : j.at("initial_states")) c.initial_states.push_back(parse_initial_state(s.get<std::string>()));
  }
  c.schedule.initial_temperature = j.value("initial_temperature", c.schedule.initial_temperature);
  c.schedule.decay = j.value("decay", c.schedule.decay);
  c.schedule.iterations = j.value("iterations", c.schedule.iterations);
  c.seed = j.value("seed", c.seed);
}

inline SimulationConfig simulation_config_from_json(const json& j) {
  SimulationConfig c;
  c.n_words = j.value("n_words", c.n_words);
  if (j.contains("freq_range")) {
    c.freq_lo = j.at("freq_range").at(0).get<long>();
    c.freq_hi = j.at("freq_range").at(1).get<long>();
  }
  c.zipf_exponent = j.value("zipf_exponent", c.zipf_exponent);
  if (j.contains("senses_per_word")) {
    c.senses_lo = j.at("senses_per_word").at(0).get<int>();
    c.senses_hi = j.at("senses_per_word").at(1).get<int>();
  }
  c.change_share = j.value("change_share", c.change_share);
  c.sigma = j.value("sigma", c.sigma);
  c.annotators = j.value("annotators", c.annotators);
  c.threads = j.value("threads", c.threads);
  c.seed = j.value("seed", c.seed);
  if (j.contains("sampler")) sampler_from_json(j.at("sampler"), c.sampler);
  if (j.contains("clustering")) clustering_from_json(j.at("clustering"), c.clustering);
  c.validate();
  return c;
}

}  // namespace semchange
