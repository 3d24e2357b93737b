#pragma once

// Line-delimited usage-graph records (tab-separated fields):
//
//   H  semchange-usage-graph  <version>  <word>
//   U  <id>  <C1|C2>  <word>  <target_index>  <space-joined tokens>
//   S  <id>  <word>  <gloss>
//   J  <node-a>  <node-b>  <annotator>  <value>  <round>
//
// Writers emit the header, nodes in id order, then judgments grouped by
// pair (pair order) in arrival order. Reading a canonical file and writing
// it back reproduces it byte for byte.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "semchange/graph.hpp"

namespace semchange {

inline constexpr std::string_view kGraphMagic = "semchange-usage-graph";
inline constexpr int kGraphFormatVersion = 1;

namespace detail {

inline void check_field(std::string_view what, std::string_view s) {
  if (s.empty()) throw Error(std::string(what) + " must not be empty");
  for (char c : s)
    if (c == '\t' || c == '\n' || c == '\r' || c == ' ')
      throw Error(std::string(what) + " '" + std::string(s) + "' contains whitespace");
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) throw Error("dangling escape in '" + std::string(s) + "'");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: throw Error("bad escape in '" + std::string(s) + "'");
    }
  }
  return out;
}

inline long parse_long(const std::string& s, std::string_view what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error("bad " + std::string(what) + " '" + s + "'");
  return v;
}

}  // namespace detail

inline void write_graph(std::ostream& os, const UsageGraph& g) {
  detail::check_field("word", g.word());
  os << "H\t" << kGraphMagic << '\t' << kGraphFormatVersion << '\t' << g.word() << '\n';
  for (const auto& [id, n] : g.nodes()) {
    if (const auto* u = std::get_if<UseNode>(&n)) {
      detail::check_field("node id", u->id);
      detail::check_field("word", u->word);
      for (const auto& t : u->tokens) detail::check_field("token", t);
      os << "U\t" << u->id << '\t' << to_string(u->corpus) << '\t' << u->word << '\t' << u->target_index << '\t'
         << join(u->tokens, " ") << '\n';
    } else {
      const auto& s = std::get<SenseDefNode>(n);
      detail::check_field("node id", s.id);
      detail::check_field("word", s.word);
      os << "S\t" << s.id << '\t' << s.word << '\t' << detail::escape(s.gloss) << '\n';
    }
  }
  for (const auto& [p, e] : g.edges()) {
    for (const auto& j : e.judgments) {
      detail::check_field("annotator", j.annotator);
      os << "J\t" << p.first() << '\t' << p.second() << '\t' << j.annotator << '\t' << j.value << '\t' << j.round
         << '\n';
    }
  }
}

inline std::string graph_to_string(const UsageGraph& g) {
  std::ostringstream os;
  write_graph(os, g);
  return os.str();
}

inline UsageGraph read_graph(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<UsageGraph> g;
  auto fail = [&](const std::string& msg) { return Error("graph line " + std::to_string(lineno) + ": " + msg); };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (!g) {
      if (f.size() != 4 || f[0] != "H" || f[1] != kGraphMagic) throw fail("expected header record");
      if (detail::parse_long(f[2], "format version") != kGraphFormatVersion)
        throw fail("unsupported format version " + f[2]);
      g.emplace(f[3]);
      continue;
    }
    try {
      if (f[0] == "U") {
        if (f.size() != 6) throw Error("use record needs 6 fields");
        UseNode u;
        u.id = f[1];
        u.corpus = parse_epoch(f[2]);
        u.word = f[3];
        long ti = detail::parse_long(f[4], "target index");
        if (ti < 0) throw Error("negative target index");
        u.target_index = static_cast<std::size_t>(ti);
        u.tokens = split(f[5], ' ');
        g->add_node(std::move(u));
      } else if (f[0] == "S") {
        if (f.size() != 4) throw Error("sense record needs 4 fields");
        g->add_node(SenseDefNode{f[1], detail::unescape(f[3]), f[2]});
      } else if (f[0] == "J") {
        if (f.size() != 6) throw Error("judgment record needs 6 fields");
        Judgment j{NodePair(f[1], f[2]), f[3], static_cast<int>(detail::parse_long(f[4], "value")),
                   static_cast<int>(detail::parse_long(f[5], "round"))};
        g->add_judgment(j);
      } else {
        throw Error("unknown record kind '" + f[0] + "'");
      }
    } catch (const Error& e) {
      throw fail(e.what());
    }
  }
  if (!g) throw Error("graph file has no header");
  return std::move(*g);
}

inline UsageGraph graph_from_string(const std::string& s) {
  std::istringstream is(s);
  return read_graph(is);
}

inline UsageGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open graph file '" + path + "'");
  return read_graph(in);
}

inline void save_graph(const std::string& path, const UsageGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write graph file '" + path + "'");
  write_graph(out, g);
}

}  // namespace semchange
