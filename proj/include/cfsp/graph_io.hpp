#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfsp/error.hpp"
#include "cfsp/graph.hpp"

namespace cfsp {

/// Bidirectional mapping between external vertex tokens and compact ids.
class IdMap {
 public:
  IdMap() = default;

  /// Ids are ordered numerically when every token is an integer, else lexicographically.
  explicit IdMap(std::vector<std::string> tokens) {
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    bool numeric = std::all_of(tokens.begin(), tokens.end(), [](const std::string& t) {
      long long x;
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
      return ec == std::errc() && p == t.data() + t.size();
    });
    if (numeric) {
      std::sort(tokens.begin(), tokens.end(), [](const std::string& a, const std::string& b) {
        return std::stoll(a) < std::stoll(b);
      });
    }
    names_ = std::move(tokens);
    for (Vertex i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
  }

  static IdMap identity(std::size_t n) {
    std::vector<std::string> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back(std::to_string(i));
    return IdMap(std::move(t));
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(Vertex v) const { return names_.at(v); }
  std::span<const std::string> names() const noexcept { return names_; }

  bool contains(const std::string& token) const { return index_.count(token) != 0; }

  Vertex at(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) throw std::invalid_argument("unknown vertex id '" + token + "'");
    return it->second;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Vertex> index_;
};

struct LoadedGraph {
  Graph graph;
  IdMap ids;
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline bool is_skippable(const std::vector<std::string>& tokens) {
  return tokens.empty() || tokens.front().front() == '#';
}

inline double parse_real(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + s + "'", line);
  }
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace detail

/// Reads a whitespace-separated "u v [w]" edge list; '#' lines are comments.
///
/// Without `weighted` every line has weight 1 and a third column is ignored.
/// Duplicate lines (in either orientation) sum their weights.
inline LoadedGraph load_edge_list(std::istream& in, bool weighted) {
  struct Raw {
    std::string u, v;
    double w;
  };
  std::vector<Raw> raw;
  std::vector<std::string> tokens_seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tok = detail::tokenize(line);
    if (detail::is_skippable(tok)) continue;
    if (tok.size() < 2 || tok.size() > 3)
      throw ParseError("expected 'u v' or 'u v w'", line_no);
    double w = 1.0;
    if (weighted && tok.size() == 3) w = detail::parse_real(tok[2], line_no);
    if (!std::isfinite(w) || w < 0.0) throw ParseError("negative or non-finite weight", line_no);
    if (tok[0] == tok[1]) throw ParseError("self-loop on '" + tok[0] + "'", line_no);
    raw.push_back({tok[0], tok[1], w});
    tokens_seen.push_back(tok[0]);
    tokens_seen.push_back(tok[1]);
  }
  IdMap ids(std::move(tokens_seen));
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& r : raw) edges.push_back({ids.at(r.u), ids.at(r.v), r.w});
  return {Graph(ids.size(), std::move(edges)), std::move(ids)};
}

inline LoadedGraph load_edge_list(const std::filesystem::path& path, bool weighted) {
  auto in = detail::open_input(path);
  return load_edge_list(in, weighted);
}

/// Writes the canonical edge set with round-trip exact weights.
inline void write_edge_list(std::ostream& out, const Graph& g, const IdMap& ids) {
  char buf[64];
  for (const auto& e : g.edges()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.weight);
    out << ids.name(e.u) << ' ' << ids.name(e.v) << ' ' << buf << '\n';
  }
}

/// One non-negative real per line; line k belongs to vertex k.
inline VertexWeights load_vertex_weights(std::istream& in, std::size_t n) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tok = detail::tokenize(line);
    if (detail::is_skippable(tok)) continue;
    if (tok.size() != 1) throw ParseError("expected one value per line", line_no);
    double x = detail::parse_real(tok[0], line_no);
    if (!std::isfinite(x) || x < 0.0) throw ParseError("negative or non-finite vertex weight", line_no);
    values.push_back(x);
  }
  if (values.size() != n)
    throw ParseError("expected " + std::to_string(n) + " vertex weights, got " +
                         std::to_string(values.size()),
                     0);
  return VertexWeights(std::move(values));
}

inline VertexWeights load_vertex_weights(const std::filesystem::path& path, std::size_t n) {
  auto in = detail::open_input(path);
  return load_vertex_weights(in, n);
}

/// Per-vertex integer attribute (e.g. publication counts), one per line.
inline std::vector<std::size_t> load_counts(std::istream& in, std::size_t n) {
  auto w = load_vertex_weights(in, n);
  std::vector<std::size_t> out;
  for (double x : w.values()) out.push_back(static_cast<std::size_t>(x));
  return out;
}

inline std::vector<std::size_t> load_counts(const std::filesystem::path& path, std::size_t n) {
  auto in = detail::open_input(path);
  return load_counts(in, n);
}

struct Publications {
  std::vector<std::vector<Vertex>> author_lists;
  IdMap authors;
  std::vector<std::size_t> publication_count;  ///< per author
};

/// One publication per line, whitespace-separated author tokens.
inline Publications load_publications(std::istream& in) {
  std::vector<std::vector<std::string>> lists;
  std::vector<std::string> all;
  std::string line;
  while (std::getline(in, line)) {
    auto tok = detail::tokenize(line);
    if (detail::is_skippable(tok)) continue;
    all.insert(all.end(), tok.begin(), tok.end());
    lists.push_back(std::move(tok));
  }
  Publications p;
  p.authors = IdMap(std::move(all));
  p.publication_count.assign(p.authors.size(), 0);
  for (const auto& l : lists) {
    std::vector<Vertex> ids;
    for (const auto& t : l) ids.push_back(p.authors.at(t));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (Vertex a : ids) ++p.publication_count[a];
    p.author_lists.push_back(std::move(ids));
  }
  return p;
}

inline Publications load_publications(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return load_publications(in);
}

}  // namespace cfsp
