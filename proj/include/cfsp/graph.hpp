#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cfsp {

using Vertex = std::size_t;

/// Sorted, duplicate-free list of vertex indices.
using VertexSet = std::vector<Vertex>;

/// Dense subset representation, `m[i]` is true iff vertex i is in the set.
using Membership = std::vector<bool>;

inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

struct Edge {
  Vertex u;
  Vertex v;
  double weight;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  Vertex vertex;
  double weight;
};

inline Membership to_membership(std::size_t n, std::span<const Vertex> set) {
  Membership m(n, false);
  for (Vertex v : set) {
    if (v >= n) throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
    m[v] = true;
  }
  return m;
}

inline VertexSet to_vertex_set(const Membership& m) {
  VertexSet out;
  for (Vertex v = 0; v < m.size(); ++v)
    if (m[v]) out.push_back(v);
  return out;
}

/// Immutable weighted undirected graph. Copies share storage.
///
/// Each undirected edge is stored once with u < v. Construction sums
/// duplicate edges, drops zero-weight edges and rejects self-loops and
/// negative or non-finite weights.
class Graph {
 public:
  Graph() : data_(std::make_shared<const Data>()) {}

  Graph(std::size_t num_vertices, std::vector<Edge> edges)
      : data_(std::make_shared<const Data>(build(num_vertices, std::move(edges)))) {}

  std::size_t num_vertices() const noexcept { return data_->degree.size(); }
  std::size_t num_edges() const noexcept { return data_->edges.size(); }

  std::span<const Edge> edges() const noexcept { return data_->edges; }

  std::span<const Neighbor> neighbors(Vertex v) const {
    const auto& d = *data_;
    return std::span<const Neighbor>(d.adjacency).subspan(d.offsets[v], d.offsets[v + 1] - d.offsets[v]);
  }

  std::span<const double> degrees() const noexcept { return data_->degree; }
  double degree(Vertex v) const { return data_->degree[v]; }

  /// vol_d(V), the sum of all degrees.
  double total_volume() const noexcept { return data_->total_volume; }

 private:
  struct Data {
    std::vector<Edge> edges;
    std::vector<double> degree;
    std::vector<std::size_t> offsets{0};
    std::vector<Neighbor> adjacency;
    double total_volume = 0.0;
  };

  static Data build(std::size_t n, std::vector<Edge> edges) {
    for (auto& e : edges) {
      if (e.u >= n || e.v >= n)
        throw std::invalid_argument("edge endpoint out of range");
      if (e.u == e.v)
        throw std::invalid_argument("self-loop on vertex " + std::to_string(e.u));
      if (!std::isfinite(e.weight) || e.weight < 0.0)
        throw std::invalid_argument("edge weight must be finite and non-negative");
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });

    Data d;
    for (const auto& e : edges) {
      if (!d.edges.empty() && d.edges.back().u == e.u && d.edges.back().v == e.v)
        d.edges.back().weight += e.weight;
      else
        d.edges.push_back(e);
    }
    std::erase_if(d.edges, [](const Edge& e) { return e.weight == 0.0; });

    d.degree.assign(n, 0.0);
    std::vector<std::size_t> count(n, 0);
    for (const auto& e : d.edges) {
      d.degree[e.u] += e.weight;
      d.degree[e.v] += e.weight;
      ++count[e.u];
      ++count[e.v];
    }
    d.offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) d.offsets[i + 1] = d.offsets[i] + count[i];
    d.adjacency.resize(d.offsets[n]);
    std::vector<std::size_t> fill(d.offsets.begin(), d.offsets.end() - 1);
    for (const auto& e : d.edges) {
      d.adjacency[fill[e.u]++] = {e.v, e.weight};
      d.adjacency[fill[e.v]++] = {e.u, e.weight};
    }
    for (double x : d.degree) d.total_volume += x;
    return d;
  }

  std::shared_ptr<const Data> data_;
};

/// Non-negative per-vertex weights (the g and h of generalized volumes).
class VertexWeights {
 public:
  VertexWeights() = default;

  explicit VertexWeights(std::vector<double> values) : values_(std::move(values)) {
    for (double x : values_)
      if (!std::isfinite(x) || x < 0.0)
        throw std::invalid_argument("vertex weights must be finite and non-negative");
  }

  static VertexWeights ones(std::size_t n) { return VertexWeights(std::vector<double>(n, 1.0)); }

  static VertexWeights degrees(const Graph& g) {
    return VertexWeights(std::vector<double>(g.degrees().begin(), g.degrees().end()));
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](Vertex v) const { return values_[v]; }
  std::span<const double> values() const noexcept { return values_; }

  double total() const {
    double s = 0.0;
    for (double x : values_) s += x;
    return s;
  }

 private:
  std::vector<double> values_;
};

// --- set-function primitives -------------------------------------------------

/// cut(C, V\C), each crossing edge counted once.
inline double cut_value(const Graph& g, const Membership& in) {
  double s = 0.0;
  for (const auto& e : g.edges())
    if (in[e.u] != in[e.v]) s += e.weight;
  return s;
}

/// assoc(C) summed over ordered pairs, i.e. twice the internal edge weight.
inline double assoc_value(const Graph& g, const Membership& in) {
  double s = 0.0;
  for (const auto& e : g.edges())
    if (in[e.u] && in[e.v]) s += e.weight;
  return 2.0 * s;
}

inline double volume(std::span<const double> weights, const Membership& in) {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (in[i]) s += weights[i];
  return s;
}

inline double volume(const VertexWeights& weights, const Membership& in) {
  return volume(weights.values(), in);
}

inline double cut_value(const Graph& g, std::span<const Vertex> set) {
  return cut_value(g, to_membership(g.num_vertices(), set));
}
inline double assoc_value(const Graph& g, std::span<const Vertex> set) {
  return assoc_value(g, to_membership(g.num_vertices(), set));
}
inline double volume(const VertexWeights& weights, std::span<const Vertex> set) {
  double s = 0.0;
  for (Vertex v : set) s += weights[v];
  return s;
}

// --- subgraphs -----------------------------------------------------------------

/// A graph derived from a parent graph together with its vertex mapping.
struct Subgraph {
  Graph graph;
  std::vector<Vertex> to_parent;    ///< new id -> parent id
  std::vector<Vertex> from_parent;  ///< parent id -> new id, kNoVertex if dropped
};

inline Subgraph induced_subgraph(const Graph& g, std::span<const Vertex> keep) {
  Subgraph out;
  out.from_parent.assign(g.num_vertices(), kNoVertex);
  out.to_parent.assign(keep.begin(), keep.end());
  std::sort(out.to_parent.begin(), out.to_parent.end());
  out.to_parent.erase(std::unique(out.to_parent.begin(), out.to_parent.end()), out.to_parent.end());
  for (Vertex i = 0; i < out.to_parent.size(); ++i) out.from_parent[out.to_parent[i]] = i;

  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    Vertex a = out.from_parent[e.u], b = out.from_parent[e.v];
    if (a != kNoVertex && b != kNoVertex) edges.push_back({a, b, e.weight});
  }
  out.graph = Graph(out.to_parent.size(), std::move(edges));
  return out;
}

/// Induced subgraph on the vertices within `radius` hops of `seeds`.
///
/// Non-seed vertices must also satisfy `counts[v] >= min_count`. When no
/// counts are supplied the number of incident edges is used. Throws when the
/// result would be empty.
inline Subgraph restrict_ball(const Graph& g, std::span<const Vertex> seeds, std::size_t radius,
                              std::size_t min_count = 0,
                              std::optional<std::span<const std::size_t>> counts = std::nullopt) {
  const std::size_t n = g.num_vertices();
  if (seeds.empty()) throw std::invalid_argument("restrict_ball: seed set is empty");
  if (counts && counts->size() != n)
    throw std::invalid_argument("restrict_ball: count vector has wrong length");

  std::vector<std::size_t> dist(n, std::numeric_limits<std::size_t>::max());
  std::deque<Vertex> queue;
  Membership is_seed(n, false);
  for (Vertex s : seeds) {
    if (s >= n) throw std::out_of_range("restrict_ball: seed out of range");
    is_seed[s] = true;
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    Vertex u = queue.front();
    queue.pop_front();
    if (dist[u] == radius) continue;
    for (const auto& nb : g.neighbors(u)) {
      if (dist[nb.vertex] == std::numeric_limits<std::size_t>::max()) {
        dist[nb.vertex] = dist[u] + 1;
        queue.push_back(nb.vertex);
      }
    }
  }

  std::vector<Vertex> keep;
  for (Vertex v = 0; v < n; ++v) {
    if (dist[v] > radius) continue;
    std::size_t c = counts ? (*counts)[v] : g.neighbors(v).size();
    if (is_seed[v] || c >= min_count) keep.push_back(v);
  }
  if (keep.empty()) throw std::invalid_argument("restrict_ball: empty result");
  return induced_subgraph(g, keep);
}

/// Co-author graph: w_ij sums 1/|A_l| over publications l listing both i and j.
///
/// Authors are already compacted to 0..num_authors-1; repeated authors within
/// one publication count once.
inline Graph coauthor_weights(std::span<const std::vector<Vertex>> publications,
                              std::size_t num_authors) {
  std::vector<Edge> edges;
  for (const auto& pub : publications) {
    std::vector<Vertex> authors(pub.begin(), pub.end());
    std::sort(authors.begin(), authors.end());
    authors.erase(std::unique(authors.begin(), authors.end()), authors.end());
    if (authors.size() < 2) continue;
    const double w = 1.0 / static_cast<double>(authors.size());
    for (std::size_t a = 0; a < authors.size(); ++a)
      for (std::size_t b = a + 1; b < authors.size(); ++b)
        edges.push_back({authors[a], authors[b], w});
  }
  return Graph(num_authors, std::move(edges));
}

}  // namespace cfsp
