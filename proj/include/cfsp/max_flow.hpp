#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cfsp/graph.hpp"

namespace cfsp {

/// Directed network with real capacities; arcs are stored in residual pairs.
class FlowNetwork {
 public:
  struct Arc {
    std::size_t to;
    std::size_t reverse;  ///< index of the paired arc
    double capacity;
  };

  explicit FlowNetwork(std::size_t num_nodes) : out_(num_nodes) {}

  std::size_t num_nodes() const noexcept { return out_.size(); }
  std::size_t num_arcs() const noexcept { return arcs_.size(); }
  const Arc& arc(std::size_t a) const { return arcs_[a]; }
  std::span<const std::size_t> out_arcs(std::size_t u) const { return out_[u]; }

  /// Adds u->v with `capacity` and v->u with `reverse_capacity`; returns the index of u->v.
  std::size_t add_arc(std::size_t u, std::size_t v, double capacity, double reverse_capacity = 0.0) {
    if (u >= num_nodes() || v >= num_nodes()) throw std::out_of_range("add_arc: node out of range");
    if (u == v) throw std::invalid_argument("add_arc: loop");
    if (!(capacity >= 0.0) || !(reverse_capacity >= 0.0) || !std::isfinite(capacity) ||
        !std::isfinite(reverse_capacity))
      throw std::invalid_argument("add_arc: capacities must be finite and non-negative");
    std::size_t a = arcs_.size();
    arcs_.push_back({v, a + 1, capacity});
    arcs_.push_back({u, a, reverse_capacity});
    out_[u].push_back(a);
    out_[v].push_back(a + 1);
    return a;
  }

  double max_capacity() const {
    double m = 0.0;
    for (const auto& a : arcs_) m = std::max(m, a.capacity);
    return m;
  }

 private:
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
};

struct MaxFlowResult {
  double value = 0.0;
  Membership source_side;        ///< nodes that cannot reach the sink in the residual network
  std::vector<double> arc_flow;  ///< per arc, antisymmetric within each pair
};

/// Sum of capacities of arcs leaving `source_side`.
inline double cut_capacity(const FlowNetwork& net, const Membership& source_side) {
  double s = 0.0;
  for (std::size_t u = 0; u < net.num_nodes(); ++u) {
    if (!source_side[u]) continue;
    for (std::size_t a : net.out_arcs(u))
      if (!source_side[net.arc(a).to]) s += net.arc(a).capacity;
  }
  return s;
}

/// Highest-label push-relabel with the gap heuristic.
///
/// The first phase computes a maximum preflow and the minimum cut; the
/// second returns stranded excess to the source so that arc_flow is a flow.
inline MaxFlowResult max_flow(const FlowNetwork& net, std::size_t s, std::size_t t) {
  const std::size_t n = net.num_nodes();
  if (s >= n || t >= n || s == t) throw std::invalid_argument("max_flow: bad terminals");
  const double eps = 1e-13 * std::max(1.0, net.max_capacity());

  std::vector<double> res(net.num_arcs());
  for (std::size_t a = 0; a < res.size(); ++a) res[a] = net.arc(a).capacity;
  std::vector<double> excess(n, 0.0);
  std::vector<std::size_t> height(n, n), current(n, 0);

  auto residual_bfs = [&](std::size_t root, std::vector<std::size_t>& dist) {
    // distances to root along residual arcs
    dist.assign(n, std::numeric_limits<std::size_t>::max());
    dist[root] = 0;
    std::deque<std::size_t> q{root};
    while (!q.empty()) {
      std::size_t v = q.front();
      q.pop_front();
      for (std::size_t a : net.out_arcs(v)) {
        std::size_t u = net.arc(a).to;
        std::size_t back = net.arc(a).reverse;
        if (res[back] > eps && dist[u] == std::numeric_limits<std::size_t>::max()) {
          dist[u] = dist[v] + 1;
          q.push_back(u);
        }
      }
    }
  };

  // phase 1
  {
    std::vector<std::size_t> dist;
    residual_bfs(t, dist);
    for (std::size_t v = 0; v < n; ++v) height[v] = std::min(dist[v], n);
    height[s] = n;
  }
  std::vector<std::size_t> count(2 * n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) ++count[height[v]];
  std::vector<std::vector<std::size_t>> bucket(n);
  std::ptrdiff_t highest = -1;

  auto activate = [&](std::size_t v) {
    if (v == s || v == t || height[v] >= n) return;
    bucket[height[v]].push_back(v);
    highest = std::max<std::ptrdiff_t>(highest, static_cast<std::ptrdiff_t>(height[v]));
  };

  auto push = [&](std::size_t u, std::size_t a, double delta) {
    std::size_t v = net.arc(a).to;
    bool was_idle = excess[v] <= eps;
    res[a] -= delta;
    res[net.arc(a).reverse] += delta;
    excess[u] -= delta;
    excess[v] += delta;
    return was_idle && excess[v] > eps;
  };

  for (std::size_t a : net.out_arcs(s))
    if (res[a] > 0.0) {
      excess[s] += res[a];
      if (push(s, a, res[a])) activate(net.arc(a).to);
    }

  auto relabel = [&](std::size_t u, bool gap) {
    std::size_t old = height[u];
    std::size_t best = 2 * n;
    for (std::size_t a : net.out_arcs(u))
      if (res[a] > eps) best = std::min(best, height[net.arc(a).to] + 1);
    --count[old];
    if (gap && old < n && count[old] == 0) {
      for (std::size_t w = 0; w < n; ++w)
        if (height[w] > old && height[w] < n) {
          --count[height[w]];
          height[w] = n;
          ++count[n];
        }
      best = std::max(best, n);
    }
    height[u] = std::min(best, 2 * n);
    ++count[height[u]];
    current[u] = 0;
  };

  while (highest >= 0) {
    auto& b = bucket[static_cast<std::size_t>(highest)];
    if (b.empty()) {
      --highest;
      continue;
    }
    std::size_t u = b.back();
    b.pop_back();
    if (height[u] != static_cast<std::size_t>(highest) || excess[u] <= eps) continue;
    while (excess[u] > eps && height[u] < n) {
      auto arcs = net.out_arcs(u);
      if (current[u] == arcs.size()) {
        relabel(u, true);
        continue;
      }
      std::size_t a = arcs[current[u]];
      std::size_t v = net.arc(a).to;
      if (res[a] > eps && height[u] == height[v] + 1) {
        if (push(u, a, std::min(excess[u], res[a]))) activate(v);
      } else {
        ++current[u];
      }
    }
  }

  MaxFlowResult out;
  out.value = excess[t];
  {
    std::vector<std::size_t> dist;
    residual_bfs(t, dist);
    out.source_side.assign(n, false);
    for (std::size_t v = 0; v < n; ++v) out.source_side[v] = dist[v] == std::numeric_limits<std::size_t>::max();
  }

  // phase 2: send remaining excess back to the source
  {
    std::vector<std::size_t> dist;
    residual_bfs(s, dist);
    for (std::size_t v = 0; v < n; ++v) height[v] = std::min(dist[v], 2 * n);
    height[t] = 2 * n;
    std::fill(current.begin(), current.end(), 0);
    std::deque<std::size_t> queue;
    for (std::size_t v = 0; v < n; ++v)
      if (v != s && v != t && excess[v] > eps) queue.push_back(v);
    while (!queue.empty()) {
      std::size_t u = queue.front();
      queue.pop_front();
      while (excess[u] > eps) {
        auto arcs = net.out_arcs(u);
        if (current[u] == arcs.size()) {
          std::size_t best = 4 * n;
          for (std::size_t a : arcs)
            if (res[a] > eps && net.arc(a).to != t) best = std::min(best, height[net.arc(a).to] + 1);
          if (best >= 4 * n) break;
          height[u] = best;
          current[u] = 0;
          continue;
        }
        std::size_t a = arcs[current[u]];
        std::size_t v = net.arc(a).to;
        if (v != t && res[a] > eps && height[u] == height[v] + 1) {
          if (push(u, a, std::min(excess[u], res[a])) && v != s) queue.push_back(v);
        } else {
          ++current[u];
        }
      }
    }
  }

  out.arc_flow.resize(net.num_arcs());
  for (std::size_t a = 0; a < res.size(); ++a) out.arc_flow[a] = net.arc(a).capacity - res[a];
  // the paired arcs hold (c_a - r_a) and (c_b - r_b) = -(c_a - r_a)
  for (std::size_t a = 0; a < res.size(); a += 2) {
    double f = 0.5 * (out.arc_flow[a] - out.arc_flow[a + 1]);
    out.arc_flow[a] = f;
    out.arc_flow[a + 1] = -f;
  }
  return out;
}

}  // namespace cfsp
