#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "cfsp/error.hpp"
#include "cfsp/graph.hpp"
#include "cfsp/set_function.hpp"

namespace cfsp {

using SetPredicate = std::function<bool(const Membership&)>;

/// Indices of f sorted by decreasing value, ties by increasing index.
inline std::vector<Vertex> descending_order(std::span<const double> f) {
  for (double x : f)
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite entry in vector");
  std::vector<Vertex> order(f.size());
  std::iota(order.begin(), order.end(), Vertex{0});
  std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) { return f[a] > f[b]; });
  return order;
}

inline double lovasz_value(const SetFunction& s, std::span<const double> f) {
  if (f.size() != s.ground_size()) throw std::invalid_argument("lovasz_value: size mismatch");
  auto order = descending_order(f);
  auto prefix = s.prefix_values(order);
  double value = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    double next = k + 1 < order.size() ? f[order[k + 1]] : 0.0;
    value += prefix[k] * (f[order[k]] - next);
  }
  return value;
}

/// Greedy vertex of the base polytope; <f, s> equals the Lovász value.
inline std::vector<double> greedy_subgradient(const SetFunction& s, std::span<const double> f) {
  if (f.size() != s.ground_size()) throw std::invalid_argument("greedy_subgradient: size mismatch");
  auto order = descending_order(f);
  auto prefix = s.prefix_values(order);
  std::vector<double> out(f.size());
  double prev = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    out[order[k]] = prefix[k] - prev;
    prev = prefix[k];
  }
  return out;
}

/// Sum over undirected edges of w_ij |f_i - f_j|, the Lovász extension of the cut.
inline double total_variation(const Graph& g, std::span<const double> f) {
  double s = 0.0;
  for (const auto& e : g.edges()) s += e.weight * std::abs(f[e.u] - f[e.v]);
  return s;
}

inline double max_entry(std::span<const double> f) {
  double m = 0.0;
  bool first = true;
  for (double x : f) {
    if (first || x > m) m = x;
    first = false;
  }
  return m;
}

/// Indicator of the lowest-index maximiser.
inline std::vector<double> argmax_indicator(std::span<const double> f) {
  std::vector<double> out(f.size(), 0.0);
  if (f.empty()) return out;
  auto it = std::max_element(f.begin(), f.end());
  out[static_cast<std::size_t>(it - f.begin())] = 1.0;
  return out;
}

struct ThresholdValue {
  std::size_t size;
  double value;
};

struct SweepResult {
  std::size_t best_size = 0;  ///< number of vertices in best_set
  VertexSet best_set;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<ThresholdValue> per_threshold_values;  ///< filled when requested
};

/// Best ratio among the level sets {j : f_j >= t} of f.
///
/// Level sets with zero denominator and sets rejected by `feasible` are
/// skipped. Among equal ratios the smallest set wins. Throws
/// NoFeasibleThreshold when nothing qualifies.
inline SweepResult optimal_threshold(std::span<const double> f, const SetFunction& numerator,
                                     const SetFunction& denominator,
                                     const SetPredicate& feasible = {}, bool record = false) {
  const std::size_t n = f.size();
  if (numerator.ground_size() != n || denominator.ground_size() != n)
    throw std::invalid_argument("optimal_threshold: size mismatch");
  auto order = descending_order(f);
  auto num = numerator.prefix_values(order);
  auto den = denominator.prefix_values(order);

  SweepResult r;
  Membership in(n, false);
  bool found = false, any_positive = false;
  for (std::size_t k = 0; k < n; ++k) {
    in[order[k]] = true;
    if (k + 1 < n && f[order[k + 1]] == f[order[k]]) continue;
    if (!(den[k] > 0.0)) continue;
    any_positive = true;
    if (feasible && !feasible(in)) continue;
    double q = num[k] / den[k];
    if (record) r.per_threshold_values.push_back({k + 1, q});
    if (!found || q < r.best_value) {
      r.best_value = q;
      r.best_size = k + 1;
      found = true;
    }
  }
  if (!found)
    throw NoFeasibleThreshold(any_positive ? "no threshold set satisfies the constraints"
                                           : "all threshold sets have zero denominator");
  r.best_set.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r.best_size));
  std::sort(r.best_set.begin(), r.best_set.end());
  return r;
}

}  // namespace cfsp
