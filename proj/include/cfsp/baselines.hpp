#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cfsp/constraints.hpp"
#include "cfsp/error.hpp"
#include "cfsp/graph.hpp"
#include "cfsp/lovasz.hpp"
#include "cfsp/ratio_dca.hpp"
#include "cfsp/set_function.hpp"

namespace cfsp {

// --- lazy random walk ---------------------------------------------------------------

struct LrwOptions {
  std::size_t max_steps = 1000;
  bool degree_normalized = false;  ///< sweep p_i / d_i instead of p_i
  double tol = 1e-10;              ///< stop once |p_{t+1} - p_t|_1 falls below
};

struct LrwResult {
  VertexSet set;
  double value = std::numeric_limits<double>::infinity();
  std::size_t step = 0;       ///< step whose vector produced the set
  std::size_t steps_run = 0;  ///< number of vectors swept
};

/// One step of p <- (p + W D^-1 p) / 2; vertices without edges keep their mass.
inline std::vector<double> lazy_walk_step(const Graph& g, std::span<const double> p) {
  std::vector<double> next(p.size(), 0.0);
  for (Vertex j = 0; j < p.size(); ++j) {
    next[j] += 0.5 * p[j];
    double d = g.degree(j);
    if (d <= 0.0) {
      next[j] += 0.5 * p[j];
      continue;
    }
    double share = 0.5 * p[j] / d;
    for (const auto& nb : g.neighbors(j)) next[nb.vertex] += share * nb.weight;
  }
  return next;
}

/// Sweeps every walk vector from the seed distribution and keeps the best
/// feasible level set containing the seed. Earlier steps win ties.
inline LrwResult lrw_cluster(const Graph& g, std::span<const Vertex> seed, const SetRatio& objective,
                             const SetPredicate& feasible = {}, const LrwOptions& opt = {}) {
  const std::size_t n = g.num_vertices();
  if (seed.empty()) throw std::invalid_argument("lrw_cluster: seed set is empty");
  Membership in_seed = to_membership(n, seed);
  VertexSet seeds = to_vertex_set(in_seed);
  for (Vertex v : seeds)
    if (!(g.degree(v) > 0.0)) throw std::invalid_argument("lrw_cluster: seed vertex without edges");

  std::vector<double> p(n, 0.0);
  for (Vertex v : seeds) p[v] = 1.0 / static_cast<double>(seeds.size());

  auto admissible = [&](const Membership& in) {
    for (Vertex v : seeds)
      if (!in[v]) return false;
    return !feasible || feasible(in);
  };

  LrwResult best;
  bool found = false;
  std::vector<double> key(n);
  for (std::size_t step = 0;; ++step) {
    for (Vertex i = 0; i < n; ++i)
      key[i] = opt.degree_normalized && g.degree(i) > 0.0 ? p[i] / g.degree(i) : p[i];
    try {
      auto r = optimal_threshold(key, objective.numerator, objective.denominator, admissible);
      if (!found || r.best_value < best.value) {
        best.set = r.best_set;
        best.value = r.best_value;
        best.step = step;
        found = true;
      }
    } catch (const NoFeasibleThreshold&) {
    }
    best.steps_run = step + 1;
    if (step >= opt.max_steps) break;
    auto next = lazy_walk_step(g, p);
    double diff = 0.0;
    for (Vertex i = 0; i < n; ++i) diff += std::abs(next[i] - p[i]);
    p = std::move(next);
    if (diff < opt.tol) break;
  }
  if (!found) throw NoFeasibleThreshold("lrw_cluster: no feasible level set at any step");
  return best;
}

// --- exhaustive oracle -------------------------------------------------------------------

enum class OptimizationMode { minimize, maximize };

struct OracleResult {
  VertexSet best_set;
  double best_value = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t enumerated_count = 0;
  std::uint64_t feasible_count = 0;

  bool feasible() const noexcept { return feasible_count > 0; }
};

inline constexpr std::size_t kOracleMaxVertices = 20;

/// Exact optimum of numerator / denominator over all supersets of `seed`
/// satisfying the constraints (and `extra`, when given). Sets with zero
/// denominator are skipped. Ties go to the first set in enumeration order.
inline OracleResult brute_force(const SetRatio& objective, std::span<const VolumeConstraint> constraints,
                                std::span<const Vertex> seed, OptimizationMode mode,
                                std::size_t threads = 0, const SetPredicate& extra = {}) {
  const std::size_t n = objective.numerator.ground_size();
  if (n > kOracleMaxVertices)
    throw std::invalid_argument("brute_force: at most " + std::to_string(kOracleMaxVertices) +
                                " vertices");
  Membership base = to_membership(n, seed);
  std::vector<Vertex> free;
  for (Vertex v = 0; v < n; ++v)
    if (!base[v]) free.push_back(v);
  const std::uint64_t total = std::uint64_t{1} << free.size();

  struct Partial {
    std::optional<std::uint64_t> mask;
    double value = 0.0;
    std::uint64_t feasible = 0;
  };
  const std::uint64_t chunks = std::min<std::uint64_t>(total, 64);
  std::vector<Partial> partial(chunks);
  auto better = [mode](double a, double b) { return mode == OptimizationMode::minimize ? a < b : a > b; };

  detail::parallel_for(chunks, threads, [&](std::size_t c) {
    const std::uint64_t lo = total * c / chunks, hi = total * (c + 1) / chunks;
    Partial& out = partial[c];
    Membership in = base;
    for (std::uint64_t mask = lo; mask < hi; ++mask) {
      for (std::size_t b = 0; b < free.size(); ++b) in[free[b]] = (mask >> b) & 1U;
      double den = objective.denominator(in);
      if (!(den > 0.0)) continue;
      if (!all_satisfied(constraints, in) || (extra && !extra(in))) continue;
      ++out.feasible;
      double q = objective.numerator(in) / den;
      if (!out.mask || better(q, out.value)) {
        out.mask = mask;
        out.value = q;
      }
    }
  });

  OracleResult r;
  r.enumerated_count = total;
  std::optional<std::uint64_t> best_mask;
  for (const auto& p : partial) {
    r.feasible_count += p.feasible;
    if (p.mask && (!best_mask || better(p.value, r.best_value))) {
      best_mask = p.mask;
      r.best_value = p.value;
    }
  }
  if (best_mask) {
    Membership in = base;
    for (std::size_t b = 0; b < free.size(); ++b) in[free[b]] = (*best_mask >> b) & 1U;
    r.best_set = to_vertex_set(in);
  }
  return r;
}

}  // namespace cfsp
