#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cfsp/constraints.hpp"
#include "cfsp/error.hpp"
#include "cfsp/graph.hpp"
#include "cfsp/lovasz.hpp"
#include "cfsp/max_flow.hpp"
#include "cfsp/ratio_dca.hpp"
#include "cfsp/set_function.hpp"

namespace cfsp {

/// Quantities for optimising over A = C \ J with the seed J forced into C.
struct SeedReduction {
  VertexSet seed;
  std::vector<Vertex> active;     ///< V \ J in increasing order
  Subgraph active_graph;          ///< induced on the active vertices
  std::vector<double> d_seed;     ///< per active vertex, weight into J
  std::vector<double> d_active;   ///< per active vertex, weight into V \ J
  std::vector<double> degree;     ///< per active vertex, full degree
  double seed_cut = 0.0;          ///< cut(J, V \ J)
  double seed_assoc = 0.0;        ///< assoc(J)

  std::vector<double> restrict(std::span<const double> parent_values) const {
    std::vector<double> out;
    out.reserve(active.size());
    for (Vertex v : active) out.push_back(parent_values[v]);
    return out;
  }
};

inline VertexSet normalize_set(std::size_t n, std::span<const Vertex> set) {
  return to_vertex_set(to_membership(n, set));
}

inline SeedReduction seed_reduction(const Graph& g, std::span<const Vertex> seed) {
  const std::size_t n = g.num_vertices();
  SeedReduction r;
  Membership in_seed = to_membership(n, seed);
  r.seed = to_vertex_set(in_seed);
  for (Vertex v = 0; v < n; ++v)
    if (!in_seed[v]) r.active.push_back(v);
  r.active_graph = induced_subgraph(g, r.active);
  for (Vertex v : r.active) {
    double into_seed = 0.0;
    for (const auto& nb : g.neighbors(v))
      if (in_seed[nb.vertex]) into_seed += nb.weight;
    r.d_seed.push_back(into_seed);
    r.d_active.push_back(g.degree(v) - into_seed);
    r.degree.push_back(g.degree(v));
  }
  r.seed_cut = cut_value(g, in_seed);
  r.seed_assoc = assoc_value(g, in_seed);
  return r;
}

// --- maximum density ------------------------------------------------------------

/// Minimise vol_g(C) / assoc(C) subject to J in C and k1 <= vol_h(C) <= k2.
struct DensityProblemSpec {
  VertexWeights g;
  VertexWeights h;
  std::optional<double> lower;
  std::optional<double> upper;
  VertexSet seed;
};

inline std::vector<VolumeConstraint> density_constraints(const DensityProblemSpec& spec) {
  std::vector<VolumeConstraint> cs;
  if (spec.lower) cs.push_back(lower_bound(spec.h, *spec.lower));
  if (spec.upper) cs.push_back(upper_bound(spec.h, *spec.upper));
  return cs;
}

inline ConstrainedRatioProblem build_max_density(const Graph& graph, const DensityProblemSpec& spec,
                                                 double gamma) {
  const std::size_t n = graph.num_vertices();
  if (spec.g.size() != n || spec.h.size() != n)
    throw std::invalid_argument("build_max_density: vertex weights have wrong length");
  if (spec.lower && spec.upper && *spec.lower > *spec.upper)
    throw InfeasibleError("lower volume bound exceeds upper bound");
  if (!(gamma >= 0.0)) throw std::invalid_argument("build_max_density: gamma must be >= 0");

  auto red = seed_reduction(graph, spec.seed);
  const double vol_h_seed = volume(spec.h, red.seed);
  const double vol_g_seed = volume(spec.g, red.seed);
  if (spec.upper && vol_h_seed > *spec.upper)
    throw InfeasibleError("seed set already exceeds the upper volume bound");

  const std::size_t m = red.active.size();
  VertexWeights h_act(red.restrict(spec.h.values()));
  std::vector<double> g_act = red.restrict(spec.g.values());

  ConstrainedRatioProblem p;
  p.graph = red.active_graph.graph;
  p.gamma = gamma;
  p.parent_size = n;
  p.seed = red.seed;
  p.active = red.active;
  p.objective = {volume_function(spec.g), assoc_function(graph)};
  p.constraints = density_constraints(spec);
  p.theta = theta_of(p.constraints);
  p.denominator_bound = graph.total_volume();

  // numerator: vol_g(A) + vol_g(J) P(A) + gamma * penalties
  std::optional<double> k_up, k_low;
  if (spec.upper) k_up = *spec.upper - vol_h_seed;
  if (spec.lower && *spec.lower - vol_h_seed > 0.0) k_low = *spec.lower - vol_h_seed;

  SetFunction num = modular_function(g_act) + vol_g_seed * nonempty_function(m);
  InnerShape r1{vol_g_seed, g_act, 0.0};
  if (k_up) {
    auto pen = penalty_dc(upper_bound(h_act, *k_up));
    num = num + gamma * pen.function();
    for (std::size_t i = 0; i < m; ++i) r1.linear[i] += gamma * h_act[i];
  }
  if (k_low) {
    auto pen = penalty_dc(lower_bound(h_act, *k_low));
    num = num + gamma * pen.function();
    r1.max_coeff += gamma * *k_low;
  }
  Subgradient r2 = [h_act, k_up, k_low, gamma, m](std::span<const double> f) {
    std::vector<double> out(m, 0.0);
    if (gamma == 0.0) return out;
    for (auto k : {k_up, k_low}) {
      if (!k) continue;
      auto t = t2_subgradient(h_act, *k, f);
      for (std::size_t i = 0; i < m; ++i) out[i] += gamma * t[i];
    }
    return out;
  };
  p.numerator = {num, r1, r2};

  // denominator: assoc(A u J) = <d + d_J, 1_A> + assoc(J) P(A) - cut_active(A)
  std::vector<double> s1_lin(m);
  for (std::size_t i = 0; i < m; ++i) s1_lin[i] = red.degree[i] + red.d_seed[i];
  SetFunction den = modular_function(s1_lin) + red.seed_assoc * nonempty_function(m) -
                    cut_function(p.graph);
  const double seed_assoc = red.seed_assoc;
  Subgradient s1 = [s1_lin, seed_assoc](std::span<const double> f) {
    std::vector<double> out = s1_lin;
    if (seed_assoc != 0.0) {
      auto e = argmax_indicator(f);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += seed_assoc * e[i];
    }
    return out;
  };
  p.denominator = {den, InnerShape{0.0, std::vector<double>(m, 0.0), 1.0}, s1};
  return p;
}

// --- local normalised cut -----------------------------------------------------------

/// Minimise cut(C) / (vol(C) vol(V \ C)) subject to J in C and vol(C) <= bound.
///
/// Volumes use `volume_weights`, the degrees of the graph by default.
struct NCutProblemSpec {
  VertexSet seed;
  double bound = 0.0;
  std::optional<VertexWeights> volume_weights;
};

inline ConstrainedRatioProblem build_local_ncut(const Graph& graph, const NCutProblemSpec& spec,
                                                double gamma) {
  const std::size_t n = graph.num_vertices();
  if (spec.seed.empty()) throw std::invalid_argument("build_local_ncut: seed set is empty");
  if (!(gamma >= 0.0)) throw std::invalid_argument("build_local_ncut: gamma must be >= 0");
  VertexWeights h = spec.volume_weights ? *spec.volume_weights : VertexWeights::degrees(graph);
  if (h.size() != n) throw std::invalid_argument("build_local_ncut: volume weights have wrong length");

  auto red = seed_reduction(graph, spec.seed);
  const double vol_seed = volume(h, red.seed);
  const double vol_total = h.total();
  if (vol_seed > spec.bound) throw InfeasibleError("seed volume exceeds the volume bound");

  const std::size_t m = red.active.size();
  VertexWeights h_act(red.restrict(h.values()));
  const double k = spec.bound - vol_seed;

  ConstrainedRatioProblem p;
  p.graph = red.active_graph.graph;
  p.gamma = gamma;
  p.parent_size = n;
  p.seed = red.seed;
  p.active = red.active;
  p.objective = {cut_function(graph), volume_product(h)};
  p.constraints = {upper_bound(h, spec.bound)};
  p.theta = theta_of(p.constraints);
  p.denominator_bound = vol_total * vol_total / 4.0;

  // numerator: cut_active(A) + cut(J, V\J) P(A) - <d_J, 1_A> + gamma * penalty
  auto pen = penalty_dc(upper_bound(h_act, k));
  SetFunction num = cut_function(p.graph) + red.seed_cut * nonempty_function(m) -
                    modular_function(red.d_seed) + gamma * pen.function();
  InnerShape r1{red.seed_cut, std::vector<double>(m, 0.0), 1.0};
  for (std::size_t i = 0; i < m; ++i) r1.linear[i] = gamma * h_act[i];
  Subgradient r2 = [d_seed = red.d_seed, h_act, k, gamma](std::span<const double> f) {
    std::vector<double> out = d_seed;
    if (gamma != 0.0) {
      auto t = t2_subgradient(h_act, k, f);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += gamma * t[i];
    }
    return out;
  };
  p.numerator = {num, r1, r2};

  // denominator: (vol(A) + vol(J)) (vol(V) - vol(A) - vol(J)) on nonempty A
  // prefix sums round differently from vol(V) - vol(J); the full set must get exactly zero
  SetFunction den = volume_transform(red.restrict(h.values()), [vol_seed, vol_total](double a) {
    return (a + vol_seed) * complement_volume(vol_total - vol_seed, a);
  });
  Subgradient s1 = [den](std::span<const double> f) { return greedy_subgradient(den, f); };
  p.denominator = {den, InnerShape{0.0, std::vector<double>(m, 0.0), 0.0}, s1};
  return p;
}

// --- evaluation helpers ---------------------------------------------------------------

/// cut(C) / (vol_d(C) vol_d(V \ C)); +inf when either side has zero volume.
inline double ncut_value(const Graph& g, const Membership& in) {
  double vol = volume(g.degrees(), in);
  double den = vol * (g.total_volume() - vol);
  return den > 0.0 ? cut_value(g, in) / den : std::numeric_limits<double>::infinity();
}

/// cut(C) / min{vol_d(C), vol_d(V \ C)}.
inline double cheeger_value(const Graph& g, const Membership& in) {
  double vol = volume(g.degrees(), in);
  double den = std::min(vol, g.total_volume() - vol);
  return den > 0.0 ? cut_value(g, in) / den : std::numeric_limits<double>::infinity();
}

/// assoc(C) / vol_g(C); zero on sets without volume.
inline double density_value(const Graph& g, const VertexWeights& w, const Membership& in) {
  double vol = volume(w, in);
  return vol > 0.0 ? assoc_value(g, in) / vol : 0.0;
}

// --- unconstrained maximum density by parametric min-cut ---------------------------------------

struct DensityResult {
  VertexSet set;
  double ratio = 0.0;    ///< vol_g(C) / assoc(C)
  double density = 0.0;  ///< assoc(C) / vol_g(C)
  std::vector<double> lambda_trace;
  double last_flow_value = 0.0;
  double last_cut_value = 0.0;  ///< capacity of the returned source side in the last network
};

/// Network whose minimum s-t cut (source side C plus s) has capacity
/// vol_g(C) - lambda assoc(C) + lambda vol_d(V).
inline FlowNetwork density_network(const Graph& g, const VertexWeights& w, double lambda) {
  const std::size_t n = g.num_vertices();
  FlowNetwork net(n + 2);
  const std::size_t s = n, t = n + 1;
  for (Vertex i = 0; i < n; ++i) {
    if (g.degree(i) > 0.0) net.add_arc(s, i, lambda * g.degree(i));
    if (w[i] > 0.0) net.add_arc(i, t, w[i]);
  }
  for (const auto& e : g.edges()) net.add_arc(e.u, e.v, lambda * e.weight, lambda * e.weight);
  return net;
}

/// Global minimiser of vol_g / assoc by Dinkelbach iterations on min-cuts.
inline DensityResult dinkelbach_max_density(const Graph& g, const VertexWeights& w, double tol = 1e-12) {
  const std::size_t n = g.num_vertices();
  if (g.num_edges() == 0) throw Error("dinkelbach_max_density: graph has no edges");
  if (w.size() != n) throw std::invalid_argument("dinkelbach_max_density: weights have wrong length");

  Membership current(n, true);
  double lambda = volume(w, current) / assoc_value(g, current);
  DensityResult out;
  out.lambda_trace.push_back(lambda);
  const double vol_d = g.total_volume();

  for (std::size_t iter = 0; iter < 4 * n + 8; ++iter) {
    FlowNetwork net = density_network(g, w, lambda);
    auto flow = max_flow(net, n, n + 1);
    Membership side(flow.source_side.begin(), flow.source_side.begin() + static_cast<std::ptrdiff_t>(n));
    out.last_flow_value = flow.value;
    out.last_cut_value = cut_capacity(net, flow.source_side);
    double assoc = assoc_value(g, side);
    double q = volume(w, side) - lambda * assoc;
    if (!(q < -tol * std::max(1.0, lambda * vol_d)) || !(assoc > 0.0)) break;
    double next = volume(w, side) / assoc;
    if (!(next < lambda)) break;
    lambda = next;
    current = std::move(side);
    out.lambda_trace.push_back(lambda);
  }
  out.set = to_vertex_set(current);
  out.ratio = lambda;
  out.density = 1.0 / lambda;
  return out;
}

}  // namespace cfsp
