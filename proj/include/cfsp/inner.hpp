#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "cfsp/graph.hpp"
#include "cfsp/lovasz.hpp"

namespace cfsp {

/// min over {f >= 0, |f|_2 <= 1} of c1 max_i f_i + <c2, f> + mu sum_edges w_ij |f_i - f_j|.
struct InnerProblem {
  Graph graph;
  double c1 = 0.0;
  std::vector<double> c2;
  double mu = 0.0;

  double objective(std::span<const double> f) const {
    double s = c1 * max_entry(f) + mu * total_variation(graph, f);
    for (std::size_t i = 0; i < f.size(); ++i) s += c2[i] * f[i];
    return s;
  }

  void validate() const {
    if (c2.size() != graph.num_vertices()) throw std::invalid_argument("InnerProblem: c2 has wrong size");
    if (!(c1 >= 0.0) || !(mu >= 0.0)) throw std::invalid_argument("InnerProblem: c1 and mu must be >= 0");
    for (double x : c2)
      if (!std::isfinite(x)) throw std::invalid_argument("InnerProblem: non-finite c2");
  }
};

/// Dual iterate; alpha holds one entry in [-1, 1] per stored edge.
struct DualState {
  std::vector<double> alpha;
  std::vector<double> v;
  double t = 1.0;
  double lipschitz = 0.0;
};

enum class GapMode { relative, absolute };

struct InnerOptions {
  double tol = 1e-6;
  std::size_t max_iter = 20000;
  GapMode gap_mode = GapMode::relative;
  std::size_t power_iterations = 30;
};

struct InnerSolution {
  std::vector<double> f;  ///< normalised primal point, or zero
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  DualState state;
};

/// Euclidean projection onto the probability simplex.
inline std::vector<double> simplex_project(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("simplex_project: empty vector");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cum += s[k];
    double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[k] - t > 0.0) tau = t;
  }
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::max(x[i] - tau, 0.0);
  return v;
}

namespace detail {

/// out = B a, with (B a)_u += w a_e and (B a)_v -= w a_e for edge e = (u, v).
inline void apply_incidence(const Graph& g, std::span<const double> a, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    double x = edges[e].weight * a[e];
    out[edges[e].u] += x;
    out[edges[e].v] -= x;
  }
}

}  // namespace detail

/// 1.1 times a power-iteration estimate of the largest eigenvalue of mu^2 B B^T + c1^2 I.
inline double lipschitz_estimate(const InnerProblem& p, std::size_t iterations = 30) {
  const std::size_t n = p.graph.num_vertices();
  const auto edges = p.graph.edges();
  if (n == 0) return 1.0;
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  std::vector<double> u(n), bu(edges.size()), mu_vec(n);
  for (auto& x : u) x = unif(rng);
  double lambda = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    double norm = 0.0;
    for (double x : u) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (auto& x : u) x /= norm;
    for (std::size_t e = 0; e < edges.size(); ++e)
      bu[e] = edges[e].weight * (u[edges[e].u] - u[edges[e].v]);
    detail::apply_incidence(p.graph, bu, mu_vec);
    lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mu_vec[i] = p.mu * p.mu * mu_vec[i] + p.c1 * p.c1 * u[i];
      lambda += u[i] * mu_vec[i];
    }
    u = mu_vec;
  }
  return lambda > 0.0 ? 1.1 * lambda : 1.0;
}

namespace detail {

/// Dual-to-primal map: z = P+(x - c1 v) with v optimal on the simplex, x = -c2 - mu B a.
struct DualMap {
  const InnerProblem& p;
  std::vector<double> ba, x;

  explicit DualMap(const InnerProblem& prob)
      : p(prob), ba(prob.graph.num_vertices()), x(prob.graph.num_vertices()) {}

  void operator()(std::span<const double> a, std::vector<double>& z, std::vector<double>& v) {
    const std::size_t n = p.graph.num_vertices();
    apply_incidence(p.graph, a, ba);
    for (std::size_t i = 0; i < n; ++i) x[i] = -p.c2[i] - p.mu * ba[i];
    if (p.c1 > 0.0) {
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = std::max(x[i] / p.c1, 0.0);
      v = simplex_project(y);
      for (std::size_t i = 0; i < n; ++i) z[i] = std::max(x[i] - p.c1 * v[i], 0.0);
    } else {
      for (std::size_t i = 0; i < n; ++i) z[i] = std::max(x[i], 0.0);
    }
  }
};

inline double squared_norm(std::span<const double> z) {
  double s = 0.0;
  for (double x : z) s += x * x;
  return s;
}

}  // namespace detail

/// Accelerated projected gradient on the dual of the inner problem.
///
/// Each iterate carries a primal point z and the certificate
/// gap = E(z) + |z|^2 >= 0. The best normalised z seen is returned.
inline InnerSolution solve_inner(const InnerProblem& p, const InnerOptions& opt = {},
                                 const DualState* warm = nullptr) {
  p.validate();
  if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_inner: tol must be positive");
  const std::size_t n = p.graph.num_vertices();
  const auto edges = p.graph.edges();
  const std::size_t m = edges.size();

  InnerSolution sol;
  sol.state.v.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  sol.state.alpha.assign(m, 0.0);
  if (warm && warm->alpha.size() == m) sol.state.alpha = warm->alpha;
  sol.f.assign(n, 0.0);
  if (n == 0) {
    sol.converged = true;
    return sol;
  }

  const bool has_tv = p.mu > 0.0 && m > 0;
  const double L = has_tv ? lipschitz_estimate(p, opt.power_iterations) : 1.0;
  sol.state.lipschitz = L;
  const double step = has_tv ? p.mu / L : 0.0;

  detail::DualMap dual_map(p);
  std::vector<double> a = sol.state.alpha, a_prev = a, y = a;
  std::vector<double> z(n), v(n), f(n);
  double best_value = 0.0;  // attained by f = 0

  auto certify = [&](std::span<const double> at) {
    dual_map(at, z, v);
    double zz = detail::squared_norm(z);
    double ez = p.objective(z);
    sol.dual_value = -0.5 * zz;
    sol.gap = std::max(0.0, ez + zz);
    if (zz > 0.0) {
      double inv = 1.0 / std::sqrt(zz);
      for (std::size_t i = 0; i < n; ++i) f[i] = z[i] * inv;
      double value = ez * inv;
      if (value < best_value) value = p.objective(f);
      if (value < best_value) {
        best_value = value;
        sol.f = f;
      }
    }
    sol.state.v = v;
    double scale = opt.gap_mode == GapMode::relative ? std::max(1.0, std::abs(sol.dual_value)) : 1.0;
    return sol.gap <= opt.tol * scale;
  };

  double t = 1.0;
  std::size_t it = 0;
  bool done = certify(a);
  while (!done && has_tv && it < opt.max_iter) {
    ++it;
    dual_map(y, z, v);
    a_prev.swap(a);
    for (std::size_t e = 0; e < m; ++e) {
      double grad = edges[e].weight * (z[edges[e].u] - z[edges[e].v]);
      a[e] = std::clamp(y[e] + step * grad, -1.0, 1.0);
    }
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double beta = (t - 1.0) / t_next;
    for (std::size_t e = 0; e < m; ++e) y[e] = a[e] + beta * (a[e] - a_prev[e]);
    t = t_next;
    done = certify(a);
  }

  sol.iterations = it;
  sol.converged = done;
  sol.state.alpha = a;
  sol.state.t = t;
  sol.primal_value = best_value;
  if (best_value == 0.0) std::fill(sol.f.begin(), sol.f.end(), 0.0);
  return sol;
}

inline InnerSolution solve_inner(const InnerProblem& p, double tol, std::size_t max_iter) {
  InnerOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  return solve_inner(p, opt);
}

}  // namespace cfsp
