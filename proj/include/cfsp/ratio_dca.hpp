#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "cfsp/constraints.hpp"
#include "cfsp/error.hpp"
#include "cfsp/graph.hpp"
#include "cfsp/inner.hpp"
#include "cfsp/lovasz.hpp"
#include "cfsp/set_function.hpp"

namespace cfsp {

/// max_coeff * max(f) + <linear, f> + tv * TV(f); the shape the inner solver accepts.
struct InnerShape {
  double max_coeff = 0.0;
  std::vector<double> linear;
  double tv = 0.0;

  double value(const Graph& g, std::span<const double> f) const {
    double s = max_coeff * max_entry(f) + tv * total_variation(g, f);
    for (std::size_t i = 0; i < f.size(); ++i) s += linear[i] * f[i];
    return s;
  }
};

using Subgradient = std::function<std::vector<double>(std::span<const double>)>;

/// Set function F = F1 - F2 with both parts submodular.
///
/// `shaped` is the extension of the part that enters the inner problem
/// unchanged (F1 in a numerator, F2 in a denominator); `linearized` returns a
/// subgradient of the extension of the other part.
struct DCSetFunction {
  SetFunction set;
  InnerShape shaped;
  Subgradient linearized;
};

/// Penalised ratio over the active vertices V \ J, with the data needed to map back.
struct ConstrainedRatioProblem {
  Graph graph;  ///< induced on the active vertices
  DCSetFunction numerator;
  DCSetFunction denominator;
  double gamma = 0.0;

  std::size_t parent_size = 0;
  VertexSet seed;
  std::vector<Vertex> active;  ///< active index -> parent vertex

  SetRatio objective;  ///< unpenalised ratio on parent subsets
  std::vector<VolumeConstraint> constraints;
  double theta = 1.0;              ///< minimum violation of an infeasible set
  double denominator_bound = 0.0;  ///< upper bound on the denominator over all sets

  std::size_t num_active() const noexcept { return active.size(); }

  Membership lift(const Membership& in_active) const {
    Membership out = to_membership(parent_size, seed);
    for (std::size_t i = 0; i < active.size(); ++i)
      if (in_active[i]) out[active[i]] = true;
    return out;
  }

  /// Active-space indicator of C \ J.
  std::vector<double> reduce(const Membership& parent) const {
    std::vector<double> f(active.size(), 0.0);
    for (std::size_t i = 0; i < active.size(); ++i) f[i] = parent[active[i]] ? 1.0 : 0.0;
    return f;
  }

  double set_value(const Membership& parent) const { return objective(parent); }

  double penalized_value(const Membership& parent) const {
    double den = objective.denominator(parent);
    if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
    return (objective.numerator(parent) + gamma * penalty_value(constraints, parent)) / den;
  }

  bool feasible(const Membership& parent) const { return all_satisfied(constraints, parent); }

  /// Continuous ratio of the extensions; +inf when the denominator vanishes.
  double continuous_ratio(std::span<const double> f) const {
    double den = lovasz_value(denominator.set, f);
    if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
    return lovasz_value(numerator.set, f) / den;
  }
};

struct SolverConfig {
  double outer_tol = 1e-4;
  std::size_t max_outer = 100;
  InnerOptions inner{};
  double descent_tol = 1e-10;
  std::size_t initializations = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  ///< 0 uses all hardware threads
  double gamma_min = 1e-3;
  double gamma_growth = 2.0;
  double gamma_cap_margin = 1.01;
  std::size_t max_gamma_steps = 80;
};

struct FeasibleSet {
  VertexSet set;
  double value = std::numeric_limits<double>::infinity();
};

struct StartRecord {
  std::size_t init_id = 0;
  bool warm = false;
  std::vector<double> trace;
  VertexSet set;
  double penalized_value = std::numeric_limits<double>::infinity();
  std::string error;  ///< empty when the run succeeded
};

struct Solution {
  std::vector<double> f;  ///< continuous iterate on the active vertices
  VertexSet set;          ///< parent ids, includes the seed
  double lambda = 0.0;    ///< continuous penalised ratio at f
  double set_value = 0.0;
  double penalized_value = 0.0;
  std::vector<bool> feasible;  ///< per constraint
  bool all_feasible = true;
  double gamma_used = 0.0;
  std::vector<double> trace;
  std::size_t init_id = 0;
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;
  std::optional<FeasibleSet> best_feasible;
  std::vector<StartRecord> starts;
  std::vector<double> gamma_steps;
  bool fallback = false;  ///< set replaced by the best feasible set seen
};

namespace detail {

inline void fill_set_fields(const ConstrainedRatioProblem& p, const Membership& parent, Solution& s) {
  s.set = to_vertex_set(parent);
  s.set_value = p.set_value(parent);
  s.penalized_value = p.penalized_value(parent);
  s.feasible.clear();
  for (const auto& c : p.constraints) s.feasible.push_back(is_satisfied(c, parent));
  s.all_feasible = std::all_of(s.feasible.begin(), s.feasible.end(), [](bool b) { return b; });
}

inline void offer_feasible(std::optional<FeasibleSet>& best, const VertexSet& set, double value) {
  if (!std::isfinite(value)) return;
  if (!best || value < best->value) best = FeasibleSet{set, value};
}

/// Best feasible level set of f, also considering the seed alone.
inline std::optional<FeasibleSet> best_feasible_threshold(const ConstrainedRatioProblem& p,
                                                          std::span<const double> f) {
  std::optional<FeasibleSet> best;
  if (!p.seed.empty()) {
    Membership j = to_membership(p.parent_size, p.seed);
    if (p.feasible(j)) offer_feasible(best, p.seed, p.set_value(j));
  }
  if (p.num_active() == 0) return best;
  try {
    auto r = optimal_threshold(f, p.numerator.set, p.denominator.set,
                               [&](const Membership& in) { return p.feasible(p.lift(in)); });
    Membership c = p.lift(to_membership(p.num_active(), r.best_set));
    offer_feasible(best, to_vertex_set(c), p.set_value(c));
  } catch (const NoFeasibleThreshold&) {
  }
  return best;
}

inline std::size_t thread_count(std::size_t requested, std::size_t jobs) {
  std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::size_t t = requested == 0 ? hw : requested;
  return std::max<std::size_t>(1, std::min(t, jobs));
}

/// Runs job(i) for i < count on up to `threads` workers.
template <class Job>
void parallel_for(std::size_t count, std::size_t threads, Job&& job) {
  std::size_t workers = thread_count(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
}

}  // namespace detail

/// Solution consisting of the seed set alone (no active vertices remain).
inline Solution seed_only_solution(const ConstrainedRatioProblem& p) {
  Solution s;
  Membership j = to_membership(p.parent_size, p.seed);
  detail::fill_set_fields(p, j, s);
  s.lambda = s.penalized_value;
  s.gamma_used = p.gamma;
  if (s.all_feasible) detail::offer_feasible(s.best_feasible, s.set, s.set_value);
  return s;
}

/// One RatioDCA run from f0 on the active vertices.
///
/// Each outer step solves the convex inner problem obtained by linearising
/// the concave parts at the current iterate. The ratio of the extensions
/// strictly decreases; a non-negative inner optimum ends the run. The final
/// set is the best level set of the last iterate, or the seed alone when that
/// is better.
inline Solution ratio_dca(const ConstrainedRatioProblem& p, std::span<const double> f0,
                          const SolverConfig& cfg = {}) {
  const std::size_t m = p.num_active();
  if (m == 0) return seed_only_solution(p);
  if (f0.size() != m) throw std::invalid_argument("ratio_dca: start vector has wrong size");
  double norm = 0.0;
  for (double x : f0) {
    if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("ratio_dca: start vector must be finite and >= 0");
    norm += x * x;
  }
  if (norm == 0.0) throw std::invalid_argument("ratio_dca: start vector is zero");
  norm = std::sqrt(norm);

  std::vector<double> f(f0.begin(), f0.end());
  for (double& x : f) x /= norm;
  double num = lovasz_value(p.numerator.set, f);
  double den = lovasz_value(p.denominator.set, f);
  if (!(den > 0.0)) throw Error("ratio_dca: denominator extension vanishes at the start vector");
  double lambda = num / den;

  Solution s;
  s.trace.push_back(lambda);
  // feasible level sets of every iterate, the start included
  std::optional<FeasibleSet> feasible_seen = detail::best_feasible_threshold(p, f);
  DualState warm;
  const auto& R = p.numerator;
  const auto& S = p.denominator;

  while (s.outer_iterations < cfg.max_outer && lambda > 0.0) {
    ++s.outer_iterations;
    auto r2 = R.linearized(f);
    auto s1 = S.linearized(f);
    InnerProblem ip;
    ip.graph = p.graph;
    ip.c1 = R.shaped.max_coeff + lambda * S.shaped.max_coeff;
    ip.mu = R.shaped.tv + lambda * S.shaped.tv;
    ip.c2.resize(m);
    for (std::size_t i = 0; i < m; ++i)
      ip.c2[i] = R.shaped.linear[i] - r2[i] + lambda * (S.shaped.linear[i] - s1[i]);

    auto inner = solve_inner(ip, cfg.inner, &warm);
    warm = inner.state;
    s.inner_iterations += inner.iterations;

    // rounding in the inner objective grows with its coefficients
    double scale = std::max(1.0, num + lambda * den) + ip.c1 + ip.mu * p.graph.total_volume();
    for (double c : ip.c2) scale += std::abs(c);
    if (inner.primal_value > -cfg.descent_tol * scale) break;

    double num_new = lovasz_value(R.set, inner.f);
    double den_new = lovasz_value(S.set, inner.f);
    double lambda_new = den_new > 0.0 ? num_new / den_new : std::numeric_limits<double>::infinity();
    if (!(lambda_new < lambda))
      throw DescentViolation("ratio_dca: inner optimum " + std::to_string(inner.primal_value) +
                             " < 0 but ratio did not decrease (" + std::to_string(lambda) + " -> " +
                             std::to_string(lambda_new) + ")");
    double rel = (lambda - lambda_new) / lambda;
    f = std::move(inner.f);
    num = num_new;
    den = den_new;
    lambda = lambda_new;
    s.trace.push_back(lambda);
    if (auto c = detail::best_feasible_threshold(p, f)) detail::offer_feasible(feasible_seen, c->set, c->value);
    if (rel < cfg.outer_tol) break;
  }

  s.f = f;
  s.lambda = lambda;
  s.gamma_used = p.gamma;
  auto sweep = optimal_threshold(f, R.set, S.set);
  Membership chosen = p.lift(to_membership(m, sweep.best_set));
  if (!p.seed.empty()) {
    Membership j = to_membership(p.parent_size, p.seed);
    if (p.penalized_value(j) < p.penalized_value(chosen)) chosen = std::move(j);
  }
  detail::fill_set_fields(p, chosen, s);
  s.best_feasible = feasible_seen;
  if (s.all_feasible) detail::offer_feasible(s.best_feasible, s.set, s.set_value);
  return s;
}

/// Uniform [0, 1] start vectors drawn from one seeded generator.
inline std::vector<std::vector<double>> random_starts(std::size_t count, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> out(count, std::vector<double>(m));
  for (auto& v : out)
    for (auto& x : v) x = unif(rng);
  return out;
}

/// Runs ratio_dca from the warm starts followed by cfg.initializations random
/// starts and keeps the set with the smallest penalised value; the lowest
/// start index wins ties. Warm starts get the lowest indices.
inline Solution ratio_dca_multistart(const ConstrainedRatioProblem& p, const SolverConfig& cfg = {},
                                     std::span<const std::vector<double>> warm_starts = {}) {
  const std::size_t m = p.num_active();
  if (m == 0) return seed_only_solution(p);
  std::vector<std::vector<double>> starts;
  for (const auto& w : warm_starts)
    if (w.size() == m && std::any_of(w.begin(), w.end(), [](double x) { return x > 0.0; }))
      starts.push_back(w);
  const std::size_t num_warm = starts.size();
  for (auto& r : random_starts(cfg.initializations, m, cfg.seed)) starts.push_back(std::move(r));
  if (starts.empty()) throw std::invalid_argument("ratio_dca_multistart: no start vectors");

  std::vector<std::optional<Solution>> results(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());
  std::vector<std::string> messages(starts.size());
  detail::parallel_for(starts.size(), cfg.threads, [&](std::size_t i) {
    try {
      results[i] = ratio_dca(p, starts[i], cfg);
    } catch (const std::exception& e) {
      errors[i] = std::current_exception();
      messages[i] = e.what();
    }
  });

  std::optional<std::size_t> best;
  std::optional<FeasibleSet> best_feasible;
  std::vector<StartRecord> records;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    StartRecord rec;
    rec.init_id = i;
    rec.warm = i < num_warm;
    rec.error = messages[i];
    if (results[i]) {
      const Solution& r = *results[i];
      rec.trace = r.trace;
      rec.set = r.set;
      rec.penalized_value = r.penalized_value;
      if (r.best_feasible) detail::offer_feasible(best_feasible, r.best_feasible->set, r.best_feasible->value);
      if (!best || r.penalized_value < results[*best]->penalized_value) best = i;
    }
    records.push_back(std::move(rec));
  }
  if (!best) std::rethrow_exception(errors.front());
  Solution out = std::move(*results[*best]);
  out.init_id = *best;
  out.best_feasible = best_feasible;
  out.starts = std::move(records);
  return out;
}

using ProblemBuilder = std::function<ConstrainedRatioProblem(double gamma)>;

/// Solves without penalty, then doubles gamma until the returned set is feasible.
///
/// Once a feasible set C0 is known, gamma is capped at the exact-penalty bound
/// for C0; at the cap every set better than C0 is feasible, so the loop ends
/// with either a feasible result or C0 itself. The best feasible set found
/// along the way is returned.
inline Solution solve_with_gamma_schedule(const ProblemBuilder& build, const SolverConfig& cfg = {},
                                          std::span<const std::vector<double>> warm_starts = {}) {
  ConstrainedRatioProblem p = build(0.0);
  Solution sol = ratio_dca_multistart(p, cfg, warm_starts);
  std::vector<double> steps{0.0};
  std::optional<FeasibleSet> best = sol.best_feasible;
  // feasible warm starts are candidates in their own right
  for (const auto& w : warm_starts)
    if (w.size() == p.num_active())
      if (auto c = detail::best_feasible_threshold(p, w)) detail::offer_feasible(best, c->set, c->value);

  auto finish = [&](Solution s, const ConstrainedRatioProblem& prob) {
    if (!s.all_feasible || (best && best->value < s.set_value)) {
      if (!best) throw InfeasibleError("no feasible set found");
      std::vector<double> f = std::move(s.f);
      auto starts = std::move(s.starts);
      auto trace = std::move(s.trace);
      std::size_t init = s.init_id;
      double lambda = s.lambda;
      s = Solution{};
      detail::fill_set_fields(prob, to_membership(prob.parent_size, best->set), s);
      s.f = std::move(f);
      s.starts = std::move(starts);
      s.trace = std::move(trace);
      s.init_id = init;
      s.lambda = lambda;
      s.fallback = true;
    }
    s.best_feasible = best;
    s.gamma_used = prob.gamma;
    s.gamma_steps = steps;
    return s;
  };

  if (sol.all_feasible) return finish(std::move(sol), p);

  auto cap_for = [&](const FeasibleSet& c) {
    return gamma_sufficient(c.value, 1.0, p.denominator_bound, p.theta, cfg.gamma_cap_margin) *
           cfg.gamma_cap_margin;
  };
  double first = std::isfinite(sol.set_value) ? sol.set_value : sol.lambda;
  GammaSchedule schedule(std::max(cfg.gamma_min, first), cfg.gamma_growth);
  if (best) schedule.set_cap(cap_for(*best));

  std::vector<double> previous_f = sol.f;
  for (std::size_t step = 0;; ++step) {
    const double gamma = schedule.current();
    steps.push_back(gamma);
    ConstrainedRatioProblem pg = build(gamma);
    std::vector<std::vector<double>> warm(warm_starts.begin(), warm_starts.end());
    if (!previous_f.empty()) warm.push_back(previous_f);
    if (best) warm.push_back(pg.reduce(to_membership(pg.parent_size, best->set)));
    SolverConfig step_cfg = cfg;
    step_cfg.seed = cfg.seed ^ (0x9e3779b97f4a7c15ULL * (step + 1));  // fresh random starts per step
    sol = ratio_dca_multistart(pg, step_cfg, warm);
    if (sol.best_feasible && (!best || sol.best_feasible->value < best->value)) {
      best = sol.best_feasible;
      schedule.set_cap(cap_for(*best));
    }
    if (sol.all_feasible || schedule.at_cap() || step + 1 >= cfg.max_gamma_steps) {
      if (!sol.all_feasible && !best)
        throw InfeasibleError("no feasible set found up to gamma = " + std::to_string(gamma));
      return finish(std::move(sol), pg);
    }
    previous_f = sol.f;
    schedule.advance();
  }
}

}  // namespace cfsp
