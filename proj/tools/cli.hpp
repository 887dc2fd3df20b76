#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfsp/cfsp.hpp"

namespace cfsp::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

struct GraphOptions {
  std::string path;
  bool weighted = false;
  std::vector<std::string> seeds;
  std::optional<std::size_t> radius;
  std::size_t min_count = 0;
  std::string counts_path;
};

/// The graph a command works on, possibly restricted around the seeds.
struct Workspace {
  LoadedGraph full;
  Graph graph;
  std::vector<Vertex> to_full;  ///< working id -> full id
  VertexSet seeds;              ///< working ids

  std::string name(Vertex v) const { return full.ids.name(to_full[v]); }

  json names(const VertexSet& set) const {
    json out = json::array();
    for (Vertex v : set) out.push_back(name(v));
    return out;
  }

  std::vector<double> restrict(std::span<const double> full_values) const {
    std::vector<double> out;
    for (Vertex v : to_full) out.push_back(full_values[v]);
    return out;
  }
};

inline Workspace load_workspace(const GraphOptions& o) {
  Workspace w;
  w.full = load_edge_list(std::filesystem::path(o.path), o.weighted);
  VertexSet full_seeds;
  for (const auto& s : o.seeds) full_seeds.push_back(w.full.ids.at(s));
  full_seeds = to_vertex_set(to_membership(w.full.graph.num_vertices(), full_seeds));
  if (o.radius) {
    if (full_seeds.empty()) throw std::invalid_argument("--radius needs at least one --seed");
    std::optional<std::vector<std::size_t>> counts;
    if (!o.counts_path.empty())
      counts = load_counts(std::filesystem::path(o.counts_path), w.full.graph.num_vertices());
    auto sub = counts ? restrict_ball(w.full.graph, full_seeds, *o.radius, o.min_count,
                                      std::span<const std::size_t>(*counts))
                      : restrict_ball(w.full.graph, full_seeds, *o.radius, o.min_count);
    w.graph = sub.graph;
    w.to_full = sub.to_parent;
    for (Vertex s : full_seeds) w.seeds.push_back(sub.from_parent[s]);
  } else {
    w.graph = w.full.graph;
    for (Vertex v = 0; v < w.graph.num_vertices(); ++v) w.to_full.push_back(v);
    w.seeds = full_seeds;
  }
  std::sort(w.seeds.begin(), w.seeds.end());
  return w;
}

/// "ones", "degree" or a vertex-weight file for the full graph.
inline VertexWeights resolve_weights(const std::string& spec, const Workspace& w, bool original_volume) {
  if (spec == "ones") return VertexWeights::ones(w.graph.num_vertices());
  if (spec == "degree")
    return original_volume ? VertexWeights(w.restrict(w.full.graph.degrees()))
                           : VertexWeights::degrees(w.graph);
  auto full = load_vertex_weights(std::filesystem::path(spec), w.full.graph.num_vertices());
  return VertexWeights(w.restrict(full.values()));
}

inline json constraint_report(const Workspace& w, std::span<const VolumeConstraint> cs, const VertexSet& set) {
  json out = json::array();
  Membership in = to_membership(w.graph.num_vertices(), set);
  for (const auto& c : cs) {
    out.push_back({{"kind", c.kind == BoundKind::upper ? "upper" : "lower"},
                   {"bound", c.bound},
                   {"volume", volume(c.weights, in)},
                   {"slack", constraint_slack(c, in)},
                   {"satisfied", is_satisfied(c, in)}});
  }
  return out;
}

inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json starts_report(const Solution& s) {
  json out = json::array();
  for (const auto& r : s.starts) {
    json rec = {{"init_id", r.init_id}, {"warm", r.warm}, {"trace", r.trace},
                {"penalized_value", number(r.penalized_value)}};
    if (!r.error.empty()) rec["error"] = r.error;
    out.push_back(rec);
  }
  return out;
}

inline json graph_report(const Workspace& w) {
  return {{"n", w.graph.num_vertices()},
          {"m", w.graph.num_edges()},
          {"n_input", w.full.graph.num_vertices()},
          {"m_input", w.full.graph.num_edges()}};
}

inline SolverConfig solver_config(std::size_t inits, std::uint64_t rng, std::size_t threads) {
  SolverConfig cfg;
  cfg.initializations = inits;
  cfg.seed = rng;
  cfg.threads = threads;
  return cfg;
}

inline json solution_report(const Workspace& w, const Solution& s, std::span<const VolumeConstraint> cs) {
  return {{"set", w.names(s.set)},
          {"size", s.set.size()},
          {"lambda", number(s.lambda)},
          {"set_value", number(s.set_value)},
          {"feasible", s.all_feasible},
          {"constraints", constraint_report(w, cs, s.set)},
          {"gamma_used", s.gamma_used},
          {"gamma_steps", s.gamma_steps},
          {"init_id", s.init_id},
          {"fallback", s.fallback},
          {"starts", starts_report(s)}};
}

/// Runs the command line and writes one JSON document to `out`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained fractional set programs on graphs"};
  app.require_subcommand(1);

  GraphOptions g;
  std::size_t threads = 0;
  std::uint64_t rng = 0;
  std::size_t inits = 10;
  std::optional<double> vol, vol_total_frac, vol_frac, upper, lower;
  std::string g_spec = "ones", h_spec = "ones", objective = "ncut";
  bool original_volume = false, lrw_warm = false, degree_normalized = false;
  std::size_t max_steps = 1000;
  std::string publications, output, counts_output;

  auto add_graph = [&](CLI::App* sub, bool seeds) {
    sub->add_option("--graph", g.path, "edge list file")->required()->check(CLI::ExistingFile);
    sub->add_flag("--weighted", g.weighted, "read a third weight column");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->add_option("--rng", rng, "random seed");
    if (seeds) {
      sub->add_option("--seed", g.seeds, "seed vertex ids")->delimiter(',');
      sub->add_option("--radius", g.radius, "restrict to vertices within this many hops of the seeds");
      sub->add_option("--min-count", g.min_count, "drop non-seed vertices whose count is below this");
      sub->add_option("--counts", g.counts_path, "per-vertex integer counts for --min-count")
          ->check(CLI::ExistingFile);
      sub->add_flag("--original-volume", original_volume, "degree weights from the unrestricted graph");
    }
  };
  auto add_vol = [&](CLI::App* sub, bool with_frac) {
    auto* a = sub->add_option("--vol", vol, "upper bound on the volume");
    auto* b = sub->add_option("--vol-total-frac", vol_total_frac, "bound as a fraction of the total volume");
    a->excludes(b);
    if (with_frac) {
      auto* c = sub->add_option("--vol-frac", vol_frac, "bound as a fraction of the seed-only solution volume");
      c->excludes(a)->excludes(b);
    }
  };

  auto* local_cut = app.add_subcommand("local-cut", "constrained local normalized cut");
  add_graph(local_cut, true);
  add_vol(local_cut, true);
  local_cut->add_option("--inits", inits, "random initializations");
  local_cut->add_flag("--lrw-warm", lrw_warm, "also warm start from the random-walk set");

  auto* max_density = app.add_subcommand("max-density", "constrained maximum density subgraph");
  add_graph(max_density, true);
  max_density->add_option("--inits", inits, "random initializations");
  max_density->add_option("--g-weights", g_spec, "objective weights: ones, degree or a file");
  max_density->add_option("--h-weights", h_spec, "constraint weights: ones, degree or a file");
  max_density->add_option("--upper", upper, "upper bound on vol_h");
  max_density->add_option("--lower", lower, "lower bound on vol_h");

  auto* global = app.add_subcommand("max-density-global", "exact unconstrained maximum density subgraph");
  add_graph(global, false);
  global->add_option("--g-weights", g_spec, "objective weights: ones, degree or a file");

  auto* lrw = app.add_subcommand("lrw", "lazy random walk with constrained sweeps");
  add_graph(lrw, true);
  add_vol(lrw, false);
  lrw->add_option("--objective", objective, "ncut or cheeger")->check(CLI::IsMember({"ncut", "cheeger"}));
  lrw->add_option("--max-steps", max_steps, "walk steps");
  lrw->add_flag("--degree-normalized", degree_normalized, "sweep p_i / d_i");

  auto* oracle = app.add_subcommand("oracle", "exhaustive search (at most 20 vertices)");
  add_graph(oracle, true);
  add_vol(oracle, false);
  oracle->add_option("--objective", objective, "ncut, cheeger or density")
      ->check(CLI::IsMember({"ncut", "cheeger", "density"}));
  oracle->add_option("--g-weights", g_spec, "density weights: ones, degree or a file");
  oracle->add_option("--h-weights", h_spec, "density constraint weights: ones, degree or a file");
  oracle->add_option("--upper", upper, "upper bound on vol_h (density)");
  oracle->add_option("--lower", lower, "lower bound on vol_h (density)");

  auto* ingest = app.add_subcommand("ingest-coauthor", "build a co-author graph from publication lists");
  ingest->add_option("--publications", publications, "one publication per line")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_option("--output", output, "edge list to write")->required();
  ingest->add_option("--counts-output", counts_output, "per-author publication counts to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  const auto start = std::chrono::steady_clock::now();
  json record = {{"schema", 1}};
  json command = json::array();
  for (int i = 0; i < argc; ++i) command.push_back(argv[i]);
  record["command"] = command;
  record["rng"] = rng;
  auto finish = [&](int code) {
    record["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << record.dump(2) << '\n';
    return code;
  };

  try {
    if (ingest->parsed()) {
      auto pubs = load_publications(std::filesystem::path(publications));
      Graph co = coauthor_weights(pubs.author_lists, pubs.authors.size());
      std::ofstream os(output);
      if (!os) throw Error("cannot write '" + output + "'");
      write_edge_list(os, co, pubs.authors);
      if (!counts_output.empty()) {
        std::ofstream cs(counts_output);
        if (!cs) throw Error("cannot write '" + counts_output + "'");
        for (std::size_t c : pubs.publication_count) cs << c << '\n';
      }
      record["command_name"] = "ingest-coauthor";
      record["authors"] = pubs.authors.size();
      record["publications"] = pubs.author_lists.size();
      record["edges"] = co.num_edges();
      return finish(kExitOk);
    }

    Workspace w = load_workspace(g);
    record["graph"] = graph_report(w);
    const double total_degree = w.graph.total_volume();

    if (global->parsed()) {
      record["command_name"] = "max-density-global";
      auto r = dinkelbach_max_density(w.graph, resolve_weights(g_spec, w, false));
      record["set"] = w.names(r.set);
      record["size"] = r.set.size();
      record["ratio"] = r.ratio;
      record["density"] = r.density;
      record["lambda_trace"] = r.lambda_trace;
      record["feasible"] = true;
      return finish(kExitOk);
    }

    if (local_cut->parsed()) {
      record["command_name"] = "local-cut";
      if (w.seeds.empty()) throw std::invalid_argument("local-cut needs --seed");
      SolverConfig cfg = solver_config(inits, rng, threads);
      VertexWeights h = original_volume ? VertexWeights(w.restrict(w.full.graph.degrees()))
                                        : VertexWeights::degrees(w.graph);
      double bound = h.total();
      if (vol) bound = *vol;
      if (vol_total_frac) bound = *vol_total_frac * h.total();
      if (vol_frac) {
        NCutProblemSpec free_spec{w.seeds, h.total(), h};
        auto base = solve_with_gamma_schedule([&](double gm) { return build_local_ncut(w.graph, free_spec, gm); },
                                              cfg);
        double base_vol = volume(h, base.set);
        bound = *vol_frac * base_vol;
        record["seed_only"] = {{"set", w.names(base.set)}, {"volume", base_vol}, {"set_value", base.set_value}};
      }
      record["bound"] = bound;
      NCutProblemSpec spec{w.seeds, bound, h};
      auto builder = [&](double gm) { return build_local_ncut(w.graph, spec, gm); };
      std::vector<std::vector<double>> warm;
      if (lrw_warm) {
        auto p0 = builder(0.0);
        SetRatio ncut{cut_function(w.graph), volume_product(h)};
        auto fits = [&](const Membership& in) { return volume(h, in) <= bound; };
        auto base = lrw_cluster(w.graph, w.seeds, ncut, fits);
        record["lrw"] = {{"set", w.names(base.set)}, {"value", base.value}, {"step", base.step}};
        warm.push_back(p0.reduce(to_membership(w.graph.num_vertices(), base.set)));
      }
      auto sol = solve_with_gamma_schedule(builder, cfg, warm);
      auto p = builder(sol.gamma_used);
      record.update(solution_report(w, sol, p.constraints));
      Membership in = to_membership(w.graph.num_vertices(), sol.set);
      record["ncut"] = number(sol.set_value);
      record["cheeger"] = number(cheeger_value(w.graph, in));
      record["cut"] = cut_value(w.graph, in);
      record["volume"] = volume(h, in);
      return finish(sol.all_feasible ? kExitOk : kExitInfeasible);
    }

    if (max_density->parsed()) {
      record["command_name"] = "max-density";
      SolverConfig cfg = solver_config(inits, rng, threads);
      DensityProblemSpec spec{resolve_weights(g_spec, w, original_volume),
                              resolve_weights(h_spec, w, original_volume), lower, upper, w.seeds};
      auto sol = solve_with_gamma_schedule([&](double gm) { return build_max_density(w.graph, spec, gm); },
                                           cfg);
      auto cs = density_constraints(spec);
      record.update(solution_report(w, sol, cs));
      record["ratio"] = number(sol.set_value);
      record["density"] = number(1.0 / sol.set_value);
      return finish(sol.all_feasible ? kExitOk : kExitInfeasible);
    }

    if (lrw->parsed()) {
      record["command_name"] = "lrw";
      if (w.seeds.empty()) throw std::invalid_argument("lrw needs --seed");
      VertexWeights d = VertexWeights::degrees(w.graph);
      double bound = total_degree;
      if (vol) bound = *vol;
      if (vol_total_frac) bound = *vol_total_frac * total_degree;
      SetRatio obj{cut_function(w.graph), objective == "ncut" ? volume_product(d) : cheeger_balance(d)};
      auto fits = [&](const Membership& in) { return volume(d, in) <= bound; };
      LrwOptions opt;
      opt.max_steps = max_steps;
      opt.degree_normalized = degree_normalized;
      auto r = lrw_cluster(w.graph, w.seeds, obj, fits, opt);
      record["bound"] = bound;
      record["set"] = w.names(r.set);
      record["size"] = r.set.size();
      record["set_value"] = r.value;
      record["step"] = r.step;
      record["steps_run"] = r.steps_run;
      record["feasible"] = true;
      return finish(kExitOk);
    }

    if (oracle->parsed()) {
      record["command_name"] = "oracle";
      std::vector<VolumeConstraint> cs;
      SetRatio obj;
      if (objective == "density") {
        DensityProblemSpec spec{resolve_weights(g_spec, w, original_volume),
                                resolve_weights(h_spec, w, original_volume), lower, upper, w.seeds};
        cs = density_constraints(spec);
        obj = {volume_function(spec.g), assoc_function(w.graph)};
      } else {
        VertexWeights d = VertexWeights::degrees(w.graph);
        std::optional<double> bound = vol;
        if (vol_total_frac) bound = *vol_total_frac * total_degree;
        if (bound) cs.push_back(upper_bound(d, *bound));
        obj = {cut_function(w.graph), objective == "ncut" ? volume_product(d) : cheeger_balance(d)};
      }
      auto r = brute_force(obj, cs, w.seeds, OptimizationMode::minimize, threads);
      record["objective"] = objective;
      record["enumerated"] = r.enumerated_count;
      record["feasible_count"] = r.feasible_count;
      record["feasible"] = r.feasible();
      if (!r.feasible()) return finish(kExitInfeasible);
      record["set"] = w.names(r.best_set);
      record["size"] = r.best_set.size();
      record["value"] = r.best_value;
      if (objective == "density") record["density"] = 1.0 / r.best_value;
      record["constraints"] = constraint_report(w, cs, r.best_set);
      return finish(kExitOk);
    }
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    record["feasible"] = false;
    record["message"] = e.what();
    return finish(kExitInfeasible);
  } catch (const NoFeasibleThreshold& e) {
    err << "infeasible: " << e.what() << '\n';
    record["feasible"] = false;
    record["message"] = e.what();
    return finish(kExitInfeasible);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace cfsp::cli
