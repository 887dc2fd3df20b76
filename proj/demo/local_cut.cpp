// Local normalized cut and constrained density on a small graph.
//
//   local_cut [edge-list] [seed-id] [volume-bound]

#include <iostream>

#include "cfsp/cfsp.hpp"

int main(int argc, char** argv) {
  using namespace cfsp;
  try {
    LoadedGraph lg = argc > 1 ? load_edge_list(std::filesystem::path(argv[1]), false)
                              : LoadedGraph{Graph(6, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1},
                                                      {3, 5, 1}, {4, 5, 1}}),
                                            IdMap::identity(6)};
    const Graph& g = lg.graph;
    Vertex seed = argc > 2 ? lg.ids.at(argv[2]) : 0;
    double bound = argc > 3 ? std::stod(argv[3]) : 0.5 * g.total_volume();

    NCutProblemSpec spec{{seed}, bound, std::nullopt};
    SolverConfig cfg;
    auto sol = solve_with_gamma_schedule([&](double gamma) { return build_local_ncut(g, spec, gamma); }, cfg);

    std::cout << "local normalized cut around " << lg.ids.name(seed) << ", vol <= " << bound << ":\n  {";
    for (std::size_t i = 0; i < sol.set.size(); ++i) std::cout << (i ? ", " : "") << lg.ids.name(sol.set[i]);
    std::cout << "}  ncut " << sol.set_value << "  gamma " << sol.gamma_used << '\n';

    auto d = VertexWeights::degrees(g);
    auto lrw = lrw_cluster(g, VertexSet{seed}, {cut_function(g), volume_product(d)},
                           [&](const Membership& in) { return volume(d, in) <= bound; });
    std::cout << "  lazy random walk: ncut " << lrw.value << " after " << lrw.step << " steps\n";

    auto dense = dinkelbach_max_density(g, VertexWeights::ones(g.num_vertices()));
    std::cout << "densest subgraph: " << dense.set.size() << " vertices, density " << dense.density << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
