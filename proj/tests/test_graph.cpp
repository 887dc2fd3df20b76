#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cfsp/graph.hpp"
#include "cfsp/graph_io.hpp"
#include "test_support.hpp"

namespace cfsp {
namespace {

using testing::barbell6;

TEST(GraphTest, PathFromEdgeList) {
  std::istringstream in("0 1\n1 2\n");
  auto lg = load_edge_list(in, false);
  EXPECT_EQ(lg.graph.num_vertices(), 3u);
  EXPECT_EQ(lg.graph.num_edges(), 2u);
  EXPECT_EQ(std::vector<double>(lg.graph.degrees().begin(), lg.graph.degrees().end()),
            (std::vector<double>{1, 2, 1}));
}

TEST(GraphTest, DuplicateLinesSum) {
  std::istringstream in("0 1 2.0\n1 0 1.0\n");
  auto lg = load_edge_list(in, true);
  ASSERT_EQ(lg.graph.num_edges(), 1u);
  EXPECT_DOUBLE_EQ(lg.graph.edges()[0].weight, 3.0);
}

TEST(GraphTest, BarbellDegrees) {
  std::istringstream in("# barbell\n1 2\n1 3\n2 3\n3 4\n4 5\n4 6\n5 6\n");
  auto lg = load_edge_list(in, false);
  ASSERT_EQ(lg.graph.num_vertices(), 6u);
  EXPECT_EQ(lg.ids.name(0), "1");
  EXPECT_EQ(std::vector<double>(lg.graph.degrees().begin(), lg.graph.degrees().end()),
            (std::vector<double>{2, 2, 3, 3, 2, 2}));
}

TEST(GraphTest, NumericIdsSortNumerically) {
  std::istringstream in("10 9\n9 100\n");
  auto lg = load_edge_list(in, false);
  EXPECT_EQ(lg.ids.name(0), "9");
  EXPECT_EQ(lg.ids.name(1), "10");
  EXPECT_EQ(lg.ids.name(2), "100");
}

TEST(GraphTest, MixedIdsSortLexicographically) {
  std::istringstream in("b a\nc 10\n");
  auto lg = load_edge_list(in, false);
  EXPECT_EQ(lg.ids.name(0), "10");
  EXPECT_EQ(lg.ids.name(1), "a");
}

TEST(GraphTest, ParseErrorsReportLine) {
  {
    std::istringstream in("0 1\n0 1 2 3\n");
    try {
      load_edge_list(in, true);
      FAIL();
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2u);
    }
  }
  {
    std::istringstream in("0 1\n\n1 2 -1\n");
    try {
      load_edge_list(in, true);
      FAIL();
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 3u);
    }
  }
  {
    std::istringstream in("4 4\n");
    EXPECT_THROW(load_edge_list(in, false), ParseError);
  }
  {
    std::istringstream in("0 1 abc\n");
    EXPECT_THROW(load_edge_list(in, true), ParseError);
  }
}

TEST(GraphTest, ZeroWeightEdgesDropped) {
  Graph g(3, {{0, 1, 0.0}, {1, 2, 1.0}});
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_EQ(g.num_vertices(), 3u);
}

TEST(GraphTest, RejectsInvalidEdges) {
  EXPECT_THROW(Graph(2, {{0, 0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(Graph(2, {{0, 1, -1.0}}), std::invalid_argument);
  EXPECT_THROW(Graph(2, {{0, 2, 1.0}}), std::invalid_argument);
}

TEST(GraphTest, CutAssocVolumeOnBarbell) {
  Graph g = barbell6();
  EXPECT_DOUBLE_EQ(cut_value(g, VertexSet{0, 1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(cut_value(g, VertexSet{0, 1, 2, 3, 4, 5}), 0.0);
  EXPECT_DOUBLE_EQ(cut_value(g, VertexSet{0}), 2.0);
  EXPECT_DOUBLE_EQ(assoc_value(g, VertexSet{0, 1, 2}), 6.0);
  EXPECT_DOUBLE_EQ(assoc_value(g, VertexSet{0, 1, 2, 3, 4, 5}), 14.0);
  EXPECT_DOUBLE_EQ(assoc_value(g, VertexSet{}), 0.0);
  EXPECT_DOUBLE_EQ(volume(VertexWeights::degrees(g), VertexSet{0, 1, 2}), 7.0);
  EXPECT_DOUBLE_EQ(volume(VertexWeights::ones(6), VertexSet{1, 3, 5}), 3.0);
  EXPECT_DOUBLE_EQ(volume(VertexWeights::ones(6), VertexSet{}), 0.0);
}

TEST(GraphTest, SetFunctionIdentities) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g = testing::erdos_renyi(9, 0.4, rng, true);
    auto d = VertexWeights::degrees(g);
    double total_assoc = assoc_value(g, Membership(9, true));
    for (std::uint64_t mask = 0; mask < (1U << 9); ++mask) {
      Membership in = testing::mask_membership(9, mask);
      Membership out(9);
      for (std::size_t i = 0; i < 9; ++i) out[i] = !in[i];
      double cut = cut_value(g, in);
      EXPECT_NEAR(cut, cut_value(g, out), 1e-12);
      EXPECT_NEAR(assoc_value(g, in) + 2 * cut + assoc_value(g, out), total_assoc, 1e-10);
      EXPECT_NEAR(volume(d, in), assoc_value(g, in) + cut, 1e-10);
      double vol = volume(d, in);
      if (vol > 0) { EXPECT_NEAR(assoc_value(g, in) / vol, 1.0 - cut / vol, 1e-12); }
    }
  }
}

TEST(GraphTest, RestrictBall) {
  Graph g = barbell6();
  auto one = restrict_ball(g, VertexSet{0}, 1);
  EXPECT_EQ(one.to_parent, (std::vector<Vertex>{0, 1, 2}));
  EXPECT_EQ(one.graph.num_edges(), 3u);
  auto zero = restrict_ball(g, VertexSet{0}, 0);
  EXPECT_EQ(zero.to_parent, (std::vector<Vertex>{0}));
  EXPECT_EQ(zero.graph.num_edges(), 0u);
  auto all = restrict_ball(g, VertexSet{0}, 10);
  EXPECT_EQ(all.graph.num_vertices(), 6u);
  EXPECT_EQ(all.graph.edges().size(), g.edges().size());
  for (std::size_t e = 0; e < g.num_edges(); ++e) EXPECT_EQ(all.graph.edges()[e], g.edges()[e]);
}

TEST(GraphTest, RestrictBallCountFilterKeepsSeeds) {
  Graph g = barbell6();
  std::vector<std::size_t> counts{0, 5, 1, 5, 5, 5};
  auto sub = restrict_ball(g, VertexSet{0}, 2, 2, std::span<const std::size_t>(counts));
  EXPECT_EQ(sub.to_parent, (std::vector<Vertex>{0, 1, 3}));
  EXPECT_EQ(sub.from_parent[2], kNoVertex);
  EXPECT_THROW(restrict_ball(g, VertexSet{}, 1), std::invalid_argument);
}

TEST(GraphTest, CoauthorWeights) {
  {
    std::vector<std::vector<Vertex>> pubs{{0, 1}};
    Graph g = coauthor_weights(pubs, 2);
    ASSERT_EQ(g.num_edges(), 1u);
    EXPECT_DOUBLE_EQ(g.edges()[0].weight, 0.5);
  }
  {
    std::vector<std::vector<Vertex>> pubs{{0}};
    EXPECT_EQ(coauthor_weights(pubs, 1).num_edges(), 0u);
  }
  {
    std::vector<std::vector<Vertex>> pubs{{0, 1, 2}, {0, 1}};
    Graph g = coauthor_weights(pubs, 3);
    EXPECT_NEAR(g.edges()[0].weight, 5.0 / 6.0, 1e-15);
  }
}

TEST(GraphTest, PublicationsLoader) {
  std::istringstream in("alice bob carol\nbob alice\n# comment\ndave\n");
  auto p = load_publications(in);
  ASSERT_EQ(p.authors.size(), 4u);
  Graph g = coauthor_weights(p.author_lists, p.authors.size());
  Vertex a = p.authors.at("alice"), b = p.authors.at("bob");
  for (const auto& e : g.edges())
    if ((e.u == a && e.v == b) || (e.u == b && e.v == a)) { EXPECT_NEAR(e.weight, 5.0 / 6.0, 1e-15); }
  EXPECT_EQ(p.publication_count[a], 2u);
  EXPECT_EQ(p.publication_count[p.authors.at("dave")], 1u);
}

TEST(GraphTest, SerializeRoundTrip) {
  std::mt19937_64 rng(3);
  Graph g = testing::erdos_renyi(12, 0.5, rng, true);
  auto ids = IdMap::identity(12);
  std::stringstream ss;
  write_edge_list(ss, g, ids);
  auto back = load_edge_list(ss, true);
  ASSERT_EQ(back.graph.num_edges(), g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto& x = g.edges()[e];
    const auto& y = back.graph.edges()[e];
    EXPECT_EQ(back.ids.name(y.u), ids.name(x.u));
    EXPECT_EQ(back.ids.name(y.v), ids.name(x.v));
    EXPECT_EQ(x.weight, y.weight);
  }
}

TEST(GraphTest, VertexWeightFiles) {
  std::istringstream ok("1\n0.5\n2\n");
  auto w = load_vertex_weights(ok, 3);
  EXPECT_DOUBLE_EQ(w.total(), 3.5);
  std::istringstream short_file("1\n");
  EXPECT_THROW(load_vertex_weights(short_file, 3), ParseError);
  std::istringstream negative("1\n-1\n");
  EXPECT_THROW(load_vertex_weights(negative, 2), ParseError);
}

}  // namespace
}  // namespace cfsp
