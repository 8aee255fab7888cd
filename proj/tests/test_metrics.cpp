#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "onco/metrics.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace onco;
using metrics::Digraph;

namespace {

Digraph graph(std::size_t n, std::initializer_list<std::pair<std::size_t, std::size_t>> edges) {
  Digraph g;
  for (std::size_t i = 0; i < n; ++i) g.names.push_back("N" + std::to_string(i));
  g.adj.resize(n);
  for (auto [a, b] : edges) g.add_edge(a, b);
  return g;
}

void expect_matches_oracle(const Digraph& g, std::size_t cap) {
  auto pm = metrics::path_metrics(g, cap);
  auto c = oracle::path_counts(g, cap);
  EXPECT_EQ(pm.longestPath, c.longest);
  EXPECT_EQ(pm.journeyCount, c.journeys);
  EXPECT_EQ(pm.pathCount, c.paths);
  EXPECT_EQ(pm.totalNodes, c.nodes);
}

}  // namespace

TEST(PathMetrics, ThreeCycle) {
  auto pm = metrics::path_metrics(graph(3, {{0, 1}, {1, 2}, {2, 0}}));
  EXPECT_EQ(pm.longestPath, 3u);
  EXPECT_EQ(pm.journeyCount, 6u);
  EXPECT_EQ(pm.pathCount, 6u);
  EXPECT_DOUBLE_EQ(pm.avgPathsPerJourney(), 1.0);
  EXPECT_DOUBLE_EQ(pm.avgNodesPerPath(), 2.5);
}

TEST(PathMetrics, Trivial) {
  auto empty = metrics::path_metrics(graph(0, {}));
  EXPECT_EQ(empty.pathCount, 0u);
  EXPECT_EQ(empty.avgPathsPerJourney(), 0.0);
  EXPECT_EQ(empty.avgNodesPerPath(), 0.0);
  auto isolated = metrics::path_metrics(graph(4, {}));
  EXPECT_EQ(isolated.journeyCount, 0u);
  auto edge = metrics::path_metrics(graph(2, {{0, 1}}));
  EXPECT_EQ(edge.longestPath, 2u);
  EXPECT_EQ(edge.journeyCount, 1u);
  EXPECT_EQ(edge.pathCount, 1u);
  EXPECT_DOUBLE_EQ(edge.avgNodesPerPath(), 2.0);
}

TEST(PathMetrics, Diamond) {
  auto m = load_model_file(std::string(ONCO_FIXTURES) + "/diamond.json");
  auto pm = metrics::path_metrics(m);
  // Journeys: P→V, P→E, P→S, V→S, E→S; P→S has two paths.
  EXPECT_EQ(pm.journeyCount, 5u);
  EXPECT_EQ(pm.pathCount, 6u);
  EXPECT_EQ(pm.longestPath, 3u);
}

TEST(PathMetrics, InheritedEdges) {
  auto m = load_model_file(std::string(ONCO_FIXTURES) + "/cabio_fragment.json");
  auto g = metrics::association_graph(m);
  std::size_t snp_cyto = 0, chromosome = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.names[i] == "SNPCytogeneticLocation") snp_cyto = i;
    if (g.names[i] == "Chromosome") chromosome = i;
  }
  EXPECT_EQ(g.adj[snp_cyto], std::vector<std::size_t>{chromosome});
  expect_matches_oracle(g, 16);
}

TEST(PathMetrics, MatchesOracleOnRandomGraphs) {
  gen::Rng rng(71);
  for (int trial = 0; trial < 500; ++trial) {
    auto g = gen::random_digraph(rng, rng.between(0, 12), 0.05 + 0.25 * double(rng.below(100)) / 100.0);
    std::size_t cap = rng.chance(0.5) ? 16 : rng.between(2, 6);
    expect_matches_oracle(g, cap);
    auto pm = metrics::path_metrics(g, cap);
    if (pm.journeyCount) {
      EXPECT_GE(pm.pathCount, pm.journeyCount);
      EXPECT_LE(pm.avgNodesPerPath(), double(pm.longestPath));
    }
  }
}

TEST(PathMetrics, MonotoneInEdges) {
  gen::Rng rng(72);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = rng.between(2, 9);
    auto g = gen::random_digraph(rng, n, 0.2);
    auto before = metrics::path_metrics(g);
    auto h = g;
    h.add_edge(rng.below(n), rng.below(n));
    std::size_t a = rng.below(n), b = rng.below(n);
    if (a != b) h.add_edge(a, b);
    auto after = metrics::path_metrics(h);
    EXPECT_GE(after.pathCount, before.pathCount);
    EXPECT_GE(after.journeyCount, before.journeyCount);
    EXPECT_GE(after.longestPath, before.longestPath);
  }
}

TEST(PathMetrics, Output) {
  auto pm = metrics::path_metrics(graph(3, {{0, 1}, {1, 2}, {2, 0}}));
  EXPECT_EQ(metrics::to_csv(pm),
            "maxNodes,longestPath,journeyCount,pathCount,avgPathsPerJourney,avgNodesPerPath\n"
            "16,3,6,6,1.000000,2.500000\n");
  EXPECT_NE(metrics::to_table(pm).find("avgNodesPerPath     2.500"), std::string::npos);
}

TEST(StageTimings, ReportShape) {
  auto kb = query::KnowledgeBase::build(load_model_file(std::string(ONCO_FIXTURES) + "/diamond.json"),
                                        load_thesaurus_file(std::string(ONCO_FIXTURES) + "/diamond_thesaurus.txt"));
  auto report = metrics::stage_timings(
      {"Patient and hasAssociation some Encounter", "Patient and hasAssociation some Biospecimen", "Nothing_Here"}, kb,
      3);
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_TRUE(report.rows[0].ok);
  EXPECT_EQ(report.rows[0].pathLength, 1u);
  EXPECT_EQ(report.rows[1].pathLength, 2u);
  EXPECT_FALSE(report.rows[2].ok);
  EXPECT_EQ(report.groups.size(), 2u);
  for (const auto& row : report.rows)
    if (row.ok)
      for (double v : row.meanUs) EXPECT_GE(v, 0.0);

  auto csv = metrics::to_csv(report);
  EXPECT_EQ(csv.rfind("query,stage,mean_us,pathLength\n", 0), 0u);
  std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
  EXPECT_EQ(lines, 1u + 2u * 8u);
  for (auto s : query::kStages) EXPECT_NE(csv.find("," + std::string(query::stage_name(s)) + ","), std::string::npos);
}
