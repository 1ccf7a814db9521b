#include "causal/discovery.hpp"

#include <gtest/gtest.h>

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causal/scm.hpp"
#include "test_support.hpp"

namespace causal {
namespace {

std::vector<std::string> node_names(const Graph& g) {
  std::vector<std::string> out;
  for (const auto& v : g.variables()) out.push_back(v.name);
  return out;
}

using EdgeSet = std::set<std::pair<std::string, std::string>>;

TEST(CpdagOf, ChainAndForkShareAPatternCollidersDoNot) {
  Cpdag chain = cpdag_of(test::chain_graph());
  Cpdag fork = cpdag_of(test::fork_graph());
  EXPECT_EQ(chain, fork);
  EXPECT_TRUE(chain.directed.empty());
  EXPECT_EQ(chain.undirected, (EdgeSet{{"A", "Z"}, {"Y", "Z"}}));
  Graph collider = Graph::build({{"A"}, {"Z"}, {"Y"}},
                                {directed("A", "Z"), directed("Y", "Z")});
  Cpdag cp = cpdag_of(collider);
  EXPECT_EQ(cp.directed, (EdgeSet{{"A", "Z"}, {"Y", "Z"}}));
  EXPECT_TRUE(cp.undirected.empty());
  EXPECT_NE(chain, cp);
}

TEST(CpdagOf, DownstreamEdgeOfACalliderIsForced) {
  // A -> Z <- Y plus Z -> Zd: the tail edge cannot point back into the collider
  Cpdag cp = cpdag_of(test::collider_graph());
  EXPECT_EQ(cp.directed, (EdgeSet{{"A", "Z"}, {"Y", "Z"}, {"Z", "Zd"}}));
  EXPECT_TRUE(cp.undirected.empty());
}

TEST(CpdagOf, LargerExampleMatchesTheHandDerivedPattern) {
  Cpdag cp = cpdag_of(test::fig4_graph());
  EXPECT_EQ(cp.directed, (EdgeSet{{"B", "E"}, {"C", "F"}, {"D", "E"}, {"E", "F"}}));
  EXPECT_EQ(cp.undirected, (EdgeSet{{"A", "B"}, {"A", "C"}, {"C", "D"}}));
}

TEST(CpdagOf, PropagationClosesOverTheSecondRule) {
  // collider at C forces C -> D, then A - D must follow A -> C -> D
  Graph g = Graph::build({{"A"}, {"B"}, {"C"}, {"D"}},
                         {directed("A", "C"), directed("B", "C"), directed("A", "D"),
                          directed("C", "D")});
  Cpdag cp = cpdag_of(g);
  EXPECT_EQ(cp.directed, (EdgeSet{{"A", "C"}, {"A", "D"}, {"B", "C"}, {"C", "D"}}));
  EXPECT_TRUE(cp.undirected.empty());
}

TEST(CpdagOf, PropagationClosesOverTheThirdRule) {
  Graph g = Graph::build({{"A"}, {"B"}, {"C"}, {"D"}},
                         {directed("C", "B"), directed("D", "B"), directed("A", "B"),
                          directed("A", "C"), directed("A", "D")});
  Cpdag cp = cpdag_of(g);
  EXPECT_EQ(cp.directed, (EdgeSet{{"A", "B"}, {"C", "B"}, {"D", "B"}}));
  EXPECT_EQ(cp.undirected, (EdgeSet{{"A", "C"}, {"A", "D"}}));
}

TEST(CpdagOf, RejectsLatentStructure) {
  try {
    cpdag_of(test::bowarc_graph());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsupported_graph);
  }
  EXPECT_THROW(cpdag_of(test::fig7_graph()), Error);
}

TEST(GraphCi, RejectsLatentStructure) {
  EXPECT_THROW(GraphCi(test::bowarc_graph()), Error);
  EXPECT_THROW(GraphCi(test::fig7_graph()), Error);
}

TEST(PcLearn, OracleRunsReproduceThePattern) {
  for (const Graph& g : {test::chain_graph(), test::fork_graph(), test::collider_graph(),
                         test::fig4_graph()}) {
    GraphCi ci(g);
    PcResult res = pc_learn(ci, node_names(g));
    EXPECT_EQ(res.cpdag, cpdag_of(g));
    EXPECT_FALSE(res.low_power);
    EXPECT_FALSE(res.decisions.empty());
  }
}

TEST(PcLearn, RecordsTheSeparatingDecision) {
  GraphCi ci(test::fork_graph());
  PcResult res = pc_learn(ci, {"A", "Y", "Z"});
  bool found = false;
  for (const auto& d : res.decisions)
    if (((d.x == "A" && d.y == "Y") || (d.x == "Y" && d.y == "A")) &&
        d.z == std::set<std::string>{"Z"} && d.independent)
      found = true;
  EXPECT_TRUE(found);
}

TEST(PcLearn, DeterministicAcrossRuns) {
  Graph g = test::fig4_graph();
  GraphCi a(g), b(g);
  PcResult ra = pc_learn(a, node_names(g));
  PcResult rb = pc_learn(b, node_names(g));
  EXPECT_EQ(ra.cpdag, rb.cpdag);
  ASSERT_EQ(ra.decisions.size(), rb.decisions.size());
  for (std::size_t i = 0; i < ra.decisions.size(); ++i) {
    EXPECT_EQ(ra.decisions[i].x, rb.decisions[i].x);
    EXPECT_EQ(ra.decisions[i].y, rb.decisions[i].y);
    EXPECT_EQ(ra.decisions[i].z, rb.decisions[i].z);
    EXPECT_EQ(ra.decisions[i].independent, rb.decisions[i].independent);
  }
}

TEST(PcLearn, OracleMatchesThePatternOnRandomDags) {
  Rng rng = make_rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    int n = 4 + static_cast<int>(uniform_below(rng, 4));  // 4..7 nodes
    Graph g = test::random_dag(rng, n, 0.35);
    GraphCi ci(g);
    PcResult res = pc_learn(ci, node_names(g));
    EXPECT_EQ(res.cpdag, cpdag_of(g)) << "trial " << trial;
    ++checked;
  }
  EXPECT_EQ(checked, 40);
}

TEST(PcLearn, RejectsDuplicateNodes) {
  GraphCi ci(test::chain_graph());
  EXPECT_THROW(pc_learn(ci, {"A", "A", "Z"}), Error);
}

StructuralModel collider_scm() {
  // p(Z=1 | X, Y) = 0.1 + 0.35 X + 0.45 Y
  std::vector<double> cpt;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double p = 0.1 + 0.35 * x + 0.45 * y;
      cpt.push_back(1.0 - p);
      cpt.push_back(p);
    }
  return StructuralModel::build({{"X", 2, {}, {0.5, 0.5}},
                                 {"Y", 2, {}, {0.5, 0.5}},
                                 {"Z", 2, {"X", "Y"}, cpt}},
                                {"X", "Y", "Z"});
}

TEST(DataCi, SeparatesMarginalFromConditionalDependence) {
  Dataset d = collider_scm().sample(20000, 3);
  DataCi ci(d);
  EXPECT_TRUE(ci.independent("X", "Y", {}));
  EXPECT_FALSE(ci.independent("X", "Y", {"Z"}));
  EXPECT_FALSE(ci.independent("X", "Z", {}));
  const CiDecision& last = ci.log().back();
  EXPECT_EQ(last.x, "X");
  EXPECT_EQ(last.y, "Z");
  EXPECT_LT(last.p_value, 0.05);
}

TEST(DataCi, LearnsTheColliderFromData) {
  Dataset d = collider_scm().sample(20000, 3);
  DataCi ci(d);
  PcResult res = pc_learn(ci, {"X", "Y", "Z"});
  EXPECT_EQ(res.cpdag.directed, (EdgeSet{{"X", "Z"}, {"Y", "Z"}}));
  EXPECT_TRUE(res.cpdag.undirected.empty());
}

TEST(DataCi, FlagsLowPowerQueries) {
  std::vector<double> x, y, z;
  Rng rng = make_rng(8);
  for (int i = 0; i < 24; ++i) {
    x.push_back(static_cast<double>(uniform_below(rng, 2)));
    y.push_back(static_cast<double>(uniform_below(rng, 2)));
    z.push_back(i % 4);
  }
  Schema s{{"X", categorical(2)}, {"Y", categorical(2)}, {"Z", categorical(4)}};
  Dataset d = Dataset::build(s, {{"X", x}, {"Y", y}, {"Z", z}});
  DataCi ci(d);
  ci.independent("X", "Y", {"Z"});
  EXPECT_TRUE(ci.log().back().low_power);
}

TEST(DataCi, DegenerateColumnsGiveVacuousIndependence) {
  Schema s{{"X", categorical(1)}, {"Y", categorical(2)}};
  Dataset d = Dataset::build(s, {{"X", {0, 0, 0, 0}}, {"Y", {0, 1, 0, 1}}});
  DataCi ci(d);
  EXPECT_TRUE(ci.independent("X", "Y", {}));
  EXPECT_DOUBLE_EQ(ci.log().back().p_value, 1.0);
}

TEST(DataCi, ValidatesAlphaAndColumnTypes) {
  Dataset d = collider_scm().sample(100, 1);
  EXPECT_THROW(DataCi(d, 0.0), Error);
  EXPECT_THROW(DataCi(d, 1.0), Error);
  Schema s{{"X", categorical(2)}, {"W", continuous()}};
  Dataset dc = Dataset::build(s, {{"X", {0, 1}}, {"W", {0.5, 1.5}}});
  DataCi ci(dc);
  EXPECT_THROW(ci.independent("X", "W", {}), Error);
}

}  // namespace
}  // namespace causal
