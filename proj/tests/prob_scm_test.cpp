#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "causal/prob_table.hpp"
#include "causal/scm.hpp"
#include "test_support.hpp"

namespace causal {
namespace {

TEST(ProbTable, EncodeIsMixedRadixFirstVariableMostSignificant) {
  ProbTable t = ProbTable::raw({"X", "Y"}, {2, 3}, std::vector<double>(6, 1.0 / 6));
  EXPECT_EQ(t.encode({1, 2}), 5u);
  EXPECT_EQ(t.encode({0, 1}), 1u);
  EXPECT_EQ(t.decode(5), (std::vector<int>{1, 2}));
  EXPECT_EQ(t.axis_of("Y"), 1u);
  EXPECT_EQ(t.size_of("Y"), 3);
}

TEST(ProbTable, BuildValidatesMassAndShape) {
  EXPECT_THROW(ProbTable::build({"X"}, {2}, {0.7, 0.7}), Error);
  EXPECT_THROW(ProbTable::build({"X"}, {2}, {1.2, -0.2}), Error);
  EXPECT_THROW(ProbTable::build({"X"}, {2}, {0.5, 0.25, 0.25}), Error);
  EXPECT_THROW(ProbTable::build({"X", "X"}, {2, 2}, std::vector<double>(4, 0.25)), Error);
  EXPECT_NO_THROW(ProbTable::build({"X"}, {2}, {0.3, 0.7}));
}

TEST(ProbTable, MassAndMarginalAgreeWithHandTotals) {
  // p(X,Y) with X most significant: rows X=0: .1 .2 | X=1: .3 .4
  ProbTable t = ProbTable::build({"X", "Y"}, {2, 2}, {0.1, 0.2, 0.3, 0.4});
  EXPECT_DOUBLE_EQ(t.prob({{"X", 1}, {"Y", 0}}), 0.3);
  EXPECT_DOUBLE_EQ(t.mass({{"X", 1}}), 0.7);
  EXPECT_DOUBLE_EQ(t.mass({{"Y", 0}}), 0.4);
  EXPECT_DOUBLE_EQ(t.mass({}), 1.0);
  ProbTable my = t.marginal({"Y"});
  EXPECT_DOUBLE_EQ(my.cell(0), 0.4);
  EXPECT_DOUBLE_EQ(my.cell(1), 0.6);
  ProbTable swapped = t.marginal({"Y", "X"});
  EXPECT_EQ(swapped.names(), (std::vector<std::string>{"Y", "X"}));
  EXPECT_DOUBLE_EQ(swapped.prob({{"Y", 0}, {"X", 1}}), 0.3);
}

TEST(ProbTable, ConditionalMeanMatchesHandArithmetic) {
  ProbTable t = ProbTable::build({"X", "Y"}, {2, 2}, {0.1, 0.2, 0.3, 0.4});
  EXPECT_NEAR(t.conditional_mean("Y", {{"X", 0}}), 0.2 / 0.3, 1e-15);
  EXPECT_NEAR(t.conditional_mean("Y", {}), 0.6, 1e-15);
  ProbTable z = ProbTable::raw({"X", "Y"}, {2, 2}, {0.0, 0.0, 0.5, 0.5});
  try {
    z.conditional_mean("Y", {{"X", 0}});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::positivity);
  }
}

TEST(ProbTable, MutualInformationSeparatesDependenceFromIndependence) {
  ProbTable indep = ProbTable::build({"X", "Y"}, {2, 2}, {0.06, 0.14, 0.24, 0.56});
  EXPECT_NEAR(conditional_mutual_information(indep, "X", "Y", {}), 0.0, 1e-12);
  ProbTable dep = ProbTable::build({"X", "Y"}, {2, 2}, {0.4, 0.1, 0.1, 0.4});
  EXPECT_GT(conditional_mutual_information(dep, "X", "Y", {}), 0.1);
  // chain X -> M -> Z: X and Z dependent marginally, independent given M
  ProbTable chain = StructuralModel::build({{"X", 2, {}, {0.5, 0.5}},
                                            {"M", 2, {"X"}, {0.9, 0.1, 0.2, 0.8}},
                                            {"Z", 2, {"M"}, {0.8, 0.2, 0.3, 0.7}}},
                                           {"X", "M", "Z"})
                        .exact_joint();
  EXPECT_GT(conditional_mutual_information(chain, "X", "Z", {}), 0.01);
  EXPECT_NEAR(conditional_mutual_information(chain, "X", "Z", {"M"}), 0.0, 1e-12);
}

TEST(ProbTable, TvDistanceIsZeroOnlyAtEquality) {
  ProbTable a = ProbTable::build({"X"}, {2}, {0.3, 0.7});
  ProbTable b = ProbTable::build({"X"}, {2}, {0.5, 0.5});
  EXPECT_DOUBLE_EQ(tv_distance(a, a), 0.0);
  EXPECT_NEAR(tv_distance(a, b), 0.2, 1e-15);
}

TEST(Scm, BuildValidatesMechanisms) {
  EXPECT_THROW(StructuralModel::build({{"A", 2, {}, {0.6, 0.6}}}, {"A"}), Error);
  EXPECT_THROW(StructuralModel::build({{"A", 2, {"B"}, {0.5, 0.5, 0.5, 0.5}}}, {"A"}), Error);
  EXPECT_THROW(StructuralModel::build({{"A", 2, {}, {0.5, 0.5}}, {"A", 2, {}, {0.5, 0.5}}},
                                      {"A"}),
               Error);
  EXPECT_THROW(StructuralModel::build({{"A", 2, {}, {0.5, 0.5}}}, {"A", "B"}), Error);
  try {
    StructuralModel::build({{"A", 2, {"B"}, {0.5, 0.5, 0.5, 0.5}},
                            {"B", 2, {"A"}, {0.5, 0.5, 0.5, 0.5}}},
                           {"A", "B"});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::cycle_detected);
  }
}

TEST(Scm, GraphReflectsParentsAndObservationMask) {
  StructuralModel m = test::make_s2();
  const Graph& g = m.graph();
  EXPECT_FALSE(g.is_observed("C"));
  EXPECT_TRUE(g.is_observed("C_star"));
  EXPECT_TRUE(g.has_directed_edge("C", "A"));
  EXPECT_TRUE(g.has_directed_edge("C", "C_star"));
  EXPECT_TRUE(g.has_directed_edge("A", "Y"));
  EXPECT_FALSE(g.has_directed_edge("C_star", "Y"));
  EXPECT_EQ(m.domain_of("Y"), 2);
}

TEST(Scm, ExactJointMatchesFactoredProbabilities) {
  ProbTable j = test::make_s1().exact_joint();
  EXPECT_NEAR(j.total_mass(), 1.0, 1e-12);
  // p(C=0, A=0, Y=0) = .4 * .8 * .8
  EXPECT_NEAR(j.prob({{"C", 0}, {"A", 0}, {"Y", 0}}), 0.256, 1e-15);
  EXPECT_NEAR(j.prob({{"C", 1}, {"A", 1}, {"Y", 1}}), 0.6 * 0.8 * 0.9, 1e-15);
  EXPECT_NEAR(j.mass({{"C", 1}}), 0.6, 1e-15);
}

TEST(Scm, ObservedJointMarginalizesLatents) {
  StructuralModel m = test::make_s2();
  ProbTable j = m.observed_joint();
  EXPECT_EQ(j.names(), (std::vector<std::string>{"A", "C_star", "Y"}));
  EXPECT_NEAR(j.total_mass(), 1.0, 1e-12);
  // p(A=1) = .5*.1 + .5*.9
  EXPECT_NEAR(j.mass({{"A", 1}}), 0.5, 1e-12);
}

TEST(Scm, InterveneReplacesMechanismWithPointMass) {
  StructuralModel cut = test::make_s1().intervene({{"A", 1}});
  EXPECT_TRUE(cut.graph().parents_of("A").empty());
  EXPECT_NEAR(cut.exact_joint().mass({{"A", 1}}), 1.0, 1e-12);
  EXPECT_THROW(test::make_s1().intervene({{"A", 2}}), Error);
  EXPECT_THROW(test::make_s1().intervene({{"missing", 0}}), Error);
}

TEST(Scm, HandComputedInterventionalMeans) {
  StructuralModel s1 = test::make_s1();
  EXPECT_NEAR(true_counterfactual_mean(s1, {{"A", 1}}, "Y"), 0.74, 1e-12);
  EXPECT_NEAR(true_counterfactual_mean(s1, {{"A", 0}}, "Y"), 0.44, 1e-12);
  StructuralModel s1p = test::make_s1_prime();
  EXPECT_NEAR(true_counterfactual_mean(s1p, {{"A", 1}}, "Y"), 0.58, 1e-12);
  EXPECT_NEAR(true_counterfactual_mean(s1p, {{"A", 0}}, "Y"), 0.28, 1e-12);
  StructuralModel s2 = test::make_s2();
  EXPECT_NEAR(true_counterfactual_mean(s2, {{"A", 1}}, "Y"), 0.6, 1e-12);
  EXPECT_NEAR(true_counterfactual_mean(s2, {{"A", 0}}, "Y"), 0.4, 1e-12);
  // the two-phase null model is flat across regimes
  StructuralModel s4 = test::make_s4();
  for (int a0 = 0; a0 < 2; ++a0)
    for (int a1 = 0; a1 < 2; ++a1)
      EXPECT_NEAR(true_counterfactual_mean(s4, {{"A_0", a0}, {"A_1", a1}}, "Y"), 0.475, 1e-12);
}

TEST(Scm, WithMechanismRewiresOneVariable) {
  StructuralModel m = test::make_s1().with_mechanism("A", {}, {0.5, 0.5});
  EXPECT_TRUE(m.graph().parents_of("A").empty());
  EXPECT_NEAR(m.exact_joint().mass({{"A", 1}}), 0.5, 1e-12);
  EXPECT_THROW(test::make_s1().with_mechanism("missing", {}, {1.0}), Error);
}

TEST(Scm, SamplingIsDeterministicInTheSeed) {
  StructuralModel m = test::make_s1();
  Dataset a = m.sample(200, 7);
  Dataset b = m.sample(200, 7);
  Dataset c = m.sample(200, 8);
  std::ostringstream sa, sb, sc;
  write_csv(a, sa);
  write_csv(b, sb);
  write_csv(c, sc);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Scm, SampleExposesOnlyObservedColumnsInDeclarationOrder) {
  Dataset d = test::make_s2().sample(50, 1, "src");
  EXPECT_EQ(d.column_order(), (std::vector<std::string>{"A", "C_star", "Y"}));
  EXPECT_FALSE(d.has_column("C"));
  EXPECT_EQ(d.population(), "src");
  EXPECT_EQ(d.n(), 50u);
}

TEST(Scm, SampleFrequenciesTrackTheExactJoint) {
  StructuralModel m = test::make_s1();
  Dataset d = m.sample(20000, 11);
  const std::vector<double>& c = d.column("C");
  double mean = 0.0;
  for (double v : c) mean += v;
  mean /= static_cast<double>(c.size());
  EXPECT_NEAR(mean, 0.6, 0.02);
}

TEST(Scm, StateSpaceCapGuardsEnumeration) {
  std::vector<Mechanism> ms;
  std::set<std::string> obs;
  for (int i = 0; i < 21; ++i) {
    std::string name = "V" + std::to_string(i);
    ms.push_back({name, 2, {}, {0.5, 0.5}});
    obs.insert(name);
  }
  StructuralModel m = StructuralModel::build(std::move(ms), std::move(obs));
  try {
    m.exact_joint();
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::state_space_too_large);
  }
}

}  // namespace
}  // namespace causal
