#include "symopt/egraph.h"

#include <gtest/gtest.h>

#include "symopt/axioms.h"

namespace symopt {
namespace {

EClassId add(EGraph &g, const char *text) { return g.add_expr(parse_expr(text)); }

TEST(EGraph, HashConsing) {
  EGraph g;
  EClassId a = add(g, "exp(v_X)");
  EClassId b = add(g, "exp(v_X)");
  EXPECT_EQ(a, b);
  std::size_t n = g.num_nodes();
  add(g, "matmul(exp(v_X), exp(v_X))");
  EXPECT_EQ(g.num_nodes(), n + 1);
}

TEST(EGraph, CongruenceAfterMerge) {
  EGraph g;
  EClassId fa = add(g, "exp(v_A)");
  EClassId fb = add(g, "exp(v_B)");
  EXPECT_NE(g.find(fa), g.find(fb));
  g.merge(add(g, "v_A"), add(g, "v_B"));
  g.rebuild();
  EXPECT_EQ(g.find(fa), g.find(fb));
  // Upward propagation through two levels.
  EClassId ga = add(g, "sqrt(exp(v_A))");
  EXPECT_EQ(g.lookup_expr(parse_expr("sqrt(exp(v_B))")), g.find(ga));
}

TEST(EGraph, LookupMissing) {
  EGraph g;
  add(g, "exp(v_X)");
  EXPECT_FALSE(g.lookup_expr(parse_expr("exp(v_Y)")));
  EXPECT_FALSE(g.lookup_expr(parse_expr("sqrt(v_X)")));
  EXPECT_FALSE(g.lookup_expr(parse_expr("scale(v_X, 1/2)")));
  EXPECT_TRUE(g.lookup_expr(parse_expr("v_X")));
}

TEST(EGraph, CollapsedAnalysis) {
  EGraph g(2, {{"V", 0b10}});
  EXPECT_EQ(g.collapsed(add(g, "sum(v_X, c)")), 0b10u);
  EXPECT_EQ(g.collapsed(add(g, "sum(sum(v_X, c), r)")), 0b11u);
  EXPECT_EQ(g.collapsed(add(g, "matmul(sum(v_X, r), v_W)")), 0b01u);
  EXPECT_EQ(g.collapsed(add(g, "div(v_X, v_V)")), 0u);
  EXPECT_EQ(g.collapsed(add(g, "exp(part(v_V, r, x))")), 0b10u);
}

TEST(EGraph, CommutativityRule) {
  EGraph g;
  EClassId ab = add(g, "add(v_A, v_B)");
  EClassId ba = add(g, "add(v_B, v_A)");
  auto rules = compile_axiom({"add-comm", AxiomGroup::kCompute,
                              "add(?a, ?b) => add(?b, ?a)", {}}, 2);
  auto stats = g.saturate(rules, {});
  EXPECT_EQ(stats.reason, StopReason::kSaturated);
  EXPECT_EQ(g.find(ab), g.find(ba));
}

TEST(EGraph, GuardsBlockUnsoundRewrite) {
  // div(matmul(X, W), V) equals matmul(div(X, V), W) only when V is a
  // column vector.
  auto rules = compile_axiom(
      {"d", AxiomGroup::kCompute,
       "matmul(div(?a, ?v), ?b) <=> div(matmul(?a, ?b), ?v)",
       {"collapsed(?v, c)"}},
      2);
  for (std::uint32_t mask : {0u, 0b10u}) {
    EGraph g(2, {{"V", mask}});
    EClassId l = add(g, "matmul(div(v_X, v_V), v_W)");
    EClassId r = add(g, "div(matmul(v_X, v_W), v_V)");
    g.saturate(rules, {});
    EXPECT_EQ(g.find(l) == g.find(r), mask != 0) << mask;
  }
}

TEST(EGraph, GoalStopsEarly) {
  EGraph g;
  EClassId t = add(g, "comb(part(v_X, r, x), r, x)");
  EClassId x = add(g, "v_X");
  auto rules = build_axioms({});
  auto stats = g.saturate(rules, {}, [&] { return g.find(t) == g.find(x); });
  EXPECT_EQ(stats.reason, StopReason::kGoal);
  EXPECT_EQ(stats.iterations, 1);
}

TEST(EGraph, NodeLimit) {
  EGraph g;
  add(g, "matmul(matmul(matmul(matmul(v_A, v_B), v_C), v_D), v_E)");
  SaturationLimits lim;
  lim.max_nodes = 15;  // 25 nodes at saturation
  auto stats = g.saturate(build_axioms({}), lim);
  EXPECT_EQ(stats.reason, StopReason::kNodeLimit);
}

TEST(EGraph, MatchBindsSymbols) {
  EGraph g;
  EClassId root = add(g, "part(exp(v_X), c, y)");
  auto rule = compile_axiom({"u", AxiomGroup::kParallel,
                             "part(exp(?t), ?d, ?p) => exp(part(?t, ?d, ?p))",
                             {}},
                            2)[0];
  auto subs = g.match(rule.lhs, root);
  ASSERT_EQ(subs.size(), 1u);
  EXPECT_EQ(g.leaf_value(subs[0][1]), 1);
  EXPECT_EQ(g.leaf_value(subs[0][2]), kGridY);
}

TEST(Axioms, CatalogCompiles) {
  auto with = build_axioms({});
  auto without = build_axioms({.rank = 2, .grid_dims = 3, .inverse_rules = false});
  EXPECT_GT(with.size(), without.size());
  EXPECT_GE(without.size(), 60u);
  auto rank3 = build_axioms({.rank = 3});
  EXPECT_GT(rank3.size(), with.size());
  auto compute = build_axioms({.compute_only = true});
  for (const RewriteRule &r : compute) {
    EXPECT_EQ(r.name.find("part"), std::string::npos) << r.name;
  }
}

TEST(Axioms, ParseErrors) {
  auto bad = [](const char *text, std::vector<std::string> guards = {}) {
    return compile_axiom({"bad", AxiomGroup::kCompute, text, guards}, 2);
  };
  EXPECT_THROW(bad("exp(?t) exp(?t)"), RuleParseError);
  EXPECT_THROW(bad("exp(?t) => ?u"), RuleParseError);
  EXPECT_THROW(bad("sum(?t, ?d) <=> ?t"), RuleParseError);
  EXPECT_THROW(bad("exp(?t) => ?t", {"collapsed(?t, q)"}), RuleParseError);
  EXPECT_THROW(bad("frob(?t) => ?t"), RuleParseError);
}

}  // namespace
}  // namespace symopt
