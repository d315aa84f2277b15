#include "symopt/generator.h"

#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "brute_force.h"
#include "fixtures.h"
#include "symopt/mapping.h"
#include "symopt/serialize.h"

namespace symopt {
namespace {

using testing_fixtures::brute_force_graphs;
using testing_fixtures::exp_matmul_program;
using testing_fixtures::row_split_mapping;
using testing_fixtures::softmax_matmul_program;
using testing_fixtures::softmax_matmul_sgraph;
using testing_fixtures::var;

Program identity_program() {
  Program p;
  p.name = "identity";
  p.tensors = {{"X", {16, 16}, TensorRole::kInput}};
  p.inputs = {0};
  p.outputs = {0};
  return p;
}

// O = matmul(exp X, W).
std::set<std::string> keys_of(const std::vector<SGraph> &graphs) {
  std::set<std::string> out;
  for (const SGraph &g : graphs) out.insert(structure_key(g));
  return out;
}

std::vector<std::string> key_list(const std::vector<SGraph> &graphs) {
  std::vector<std::string> out;
  for (const SGraph &g : graphs) out.push_back(structure_key(g));
  return out;
}

SearchConfig config(int max_ops) {
  SearchConfig c;
  c.max_block_ops = max_ops;
  return c;
}

TEST(Generator, FindsFusedSoftmaxMatmul) {
  Program p = softmax_matmul_program(64, 16);
  GenerateResult r = generate(p, config(9));
  EXPECT_EQ(r.status, GenerateStatus::kComplete);
  SGraph expected = softmax_matmul_sgraph(64, 16);
  const SGraph *found = nullptr;
  for (const SGraph &g : r.graphs) {
    if (structure_key(g) == structure_key(expected)) found = &g;
  }
  ASSERT_NE(found, nullptr);
  // The loop splits the contracted dim of both matmul operands alike.
  EXPECT_TRUE(found->constraints.same(var(*found, "X", 1, kForloop),
                                      var(*found, "W", 0, kForloop)));
  std::set<std::string> mappings;
  for (const auto &m : enumerate_raw_mappings(*found)) {
    mappings.insert(lex_key(*found, m));
  }
  EXPECT_TRUE(mappings.count(lex_key(*found, row_split_mapping(*found))));
}

TEST(Generator, IdentityWithTwoNodes) {
  GenerateResult r = generate(identity_program(), config(2));
  ASSERT_EQ(r.graphs.size(), 1u);
  const auto &nodes = r.graphs[0].block.nodes;
  ASSERT_EQ(nodes.size(), 2u);
  EXPECT_EQ(nodes[0].kind, OpKind::kInputLoader);
  EXPECT_EQ(nodes[1].kind, OpKind::kOutputSaver);
}

TEST(Generator, WhitelistWithoutMatmulFindsNothing) {
  SearchConfig c = config(9);
  c.whitelist = {OpKind::kExp, OpKind::kDiv, OpKind::kSumData, OpKind::kAccum};
  EXPECT_TRUE(generate(softmax_matmul_program(64, 16), c).graphs.empty());
}

TEST(Generator, ForeignOperatorIsPruned) {
  Program p = softmax_matmul_program(64, 16);
  SearchConfig c = config(9);
  c.whitelist = {OpKind::kSilu};
  Generator gen(p, c);
  PartialSGraph partial = gen.initial();
  EXPECT_EQ(gen.try_extend(partial, {OpKind::kSilu, {0}}),
            ExtendOutcome::kNotSubexpr);
  EXPECT_EQ(partial.graph.block.nodes.size(), 2u);
}

TEST(Generator, ExpOfOutputIsNotSubexpr) {
  Program p = softmax_matmul_program(64, 16);
  Generator gen(p, config(12));
  PartialSGraph partial = gen.initial();
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kExp, {0}}), ExtendOutcome::kOk);
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kMatmul, {2, 1}}), ExtendOutcome::kOk);
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kSumData, {2}, -1, 1}),
            ExtendOutcome::kOk);
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kDiv, {3, 4}}), ExtendOutcome::kOk);
  EXPECT_EQ(gen.try_extend(partial, {OpKind::kExp, {5}}),
            ExtendOutcome::kNotSubexpr);
  EXPECT_EQ(gen.try_extend(partial, {OpKind::kExp, {2}}),
            ExtendOutcome::kNotSubexpr);
  EXPECT_EQ(gen.try_extend(partial, {OpKind::kSumData, {2}, -1, 0}),
            ExtendOutcome::kNotSubexpr);
}

TEST(Generator, MatmulTiesContractedDims) {
  Program p = softmax_matmul_program(64, 16);
  Generator gen(p, config(9));
  PartialSGraph partial = gen.initial();
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kExp, {0}}), ExtendOutcome::kOk);
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kMatmul, {2, 1}}), ExtendOutcome::kOk);
  const ConstraintStore &s = partial.graph.constraints;
  const SGraph &g = partial.graph;
  EXPECT_TRUE(s.same(var(g, "X", 1, kForloop), var(g, "W", 0, kForloop)));
  EXPECT_TRUE(s.same(var(g, "X", 1, kGridX), var(g, "W", 0, kGridX)));
  EXPECT_FALSE(s.same(var(g, "X", 0, kGridX), var(g, "W", 1, kGridX)));
}

TEST(Generator, ShapeCheckPrecedesExpressionCheck) {
  Program p = softmax_matmul_program(64, 16);
  Generator gen(p, config(9));
  PartialSGraph partial = gen.initial();
  // W is 64x16 and X 64x64: W @ X does not type-check.
  EXPECT_EQ(gen.try_extend(partial, {OpKind::kMatmul, {1, 0}}),
            ExtendOutcome::kDimMismatch);
  EXPECT_EQ(gen.try_extend(partial, {OpKind::kMatmul, {0, 1}}),
            ExtendOutcome::kNotSubexpr);
}

TEST(Generator, StructuralRules) {
  Program p = softmax_matmul_program(64, 16);
  Generator gen(p, config(12));
  PartialSGraph partial = gen.initial();
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kExp, {0}}), ExtendOutcome::kOk);
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kSumData, {2}, -1, 1}),
            ExtendOutcome::kOk);
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kAccum, {3}}), ExtendOutcome::kOk);
  EXPECT_EQ(gen.try_extend(partial, {OpKind::kAccum, {4}}),
            ExtendOutcome::kInvalid);
  // Loop-body and epilogue operands cannot be mixed.
  EXPECT_EQ(gen.try_extend(partial, {OpKind::kDiv, {2, 4}}),
            ExtendOutcome::kInvalid);
  EXPECT_EQ(gen.try_extend(partial, {OpKind::kExp, {9}}), ExtendOutcome::kInvalid);
  EXPECT_EQ(gen.try_extend(partial, {OpKind::kOutputSaver, {4}, 2}),
            ExtendOutcome::kInvalid);
}

TEST(Generator, CloseRejectsDeadNodesAndWrongOutputs) {
  Program p = softmax_matmul_program(64, 16);
  Generator gen(p, config(12));
  PartialSGraph partial = gen.initial();
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kExp, {0}}), ExtendOutcome::kOk);
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kMatmul, {2, 1}}), ExtendOutcome::kOk);
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kSumData, {2}, -1, 1}),
            ExtendOutcome::kOk);
  EXPECT_FALSE(gen.try_close(partial, {3}));
  ASSERT_EQ(gen.try_extend(partial, {OpKind::kDiv, {3, 4}}), ExtendOutcome::kOk);
  EXPECT_FALSE(gen.try_close(partial, {4}));
  auto g = gen.try_close(partial, {5});
  ASSERT_TRUE(g);
  EXPECT_EQ(g->block.nodes.back().kind, OpKind::kOutputSaver);
  EXPECT_TRUE(structurally_valid(*g));
}

TEST(Generator, Deterministic) {
  Program p = softmax_matmul_program(64, 16);
  GenerateResult a = generate(p, config(9));
  GenerateResult b = generate(p, config(9));
  EXPECT_EQ(key_list(a.graphs), key_list(b.graphs));
  EXPECT_EQ(a.stats.explored, b.stats.explored);
}

TEST(Generator, PruningKeepsResultsAndSavesWork) {
  Program p = softmax_matmul_program(64, 16);
  GenerateResult full = generate(p, config(7));
  SearchConfig no_dims = config(7);
  no_dims.prune_dims = false;
  SearchConfig no_expr = config(7);
  no_expr.prune_expr = false;
  GenerateResult a = generate(p, no_dims);
  GenerateResult b = generate(p, no_expr);
  EXPECT_FALSE(full.graphs.empty());
  EXPECT_EQ(keys_of(a.graphs), keys_of(full.graphs));
  EXPECT_EQ(keys_of(b.graphs), keys_of(full.graphs));
  EXPECT_GE(a.stats.explored, full.stats.explored);
  EXPECT_GT(b.stats.explored, full.stats.explored);
  EXPECT_GT(a.stats.pruned_expr, full.stats.pruned_expr);
  EXPECT_EQ(a.stats.pruned_dim, 0u);
  EXPECT_EQ(b.stats.pruned_expr, 0u);
}

TEST(Generator, NodeBudget) {
  SearchConfig c = config(9);
  c.node_budget = 100;
  GenerateResult r = generate(softmax_matmul_program(64, 16), c);
  EXPECT_EQ(r.status, GenerateStatus::kNodeBudget);
  EXPECT_EQ(r.stats.explored, 100u);
}

struct BruteCase {
  const char *name;
  std::function<Program()> program;
  int max_ops;
};

class GeneratorBruteForce : public ::testing::TestWithParam<BruteCase> {};

TEST_P(GeneratorBruteForce, SameGraphs) {
  const BruteCase &c = GetParam();
  Program p = c.program();
  GenerateResult r = generate(p, config(c.max_ops));
  ASSERT_EQ(r.status, GenerateStatus::kComplete);
  std::set<std::string> want = brute_force_graphs(p, c.max_ops);
  EXPECT_EQ(keys_of(r.graphs), want);
  // No structure is reported twice.
  EXPECT_EQ(keys_of(r.graphs).size(), r.graphs.size());
}

INSTANTIATE_TEST_SUITE_P(
    Small, GeneratorBruteForce,
    ::testing::Values(
        BruteCase{"softmax_matmul_4", [] { return softmax_matmul_program(64, 16); }, 4},
        BruteCase{"softmax_matmul_5", [] { return softmax_matmul_program(64, 16); }, 5},
        BruteCase{"softmax_matmul_6", [] { return softmax_matmul_program(64, 16); }, 6},
        BruteCase{"identity_3", identity_program, 3},
        BruteCase{"identity_5", identity_program, 5},
        BruteCase{"exp_matmul_5", exp_matmul_program, 5},
        BruteCase{"exp_matmul_6", exp_matmul_program, 6}),
    [](const auto &info) { return std::string(info.param.name); });

TEST(GeneratorBruteForceOracle, FindsKnownGraphs) {
  // exp then matmul, with and without a loop over the contracted dim.
  EXPECT_EQ(brute_force_graphs(exp_matmul_program(), 5).size(), 1u);
  EXPECT_EQ(brute_force_graphs(exp_matmul_program(), 6).size(), 2u);
  EXPECT_EQ(brute_force_graphs(identity_program(), 2).size(), 1u);
}

}  // namespace
}  // namespace symopt
