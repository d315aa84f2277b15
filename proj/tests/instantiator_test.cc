#include "symopt/instantiator.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "fixtures.h"

namespace symopt {
namespace {

using testing_fixtures::mapping_with;
using testing_fixtures::row_split_mapping;
using testing_fixtures::softmax_matmul_program;
using testing_fixtures::softmax_matmul_sgraph;
using testing_fixtures::var;

// 64 row blocks of a 4096x4096 X, 64 loop steps over its columns.
const ParamValues kTiles64 = {64, 1, 1, 64};

TEST(Smem, FusedSoftmaxMatmulTiles) {
  SGraph g = softmax_matmul_sgraph(4096, 128);
  ConcreteGraph c = instantiate(g, row_split_mapping(g), kTiles64);
  using Shape = std::vector<std::int64_t>;
  std::vector<Shape> want = {{64, 64},  {64, 128}, {64, 64},
                             {64, 1},   {64, 1},   {64, 128},
                             {64, 128}, {64, 128}, {64, 128}};
  EXPECT_EQ(c.shapes, want);
  // X tile, W tile, exp, row sum, its accumulator, matmul, its accumulator,
  // div, output tile.
  std::int64_t elems = 4096 + 8192 + 4096 + 64 + 64 + 8192 + 8192 + 8192 + 8192;
  EXPECT_EQ(smem_usage(c), elems * 2);
  EXPECT_EQ(smem_usage(c), 98560);
  EXPECT_LE(smem_usage(c), kDefaultSmemBudget);
}

TEST(Smem, SmallerSplitsUseMoreMemory) {
  SGraph g = softmax_matmul_sgraph(4096, 128);
  MappingAssignment m = row_split_mapping(g);
  std::int64_t base = smem_usage(g, m, kTiles64);
  EXPECT_GT(smem_usage(g, m, {64, 1, 1, 32}), base);
  EXPECT_GT(smem_usage(g, m, {32, 1, 1, 64}), base);
  EXPECT_LT(smem_usage(g, m, {64, 1, 1, 128}), base);
  EXPECT_GT(smem_usage(g, m, {1, 1, 1, 1}), kDefaultSmemBudget);
}

TEST(ParamSpace, RespectsBudgetAndOrder) {
  SGraph g = softmax_matmul_sgraph(4096, 128);
  MappingAssignment m = row_split_mapping(g);
  ParamSpace space(g, m);
  EXPECT_EQ(space.active(), (std::vector<int>{kGridX, kForloop}));
  ASSERT_FALSE(space.points().empty());
  EXPECT_TRUE(std::is_sorted(space.points().begin(), space.points().end()));
  for (const ParamValues &p : space.points()) {
    EXPECT_LE(smem_usage(g, m, p), kDefaultSmemBudget);
    EXPECT_EQ(p[kGridY], 1);
    EXPECT_EQ(p[kGridZ], 1);
  }
  EXPECT_TRUE(space.contains(kTiles64));
  EXPECT_FALSE(space.contains({1, 1, 1, 1}));
  // Larger than the split dim.
  EXPECT_FALSE(space.contains({8192, 1, 1, 64}));

  ParamSpace unlimited(g, m, -1);
  EXPECT_GT(unlimited.points().size(), space.points().size());
  // 13 powers of two up to 4096 for each of x and i.
  EXPECT_EQ(unlimited.points().size(), 13u * 13u);
}

TEST(ParamSpace, NoLoopMeansNoLoopSize) {
  SGraph g;
  g.io = {{"X", {16, 16}, TensorRole::kInput},
          {"X_out", {16, 16}, TensorRole::kOutput}};
  g.num_inputs = 1;
  g.block.nodes = {{OpKind::kInputLoader, {}, 0},
                   {OpKind::kOutputSaver, {0}, 1}};
  ASSERT_EQ(collect_constraints(g), ShapeStatus::kOk);
  MappingAssignment m =
      mapping_with(g, {var(g, "X", 0, kGridX), var(g, "X_out", 0, kGridX)});
  ParamSpace space(g, m);
  EXPECT_EQ(space.active(), std::vector<int>{kGridX});
  EXPECT_EQ(space.points().size(), 5u);  // 1, 2, 4, 8, 16
  for (const ParamValues &p : space.points()) EXPECT_EQ(p[kForloop], 1);
}

TEST(CostModel, HandCount) {
  SGraph g = softmax_matmul_sgraph(8, 4);
  ConcreteGraph c = instantiate(g, row_split_mapping(g), {2, 1, 1, 2});
  CostModel::Breakdown b = CostModel::measure(c);
  EXPECT_EQ(b.blocks, 2);
  // Per block and step: X tile 4x4, W tile 4x4; two steps, two blocks.
  EXPECT_DOUBLE_EQ(b.bytes_loaded, (16 + 16) * 2.0 * 2 * 2);
  EXPECT_DOUBLE_EQ(b.bytes_stored, 16 * 2.0 * 2);
  // exp 16, row sum 16, its accumulation 4, matmul 2*16*4, its
  // accumulation 16 per step; div 16 once.
  double per_block = 2 * (16 + 16 + 4 + 128 + 16) + 16;
  EXPECT_DOUBLE_EQ(b.flops, per_block * 2);
  CostModel model;
  EXPECT_DOUBLE_EQ(model.score(c), b.bytes_loaded + b.bytes_stored + b.flops / 2);
}

TEST(Tune, ExhaustiveFindsMinimum) {
  SGraph g = softmax_matmul_sgraph(4096, 128);
  MappingAssignment m = row_split_mapping(g);
  ParamSpace space(g, m);
  TuneOptions opts;
  opts.samples = static_cast<int>(space.points().size());
  ProfileResult best = tune(g, m, opts);
  CostModel model;
  double want = 1e300;
  ParamValues arg{};
  for (const ParamValues &p : space.points()) {
    double s = model.score(instantiate(g, m, p));
    if (s < want) {
      want = s;
      arg = p;
    }
  }
  EXPECT_EQ(best.score, want);
  EXPECT_EQ(best.params, arg);
  EXPECT_FALSE(best.equivalence_checked);
}

TEST(Tune, SampledIsSeedDeterministic) {
  SGraph g = softmax_matmul_sgraph(4096, 128);
  MappingAssignment m = row_split_mapping(g);
  TuneOptions opts;
  opts.samples = 4;
  opts.seed = 7;
  ProfileResult a = tune(g, m, opts);
  ProfileResult b = tune(g, m, opts);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.score, b.score);
  ParamSpace space(g, m);
  EXPECT_TRUE(space.contains(a.params));
  // Never better than the exhaustive optimum.
  opts.samples = static_cast<int>(space.points().size());
  EXPECT_GE(a.score, tune(g, m, opts).score);
}

TEST(Tune, EmptySpaceThrows) {
  SGraph g = softmax_matmul_sgraph(4096, 128);
  TuneOptions opts;
  opts.smem_budget = 16;
  EXPECT_THROW(tune(g, row_split_mapping(g), opts), EmptyParamSpace);
}

TEST(Tune, InterpBackend) {
  SGraph g = softmax_matmul_sgraph(16, 8);
  MappingAssignment m = row_split_mapping(g);
  ConcreteGraph c = instantiate(g, m, {2, 1, 1, 2});
  EXPECT_GT(score_interp(c, 3), 0.0);
  TuneOptions opts;
  opts.backend = Backend::kInterp;
  opts.samples = 2;
  ProfileResult r = tune(g, m, opts);
  EXPECT_GT(r.score, 0.0);
  EXPECT_TRUE(ParamSpace(g, m).contains(r.params));
}

TEST(TemplateTest, CorrectMappingPasses) {
  SGraph g = softmax_matmul_sgraph(32, 8);
  TemplateTestResult r = template_equiv_test(softmax_matmul_program(32, 8), g,
                                             row_split_mapping(g));
  EXPECT_TRUE(r.equivalent) << r.error;
  EXPECT_EQ(r.tested.size(), 3u);
  EXPECT_EQ(std::set<ParamValues>(r.tested.begin(), r.tested.end()).size(), 3u);
  EXPECT_LE(r.max_error, 1e-9);
}

TEST(TemplateTest, WrongStructureFails) {
  SGraph g = softmax_matmul_sgraph(32, 8);
  g.block.nodes[7].inputs = {6, 6};
  TemplateTestResult r = template_equiv_test(softmax_matmul_program(32, 8), g,
                                             row_split_mapping(g));
  EXPECT_FALSE(r.equivalent);
  EXPECT_FALSE(r.tested.empty());
  EXPECT_GT(r.max_error, 1e-9);
}

// An Accum whose loop splits nothing runs once.
TEST(TemplateTest, SingleStepLoopPasses) {
  SGraph g = softmax_matmul_sgraph(32, 8);
  MappingAssignment m =
      mapping_with(g, {var(g, "X", 0, kGridX), var(g, "O", 0, kGridX)});
  EXPECT_FALSE(splits_forloop(g, m));
  EXPECT_EQ(instantiate(g, m, {4, 1, 1, 8}).params[kForloop], 1);
  TemplateTestResult r =
      template_equiv_test(softmax_matmul_program(32, 8), g, m);
  EXPECT_TRUE(r.equivalent) << r.error;
}

TEST(TemplateTest, UninstantiableMappingFails) {
  SGraph g = softmax_matmul_sgraph(32, 8);
  MappingAssignment m = mapping_with(
      g, {var(g, "X", 0, kGridX), var(g, "X", 1, kForloop),
          var(g, "W", 0, kGridX), var(g, "W", 0, kForloop),
          var(g, "O", 0, kGridX)});
  TemplateTestResult r =
      template_equiv_test(softmax_matmul_program(32, 8), g, m);
  EXPECT_FALSE(r.equivalent);
  EXPECT_TRUE(r.tested.empty());
}

}  // namespace
}  // namespace symopt
