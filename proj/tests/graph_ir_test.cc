#include "symopt/graph_ir.h"

#include <gtest/gtest.h>

#include "fixtures.h"
#include "symopt/serialize.h"

namespace symopt {
namespace {

using testing_fixtures::mapping_with;
using testing_fixtures::row_split_mapping;
using testing_fixtures::softmax_matmul_sgraph;
using testing_fixtures::var;

const std::vector<int> kXI = {kGridX, kForloop};

TEST(DeriveShapes, LoaderShapeIsPartitionedDims) {
  SGraph g = softmax_matmul_sgraph();
  auto shapes = derive_shapes(g);
  EXPECT_TRUE(symbolic_equiv(shapes[0][0], partitioned_dim(4096, 0, 0, kXI)));
  EXPECT_TRUE(symbolic_equiv(shapes[0][1], partitioned_dim(4096, 0, 1, kXI)));
  // Matmul output rows come from X, columns from W.
  EXPECT_TRUE(symbolic_equiv(shapes[5][0], partitioned_dim(4096, 0, 0, kXI)));
  EXPECT_TRUE(symbolic_equiv(shapes[5][1], partitioned_dim(128, 1, 1, kXI)));
  // The row sum collapses the column.
  EXPECT_TRUE(shapes[3][1].is_literal(1));
  EXPECT_TRUE(symbolic_equiv(shapes[4][0], shapes[3][0]));
}

TEST(DeriveShapes, ContractionConstraintsRecorded) {
  SGraph g = softmax_matmul_sgraph();
  EXPECT_TRUE(g.constraints.same(var(g, "X", 1, kGridX), var(g, "W", 0, kGridX)));
  EXPECT_TRUE(
      g.constraints.same(var(g, "X", 1, kForloop), var(g, "W", 0, kForloop)));
  // Saver rows tie to X rows, columns to W columns.
  EXPECT_TRUE(g.constraints.same(var(g, "O", 0, kGridX), var(g, "X", 0, kGridX)));
  EXPECT_TRUE(g.constraints.same(var(g, "O", 1, kGridX), var(g, "W", 1, kGridX)));
  // Output tiles cannot depend on the loop.
  EXPECT_EQ(g.constraints.value_of(var(g, "X", 0, kForloop)), 0);
  EXPECT_EQ(g.constraints.value_of(var(g, "W", 1, kForloop)), 0);
}

TEST(DeriveShapes, ZeroMappingGivesOriginalSizes) {
  SGraph g = softmax_matmul_sgraph();
  MappingAssignment zero = mapping_with(g, {});
  auto shapes = derive_shapes(g);
  auto value = [&zero](VarId v) { return zero.get(v); };
  EXPECT_EQ(eval(shapes[0][0], value, {8, 1, 1, 16}), 4096);
  EXPECT_EQ(eval(shapes[1][1], value, {8, 1, 1, 16}), 128);
}

TEST(DeriveShapes, MatmulOnRankOneFails) {
  SGraph g;
  g.io = {{"A", {4}, TensorRole::kInput}, {"B", {4}, TensorRole::kInput},
          {"O", {4}, TensorRole::kOutput}};
  g.num_inputs = 2;
  g.block.nodes = {{OpKind::kInputLoader, {}, 0},
                   {OpKind::kInputLoader, {}, 1},
                   {OpKind::kMatmul, {0, 1}},
                   {OpKind::kOutputSaver, {2}, 2}};
  EXPECT_THROW(derive_shapes(g), ShapeError);
}

TEST(Instantiate, RowSplitTiles) {
  SGraph g = softmax_matmul_sgraph();
  ConcreteGraph c = instantiate(g, row_split_mapping(g), {64, 1, 1, 64});
  using Dims = std::vector<std::int64_t>;
  std::vector<Dims> expected = {{64, 64},  {64, 128}, {64, 64},
                                {64, 1},   {64, 1},   {64, 128},
                                {64, 128}, {64, 128}, {64, 128}};
  EXPECT_EQ(c.shapes, expected);
}

TEST(Instantiate, UnitParamsKeepOriginalSizes) {
  SGraph g = softmax_matmul_sgraph();
  ConcreteGraph c = instantiate(g, row_split_mapping(g), {1, 1, 1, 1});
  EXPECT_EQ(c.shapes[0], (std::vector<std::int64_t>{4096, 4096}));
  EXPECT_EQ(c.shapes[1], (std::vector<std::int64_t>{4096, 128}));
}

TEST(Instantiate, DivisibilityViolation) {
  SGraph g = softmax_matmul_sgraph();
  EXPECT_THROW(instantiate(g, row_split_mapping(g), {8192, 1, 1, 1}),
               InstantiationError);
}

TEST(Instantiate, RejectsBadMappings) {
  SGraph g = softmax_matmul_sgraph();
  // Two dims of X on x.
  MappingAssignment two_on_x =
      mapping_with(g, {var(g, "X", 0, kGridX), var(g, "X", 1, kGridX),
                       var(g, "O", 0, kGridX)});
  EXPECT_FALSE(satisfies_linear(g, two_on_x));
  EXPECT_THROW(instantiate(g, two_on_x, {2, 1, 1, 2}), InstantiationError);
  // Contraction dims split inconsistently.
  MappingAssignment bad = row_split_mapping(g);
  bad.values[var(g, "W", 0, kForloop)] = 0;
  EXPECT_TRUE(satisfies_linear(g, bad));
  EXPECT_FALSE(satisfies_constraints(g, bad));
  EXPECT_THROW(instantiate(g, bad, {2, 1, 1, 2}), InstantiationError);
  // Saver must use the grid dim.
  MappingAssignment uncovered = row_split_mapping(g);
  uncovered.values[var(g, "O", 0, kGridX)] = 0;
  EXPECT_FALSE(satisfies_linear(g, uncovered));
}

TEST(Instantiate, ParamsMustBePowersOfTwo) {
  SGraph g = softmax_matmul_sgraph();
  EXPECT_THROW(instantiate(g, row_split_mapping(g), {3, 1, 1, 2}),
               InstantiationError);
}

TEST(Structure, PhaseRules) {
  SGraph g = softmax_matmul_sgraph();
  EXPECT_TRUE(structurally_valid(g));
  // Div of a loop-body tensor by an epilogue tensor.
  SGraph bad = g;
  bad.block.nodes[7].inputs = {5, 4};
  std::string why;
  EXPECT_FALSE(structurally_valid(bad, &why));
  EXPECT_NE(why.find("phase"), std::string::npos);
  // Accum of an accumulated tensor.
  SGraph twice = g;
  twice.block.nodes[6].inputs = {4};
  EXPECT_FALSE(structurally_valid(twice));
}

TEST(Serialize, RoundTrip) {
  SGraph g = softmax_matmul_sgraph();
  std::string s = serialize(g);
  SGraph back = deserialize_sgraph(s);
  EXPECT_EQ(serialize(back), s);
  EXPECT_EQ(back.block, canonicalize(g.block));
  EXPECT_EQ(back.io, g.io);

  ConcreteGraph c = instantiate(g, row_split_mapping(g), {64, 1, 1, 64});
  std::string cs = serialize(c);
  ConcreteGraph cback = deserialize_concrete(cs);
  EXPECT_EQ(serialize(cback), cs);
  EXPECT_EQ(cback.shapes[1], c.shapes[1]);
  EXPECT_EQ(cback.sgraph.block, canonicalize(c.sgraph.block));
}

TEST(Serialize, TemplateKeyIgnoresParams) {
  SGraph g = softmax_matmul_sgraph();
  MappingAssignment m = row_split_mapping(g);
  ConcreteGraph a = instantiate(g, m, {64, 1, 1, 64});
  ConcreteGraph b = instantiate(g, m, {32, 1, 1, 128});
  EXPECT_NE(serialize(a), serialize(b));
  EXPECT_EQ(template_key(a.sgraph, a.mapping), template_key(b.sgraph, b.mapping));
  MappingAssignment other = mapping_with(
      g, {var(g, "W", 1, kGridX), var(g, "X", 1, kForloop),
          var(g, "W", 0, kForloop), var(g, "O", 1, kGridX)});
  EXPECT_NE(template_key(g, m), template_key(g, other));
}

TEST(Serialize, IndependentNodeOrderIsCanonical) {
  SGraph a = softmax_matmul_sgraph();
  // Swap the Matmul branch ahead of the row-sum branch:
  // 0 X, 1 W, 2 Exp, 3 Matmul, 4 Accum, 5 Sum, 6 Accum, 7 Div, 8 Saver.
  SGraph b = a;
  auto &n = b.block.nodes;
  n[3] = {OpKind::kMatmul, {2, 1}};
  n[4] = {OpKind::kAccum, {3}};
  n[5] = {OpKind::kSumData, {2}, -1, 1};
  n[6] = {OpKind::kAccum, {5}};
  n[7] = {OpKind::kDiv, {4, 6}};
  ASSERT_NE(a.block, b.block);
  EXPECT_EQ(serialize(a), serialize(b));
  EXPECT_EQ(canonicalize(a.block), canonicalize(b.block));
}

TEST(Serialize, MalformedInput) {
  EXPECT_THROW(deserialize_sgraph("{"), ParseError);
  EXPECT_THROW(deserialize_sgraph("{\"grid_dims\": 1}"), ParseError);
  SGraph g = softmax_matmul_sgraph();
  std::string s = serialize(g);
  std::string broken = s;
  broken.replace(broken.find("Matmul"), 6, "Matmux");
  EXPECT_THROW(deserialize_sgraph(broken), ParseError);
}

TEST(Serialize, DotLabels) {
  SGraph g = softmax_matmul_sgraph();
  std::string dot = to_dot(g);
  EXPECT_NE(dot.find("InputLoader X"), std::string::npos);
  EXPECT_NE(dot.find("m_{X,r,x}"), std::string::npos);
  ConcreteGraph c = instantiate(g, row_split_mapping(g), {64, 1, 1, 64});
  EXPECT_NE(to_dot(g, &c).find("[64,128]"), std::string::npos);
}

}  // namespace
}  // namespace symopt
