#pragma once

#include <initializer_list>
#include <string>

#include "symopt/graph_ir.h"

namespace symopt::testing_fixtures {

// Block graph of the fused softmax-matmul kernel: two loaders, Exp, a row
// sum, two accumulators, Matmul, Div and one saver.
inline SGraph softmax_matmul_sgraph(std::int64_t n = 4096, std::int64_t m = 128,
                                    int grid_dims = 1) {
  SGraph g;
  g.io = {{"X", {n, n}, TensorRole::kInput},
          {"W", {n, m}, TensorRole::kInput},
          {"O", {n, m}, TensorRole::kOutput}};
  g.num_inputs = 2;
  g.block.num_grid_dims = grid_dims;
  auto &nodes = g.block.nodes;
  nodes.push_back({OpKind::kInputLoader, {}, 0});
  nodes.push_back({OpKind::kInputLoader, {}, 1});
  nodes.push_back({OpKind::kExp, {0}});
  nodes.push_back({OpKind::kSumData, {2}, -1, 1});
  nodes.push_back({OpKind::kAccum, {3}});
  nodes.push_back({OpKind::kMatmul, {2, 1}});
  nodes.push_back({OpKind::kAccum, {5}});
  nodes.push_back({OpKind::kDiv, {6, 4}});
  nodes.push_back({OpKind::kOutputSaver, {7}, 2});
  if (collect_constraints(g) != ShapeStatus::kOk) {
    throw ShapeError("fixture graph does not type-check");
  }
  return g;
}

// O = div(matmul(exp X, W), sum(exp X, c)).
inline Program softmax_matmul_program(std::int64_t n, std::int64_t m) {
  Program p;
  p.name = "softmax_matmul";
  p.tensors = {{"X", {n, n}, TensorRole::kInput},
               {"W", {n, m}, TensorRole::kInput},
               {"E", {n, n}, TensorRole::kIntermediate},
               {"S", {n, 1}, TensorRole::kIntermediate},
               {"M", {n, m}, TensorRole::kIntermediate},
               {"O", {n, m}, TensorRole::kOutput}};
  p.inputs = {0, 1};
  p.outputs = {5};
  p.ops = {{OpKind::kExp, {0}, 2},
           {OpKind::kSumData, {2}, 3, 1},
           {OpKind::kMatmul, {2, 1}, 4},
           {OpKind::kDiv, {4, 3}, 5}};
  return p;
}

inline VarId var(const SGraph &g, const std::string &tensor, int dim, int par) {
  for (std::size_t t = 0; t < g.io.size(); ++t) {
    if (g.io[t].name == tensor) return map_var(static_cast<int>(t), dim, par);
  }
  throw std::invalid_argument(tensor);
}

// All mapping variables of `g` set to 0 except `ones`.
inline MappingAssignment mapping_with(const SGraph &g,
                                      std::initializer_list<VarId> ones) {
  MappingAssignment m;
  for (VarId v : mapping_variables(g)) m.values[v] = 0;
  for (VarId v : ones) m.values[v] = 1;
  return m;
}

// Rows of X and O by x, the reduction dim by the loop.
inline MappingAssignment row_split_mapping(const SGraph &g) {
  return mapping_with(g, {var(g, "X", 0, kGridX), var(g, "X", 1, kForloop),
                          var(g, "W", 0, kForloop), var(g, "O", 0, kGridX)});
}

// O = matmul(exp X, W).
inline Program exp_matmul_program() {
  Program p;
  p.name = "exp_matmul";
  p.tensors = {{"X", {64, 64}, TensorRole::kInput},
               {"W", {64, 16}, TensorRole::kInput},
               {"E", {64, 64}, TensorRole::kIntermediate},
               {"O", {64, 16}, TensorRole::kOutput}};
  p.inputs = {0, 1};
  p.outputs = {3};
  p.ops = {{OpKind::kExp, {0}, 2}, {OpKind::kMatmul, {2, 1}, 3}};
  return p;
}

}  // namespace symopt::testing_fixtures
