/* Copyright 2026 The symopt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "symopt/symdim.h"

namespace symopt {

enum class OpKind {
  kInputLoader,
  kOutputSaver,
  kMatmul,
  kExp,
  kSilu,
  kSquare,
  kSqrt,
  kDiv,
  kMul,
  kAdd,
  kSumData,
  kAccum,
  kScaleConst,
};

const char *op_name(OpKind kind);
std::optional<OpKind> parse_op_name(std::string_view name);
int op_arity(OpKind kind);
bool is_unary_elementwise(OpKind kind);
bool is_binary_elementwise(OpKind kind);
bool is_commutative(OpKind kind);

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TensorRole { kInput, kIntermediate, kOutput };

struct TensorSpec {
  std::string name;
  std::vector<std::int64_t> dims;
  TensorRole role = TensorRole::kIntermediate;
  bool operator==(const TensorSpec &) const = default;
};

// Positional data-dim names: the last two dims are r and c, a third leading
// dim is b, anything beyond that is b0, b1, ...
std::string dim_name(int rank, int dim);
int parse_dim_name(int rank, std::string_view name);

// Concrete result shape of a primitive on concrete input shapes. Binary
// elementwise ops broadcast a size-1 dim; Matmul contracts the last dim of
// the lhs with the second-to-last of the rhs and requires equal leading dims.
std::vector<std::int64_t> result_shape(
    OpKind kind, int axis, const std::vector<std::vector<std::int64_t>> &in);

struct ProgramOp {
  OpKind kind;
  std::vector<int> inputs;  // tensor indices
  int output = -1;
  int axis = -1;  // SumData
  Rational scale{1};
};

/// Lowered input program over primitive operators.
struct Program {
  std::string name;
  std::vector<TensorSpec> tensors;
  std::vector<ProgramOp> ops;  // topological order
  std::vector<int> inputs;
  std::vector<int> outputs;

  int find_tensor(std::string_view name) const;
  int rank() const;
  // Inputs followed by outputs; the position is the tensor index used in
  // mapping variables.
  std::vector<TensorSpec> io() const;
};

struct BlockNode {
  OpKind kind;
  std::vector<int> inputs;  // node ids, all smaller than this node's id
  int io = -1;              // InputLoader / OutputSaver: io tensor index
  int axis = -1;            // SumData
  Rational scale{1};        // ScaleConst
  bool operator==(const BlockNode &) const = default;
};

/// Block graph. Node i produces tensor i. InputLoaders come first and
/// OutputSavers last. Nodes downstream of an Accum form the loop epilogue.
struct BlockGraph {
  int num_grid_dims = 1;
  std::vector<BlockNode> nodes;

  bool has_accum() const;
  std::vector<int> grid_pars() const;
  // Grid dims followed by the forloop dim.
  std::vector<int> loader_pars() const;
  // 0 for loop-body tensors, 1 for epilogue tensors.
  std::vector<int> phases() const;
  bool operator==(const BlockGraph &) const = default;
};

/// Kernel graph with one custom operator whose body is `block`. Mapping
/// variables and parallelization sizes stay symbolic.
struct SGraph {
  std::vector<TensorSpec> io;
  int num_inputs = 0;
  BlockGraph block;
  ConstraintStore constraints;
};

using SymShape = std::vector<SymDimExpr>;

enum class ShapeStatus { kOk, kDimMismatch, kInvalid };

// Infers the shape of node `id` of `graph.block` from the shapes of earlier
// nodes, merging the equality constraints this needs into `store`. On
// failure `store` may hold partial merges and must be discarded.
ShapeStatus infer_node_shape(const SGraph &graph, int id,
                             const std::vector<SymShape> &shapes,
                             ConstraintStore &store, SymShape &out);

// Unifies two dimension expressions, with size-1 broadcast when
// `broadcast` is set.
std::optional<SymDimExpr> unify_dims(const SymDimExpr &a, const SymDimExpr &b,
                                     bool broadcast, ConstraintStore &store);

// Runs shape inference over the whole block graph, recording every needed
// equality in graph.constraints. A graph without an Accum has no loop, so
// its forloop mapping variables are forced to 0.
ShapeStatus collect_constraints(SGraph &graph);

/// Per-block, per-iteration shape of every block tensor. Throws ShapeError.
std::vector<SymShape> derive_shapes(const SGraph &graph);

// Phase/structure checks shared by the generator and deserialization:
// loaders first, savers last, Accum inputs in the loop body, binary inputs
// in one phase, saver inputs in the epilogue when a loop exists.
bool structurally_valid(const SGraph &graph, std::string *why = nullptr);

/// Total assignment of the mapping variables of an sGraph.
struct MappingAssignment {
  std::map<VarId, int> values;
  int get(VarId v) const;
  bool operator==(const MappingAssignment &) const = default;
};

std::string mapping_var_name(const std::vector<TensorSpec> &io, VarId v);

// Loader variables over grid + forloop dims and saver variables over grid
// dims, in increasing id order.
std::vector<VarId> mapping_variables(const SGraph &graph);

// At most one data dim per parallel dim and at most one grid dim per data
// dim on every tensor; every saver grid dim partitions exactly one dim.
bool satisfies_linear(const SGraph &graph, const MappingAssignment &m);
bool satisfies_constraints(const SGraph &graph, const MappingAssignment &m);

class InstantiationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConcreteGraph {
  SGraph sgraph;
  MappingAssignment mapping;
  ParamValues params{};
  std::vector<std::vector<std::int64_t>> shapes;
};

bool is_power_of_two(std::int64_t v);

// Unused grid dims get size 1, as does the forloop of a graph without an
// Accum.
ParamValues normalize_params(const BlockGraph &block, ParamValues params);

// True if the graph has an Accum and some loader dim is split by the loop.
// Otherwise the loop runs once.
bool splits_forloop(const SGraph &graph, const MappingAssignment &m);

/// Throws InstantiationError on constraint or divisibility violations.
ConcreteGraph instantiate(const SGraph &graph, const MappingAssignment &m,
                          ParamValues params);

}  // namespace symopt
