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

#include "symopt/graph_ir.h"

#include <algorithm>
#include <set>
#include <sstream>

namespace symopt {

namespace {

struct OpInfo {
  OpKind kind;
  const char *name;
  int arity;
};

constexpr OpInfo kOps[] = {
    {OpKind::kInputLoader, "InputLoader", 0},
    {OpKind::kOutputSaver, "OutputSaver", 1},
    {OpKind::kMatmul, "Matmul", 2},
    {OpKind::kExp, "Exp", 1},
    {OpKind::kSilu, "Silu", 1},
    {OpKind::kSquare, "Square", 1},
    {OpKind::kSqrt, "Sqrt", 1},
    {OpKind::kDiv, "Div", 2},
    {OpKind::kMul, "Mul", 2},
    {OpKind::kAdd, "Add", 2},
    {OpKind::kSumData, "SumData", 1},
    {OpKind::kAccum, "Accum", 1},
    {OpKind::kScaleConst, "ScaleConst", 1},
};

const OpInfo &info(OpKind kind) { return kOps[static_cast<int>(kind)]; }

}  // namespace

const char *op_name(OpKind kind) { return info(kind).name; }

std::optional<OpKind> parse_op_name(std::string_view name) {
  for (const OpInfo &op : kOps) {
    if (name == op.name) return op.kind;
  }
  return std::nullopt;
}

int op_arity(OpKind kind) { return info(kind).arity; }

bool is_unary_elementwise(OpKind kind) {
  return kind == OpKind::kExp || kind == OpKind::kSilu ||
         kind == OpKind::kSquare || kind == OpKind::kSqrt ||
         kind == OpKind::kScaleConst;
}

bool is_binary_elementwise(OpKind kind) {
  return kind == OpKind::kDiv || kind == OpKind::kMul || kind == OpKind::kAdd;
}

bool is_commutative(OpKind kind) {
  return kind == OpKind::kMul || kind == OpKind::kAdd;
}

std::string dim_name(int rank, int dim) {
  if (dim == rank - 1) return "c";
  if (dim == rank - 2) return "r";
  if (rank == 3 && dim == 0) return "b";
  return "b" + std::to_string(dim);
}

int parse_dim_name(int rank, std::string_view name) {
  for (int d = 0; d < rank; ++d) {
    if (dim_name(rank, d) == name) return d;
  }
  return -1;
}

std::vector<std::int64_t> result_shape(
    OpKind kind, int axis, const std::vector<std::vector<std::int64_t>> &in) {
  if (static_cast<int>(in.size()) != op_arity(kind)) {
    throw ShapeError(std::string(op_name(kind)) + ": wrong operand count");
  }
  if (kind == OpKind::kMatmul) {
    const auto &a = in[0], &b = in[1];
    std::size_t n = a.size();
    if (n < 2 || b.size() != n) throw ShapeError("Matmul: bad ranks");
    if (a[n - 1] != b[n - 2]) throw ShapeError("Matmul: contraction mismatch");
    std::vector<std::int64_t> out(a.begin(), a.end() - 1);
    for (std::size_t d = 0; d + 2 < n; ++d) {
      if (a[d] != b[d]) throw ShapeError("Matmul: leading dim mismatch");
    }
    out.push_back(b[n - 1]);
    return out;
  }
  if (is_binary_elementwise(kind)) {
    const auto &a = in[0], &b = in[1];
    if (a.size() != b.size()) throw ShapeError("elementwise: rank mismatch");
    std::vector<std::int64_t> out(a.size());
    for (std::size_t d = 0; d < a.size(); ++d) {
      if (a[d] != b[d] && a[d] != 1 && b[d] != 1) {
        throw ShapeError("elementwise: incompatible dims");
      }
      out[d] = std::max(a[d], b[d]);
    }
    return out;
  }
  if (kind == OpKind::kSumData) {
    if (axis < 0 || axis >= static_cast<int>(in[0].size())) {
      throw ShapeError("SumData: axis out of range");
    }
    std::vector<std::int64_t> out = in[0];
    out[axis] = 1;
    return out;
  }
  if (kind == OpKind::kInputLoader) throw ShapeError("InputLoader has no input");
  return in[0];
}

int Program::find_tensor(std::string_view n) const {
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].name == n) return static_cast<int>(i);
  }
  return -1;
}

int Program::rank() const {
  return inputs.empty() ? 0
                        : static_cast<int>(tensors[inputs[0]].dims.size());
}

std::vector<TensorSpec> Program::io() const {
  std::vector<TensorSpec> out;
  for (int t : inputs) out.push_back(tensors[t]);
  for (int t : outputs) {
    TensorSpec s = tensors[t];
    // An output that is also an input still needs its own name.
    if (std::find(inputs.begin(), inputs.end(), t) != inputs.end()) {
      s.name += "_out";
    }
    s.role = TensorRole::kOutput;
    out.push_back(s);
  }
  return out;
}

bool BlockGraph::has_accum() const {
  return std::any_of(nodes.begin(), nodes.end(), [](const BlockNode &n) {
    return n.kind == OpKind::kAccum;
  });
}

std::vector<int> BlockGraph::grid_pars() const {
  std::vector<int> out;
  for (int p = 0; p < num_grid_dims; ++p) out.push_back(p);
  return out;
}

std::vector<int> BlockGraph::loader_pars() const {
  std::vector<int> out = grid_pars();
  out.push_back(kForloop);
  return out;
}

std::vector<int> BlockGraph::phases() const {
  std::vector<int> out(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const BlockNode &n = nodes[i];
    if (n.kind == OpKind::kAccum) {
      out[i] = 1;
      continue;
    }
    for (int in : n.inputs) out[i] = std::max(out[i], out[in]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Symbolic shapes

std::optional<SymDimExpr> unify_dims(const SymDimExpr &a, const SymDimExpr &b,
                                     bool broadcast, ConstraintStore &store) {
  if (broadcast) {
    if (a.is_literal(1)) return b;
    if (b.is_literal(1)) return a;
  }
  auto cs = match_dims(a, b, &store);
  if (!cs) return std::nullopt;
  for (const EqualityConstraint &c : *cs) {
    if (!store.unite(c.lhs, c.rhs)) return std::nullopt;
  }
  return a;
}

namespace {

// D/σ(T,d) per dim over `pars`; original size-1 dims are the literal 1 with
// their variables forced to 0.
bool io_shape(const TensorSpec &spec, int io, const std::vector<int> &pars,
              ConstraintStore &store, SymShape &out) {
  out.clear();
  for (std::size_t d = 0; d < spec.dims.size(); ++d) {
    if (spec.dims[d] == 1) {
      for (int p : pars) {
        if (!store.unite(map_var(io, static_cast<int>(d), p), kZero)) {
          return false;
        }
      }
      out.push_back(SymDimExpr::literal(1));
    } else {
      out.push_back(
          partitioned_dim(spec.dims[d], io, static_cast<int>(d), pars));
    }
  }
  return true;
}

}  // namespace

ShapeStatus infer_node_shape(const SGraph &graph, int id,
                             const std::vector<SymShape> &shapes,
                             ConstraintStore &store, SymShape &out) {
  const BlockGraph &bg = graph.block;
  const BlockNode &node = bg.nodes[id];
  if (static_cast<int>(node.inputs.size()) != op_arity(node.kind)) {
    return ShapeStatus::kInvalid;
  }
  for (int in : node.inputs) {
    if (in < 0 || in >= id) return ShapeStatus::kInvalid;
  }
  auto in_shape = [&](int j) -> const SymShape & {
    return shapes[node.inputs[j]];
  };

  switch (node.kind) {
    case OpKind::kInputLoader: {
      if (node.io < 0 || node.io >= graph.num_inputs) {
        return ShapeStatus::kInvalid;
      }
      return io_shape(graph.io[node.io], node.io, bg.loader_pars(), store, out)
                 ? ShapeStatus::kOk
                 : ShapeStatus::kDimMismatch;
    }
    case OpKind::kOutputSaver: {
      if (node.io < graph.num_inputs ||
          node.io >= static_cast<int>(graph.io.size())) {
        return ShapeStatus::kInvalid;
      }
      const SymShape &src = in_shape(0);
      if (src.size() != graph.io[node.io].dims.size()) {
        return ShapeStatus::kDimMismatch;
      }
      SymShape target;
      if (!io_shape(graph.io[node.io], node.io, bg.grid_pars(), store,
                    target)) {
        return ShapeStatus::kDimMismatch;
      }
      for (std::size_t d = 0; d < src.size(); ++d) {
        if (!unify_dims(src[d], target[d], false, store)) {
          return ShapeStatus::kDimMismatch;
        }
      }
      out = target;
      return ShapeStatus::kOk;
    }
    case OpKind::kMatmul: {
      const SymShape &a = in_shape(0), &b = in_shape(1);
      std::size_t n = a.size();
      if (n < 2 || b.size() != n) return ShapeStatus::kInvalid;
      out.clear();
      for (std::size_t d = 0; d + 2 < n; ++d) {
        auto u = unify_dims(a[d], b[d], false, store);
        if (!u) return ShapeStatus::kDimMismatch;
        out.push_back(*u);
      }
      if (!unify_dims(a[n - 1], b[n - 2], false, store)) {
        return ShapeStatus::kDimMismatch;
      }
      out.push_back(a[n - 2]);
      out.push_back(b[n - 1]);
      return ShapeStatus::kOk;
    }
    case OpKind::kDiv:
    case OpKind::kMul:
    case OpKind::kAdd: {
      const SymShape &a = in_shape(0), &b = in_shape(1);
      if (a.size() != b.size()) return ShapeStatus::kInvalid;
      out.clear();
      for (std::size_t d = 0; d < a.size(); ++d) {
        auto u = unify_dims(a[d], b[d], true, store);
        if (!u) return ShapeStatus::kDimMismatch;
        out.push_back(*u);
      }
      return ShapeStatus::kOk;
    }
    case OpKind::kSumData: {
      if (node.axis < 0 || node.axis >= static_cast<int>(in_shape(0).size())) {
        return ShapeStatus::kInvalid;
      }
      out = in_shape(0);
      out[node.axis] = SymDimExpr::literal(1);
      return ShapeStatus::kOk;
    }
    default:
      out = in_shape(0);
      return ShapeStatus::kOk;
  }
}

ShapeStatus collect_constraints(SGraph &graph) {
  ConstraintStore store = graph.constraints;
  std::vector<SymShape> shapes(graph.block.nodes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    ShapeStatus st = infer_node_shape(graph, static_cast<int>(i), shapes,
                                      store, shapes[i]);
    if (st != ShapeStatus::kOk) return st;
  }
  if (!graph.block.has_accum()) {
    for (const BlockNode &n : graph.block.nodes) {
      if (n.kind != OpKind::kInputLoader) continue;
      for (std::size_t d = 0; d < graph.io[n.io].dims.size(); ++d) {
        if (!store.unite(map_var(n.io, static_cast<int>(d), kForloop),
                         kZero)) {
          return ShapeStatus::kDimMismatch;
        }
      }
    }
  }
  graph.constraints = store;
  return ShapeStatus::kOk;
}

std::vector<SymShape> derive_shapes(const SGraph &graph) {
  ConstraintStore store = graph.constraints;
  std::vector<SymShape> shapes(graph.block.nodes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    ShapeStatus st = infer_node_shape(graph, static_cast<int>(i), shapes,
                                      store, shapes[i]);
    if (st != ShapeStatus::kOk) {
      throw ShapeError("shape derivation failed at node " + std::to_string(i) +
                       " (" + op_name(graph.block.nodes[i].kind) + ")");
    }
  }
  return shapes;
}

bool structurally_valid(const SGraph &graph, std::string *why) {
  auto fail = [why](const std::string &msg) {
    if (why) *why = msg;
    return false;
  };
  const BlockGraph &bg = graph.block;
  if (bg.num_grid_dims < 1 || bg.num_grid_dims > kMaxGridDims) {
    return fail("grid dims out of range");
  }
  // 0: loaders, 1: compute, 2: savers.
  int section = 0;
  std::set<int> seen_io;
  for (std::size_t i = 0; i < bg.nodes.size(); ++i) {
    const BlockNode &n = bg.nodes[i];
    int s = n.kind == OpKind::kInputLoader   ? 0
            : n.kind == OpKind::kOutputSaver ? 2
                                             : 1;
    if (s < section) return fail("node order violates loader/saver layout");
    section = s;
    if (static_cast<int>(n.inputs.size()) != op_arity(n.kind)) {
      return fail("wrong operand count");
    }
    for (int in : n.inputs) {
      if (in < 0 || in >= static_cast<int>(i)) return fail("not topological");
      if (bg.nodes[in].kind == OpKind::kOutputSaver) {
        return fail("OutputSaver consumed");
      }
    }
    if (s != 1) {
      bool is_input = n.io >= 0 && n.io < graph.num_inputs;
      if ((s == 0) != is_input || n.io >= static_cast<int>(graph.io.size())) {
        return fail("bad io index");
      }
      if (!seen_io.insert(n.io).second) return fail("duplicate io tensor");
    }
  }
  std::vector<int> phase = bg.phases();
  bool loop = bg.has_accum();
  for (const BlockNode &n : bg.nodes) {
    if (n.kind == OpKind::kAccum && phase[n.inputs[0]] != 0) {
      return fail("Accum of loop-invariant data");
    }
    if (op_arity(n.kind) == 2 && phase[n.inputs[0]] != phase[n.inputs[1]]) {
      return fail("operands from different loop phases");
    }
    if (n.kind == OpKind::kOutputSaver && loop && phase[n.inputs[0]] != 1) {
      return fail("OutputSaver of loop-varying data");
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Mappings

int MappingAssignment::get(VarId v) const {
  if (v == kZero) return 0;
  if (v == kOne) return 1;
  auto it = values.find(v);
  return it == values.end() ? 0 : it->second;
}

std::string mapping_var_name(const std::vector<TensorSpec> &io, VarId v) {
  if (v == kZero) return "0";
  if (v == kOne) return "1";
  int t = var_tensor(v);
  std::string tensor = t < static_cast<int>(io.size()) ? io[t].name
                                                       : "T" + std::to_string(t);
  int rank = t < static_cast<int>(io.size())
                 ? static_cast<int>(io[t].dims.size())
                 : var_dim(v) + 1;
  std::ostringstream os;
  os << "m_{" << tensor << "," << dim_name(rank, var_dim(v)) << ","
     << parallel_dim_name(var_par(v)) << "}";
  return os.str();
}

std::vector<VarId> mapping_variables(const SGraph &graph) {
  std::vector<VarId> out;
  const BlockGraph &bg = graph.block;
  for (const BlockNode &n : bg.nodes) {
    if (n.kind != OpKind::kInputLoader && n.kind != OpKind::kOutputSaver) {
      continue;
    }
    std::vector<int> pars = n.kind == OpKind::kInputLoader ? bg.loader_pars()
                                                           : bg.grid_pars();
    int rank = static_cast<int>(graph.io[n.io].dims.size());
    for (int d = 0; d < rank; ++d) {
      for (int p : pars) out.push_back(map_var(n.io, d, p));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool satisfies_linear(const SGraph &graph, const MappingAssignment &m) {
  const BlockGraph &bg = graph.block;
  for (const BlockNode &n : bg.nodes) {
    bool loader = n.kind == OpKind::kInputLoader;
    if (!loader && n.kind != OpKind::kOutputSaver) continue;
    int rank = static_cast<int>(graph.io[n.io].dims.size());
    std::vector<int> pars = loader ? bg.loader_pars() : bg.grid_pars();
    for (int p : pars) {
      int used = 0;
      for (int d = 0; d < rank; ++d) used += m.get(map_var(n.io, d, p));
      if (used > 1) return false;
      if (!loader && used != 1) return false;
    }
    for (int d = 0; d < rank; ++d) {
      int used = 0;
      for (int p : bg.grid_pars()) used += m.get(map_var(n.io, d, p));
      if (used > 1) return false;
    }
  }
  return true;
}

bool satisfies_constraints(const SGraph &graph, const MappingAssignment &m) {
  for (VarId v : graph.constraints.variables()) {
    VarId root = graph.constraints.find(v);
    if (m.get(v) != m.get(root)) return false;
  }
  return true;
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

ParamValues normalize_params(const BlockGraph &block, ParamValues params) {
  for (int p = block.num_grid_dims; p < kMaxGridDims; ++p) params[p] = 1;
  if (!block.has_accum()) params[kForloop] = 1;
  return params;
}

bool splits_forloop(const SGraph &graph, const MappingAssignment &m) {
  if (!graph.block.has_accum()) return false;
  for (VarId v : mapping_variables(graph)) {
    if (var_par(v) == kForloop && m.get(v)) return true;
  }
  return false;
}

ConcreteGraph instantiate(const SGraph &graph, const MappingAssignment &m,
                          ParamValues params) {
  for (VarId v : mapping_variables(graph)) {
    auto it = m.values.find(v);
    if (it == m.values.end() || (it->second != 0 && it->second != 1)) {
      throw InstantiationError("mapping is not a total 0/1 assignment: " +
                               mapping_var_name(graph.io, v));
    }
  }
  if (!satisfies_linear(graph, m)) {
    throw InstantiationError("mapping violates the partition constraints");
  }
  if (!satisfies_constraints(graph, m)) {
    throw InstantiationError("mapping violates an equality constraint");
  }
  params = normalize_params(graph.block, params);
  if (!splits_forloop(graph, m)) params[kForloop] = 1;
  for (std::int64_t p : params) {
    if (!is_power_of_two(p)) {
      throw InstantiationError("parallelization size " + std::to_string(p) +
                               " is not a power of two");
    }
  }
  ConcreteGraph out{graph, m, params, {}};
  auto value = [&m](VarId v) { return m.get(v); };
  for (const SymShape &shape : derive_shapes(graph)) {
    std::vector<std::int64_t> dims;
    for (const SymDimExpr &e : shape) {
      try {
        dims.push_back(eval(e, value, params));
      } catch (const NonIntegerError &err) {
        throw InstantiationError(std::string("divisibility violation: ") +
                                 err.what());
      }
    }
    out.shapes.push_back(std::move(dims));
  }
  return out;
}

}  // namespace symopt
