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

#include "symopt/interp.h"

#include <algorithm>

namespace symopt {

TensorMap random_inputs(const std::vector<TensorSpec> &inputs,
                        std::mt19937_64 &rng) {
  TensorMap out;
  for (const TensorSpec &t : inputs) out[t.name] = random_normal(t.dims, rng);
  return out;
}

TensorMap run_program(const Program &program, const TensorMap &inputs,
                      Precision precision) {
  std::vector<DenseTensor> val(program.tensors.size());
  for (int id : program.inputs) {
    auto it = inputs.find(program.tensors[id].name);
    if (it == inputs.end()) {
      throw InterpError("missing input " + program.tensors[id].name);
    }
    if (it->second.shape != program.tensors[id].dims) {
      throw InterpError("input " + it->first + " has the wrong shape");
    }
    val[id] = it->second;
  }
  for (const ProgramOp &op : program.ops) {
    std::vector<const DenseTensor *> in;
    for (int k : op.inputs) in.push_back(&val[k]);
    val[op.output] = apply_op(op.kind, in, op.axis, op.scale, precision);
  }
  TensorMap out;
  for (int id : program.outputs) out[program.tensors[id].name] = val[id];
  return out;
}

namespace {

// Tile box of io tensor `io` for block/iteration indices `idx`; `pars`
// lists the parallel dims in nesting order, outermost first.
void tile_box(const ConcreteGraph &g, int io, const std::vector<int> &pars,
              const ParamValues &idx, std::vector<std::int64_t> &offsets,
              std::vector<std::int64_t> &sizes) {
  const auto &dims = g.sgraph.io[io].dims;
  offsets.assign(dims.size(), 0);
  sizes = dims;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    for (int p : pars) {
      if (!g.mapping.get(map_var(io, static_cast<int>(d), p))) continue;
      sizes[d] /= g.params[p];
      offsets[d] += idx[p] * sizes[d];
    }
  }
}

}  // namespace

std::vector<DenseTensor> run_concrete(const ConcreteGraph &g,
                                      const std::vector<DenseTensor> &inputs,
                                      Precision precision) {
  const SGraph &sg = g.sgraph;
  const BlockGraph &bg = sg.block;
  const auto &nodes = bg.nodes;
  const std::vector<int> phase = bg.phases();
  const std::vector<int> loader_pars = bg.loader_pars();
  const std::vector<int> grid_pars = bg.grid_pars();
  if (static_cast<int>(inputs.size()) != sg.num_inputs) {
    throw InterpError("wrong number of inputs");
  }
  for (int j = 0; j < sg.num_inputs; ++j) {
    if (inputs[j].shape != sg.io[j].dims) {
      throw InterpError("input " + sg.io[j].name + " has the wrong shape");
    }
  }
  std::vector<DenseTensor> outputs;
  std::vector<DenseTensor> writes;  // per-element write counts
  for (std::size_t j = sg.num_inputs; j < sg.io.size(); ++j) {
    outputs.emplace_back(sg.io[j].dims);
    writes.emplace_back(sg.io[j].dims);
  }

  const ParamValues &n = g.params;
  std::vector<std::int64_t> offsets, sizes;
  ParamValues idx{};
  for (idx[kGridX] = 0; idx[kGridX] < n[kGridX]; ++idx[kGridX]) {
    for (idx[kGridY] = 0; idx[kGridY] < n[kGridY]; ++idx[kGridY]) {
      for (idx[kGridZ] = 0; idx[kGridZ] < n[kGridZ]; ++idx[kGridZ]) {
        std::vector<DenseTensor> val(nodes.size());
        std::vector<DenseTensor> acc(nodes.size());
        auto compute = [&](std::size_t id) {
          const BlockNode &node = nodes[id];
          std::vector<const DenseTensor *> in;
          for (int k : node.inputs) in.push_back(&val[k]);
          val[id] = apply_op(node.kind, in, node.axis, node.scale, precision);
        };
        for (idx[kForloop] = 0; idx[kForloop] < n[kForloop]; ++idx[kForloop]) {
          for (std::size_t id = 0; id < nodes.size(); ++id) {
            const BlockNode &node = nodes[id];
            if (phase[id] != 0 || node.kind == OpKind::kOutputSaver) continue;
            if (node.kind == OpKind::kInputLoader) {
              tile_box(g, node.io, loader_pars, idx, offsets, sizes);
              val[id] = extract(inputs[node.io], offsets, sizes);
            } else {
              compute(id);
            }
          }
          for (std::size_t id = 0; id < nodes.size(); ++id) {
            if (nodes[id].kind != OpKind::kAccum) continue;
            const DenseTensor &x = val[nodes[id].inputs[0]];
            if (acc[id].shape.empty()) acc[id] = DenseTensor(x.shape);
            accumulate(acc[id], x);
          }
        }
        for (std::size_t id = 0; id < nodes.size(); ++id) {
          const BlockNode &node = nodes[id];
          if (node.kind == OpKind::kAccum) {
            val[id] = acc[id];
          } else if (node.kind == OpKind::kOutputSaver) {
            const DenseTensor &tile = val[node.inputs[0]];
            tile_box(g, node.io, grid_pars, idx, offsets, sizes);
            if (tile.shape != sizes) {
              throw InterpError("saver tile shape does not match its box");
            }
            int out = node.io - sg.num_inputs;
            insert(outputs[out], tile, offsets);
            DenseTensor seen = extract(writes[out], offsets, sizes);
            for (double &w : seen.data) w += 1.0;
            insert(writes[out], seen, offsets);
          } else if (phase[id] == 1) {
            compute(id);
          }
        }
      }
    }
  }
  for (std::size_t j = 0; j < writes.size(); ++j) {
    for (double w : writes[j].data) {
      if (w > 1) throw InterpError("write conflict on " + sg.io[sg.num_inputs + j].name);
      if (w == 0) throw InterpError("unwritten elements in " + sg.io[sg.num_inputs + j].name);
    }
  }
  return outputs;
}

namespace {

// Mixed-radix position of the tile whose coordinates are `coord` (one per
// par in `pars`).
std::size_t tile_pos(const std::vector<int> &pars, const ParamValues &params,
                     const std::vector<std::int64_t> &coord) {
  std::size_t pos = 0;
  for (std::size_t k = 0; k < pars.size(); ++k) {
    pos = pos * params[pars[k]] + coord[k];
  }
  return pos;
}

std::vector<std::int64_t> tile_coord(const std::vector<int> &pars,
                                     const ParamValues &params,
                                     std::size_t pos) {
  std::vector<std::int64_t> c(pars.size());
  for (int k = static_cast<int>(pars.size()) - 1; k >= 0; --k) {
    c[k] = pos % params[pars[k]];
    pos /= params[pars[k]];
  }
  return c;
}

std::size_t num_tiles(const std::vector<int> &pars, const ParamValues &params) {
  std::size_t n = 1;
  for (int p : pars) n *= params[p];
  return n;
}

bool has_par(const std::vector<int> &pars, int p) {
  return std::find(pars.begin(), pars.end(), p) != pars.end();
}

OpKind compute_kind(ExprOp op) {
  switch (op) {
    case ExprOp::kMatmul: return OpKind::kMatmul;
    case ExprOp::kSum: return OpKind::kSumData;
    case ExprOp::kAdd: return OpKind::kAdd;
    case ExprOp::kMul: return OpKind::kMul;
    case ExprOp::kDiv: return OpKind::kDiv;
    case ExprOp::kExp: return OpKind::kExp;
    case ExprOp::kSilu: return OpKind::kSilu;
    case ExprOp::kSquare: return OpKind::kSquare;
    case ExprOp::kSqrt: return OpKind::kSqrt;
    case ExprOp::kScale: return OpKind::kScaleConst;
    default: throw ShapeError("not a compute operator");
  }
}

// Maps every tile of `out_pars` to the tile of `in_pars` with the same
// coordinates on shared pars; `k` receives the coordinate of `extra`.
template <typename F>
void for_each_tile(const std::vector<int> &out_pars,
                   const std::vector<int> &in_pars, int extra,
                   const ParamValues &params, F &&f) {
  std::size_t n = num_tiles(out_pars, params);
  for (std::size_t pos = 0; pos < n; ++pos) {
    auto oc = tile_coord(out_pars, params, pos);
    std::vector<std::int64_t> ic;
    std::int64_t k = 0;
    for (std::size_t a = 0; a < out_pars.size(); ++a) {
      if (out_pars[a] == extra) k = oc[a];
      if (has_par(in_pars, out_pars[a])) ic.push_back(oc[a]);
    }
    f(pos, ic, k);
  }
}

}  // namespace

ParTensor eval_expr(const ExprPtr &e, const TensorMap &vars,
                    const ParamValues &params, Precision precision) {
  if (e->op == ExprOp::kVar) {
    auto it = vars.find(e->name);
    if (it == vars.end()) throw ShapeError("unbound tensor " + e->name);
    std::uint32_t mask = 0;
    for (int d = 0; d < it->second.rank(); ++d) {
      if (it->second.shape[d] == 1) mask |= 1u << d;
    }
    return {{}, {it->second}, mask};
  }
  std::vector<ParTensor> kids;
  for (const ExprPtr &k : e->kids) {
    kids.push_back(eval_expr(k, vars, params, precision));
  }
  ParTensor &t = kids[0];
  const int p = e->par;
  switch (e->op) {
    case ExprOp::kPart: {
      if (has_par(t.pars, p)) throw ShapeError("part: index already split");
      ParTensor out{t.pars, {}, t.collapsed};
      out.pars.push_back(p);
      std::sort(out.pars.begin(), out.pars.end());
      out.tiles.resize(num_tiles(out.pars, params));
      const std::int64_t np = params[p];
      for_each_tile(out.pars, t.pars, p, params,
                    [&](std::size_t pos, const auto &ic, std::int64_t k) {
        const DenseTensor &src = t.tiles[tile_pos(t.pars, params, ic)];
        if (e->dim >= src.rank() || src.shape[e->dim] % np != 0) {
          throw ShapeError("part: indivisible dim");
        }
        std::vector<std::int64_t> off(src.rank(), 0), size = src.shape;
        size[e->dim] /= np;
        off[e->dim] = k * size[e->dim];
        out.tiles[pos] = extract(src, off, size);
      });
      return out;
    }
    case ExprOp::kComb: {
      if (!has_par(t.pars, p)) throw ShapeError("comb: index not split");
      ParTensor out{t.pars, {}, t.collapsed};
      out.pars.erase(std::find(out.pars.begin(), out.pars.end(), p));
      out.tiles.resize(num_tiles(out.pars, params));
      for_each_tile(t.pars, out.pars, p, params,
                    [&](std::size_t pos, const auto &oc, std::int64_t k) {
        const DenseTensor &src = t.tiles[pos];
        if (e->dim >= src.rank()) throw ShapeError("comb: bad dim");
        DenseTensor &dst = out.tiles[tile_pos(out.pars, params, oc)];
        if (dst.shape.empty()) {
          auto shape = src.shape;
          shape[e->dim] *= params[p];
          dst = DenseTensor(shape);
        }
        std::vector<std::int64_t> off(src.rank(), 0);
        off[e->dim] = k * src.shape[e->dim];
        insert(dst, src, off);
      });
      return out;
    }
    case ExprOp::kRed: {
      if (!has_par(t.pars, p)) throw ShapeError("red: index not split");
      ParTensor out{t.pars, {}, t.collapsed};
      out.pars.erase(std::find(out.pars.begin(), out.pars.end(), p));
      out.tiles.resize(num_tiles(out.pars, params));
      for_each_tile(t.pars, out.pars, p, params,
                    [&](std::size_t pos, const auto &oc, std::int64_t) {
        DenseTensor &dst = out.tiles[tile_pos(out.pars, params, oc)];
        if (dst.shape.empty()) dst = DenseTensor(t.tiles[pos].shape);
        accumulate(dst, t.tiles[pos]);
      });
      return out;
    }
    case ExprOp::kRepl: {
      if (has_par(t.pars, p)) throw ShapeError("repl: index already split");
      ParTensor out{t.pars, {}, t.collapsed};
      out.pars.push_back(p);
      std::sort(out.pars.begin(), out.pars.end());
      out.tiles.resize(num_tiles(out.pars, params));
      for_each_tile(out.pars, t.pars, p, params,
                    [&](std::size_t pos, const auto &ic, std::int64_t) {
        out.tiles[pos] = t.tiles[tile_pos(t.pars, params, ic)];
      });
      return out;
    }
    default:
      break;
  }
  for (const ParTensor &k : kids) {
    if (k.pars != t.pars) throw ShapeError("operands split differently");
  }
  ParTensor out{t.pars, std::vector<DenseTensor>(t.tiles.size()), t.collapsed};
  if (e->op == ExprOp::kSum) {
    out.collapsed |= 1u << e->dim;
  } else if (e->op == ExprOp::kMatmul) {
    int rank = t.tiles[0].rank();
    std::uint32_t row = 1u << (rank - 2), col = 1u << (rank - 1);
    std::uint32_t a = kids[0].collapsed, b = kids[1].collapsed;
    out.collapsed = ((row - 1) & a & b) | (a & row) | (b & col);
  } else if (kids.size() == 2) {
    const ParTensor &a = kids[0], &b = kids[1];
    out.collapsed = a.collapsed & b.collapsed;
    const auto &sa = a.tiles[0].shape, &sb = b.tiles[0].shape;
    for (std::size_t d = 0; d < sa.size() && d < sb.size(); ++d) {
      if (sa[d] == sb[d]) continue;
      bool ok = (sa[d] == 1 && (a.collapsed >> d & 1)) ||
                (sb[d] == 1 && (b.collapsed >> d & 1));
      if (!ok) throw ShapeError("broadcast of a split dim");
    }
  }
  for (std::size_t pos = 0; pos < t.tiles.size(); ++pos) {
    std::vector<const DenseTensor *> in;
    for (const ParTensor &k : kids) in.push_back(&k.tiles[pos]);
    out.tiles[pos] =
        apply_op(compute_kind(e->op), in, e->dim, e->scale, precision);
  }
  return out;
}

EquivTestResult random_equiv_test(const Program &program,
                                  const ConcreteGraph &candidate,
                                  const EquivTestOptions &opts) {
  EquivTestResult result;
  result.equivalent = true;
  for (int trial = 0; trial < opts.trials; ++trial) {
    std::seed_seq seq{opts.seed, opts.candidate,
                      static_cast<std::uint64_t>(trial)};
    std::mt19937_64 rng(seq);
    std::vector<TensorSpec> specs;
    for (int id : program.inputs) specs.push_back(program.tensors[id]);
    TensorMap in = random_inputs(specs, rng);
    TensorMap expect = run_program(program, in, opts.precision);
    std::vector<DenseTensor> ordered;
    for (const TensorSpec &s : specs) ordered.push_back(in.at(s.name));
    std::vector<DenseTensor> got;
    try {
      got = run_concrete(candidate, ordered, opts.precision);
    } catch (const std::exception &ex) {
      result.equivalent = false;
      result.error = ex.what();
      return result;
    }
    for (std::size_t j = 0; j < program.outputs.size(); ++j) {
      const std::string &name = program.tensors[program.outputs[j]].name;
      double err = relative_error(got[j], expect.at(name));
      result.max_error = std::max(result.max_error, err);
      if (!(err <= opts.tolerance)) result.equivalent = false;
    }
  }
  return result;
}

}  // namespace symopt
