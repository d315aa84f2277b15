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

#include "symopt/verifier.h"

#include <chrono>

#include "symopt/axioms.h"

namespace symopt {

namespace {

ExprPtr compute_expr(OpKind kind, std::vector<ExprPtr> in, int axis,
                     Rational scale) {
  switch (kind) {
    case OpKind::kMatmul: return ex::matmul(in[0], in[1]);
    case OpKind::kExp: return ex::exp(in[0]);
    case OpKind::kSilu: return ex::silu(in[0]);
    case OpKind::kSquare: return ex::square(in[0]);
    case OpKind::kSqrt: return ex::sqrt(in[0]);
    case OpKind::kDiv: return ex::div(in[0], in[1]);
    case OpKind::kMul: return ex::mul(in[0], in[1]);
    case OpKind::kAdd: return ex::add(in[0], in[1]);
    case OpKind::kSumData: return ex::sum(in[0], axis);
    case OpKind::kScaleConst: return ex::scale(in[0], scale);
    default: throw std::invalid_argument("not a compute op");
  }
}

int mapped_dim(const SGraph &g, int io, int par, const MappingAssignment &m) {
  for (std::size_t d = 0; d < g.io[io].dims.size(); ++d) {
    if (m.get(map_var(io, static_cast<int>(d), par))) return static_cast<int>(d);
  }
  return -1;
}

}  // namespace

std::vector<ExprPtr> encode_program(const Program &program) {
  std::vector<ExprPtr> val(program.tensors.size());
  for (int id : program.inputs) val[id] = ex::var(program.tensors[id].name);
  for (const ProgramOp &op : program.ops) {
    std::vector<ExprPtr> in;
    for (int k : op.inputs) in.push_back(val[k]);
    val[op.output] = compute_expr(op.kind, in, op.axis, op.scale);
  }
  std::vector<ExprPtr> out;
  for (int id : program.outputs) out.push_back(val[id]);
  return out;
}

std::vector<ExprPtr> encode_sgraph(const SGraph &g, const MappingAssignment &m) {
  const BlockGraph &bg = g.block;
  std::vector<int> loader_pars = bg.grid_pars();
  bool loop = splits_forloop(g, m);
  if (loop) loader_pars.push_back(kForloop);
  std::vector<ExprPtr> val(bg.nodes.size());
  std::vector<ExprPtr> outs;
  for (std::size_t id = 0; id < bg.nodes.size(); ++id) {
    const BlockNode &n = bg.nodes[id];
    std::vector<ExprPtr> in;
    for (int k : n.inputs) in.push_back(val[k]);
    switch (n.kind) {
      case OpKind::kInputLoader: {
        ExprPtr e = ex::var(g.io[n.io].name);
        for (int p : loader_pars) {
          int d = mapped_dim(g, n.io, p, m);
          e = d >= 0 ? ex::part(e, d, p) : ex::repl(e, p);
        }
        val[id] = e;
        break;
      }
      case OpKind::kAccum:
        val[id] = loop ? ex::red(in[0], kForloop) : in[0];
        break;
      case OpKind::kOutputSaver: {
        ExprPtr e = in[0];
        std::vector<int> grid = bg.grid_pars();
        for (auto p = grid.rbegin(); p != grid.rend(); ++p) {
          int d = mapped_dim(g, n.io, *p, m);
          if (d >= 0) e = ex::comb(e, d, *p);
        }
        outs.push_back(e);
        break;
      }
      default:
        val[id] = compute_expr(n.kind, in, n.axis, n.scale);
    }
  }
  return outs;
}

ExprPtr abstract_expr(const SGraph &g, int id,
                      const std::vector<ExprPtr> &values) {
  const BlockNode &n = g.block.nodes[id];
  std::vector<ExprPtr> in;
  for (int k : n.inputs) in.push_back(values[k]);
  switch (n.kind) {
    case OpKind::kInputLoader: return ex::var(g.io[n.io].name);
    case OpKind::kAccum: return in[0];
    case OpKind::kOutputSaver: return nullptr;
    default: return compute_expr(n.kind, in, n.axis, n.scale);
  }
}

std::vector<ExprPtr> abstract_exprs(const SGraph &g) {
  std::vector<ExprPtr> val(g.block.nodes.size());
  for (std::size_t id = 0; id < val.size(); ++id) {
    val[id] = abstract_expr(g, static_cast<int>(id), val);
  }
  return val;
}

std::map<std::string, std::uint32_t> collapsed_dims(
    const std::vector<TensorSpec> &tensors) {
  std::map<std::string, std::uint32_t> out;
  for (const TensorSpec &t : tensors) {
    std::uint32_t m = 0;
    for (std::size_t d = 0; d < t.dims.size(); ++d) {
      if (t.dims[d] == 1) m |= 1u << d;
    }
    out[t.name] = m;
  }
  return out;
}

const char *verdict_name(Verdict v) {
  return v == Verdict::kEquivalent ? "equivalent" : "not_proven";
}

VerifyResult verify_exprs(const std::vector<ExprPtr> &targets,
                          const std::vector<ExprPtr> &candidates, int rank,
                          const std::map<std::string, std::uint32_t> &collapsed,
                          const VerifyOptions &opts) {
  auto start = std::chrono::steady_clock::now();
  VerifyResult result;
  if (targets.size() != candidates.size()) return result;
  EGraph g(rank, collapsed);
  g.enable_trace(opts.trace);
  std::vector<std::pair<EClassId, EClassId>> pairs;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    pairs.emplace_back(g.add_expr(targets[k]), g.add_expr(candidates[k]));
  }
  auto proven = [&] {
    for (auto [a, b] : pairs) {
      if (g.find(a) != g.find(b)) return false;
    }
    return true;
  };
  AxiomOptions ao;
  ao.rank = rank;
  ao.inverse_rules = opts.inverse_rules;
  result.stats = g.saturate(build_axioms(ao), opts.limits, proven);
  if (proven()) result.verdict = Verdict::kEquivalent;
  result.trace = g.trace();
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

VerifyResult verify(const Program &program, const SGraph &graph,
                    const MappingAssignment &mapping,
                    const VerifyOptions &opts) {
  // Terms cannot express a parallel dim splitting two data dims.
  if (!satisfies_linear(graph, mapping) || !satisfies_constraints(graph, mapping)) {
    VerifyResult r;
    r.admissible = false;
    return r;
  }
  return verify_exprs(encode_program(program), encode_sgraph(graph, mapping),
                      program.rank(), collapsed_dims(program.io()), opts);
}

AbstractPruner::AbstractPruner(const Program &program,
                               const SaturationLimits &limits)
    : graph_(program.rank(), collapsed_dims(program.io())) {
  for (const ExprPtr &t : encode_program(program)) {
    outputs_.push_back(graph_.add_expr(t));
  }
  AxiomOptions ao;
  ao.rank = program.rank();
  ao.compute_only = true;
  stats_ = graph_.saturate(build_axioms(ao), limits);
  complete_ = stats_.reason == StopReason::kSaturated;
}

bool AbstractPruner::admits(const ExprPtr &abstract) const {
  if (!complete_) return true;
  return graph_.lookup_expr(abstract).has_value();
}

bool AbstractPruner::computes_output(const ExprPtr &abstract,
                                     std::size_t k) const {
  if (!complete_) return true;
  auto id = graph_.lookup_expr(abstract);
  return id && graph_.find(*id) == graph_.find(outputs_.at(k));
}

}  // namespace symopt
