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

#include "symopt/generator.h"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "symopt/serialize.h"

namespace symopt {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Compact canonical form of a block graph, for the visited set.
std::string block_key(const BlockGraph &block) {
  BlockGraph c = canonicalize(block);
  std::ostringstream os;
  for (const BlockNode &n : c.nodes) {
    os << static_cast<int>(n.kind) << ':' << n.io << ':' << n.axis << ':'
       << n.scale.numerator() << '/' << n.scale.denominator();
    for (int in : n.inputs) os << ',' << in;
    os << ';';
  }
  return os.str();
}

}  // namespace

const char *extend_outcome_name(ExtendOutcome o) {
  switch (o) {
    case ExtendOutcome::kOk: return "ok";
    case ExtendOutcome::kDimMismatch: return "dim_mismatch";
    case ExtendOutcome::kNotSubexpr: return "not_subexpr";
    case ExtendOutcome::kInvalid: return "invalid";
  }
  return "?";
}

const char *generate_status_name(GenerateStatus s) {
  switch (s) {
    case GenerateStatus::kComplete: return "complete";
    case GenerateStatus::kNodeBudget: return "node_budget";
    case GenerateStatus::kTimeBudget: return "time_budget";
  }
  return "?";
}

GenerateStats &GenerateStats::operator+=(const GenerateStats &o) {
  explored += o.explored;
  pruned_dim += o.pruned_dim;
  pruned_expr += o.pruned_expr;
  pruned_structure += o.pruned_structure;
  duplicates += o.duplicates;
  return *this;
}

std::vector<OpKind> default_whitelist(const Program &program) {
  std::vector<OpKind> out;
  for (const ProgramOp &op : program.ops) out.push_back(op.kind);
  out.push_back(OpKind::kAccum);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Generator::Generator(const Program &program, SearchConfig config,
                     std::shared_ptr<AbstractPruner> pruner)
    : program_(program), config_(std::move(config)), io_(program.io()),
      pruner_(std::move(pruner)) {
  if (config_.whitelist.empty()) config_.whitelist = default_whitelist(program);
  std::sort(config_.whitelist.begin(), config_.whitelist.end());
  for (const ProgramOp &op : program.ops) {
    if (op.kind != OpKind::kScaleConst) continue;
    if (std::find(scales_.begin(), scales_.end(), op.scale) == scales_.end()) {
      scales_.push_back(op.scale);
    }
  }
  if (!pruner_) {
    pruner_ = std::make_shared<AbstractPruner>(program, config_.limits);
  }
}

PartialSGraph Generator::initial() const {
  PartialSGraph p;
  p.graph.io = io_;
  p.graph.num_inputs = static_cast<int>(program_.inputs.size());
  p.graph.block.num_grid_dims = config_.num_grid_dims;
  p.graph.constraints = config_.preset;
  for (int t = 0; t < p.graph.num_inputs; ++t) {
    p.graph.block.nodes.push_back({OpKind::kInputLoader, {}, t});
    int id = t;
    p.shapes.emplace_back();
    if (config_.prune_dims) {
      infer_node_shape(p.graph, id, p.shapes, p.graph.constraints,
                       p.shapes[id]);
    }
    p.abstract.push_back(abstract_expr(p.graph, id, p.abstract));
    p.phase.push_back(0);
  }
  return p;
}

ExtendOutcome Generator::try_extend(PartialSGraph &partial,
                                    const BlockNode &node) const {
  int id = static_cast<int>(partial.graph.block.nodes.size());
  if (static_cast<int>(node.inputs.size()) != op_arity(node.kind) ||
      node.kind == OpKind::kInputLoader || node.kind == OpKind::kOutputSaver) {
    return ExtendOutcome::kInvalid;
  }
  int phase = 0;
  for (int in : node.inputs) {
    if (in < 0 || in >= id) return ExtendOutcome::kInvalid;
    phase = std::max(phase, partial.phase[in]);
  }
  if (node.kind == OpKind::kAccum) {
    // Only loop-body data can be accumulated.
    if (phase != 0) return ExtendOutcome::kInvalid;
    phase = 1;
  }
  if (node.inputs.size() == 2 &&
      partial.phase[node.inputs[0]] != partial.phase[node.inputs[1]]) {
    return ExtendOutcome::kInvalid;
  }

  partial.graph.block.nodes.push_back(node);
  auto undo = [&](ExtendOutcome o) {
    partial.graph.block.nodes.pop_back();
    return o;
  };
  SymShape shape;
  ConstraintStore store = partial.graph.constraints;
  if (config_.prune_dims) {
    ShapeStatus st = infer_node_shape(partial.graph, id, partial.shapes, store,
                                      shape);
    if (st == ShapeStatus::kInvalid) return undo(ExtendOutcome::kInvalid);
    if (st == ShapeStatus::kDimMismatch) {
      return undo(ExtendOutcome::kDimMismatch);
    }
  }
  ExprPtr abs = abstract_expr(partial.graph, id, partial.abstract);
  if (config_.prune_expr && !pruner_->admits(abs)) {
    return undo(ExtendOutcome::kNotSubexpr);
  }
  partial.graph.constraints = std::move(store);
  partial.shapes.push_back(std::move(shape));
  partial.abstract.push_back(std::move(abs));
  partial.phase.push_back(phase);
  return ExtendOutcome::kOk;
}

std::optional<SGraph> Generator::try_close(
    const PartialSGraph &partial, const std::vector<int> &sources) const {
  if (sources.size() != program_.outputs.size()) return std::nullopt;
  SGraph g = partial.graph;
  int n = static_cast<int>(g.block.nodes.size());
  for (std::size_t k = 0; k < sources.size(); ++k) {
    if (sources[k] < 0 || sources[k] >= n) return std::nullopt;
    if (!pruner_->computes_output(partial.abstract[sources[k]], k)) {
      return std::nullopt;
    }
    g.block.nodes.push_back(
        {OpKind::kOutputSaver, {sources[k]}, g.num_inputs + static_cast<int>(k)});
  }
  std::vector<bool> used(g.block.nodes.size(), false);
  for (const BlockNode &nd : g.block.nodes) {
    for (int in : nd.inputs) used[in] = true;
  }
  for (int id = 0; id < n; ++id) {
    if (!used[id]) return std::nullopt;
  }
  if (!structurally_valid(g)) return std::nullopt;
  g.constraints = config_.preset;
  if (collect_constraints(g) != ShapeStatus::kOk) return std::nullopt;
  return g;
}

std::vector<BlockNode> Generator::extensions(
    const PartialSGraph &partial) const {
  const auto &nodes = partial.graph.block.nodes;
  int n = static_cast<int>(nodes.size());
  int rank = program_.rank();
  std::vector<BlockNode> out;
  for (OpKind kind : config_.whitelist) {
    if (op_arity(kind) == 2) {
      for (int a = 0; a < n; ++a) {
        for (int b = is_commutative(kind) ? a : 0; b < n; ++b) {
          out.push_back({kind, {a, b}});
        }
      }
      continue;
    }
    for (int a = 0; a < n; ++a) {
      if (kind == OpKind::kSumData) {
        for (int d = 0; d < rank; ++d) out.push_back({kind, {a}, -1, d});
      } else if (kind == OpKind::kScaleConst) {
        for (const Rational &c : scales_) {
          out.push_back({kind, {a}, -1, -1, c});
        }
      } else {
        out.push_back({kind, {a}});
      }
    }
  }
  return out;
}

bool Generator::out_of_budget() {
  if (result_.status != GenerateStatus::kComplete) return true;
  if (result_.stats.explored >= config_.node_budget) {
    result_.status = GenerateStatus::kNodeBudget;
    return true;
  }
  if ((result_.stats.explored & 1023) == 0 &&
      now_seconds() - start_ > config_.time_budget) {
    result_.status = GenerateStatus::kTimeBudget;
    return true;
  }
  return false;
}

void Generator::close_all(const PartialSGraph &partial) {
  int n = static_cast<int>(partial.graph.block.nodes.size());
  std::size_t outs = program_.outputs.size();
  if (n + static_cast<int>(outs) > config_.max_block_ops) return;
  std::vector<std::vector<int>> choices(outs);
  for (std::size_t k = 0; k < outs; ++k) {
    for (int id = 0; id < n; ++id) {
      if (pruner_->computes_output(partial.abstract[id], k)) {
        choices[k].push_back(id);
      }
    }
    if (choices[k].empty()) return;
  }
  std::vector<std::size_t> pos(outs, 0);
  while (true) {
    std::vector<int> sources;
    for (std::size_t k = 0; k < outs; ++k) sources.push_back(choices[k][pos[k]]);
    if (auto g = try_close(partial, sources)) {
      std::string key = structure_key(*g);
      if (!config_.dedup || found_.insert(key).second) {
        result_.graphs.push_back(std::move(*g));
      }
    }
    std::size_t k = 0;
    while (k < outs && ++pos[k] == choices[k].size()) pos[k++] = 0;
    if (k == outs) break;
  }
}

void Generator::dfs(const PartialSGraph &partial) {
  close_all(partial);
  int n = static_cast<int>(partial.graph.block.nodes.size());
  if (n + static_cast<int>(program_.outputs.size()) >= config_.max_block_ops) {
    return;
  }
  for (const BlockNode &node : extensions(partial)) {
    if (out_of_budget()) return;
    ++result_.stats.explored;
    const auto &nodes = partial.graph.block.nodes;
    if (std::find(nodes.begin(), nodes.end(), node) != nodes.end()) {
      ++result_.stats.duplicates;
      continue;
    }
    PartialSGraph child = partial;
    switch (try_extend(child, node)) {
      case ExtendOutcome::kOk: break;
      case ExtendOutcome::kDimMismatch: ++result_.stats.pruned_dim; continue;
      case ExtendOutcome::kNotSubexpr: ++result_.stats.pruned_expr; continue;
      case ExtendOutcome::kInvalid: ++result_.stats.pruned_structure; continue;
    }
    if (config_.dedup && !visited_.insert(block_key(child.graph.block)).second) {
      ++result_.stats.duplicates;
      continue;
    }
    dfs(child);
  }
}

GenerateResult Generator::run() {
  result_ = {};
  visited_.clear();
  found_.clear();
  start_ = now_seconds();
  PartialSGraph root = initial();
  visited_.insert(block_key(root.graph.block));
  dfs(root);
  return result_;
}

GenerateResult generate(const Program &program, const SearchConfig &config) {
  Generator g(program, config);
  return g.run();
}

}  // namespace symopt
