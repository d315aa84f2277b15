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

#include "symopt/egraph.h"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace symopt {

namespace {

constexpr const char *kNodeOpNames[] = {
    "var",    "matmul", "sum",  "add",  "mul",  "div", "exp",
    "silu",   "square", "sqrt", "scale", "part", "comb", "red",
    "repl",   "dim",    "par",  "const",
};

bool is_symbol(NodeOp op) {
  return op == NodeOp::kDimSym || op == NodeOp::kParSym ||
         op == NodeOp::kConstSym;
}

int max_var(const Pattern &p) {
  int m = p.var;
  for (const Pattern &k : p.kids) m = std::max(m, max_var(k));
  return m;
}

}  // namespace

NodeOp to_node_op(ExprOp op) { return static_cast<NodeOp>(op); }

const char *node_op_name(NodeOp op) {
  return kNodeOpNames[static_cast<int>(op)];
}

const char *stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::kSaturated: return "saturated";
    case StopReason::kGoal: return "goal";
    case StopReason::kNodeLimit: return "node_limit";
    case StopReason::kIterLimit: return "iter_limit";
    case StopReason::kTimeLimit: return "time_limit";
  }
  return "?";
}

std::size_t ENodeHash::operator()(const ENode &n) const {
  std::size_t h = static_cast<std::size_t>(n.op) * 0x9e3779b97f4a7c15ULL;
  h ^= std::hash<std::int64_t>()(n.leaf) + 0x9e3779b9 + (h << 6) + (h >> 2);
  for (EClassId k : n.kids) {
    h ^= std::hash<EClassId>()(k) + 0x9e3779b9 + (h << 6) + (h >> 2);
  }
  return h;
}

EGraph::EGraph(int rank, std::map<std::string, std::uint32_t> collapsed_vars)
    : rank_(rank), collapsed_vars_(std::move(collapsed_vars)) {}

std::int64_t EGraph::intern_var(const std::string &name) {
  auto [it, fresh] = var_ids_.emplace(name, var_names_.size());
  if (fresh) var_names_.push_back(name);
  return it->second;
}

std::int64_t EGraph::intern_const(const Rational &c) {
  for (std::size_t i = 0; i < consts_.size(); ++i) {
    if (consts_[i] == c) return static_cast<std::int64_t>(i);
  }
  consts_.push_back(c);
  return static_cast<std::int64_t>(consts_.size() - 1);
}

EClassId EGraph::find(EClassId id) const {
  EClassId root = id;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[id] != root) {
    EClassId next = parent_[id];
    parent_[id] = root;
    id = next;
  }
  return root;
}

ENode EGraph::canonical(const ENode &n) const {
  ENode c = n;
  for (EClassId &k : c.kids) k = find(k);
  return c;
}

std::uint32_t EGraph::compute_collapsed(const ENode &n) const {
  auto kid = [&](int i) { return collapsed_[find(n.kids[i])]; };
  switch (n.op) {
    case NodeOp::kVar: {
      auto it = collapsed_vars_.find(var_names_[n.leaf]);
      return it == collapsed_vars_.end() ? 0 : it->second;
    }
    case NodeOp::kMatmul: {
      std::uint32_t row = 1u << (rank_ - 2), col = 1u << (rank_ - 1);
      std::uint32_t lead = (row - 1) & kid(0) & kid(1);
      return lead | (kid(0) & row) | (kid(1) & col);
    }
    case NodeOp::kSum:
      return kid(0) | (1u << leaf_value(n.kids[1]));
    case NodeOp::kAdd:
    case NodeOp::kMul:
    case NodeOp::kDiv:
      return kid(0) & kid(1);
    case NodeOp::kDimSym:
    case NodeOp::kParSym:
    case NodeOp::kConstSym:
      return 0;
    default:
      return kid(0);
  }
}

std::optional<EClassId> EGraph::lookup(const ENode &n) const {
  auto it = hashcons_.find(canonical(n));
  if (it == hashcons_.end()) return std::nullopt;
  return find(it->second);
}

EClassId EGraph::add(ENode node) {
  node = canonical(node);
  if (auto hit = lookup(node)) return *hit;
  auto id = static_cast<EClassId>(parent_.size());
  parent_.push_back(id);
  collapsed_.push_back(compute_collapsed(node));
  class_nodes_.push_back({node});
  hashcons_.emplace(std::move(node), id);
  return id;
}

EClassId EGraph::add_expr(const ExprPtr &e) {
  if (e->op == ExprOp::kVar) return add({NodeOp::kVar, intern_var(e->name), {}});
  ENode n{to_node_op(e->op), 0, {}};
  for (const ExprPtr &k : e->kids) n.kids.push_back(add_expr(k));
  if (expr_has_dim(e->op)) n.kids.push_back(add({NodeOp::kDimSym, e->dim, {}}));
  if (expr_has_par(e->op)) n.kids.push_back(add({NodeOp::kParSym, e->par, {}}));
  if (e->op == ExprOp::kScale) {
    n.kids.push_back(add({NodeOp::kConstSym, intern_const(e->scale), {}}));
  }
  return add(std::move(n));
}

std::optional<EClassId> EGraph::lookup_expr(const ExprPtr &e) const {
  if (e->op == ExprOp::kVar) {
    auto it = var_ids_.find(e->name);
    if (it == var_ids_.end()) return std::nullopt;
    return lookup({NodeOp::kVar, it->second, {}});
  }
  ENode n{to_node_op(e->op), 0, {}};
  for (const ExprPtr &k : e->kids) {
    auto id = lookup_expr(k);
    if (!id) return std::nullopt;
    n.kids.push_back(*id);
  }
  auto sym = [&](NodeOp op, std::int64_t leaf) -> bool {
    auto id = lookup({op, leaf, {}});
    if (id) n.kids.push_back(*id);
    return id.has_value();
  };
  if (expr_has_dim(e->op) && !sym(NodeOp::kDimSym, e->dim)) return std::nullopt;
  if (expr_has_par(e->op) && !sym(NodeOp::kParSym, e->par)) return std::nullopt;
  if (e->op == ExprOp::kScale) {
    auto it = std::find(consts_.begin(), consts_.end(), e->scale);
    if (it == consts_.end()) return std::nullopt;
    if (!sym(NodeOp::kConstSym, it - consts_.begin())) return std::nullopt;
  }
  return lookup(n);
}

bool EGraph::merge(EClassId a, EClassId b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (class_nodes_[a].size() < class_nodes_[b].size()) std::swap(a, b);
  parent_[b] = a;
  auto &into = class_nodes_[a];
  auto &from = class_nodes_[b];
  into.insert(into.end(), from.begin(), from.end());
  from.clear();
  from.shrink_to_fit();
  collapsed_[a] |= collapsed_[b];
  dirty_ = true;
  return true;
}

void EGraph::recompute_collapsed() {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t id = 0; id < parent_.size(); ++id) {
      if (parent_[id] != static_cast<EClassId>(id)) continue;
      std::uint32_t m = collapsed_[id];
      for (const ENode &n : class_nodes_[id]) m |= compute_collapsed(n);
      if (m != collapsed_[id]) {
        collapsed_[id] = m;
        changed = true;
      }
    }
  }
}

void EGraph::rebuild() {
  if (!dirty_) return;
  bool changed = true;
  while (changed) {
    changed = false;
    hashcons_.clear();
    for (std::size_t id = 0; id < parent_.size(); ++id) {
      if (parent_[id] != static_cast<EClassId>(id)) continue;
      const std::vector<ENode> nodes = class_nodes_[id];
      for (const ENode &n : nodes) {
        ENode c = canonical(n);
        auto [it, fresh] = hashcons_.emplace(c, static_cast<EClassId>(id));
        if (!fresh && find(it->second) != find(static_cast<EClassId>(id))) {
          merge(it->second, static_cast<EClassId>(id));
          changed = true;
        }
      }
    }
  }
  // Deduplicate the canonical nodes of each class.
  for (std::size_t id = 0; id < parent_.size(); ++id) {
    if (parent_[id] != static_cast<EClassId>(id)) continue;
    auto &nodes = class_nodes_[id];
    for (ENode &n : nodes) n = canonical(n);
    std::sort(nodes.begin(), nodes.end(), [](const ENode &x, const ENode &y) {
      return std::tie(x.op, x.leaf, x.kids) < std::tie(y.op, y.leaf, y.kids);
    });
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  }
  for (auto &[node, id] : hashcons_) id = find(id);
  recompute_collapsed();
  dirty_ = false;
}

std::uint32_t EGraph::collapsed(EClassId id) const {
  return collapsed_[find(id)];
}

std::size_t EGraph::num_classes() const {
  std::size_t n = 0;
  for (std::size_t id = 0; id < parent_.size(); ++id) {
    if (parent_[id] == static_cast<EClassId>(id)) ++n;
  }
  return n;
}

std::vector<EClassId> EGraph::class_ids() const {
  std::vector<EClassId> out;
  for (std::size_t id = 0; id < parent_.size(); ++id) {
    if (find(static_cast<EClassId>(id)) == static_cast<EClassId>(id)) {
      out.push_back(static_cast<EClassId>(id));
    }
  }
  return out;
}

const std::vector<ENode> &EGraph::nodes(EClassId id) const {
  return class_nodes_[find(id)];
}

std::int64_t EGraph::leaf_value(EClassId id) const {
  for (const ENode &n : class_nodes_[find(id)]) {
    if (is_symbol(n.op)) return n.leaf;
  }
  throw std::logic_error("e-class is not a symbol");
}

Rational EGraph::const_value(EClassId id) const {
  for (const ENode &n : class_nodes_[find(id)]) {
    if (n.op == NodeOp::kConstSym) return consts_[n.leaf];
  }
  throw std::logic_error("e-class is not a constant");
}

std::vector<Subst> EGraph::match_at(const Pattern &p, EClassId id,
                                    const Subst &s) const {
  id = find(id);
  if (p.var >= 0) {
    if (s[p.var] < 0) {
      Subst t = s;
      t[p.var] = id;
      return {t};
    }
    if (find(s[p.var]) == id) return {s};
    return {};
  }
  std::vector<Subst> out;
  for (const ENode &n : class_nodes_[id]) {
    if (n.op != p.op || n.kids.size() != p.kids.size()) continue;
    if (is_symbol(n.op) && n.leaf != p.leaf) continue;
    std::vector<Subst> states = {s};
    for (std::size_t k = 0; k < p.kids.size() && !states.empty(); ++k) {
      std::vector<Subst> next;
      for (const Subst &st : states) {
        auto more = match_at(p.kids[k], n.kids[k], st);
        next.insert(next.end(), more.begin(), more.end());
      }
      states = std::move(next);
    }
    out.insert(out.end(), states.begin(), states.end());
  }
  return out;
}

std::vector<Subst> EGraph::match(const Pattern &p, EClassId root) const {
  Subst s(max_var(p) + 1, -1);
  return match_at(p, root, s);
}

bool EGraph::guards_hold(const RewriteRule &rule, const Subst &s) const {
  for (const Guard &g : rule.guards) {
    switch (g.kind) {
      case Guard::kNeq:
        if (find(s[g.a]) == find(s[g.b])) return false;
        break;
      case Guard::kSameCollapse:
        if (collapsed(s[g.a]) != collapsed(s[g.b])) return false;
        break;
      case Guard::kCovers:
        if (collapsed(s[g.a]) & ~collapsed(s[g.b])) return false;
        break;
      case Guard::kCollapsed:
      case Guard::kNotCollapsed: {
        std::int64_t d = g.fixed_dim >= 0 ? g.fixed_dim : leaf_value(s[g.b]);
        bool c = collapsed(s[g.a]) & (1u << d);
        if (c != (g.kind == Guard::kCollapsed)) return false;
        break;
      }
    }
  }
  return true;
}

EClassId EGraph::instantiate(const Pattern &p, const Subst &s) {
  if (p.var >= 0) return s[p.var];
  ENode n{p.op, p.leaf, {}};
  for (const Pattern &k : p.kids) n.kids.push_back(instantiate(k, s));
  return add(std::move(n));
}

SaturationStats EGraph::saturate(const std::vector<RewriteRule> &rules,
                                 const SaturationLimits &limits,
                                 const std::function<bool()> &goal) {
  using Clock = std::chrono::steady_clock;
  auto start = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  SaturationStats stats;
  rebuild();
  auto finish = [&](StopReason r) {
    rebuild();
    stats.reason = r;
    stats.nodes = num_nodes();
    stats.classes = num_classes();
    return stats;
  };
  if (goal && goal()) return finish(StopReason::kGoal);

  struct Match {
    const RewriteRule *rule;
    EClassId root;
    Subst subst;
  };
  for (;;) {
    if (stats.iterations >= limits.max_iters) {
      return finish(StopReason::kIterLimit);
    }
    ++stats.iterations;
    std::vector<Match> matches;
    std::vector<EClassId> roots = class_ids();
    for (const RewriteRule &rule : rules) {
      for (EClassId root : roots) {
        for (Subst &s : match(rule.lhs, root)) {
          if (guards_hold(rule, s)) matches.push_back({&rule, root, std::move(s)});
        }
      }
      if (elapsed() > limits.max_seconds) return finish(StopReason::kTimeLimit);
    }
    std::size_t before = num_nodes();
    bool merged = false;
    for (const Match &m : matches) {
      EClassId rhs = instantiate(m.rule->rhs, m.subst);
      if (merge(m.root, rhs)) {
        merged = true;
        if (trace_on_) trace_.push_back(m.rule->name);
      }
      if (num_nodes() > limits.max_nodes) {
        return finish(StopReason::kNodeLimit);
      }
    }
    rebuild();
    if (goal && goal()) return finish(StopReason::kGoal);
    if (!merged && num_nodes() == before) {
      return finish(StopReason::kSaturated);
    }
    if (elapsed() > limits.max_seconds) return finish(StopReason::kTimeLimit);
  }
}

}  // namespace symopt
