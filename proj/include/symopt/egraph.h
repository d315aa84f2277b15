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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "symopt/expr.h"

namespace symopt {

// E-node operators: the Expr operators plus leaf symbols. Data dims,
// parallel dims and scale constants are children of their operators, so
// rule variables can bind them.
enum class NodeOp : std::uint8_t {
  kVar,
  kMatmul,
  kSum,
  kAdd,
  kMul,
  kDiv,
  kExp,
  kSilu,
  kSquare,
  kSqrt,
  kScale,
  kPart,
  kComb,
  kRed,
  kRepl,
  kDimSym,
  kParSym,
  kConstSym,
};

NodeOp to_node_op(ExprOp op);
const char *node_op_name(NodeOp op);

using EClassId = std::int32_t;

struct ENode {
  NodeOp op;
  std::int64_t leaf = 0;  // var name id, dim, par or constant id
  std::vector<EClassId> kids;
  bool operator==(const ENode &) const = default;
};

struct ENodeHash {
  std::size_t operator()(const ENode &n) const;
};

/// Rule pattern. `var >= 0` makes this a pattern variable; otherwise it
/// matches an e-node with operator `op` (and `leaf` for symbols).
struct Pattern {
  int var = -1;
  NodeOp op = NodeOp::kVar;
  std::int64_t leaf = 0;
  std::vector<Pattern> kids;
};

struct Guard {
  // kSameCollapse: both classes have the same size-1 dims. kCovers: every
  // size-1 dim of `a` is a size-1 dim of `b`.
  enum Kind { kNeq, kCollapsed, kNotCollapsed, kSameCollapse, kCovers };
  Kind kind;
  int a;              // pattern variable
  int b = -1;         // pattern variable (a dim symbol for collapse guards)
  int fixed_dim = -1;  // collapse guard on a fixed dim instead of `b`
};

struct RewriteRule {
  std::string name;
  Pattern lhs;
  Pattern rhs;
  std::vector<Guard> guards;
  std::vector<std::string> var_names;
};

struct SaturationLimits {
  std::size_t max_nodes = 100000;
  int max_iters = 30;
  double max_seconds = 10.0;
};

enum class StopReason { kSaturated, kGoal, kNodeLimit, kIterLimit, kTimeLimit };
const char *stop_reason_name(StopReason r);

struct SaturationStats {
  StopReason reason = StopReason::kSaturated;
  int iterations = 0;
  std::size_t nodes = 0;
  std::size_t classes = 0;
};

using Subst = std::vector<EClassId>;  // indexed by pattern variable

class EGraph {
 public:
  // All terms have data rank `rank`. `collapsed_vars` gives, per tensor
  // variable name, the bitmask of its data dims of size 1.
  explicit EGraph(int rank = 2,
                  std::map<std::string, std::uint32_t> collapsed_vars = {});

  int rank() const { return rank_; }

  EClassId add(ENode node);
  EClassId add_expr(const ExprPtr &e);
  // Class of `e` if every node of it is already represented.
  std::optional<EClassId> lookup_expr(const ExprPtr &e) const;

  EClassId find(EClassId id) const;
  bool merge(EClassId a, EClassId b);
  void rebuild();

  SaturationStats saturate(const std::vector<RewriteRule> &rules,
                           const SaturationLimits &limits,
                           const std::function<bool()> &goal = {});

  std::vector<Subst> match(const Pattern &p, EClassId root) const;
  bool guards_hold(const RewriteRule &rule, const Subst &s) const;
  EClassId instantiate(const Pattern &p, const Subst &s);

  std::uint32_t collapsed(EClassId id) const;
  std::size_t num_nodes() const { return hashcons_.size(); }
  std::size_t num_classes() const;
  std::vector<EClassId> class_ids() const;
  const std::vector<ENode> &nodes(EClassId id) const;
  std::int64_t leaf_value(EClassId id) const;  // symbol classes only
  Rational const_value(EClassId id) const;

  // Rule names of successful merges, in order, when enabled.
  void enable_trace(bool on) { trace_on_ = on; }
  const std::vector<std::string> &trace() const { return trace_; }

 private:
  ENode canonical(const ENode &n) const;
  std::uint32_t compute_collapsed(const ENode &n) const;
  std::int64_t intern_var(const std::string &name);
  std::int64_t intern_const(const Rational &c);
  std::vector<Subst> match_at(const Pattern &p, EClassId id,
                              const Subst &s) const;
  std::optional<EClassId> lookup(const ENode &n) const;
  void recompute_collapsed();

  int rank_;
  std::map<std::string, std::uint32_t> collapsed_vars_;
  std::vector<std::string> var_names_;
  std::map<std::string, std::int64_t> var_ids_;
  std::vector<Rational> consts_;
  mutable std::vector<EClassId> parent_;
  std::vector<std::vector<ENode>> class_nodes_;
  std::vector<std::uint32_t> collapsed_;
  std::unordered_map<ENode, EClassId, ENodeHash> hashcons_;
  bool dirty_ = false;
  bool trace_on_ = false;
  std::vector<std::string> trace_;
};

}  // namespace symopt
