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
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "symopt/expr.h"
#include "symopt/graph_ir.h"
#include "symopt/verifier.h"

namespace symopt {

struct SearchConfig {
  int max_block_ops = 9;  // all block nodes, loaders and savers included
  int num_grid_dims = 1;
  std::vector<OpKind> whitelist;  // empty: default_whitelist(program)
  bool dedup = true;
  bool prune_dims = true;
  bool prune_expr = true;
  std::uint64_t node_budget = 10'000'000;
  double time_budget = 600.0;  // seconds
  SaturationLimits limits;     // for the abstract-expression e-graph
  // Mapping variables fixed before the search starts.
  ConstraintStore preset;
};

// Compute operators of the program in vocabulary order, plus Accum.
std::vector<OpKind> default_whitelist(const Program &program);

/// Block graph under construction. Loaders are always present; savers are
/// only added when the partial is closed.
struct PartialSGraph {
  SGraph graph;
  std::vector<SymShape> shapes;
  std::vector<ExprPtr> abstract;  // see abstract_exprs()
  std::vector<int> phase;
};

enum class ExtendOutcome { kOk, kDimMismatch, kNotSubexpr, kInvalid };
const char *extend_outcome_name(ExtendOutcome o);

struct GenerateStats {
  std::uint64_t explored = 0;  // extensions tried
  std::uint64_t pruned_dim = 0;
  std::uint64_t pruned_expr = 0;
  std::uint64_t pruned_structure = 0;
  std::uint64_t duplicates = 0;  // repeated partials and common subexpressions
  GenerateStats &operator+=(const GenerateStats &o);
};

enum class GenerateStatus { kComplete, kNodeBudget, kTimeBudget };
const char *generate_status_name(GenerateStatus s);

struct GenerateResult {
  std::vector<SGraph> graphs;  // constraints collected, in discovery order
  GenerateStats stats;
  GenerateStatus status = GenerateStatus::kComplete;
};

class Generator {
 public:
  // A shared pruner must have been built for the same program.
  Generator(const Program &program, SearchConfig config,
            std::shared_ptr<AbstractPruner> pruner = nullptr);

  PartialSGraph initial() const;

  // Appends `node` to `partial` in place when the outcome is kOk.
  ExtendOutcome try_extend(PartialSGraph &partial, const BlockNode &node) const;

  // Saves node `sources[k]` as output k. Returns the finished graph if it
  // type-checks, has no dead nodes and computes the program outputs.
  std::optional<SGraph> try_close(const PartialSGraph &partial,
                                  const std::vector<int> &sources) const;

  GenerateResult run();

  const AbstractPruner &pruner() const { return *pruner_; }

 private:
  std::vector<BlockNode> extensions(const PartialSGraph &partial) const;
  void dfs(const PartialSGraph &partial);
  void close_all(const PartialSGraph &partial);
  bool out_of_budget();

  const Program &program_;
  SearchConfig config_;
  std::vector<TensorSpec> io_;
  std::vector<Rational> scales_;
  std::shared_ptr<AbstractPruner> pruner_;
  GenerateResult result_;
  std::set<std::string> visited_;
  std::set<std::string> found_;
  double start_ = 0.0;
};

GenerateResult generate(const Program &program, const SearchConfig &config);

}  // namespace symopt
