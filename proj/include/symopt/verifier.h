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

#include <map>
#include <string>
#include <vector>

#include "symopt/egraph.h"
#include "symopt/expr.h"
#include "symopt/graph_ir.h"

namespace symopt {

// One term per program output, over the program inputs.
std::vector<ExprPtr> encode_program(const Program &program);

/// One term per OutputSaver, in io order. Loaders split by the grid dims and
/// then the forloop (replicating where the mapping leaves a dim unsplit),
/// Accum reduces over the forloop, and savers combine over the grid dims
/// with the last grid dim innermost. A graph without an Accum has no loop
/// dim in its terms.
std::vector<ExprPtr> encode_sgraph(const SGraph &graph,
                                   const MappingAssignment &mapping);

// Term of node `id` given the terms of the earlier nodes, with parallel
// operators erased and Accum as the identity; nullptr for savers.
ExprPtr abstract_expr(const SGraph &graph, int id,
                      const std::vector<ExprPtr> &values);

// Term of every block node with parallel operators erased and Accum as
// the identity; nullptr for savers.
std::vector<ExprPtr> abstract_exprs(const SGraph &graph);

// Size-1 dims of every io tensor, keyed by name.
std::map<std::string, std::uint32_t> collapsed_dims(
    const std::vector<TensorSpec> &tensors);

struct VerifyOptions {
  SaturationLimits limits;
  bool inverse_rules = true;
  bool trace = false;
};

enum class Verdict { kEquivalent, kNotProven };
const char *verdict_name(Verdict v);

struct VerifyResult {
  Verdict verdict = Verdict::kNotProven;
  SaturationStats stats;
  std::vector<std::string> trace;  // rule names of merges, when enabled
  double seconds = 0.0;
  bool admissible = true;  // false: the mapping breaks its constraints
};

/// Pairwise equivalence of terms under the axioms.
VerifyResult verify_exprs(const std::vector<ExprPtr> &targets,
                          const std::vector<ExprPtr> &candidates, int rank,
                          const std::map<std::string, std::uint32_t> &collapsed,
                          const VerifyOptions &opts = {});

VerifyResult verify(const Program &program, const SGraph &graph,
                    const MappingAssignment &mapping,
                    const VerifyOptions &opts = {});

/// Checks whether a candidate intermediate can occur in some rewriting of
/// the program under the compute-only axioms. If saturation hits a limit,
/// every intermediate is admitted.
class AbstractPruner {
 public:
  AbstractPruner(const Program &program, const SaturationLimits &limits);

  bool admits(const ExprPtr &abstract) const;
  // Whether `abstract` is in the class of program output `k`.
  bool computes_output(const ExprPtr &abstract, std::size_t k) const;
  bool complete() const { return complete_; }
  const SaturationStats &stats() const { return stats_; }

 private:
  EGraph graph_;
  std::vector<EClassId> outputs_;
  SaturationStats stats_;
  bool complete_ = false;
};

}  // namespace symopt
