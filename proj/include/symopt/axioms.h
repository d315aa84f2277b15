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

#include <stdexcept>
#include <string>
#include <vector>

#include "symopt/egraph.h"

namespace symopt {

enum class AxiomGroup { kCompute, kParallel, kInverse };
const char *axiom_group_name(AxiomGroup g);

/// Textual axiom. `text` is "lhs => rhs" or "lhs <=> rhs" (both
/// directions). Pattern variables start with '?'; r, c, b... are fixed data
/// dims of the given rank and x, y, z, i fixed parallel dims. Guards:
///   ?a != ?b          distinct classes
///   collapsed(?t, ?d) / !collapsed(?t, c)
///   same(?a, ?b)      same size-1 dims
///   covers(?a, ?b)    size-1 dims of ?a are size-1 in ?b
struct AxiomSpec {
  std::string name;
  AxiomGroup group;
  std::string text;
  std::vector<std::string> guards;
};

class RuleParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AxiomOptions {
  int rank = 2;
  int grid_dims = 3;
  bool inverse_rules = true;
  bool compute_only = false;
};

std::vector<AxiomSpec> axiom_specs(const AxiomOptions &opts);

// One rule per direction; reverse directions are named "<name>/rev".
std::vector<RewriteRule> compile_axiom(const AxiomSpec &spec, int rank);
std::vector<RewriteRule> build_axioms(const AxiomOptions &opts);

}  // namespace symopt
