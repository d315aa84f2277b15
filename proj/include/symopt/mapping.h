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

#include <string>
#include <vector>

#include "symopt/graph_ir.h"

namespace symopt {

struct MappingCandidateSet {
  std::vector<MappingAssignment> assignments;  // after symmetry breaking
  std::size_t raw = 0;                         // before symmetry breaking
};

/// Every 0/1 assignment of the mapping variables that satisfies the
/// partition constraints and the collected equalities, in increasing order
/// of lex_key. Graphs with an Accum also need the loop to split some
/// loader dim.
std::vector<MappingAssignment> enumerate_raw_mappings(const SGraph &graph);

MappingCandidateSet enumerate_mappings(const SGraph &graph);

// The variables of `graph` as a bit string, first variable first.
std::string lex_key(const SGraph &graph, const MappingAssignment &m);

// Renames grid dim p to perm[p] in every variable; the loop dim is fixed.
MappingAssignment permute_grid(const MappingAssignment &m,
                               const std::vector<int> &perm);

/// Keeps the lexicographically smallest member of each class of
/// assignments related by a permutation of the grid dims, in input order.
std::vector<MappingAssignment> symmetry_break(
    const SGraph &graph, const std::vector<MappingAssignment> &assignments);

}  // namespace symopt
