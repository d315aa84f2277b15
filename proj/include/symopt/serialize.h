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

#include "json.hpp"
#include "symopt/graph_ir.h"

namespace symopt {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string rational_str(const Rational &r);
// "p" or "p/q". Throws ParseError.
Rational parse_rational(const std::string &s);

/// Renumbers block nodes into canonical order: by depth, then by operator,
/// attributes and the canonical ids of the operands (commutative operands
/// sorted). Graphs that differ only in the order of independent nodes map to
/// the same result. Returns the old->new id permutation through `perm`.
BlockGraph canonicalize(const BlockGraph &block,
                        std::vector<int> *perm = nullptr);

nlohmann::json to_json(const SGraph &graph);
nlohmann::json to_json(const MappingAssignment &m,
                       const std::vector<TensorSpec> &io);
nlohmann::json to_json(const ConcreteGraph &graph);

/// Canonical bytes (sorted keys, explicit node ids, canonical node order).
std::string serialize(const SGraph &graph);
std::string serialize(const ConcreteGraph &graph);

/// Throws ParseError on malformed input.
SGraph deserialize_sgraph(const std::string &text);
ConcreteGraph deserialize_concrete(const std::string &text);
SGraph sgraph_from_json(const nlohmann::json &j);
MappingAssignment mapping_from_json(const nlohmann::json &j,
                                    const std::vector<TensorSpec> &io);

// Block-graph structure alone.
std::string structure_key(const SGraph &graph);
// Structure plus mapping; parameter values and constraints excluded. Two
// candidates are the same template iff their keys are equal.
std::string template_key(const SGraph &graph, const MappingAssignment &m);

/// Graphviz rendering; labels carry operator kind and shapes (symbolic, or
/// concrete when `concrete` is given).
std::string to_dot(const SGraph &graph, const ConcreteGraph *concrete = nullptr);

}  // namespace symopt
