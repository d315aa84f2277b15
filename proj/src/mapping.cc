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

#include "symopt/mapping.h"

#include <algorithm>
#include <map>
#include <numeric>

namespace symopt {

namespace {

// Groups of variables of which at most one (exactly one for `exact`) may
// be set.
struct Group {
  std::vector<VarId> vars;
  bool exact = false;
};

std::vector<Group> linear_groups(const SGraph &graph) {
  const BlockGraph &bg = graph.block;
  std::vector<Group> out;
  for (const BlockNode &n : bg.nodes) {
    bool loader = n.kind == OpKind::kInputLoader;
    if (!loader && n.kind != OpKind::kOutputSaver) continue;
    int rank = static_cast<int>(graph.io[n.io].dims.size());
    for (int p : loader ? bg.loader_pars() : bg.grid_pars()) {
      Group g;
      g.exact = !loader;
      for (int d = 0; d < rank; ++d) g.vars.push_back(map_var(n.io, d, p));
      out.push_back(g);
    }
    for (int d = 0; d < rank; ++d) {
      Group g;
      for (int p : bg.grid_pars()) g.vars.push_back(map_var(n.io, d, p));
      out.push_back(g);
    }
  }
  return out;
}

class Enumerator {
 public:
  explicit Enumerator(const SGraph &graph)
      : graph_(graph),
        vars_(mapping_variables(graph)),
        groups_(linear_groups(graph)),
        loop_(graph.block.has_accum()) {
    std::map<VarId, int> class_of_root;
    for (VarId v : vars_) {
      VarId r = graph.constraints.find(v);
      if (r == kZero || r == kOne) {
        fixed_[v] = r == kOne ? 1 : 0;
        continue;
      }
      auto [it, fresh] = class_of_root.emplace(r, classes_.size());
      if (fresh) classes_.emplace_back();
      classes_[it->second].push_back(v);
    }
  }

  std::vector<MappingAssignment> run() {
    for (VarId v : vars_) value_[v] = fixed_.count(v) ? fixed_[v] : 0;
    if (consistent(false)) dfs(0);
    return std::move(out_);
  }

 private:
  // Unassigned variables read as 0, so an over-full group can be pruned
  // early; exact groups are only checked once everything is assigned.
  bool consistent(bool complete) const {
    for (const Group &g : groups_) {
      int used = 0;
      for (VarId v : g.vars) used += value_.at(v);
      if (used > 1 || (complete && g.exact && used != 1)) return false;
    }
    return true;
  }

  void dfs(std::size_t c) {
    if (c == classes_.size()) {
      if (!consistent(true)) return;
      MappingAssignment m;
      m.values = value_;
      if (loop_ && !splits_forloop(graph_, m)) return;
      out_.push_back(std::move(m));
      return;
    }
    for (int bit : {0, 1}) {
      for (VarId v : classes_[c]) value_[v] = bit;
      if (consistent(false)) dfs(c + 1);
    }
    for (VarId v : classes_[c]) value_[v] = 0;
  }

  const SGraph &graph_;
  std::vector<VarId> vars_;
  std::vector<Group> groups_;
  bool loop_;
  std::map<VarId, int> fixed_;
  std::vector<std::vector<VarId>> classes_;
  std::map<VarId, int> value_;
  std::vector<MappingAssignment> out_;
};

}  // namespace

std::vector<MappingAssignment> enumerate_raw_mappings(const SGraph &graph) {
  std::vector<MappingAssignment> out = Enumerator(graph).run();
  std::stable_sort(out.begin(), out.end(),
                   [&](const MappingAssignment &a, const MappingAssignment &b) {
                     return lex_key(graph, a) < lex_key(graph, b);
                   });
  return out;
}

std::string lex_key(const SGraph &graph, const MappingAssignment &m) {
  std::string key;
  for (VarId v : mapping_variables(graph)) key += m.get(v) ? '1' : '0';
  return key;
}

MappingAssignment permute_grid(const MappingAssignment &m,
                               const std::vector<int> &perm) {
  MappingAssignment out;
  for (const auto &[v, bit] : m.values) {
    int p = var_par(v);
    if (p != kForloop) p = perm[p];
    out.values[map_var(var_tensor(v), var_dim(v), p)] = bit;
  }
  return out;
}

std::vector<MappingAssignment> symmetry_break(
    const SGraph &graph, const std::vector<MappingAssignment> &assignments) {
  int k = graph.block.num_grid_dims;
  std::vector<std::vector<int>> perms;
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  // Orbit id (smallest key over the orbit) -> smallest member present.
  std::map<std::string, std::pair<std::string, std::size_t>> best;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    std::string own = lex_key(graph, assignments[i]);
    std::string orbit = own;
    for (const auto &p : perms) {
      orbit = std::min(orbit, lex_key(graph, permute_grid(assignments[i], p)));
    }
    auto it = best.find(orbit);
    if (it == best.end() || own < it->second.first) best[orbit] = {own, i};
  }
  std::vector<bool> keep(assignments.size(), false);
  for (const auto &[orbit, member] : best) keep[member.second] = true;
  std::vector<MappingAssignment> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (keep[i]) out.push_back(assignments[i]);
  }
  return out;
}

MappingCandidateSet enumerate_mappings(const SGraph &graph) {
  MappingCandidateSet out;
  std::vector<MappingAssignment> raw = enumerate_raw_mappings(graph);
  out.raw = raw.size();
  out.assignments = symmetry_break(graph, raw);
  return out;
}

}  // namespace symopt
