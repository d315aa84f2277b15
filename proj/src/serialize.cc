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

#include "symopt/serialize.h"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <tuple>

namespace symopt {

using nlohmann::json;

std::string rational_str(const Rational &r) {
  std::string s = std::to_string(r.numerator());
  if (r.denominator() != 1) s += "/" + std::to_string(r.denominator());
  return s;
}

Rational parse_rational(const std::string &s) {
  try {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(s));
    return Rational(std::stoll(s.substr(0, slash)),
                    std::stoll(s.substr(slash + 1)));
  } catch (const std::exception &) {
    throw ParseError("bad rational '" + s + "'");
  }
}

namespace {

VarId parse_var(const std::string &s, const std::vector<TensorSpec> &io) {
  if (s == "0") return kZero;
  if (s == "1") return kOne;
  if (s.size() < 8 || s.rfind("m_{", 0) != 0 || s.back() != '}') {
    throw ParseError("bad mapping variable '" + s + "'");
  }
  std::string body = s.substr(3, s.size() - 4);
  auto c1 = body.find(','), c2 = body.rfind(',');
  if (c1 == std::string::npos || c1 == c2) {
    throw ParseError("bad mapping variable '" + s + "'");
  }
  std::string tensor = body.substr(0, c1);
  std::string dim = body.substr(c1 + 1, c2 - c1 - 1);
  std::string par = body.substr(c2 + 1);
  int t = -1;
  for (std::size_t i = 0; i < io.size(); ++i) {
    if (io[i].name == tensor) t = static_cast<int>(i);
  }
  if (t < 0) throw ParseError("unknown tensor in '" + s + "'");
  int d = parse_dim_name(static_cast<int>(io[t].dims.size()), dim);
  int p = -1;
  for (int q = 0; q < kNumParallelDims; ++q) {
    if (par.size() == 1 && parallel_dim_name(q) == par[0]) p = q;
  }
  if (d < 0 || p < 0) throw ParseError("bad mapping variable '" + s + "'");
  return map_var(t, d, p);
}

const char *role_name(TensorRole r) {
  switch (r) {
    case TensorRole::kInput:
      return "input";
    case TensorRole::kOutput:
      return "output";
    default:
      return "intermediate";
  }
}

std::string shape_str(const SymShape &shape, const std::vector<TensorSpec> &io) {
  std::string s = "[";
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (d) s += ", ";
    s += shape[d].to_string(
        [&io](VarId v) { return mapping_var_name(io, v); });
  }
  return s + "]";
}

}  // namespace

BlockGraph canonicalize(const BlockGraph &block, std::vector<int> *perm) {
  const auto &nodes = block.nodes;
  std::size_t n = nodes.size();
  std::vector<int> depth(n, 0), section(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes[i].kind == OpKind::kInputLoader) section[i] = 0;
    if (nodes[i].kind == OpKind::kOutputSaver) section[i] = 2;
    for (int in : nodes[i].inputs) depth[i] = std::max(depth[i], depth[in] + 1);
  }
  std::vector<int> new_id(n, -1);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Groups of equal (section, depth) only reference earlier groups.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::tie(section[a], depth[a]) < std::tie(section[b], depth[b]);
  });
  using Key = std::tuple<int, int, int, std::int64_t, std::int64_t,
                         std::vector<int>>;
  auto key = [&](int i) {
    const BlockNode &nd = nodes[i];
    std::vector<int> ins;
    for (int in : nd.inputs) ins.push_back(new_id[in]);
    if (is_commutative(nd.kind)) std::sort(ins.begin(), ins.end());
    return Key(static_cast<int>(nd.kind), nd.io, nd.axis,
               nd.scale.numerator(), nd.scale.denominator(), ins);
  };
  int next = 0;
  for (std::size_t g = 0; g < n;) {
    std::size_t e = g;
    while (e < n && section[order[e]] == section[order[g]] &&
           depth[order[e]] == depth[order[g]]) {
      ++e;
    }
    std::vector<std::pair<Key, int>> keyed;
    for (std::size_t j = g; j < e; ++j) keyed.emplace_back(key(order[j]), order[j]);
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto &a, const auto &b) { return a.first < b.first; });
    for (const auto &[k, i] : keyed) new_id[i] = next++;
    g = e;
  }
  BlockGraph out;
  out.num_grid_dims = block.num_grid_dims;
  out.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    BlockNode nd = nodes[i];
    for (int &in : nd.inputs) in = new_id[in];
    if (is_commutative(nd.kind)) std::sort(nd.inputs.begin(), nd.inputs.end());
    out.nodes[new_id[i]] = nd;
  }
  if (perm) *perm = new_id;
  return out;
}

json to_json(const SGraph &graph) {
  BlockGraph block = canonicalize(graph.block);
  json j;
  j["grid_dims"] = block.num_grid_dims;
  json tensors = json::array();
  for (const TensorSpec &t : graph.io) {
    tensors.push_back(
        {{"name", t.name}, {"dims", t.dims}, {"role", role_name(t.role)}});
  }
  j["tensors"] = tensors;
  json nodes = json::array();
  for (std::size_t i = 0; i < block.nodes.size(); ++i) {
    const BlockNode &nd = block.nodes[i];
    json jn = {{"id", i}, {"op", op_name(nd.kind)}, {"inputs", nd.inputs}};
    if (nd.io >= 0) jn["tensor"] = graph.io[nd.io].name;
    if (nd.kind == OpKind::kSumData) {
      jn["axis"] = dim_name(static_cast<int>(graph.io[0].dims.size()), nd.axis);
    }
    if (nd.kind == OpKind::kScaleConst) jn["scale"] = rational_str(nd.scale);
    nodes.push_back(jn);
  }
  j["nodes"] = nodes;
  // The constraint partition, as (variable, class root) pairs.
  json cs = json::array();
  for (VarId v : graph.constraints.variables()) {
    VarId root = graph.constraints.find(v);
    if (root != v) {
      cs.push_back({mapping_var_name(graph.io, v),
                    mapping_var_name(graph.io, root)});
    }
  }
  j["constraints"] = cs;
  return j;
}

json to_json(const MappingAssignment &m, const std::vector<TensorSpec> &io) {
  json j = json::object();
  for (const auto &[v, val] : m.values) j[mapping_var_name(io, v)] = val;
  return j;
}

json to_json(const ConcreteGraph &graph) {
  json params = json::object();
  for (int p = 0; p < kNumParallelDims; ++p) {
    params[std::string(1, parallel_dim_name(p))] = graph.params[p];
  }
  std::vector<int> perm;
  canonicalize(graph.sgraph.block, &perm);
  std::vector<std::vector<std::int64_t>> shapes(graph.shapes.size());
  for (std::size_t i = 0; i < perm.size(); ++i) shapes[perm[i]] = graph.shapes[i];
  return {{"sgraph", to_json(graph.sgraph)},
          {"mapping", to_json(graph.mapping, graph.sgraph.io)},
          {"params", params},
          {"shapes", shapes}};
}

std::string serialize(const SGraph &graph) { return to_json(graph).dump(); }

std::string serialize(const ConcreteGraph &graph) {
  return to_json(graph).dump();
}

SGraph sgraph_from_json(const json &j) {
  try {
    SGraph g;
    g.block.num_grid_dims = j.at("grid_dims").get<int>();
    for (const json &t : j.at("tensors")) {
      TensorSpec spec;
      spec.name = t.at("name").get<std::string>();
      spec.dims = t.at("dims").get<std::vector<std::int64_t>>();
      std::string role = t.at("role").get<std::string>();
      spec.role = role == "input" ? TensorRole::kInput : TensorRole::kOutput;
      if (spec.role == TensorRole::kInput) {
        if (g.num_inputs != static_cast<int>(g.io.size())) {
          throw ParseError("inputs must precede outputs");
        }
        ++g.num_inputs;
      }
      g.io.push_back(spec);
    }
    if (g.io.empty()) throw ParseError("no tensors");
    int rank = static_cast<int>(g.io[0].dims.size());
    const json &nodes = j.at("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const json &jn = nodes[i];
      if (jn.at("id").get<std::size_t>() != i) throw ParseError("node ids");
      BlockNode nd;
      auto kind = parse_op_name(jn.at("op").get<std::string>());
      if (!kind) throw ParseError("unknown operator");
      nd.kind = *kind;
      nd.inputs = jn.at("inputs").get<std::vector<int>>();
      if (jn.contains("tensor")) {
        std::string name = jn["tensor"].get<std::string>();
        for (std::size_t t = 0; t < g.io.size(); ++t) {
          if (g.io[t].name == name) nd.io = static_cast<int>(t);
        }
        if (nd.io < 0) throw ParseError("unknown tensor " + name);
      }
      if (jn.contains("axis")) {
        nd.axis = parse_dim_name(rank, jn["axis"].get<std::string>());
        if (nd.axis < 0) throw ParseError("bad axis");
      }
      if (jn.contains("scale")) {
        nd.scale = parse_rational(jn["scale"].get<std::string>());
      }
      g.block.nodes.push_back(nd);
    }
    for (const json &c : j.at("constraints")) {
      VarId a = parse_var(c.at(0).get<std::string>(), g.io);
      VarId b = parse_var(c.at(1).get<std::string>(), g.io);
      if (!g.constraints.unite(a, b)) throw ParseError("inconsistent constraints");
    }
    std::string why;
    if (!structurally_valid(g, &why)) throw ParseError("invalid graph: " + why);
    derive_shapes(g);
    return g;
  } catch (const json::exception &e) {
    throw ParseError(e.what());
  } catch (const ShapeError &e) {
    throw ParseError(e.what());
  }
}

MappingAssignment mapping_from_json(const json &j,
                                    const std::vector<TensorSpec> &io) {
  MappingAssignment m;
  try {
    for (const auto &[name, val] : j.items()) {
      m.values[parse_var(name, io)] = val.get<int>();
    }
  } catch (const json::exception &e) {
    throw ParseError(e.what());
  }
  return m;
}

SGraph deserialize_sgraph(const std::string &text) {
  try {
    return sgraph_from_json(json::parse(text));
  } catch (const json::exception &e) {
    throw ParseError(e.what());
  }
}

ConcreteGraph deserialize_concrete(const std::string &text) {
  try {
    json j = json::parse(text);
    SGraph g = sgraph_from_json(j.at("sgraph"));
    MappingAssignment m = mapping_from_json(j.at("mapping"), g.io);
    ParamValues params{};
    for (int p = 0; p < kNumParallelDims; ++p) {
      params[p] = j.at("params")
                      .at(std::string(1, parallel_dim_name(p)))
                      .get<std::int64_t>();
    }
    g.block = canonicalize(g.block);
    return instantiate(g, m, params);
  } catch (const json::exception &e) {
    throw ParseError(e.what());
  } catch (const InstantiationError &e) {
    throw ParseError(e.what());
  }
}

std::string structure_key(const SGraph &graph) {
  json j = to_json(graph);
  j.erase("constraints");
  return j.dump();
}

std::string template_key(const SGraph &graph, const MappingAssignment &m) {
  json j = to_json(graph);
  j.erase("constraints");
  j["mapping"] = to_json(m, graph.io);
  return j.dump();
}

std::string to_dot(const SGraph &graph, const ConcreteGraph *concrete) {
  std::vector<SymShape> shapes = derive_shapes(graph);
  std::ostringstream os;
  os << "digraph block_graph {\n  node [shape=box];\n";
  for (std::size_t i = 0; i < graph.block.nodes.size(); ++i) {
    const BlockNode &nd = graph.block.nodes[i];
    os << "  n" << i << " [label=\"" << op_name(nd.kind);
    if (nd.io >= 0) os << " " << graph.io[nd.io].name;
    if (nd.kind == OpKind::kSumData) {
      os << " " << dim_name(static_cast<int>(shapes[i].size()), nd.axis);
    }
    if (nd.kind == OpKind::kScaleConst) os << " " << rational_str(nd.scale);
    os << "\\n";
    if (concrete) {
      os << json(concrete->shapes[i]).dump();
    } else {
      os << shape_str(shapes[i], graph.io);
    }
    os << "\"];\n";
    for (int in : nd.inputs) os << "  n" << in << " -> n" << i << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace symopt
