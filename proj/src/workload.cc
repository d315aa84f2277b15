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

#include "symopt/workload.h"

#include <fstream>

#include "symopt/serialize.h"

namespace symopt {

using nlohmann::json;

namespace {

struct Primitive {
  const char *name;
  OpKind kind;
};

constexpr Primitive kPrimitives[] = {
    {"matmul", OpKind::kMatmul}, {"exp", OpKind::kExp},
    {"silu", OpKind::kSilu},     {"square", OpKind::kSquare},
    {"sqrt", OpKind::kSqrt},     {"div", OpKind::kDiv},
    {"mul", OpKind::kMul},       {"add", OpKind::kAdd},
    {"sum", OpKind::kSumData},   {"scale", OpKind::kScaleConst},
};

std::optional<OpKind> primitive(const std::string &name) {
  for (const Primitive &p : kPrimitives) {
    if (name == p.name) return p.kind;
  }
  return std::nullopt;
}

// Desk-scale definitions of the built-in workloads.
const std::map<std::string, const char *> &builtin_sources() {
  static const std::map<std::string, const char *> sources = {
      {"identity", R"({
  "name": "identity",
  "tensors": [{"name": "X", "dims": [16, 16]}],
  "ops": [],
  "outputs": ["X"]
})"},
      {"softmax_matmul", R"({
  "name": "softmax_matmul",
  "tensors": [{"name": "X", "dims": [256, 256]},
              {"name": "W", "dims": [256, 64]}],
  "ops": [{"op": "softmax", "inputs": ["X"], "output": "S", "axis": -1},
          {"op": "matmul", "inputs": ["S", "W"], "output": "O"}],
  "outputs": ["O"]
})"},
      {"rmsnorm", R"({
  "name": "rmsnorm",
  "tensors": [{"name": "X", "dims": [8, 256]},
              {"name": "W", "dims": [256, 64]}],
  "ops": [{"op": "rms_norm", "inputs": ["X"], "output": "N", "axis": -1},
          {"op": "matmul", "inputs": ["N", "W"], "output": "O"}],
  "outputs": ["O"]
})"},
      {"rmsnorm_mlp", R"({
  "name": "rmsnorm_mlp",
  "tensors": [{"name": "X", "dims": [8, 64]},
              {"name": "Wup", "dims": [64, 64]},
              {"name": "Wgate", "dims": [64, 64]}],
  "ops": [{"op": "rms_norm", "inputs": ["X"], "output": "N", "axis": -1},
          {"op": "matmul", "inputs": ["N", "Wup"], "output": "U"},
          {"op": "matmul", "inputs": ["N", "Wgate"], "output": "G"},
          {"op": "mul", "inputs": ["U", "G"], "output": "O"}],
  "outputs": ["O"]
})"},
      {"swiglu", R"({
  "name": "swiglu",
  "tensors": [{"name": "X", "dims": [8, 256]},
              {"name": "Wgate", "dims": [256, 64]},
              {"name": "Wup", "dims": [256, 64]}],
  "ops": [{"op": "matmul", "inputs": ["X", "Wgate"], "output": "G"},
          {"op": "silu", "inputs": ["G"], "output": "A"},
          {"op": "matmul", "inputs": ["X", "Wup"], "output": "U"},
          {"op": "mul", "inputs": ["A", "U"], "output": "O"}],
  "outputs": ["O"]
})"},
      {"attention", R"({
  "name": "attention",
  "tensors": [{"name": "Q", "dims": [2, 1, 32]},
              {"name": "Kt", "dims": [2, 32, 128]},
              {"name": "V", "dims": [2, 128, 32]}],
  "ops": [{"op": "matmul", "inputs": ["Q", "Kt"], "output": "S"},
          {"op": "softmax", "inputs": ["S"], "output": "P", "axis": -1},
          {"op": "matmul", "inputs": ["P", "V"], "output": "O"}],
  "outputs": ["O"]
})"},
      {"qk_attention", R"({
  "name": "qk_attention",
  "tensors": [{"name": "Q", "dims": [2, 1, 32]},
              {"name": "Kt", "dims": [2, 32, 128]},
              {"name": "V", "dims": [2, 128, 32]}],
  "ops": [{"op": "rms_norm", "inputs": ["Q"], "output": "Qn", "axis": -1},
          {"op": "matmul", "inputs": ["Qn", "Kt"], "output": "S"},
          {"op": "softmax", "inputs": ["S"], "output": "P", "axis": -1},
          {"op": "matmul", "inputs": ["P", "V"], "output": "O"}],
  "outputs": ["O"]
})"},
  };
  return sources;
}

class Lowering {
 public:
  explicit Lowering(const WorkloadSpec &spec) {
    prog_.name = spec.name;
    for (TensorSpec t : spec.tensors) {
      auto it = spec.scale.find(t.name);
      if (it != spec.scale.end()) t.dims = it->second;
      for (std::int64_t d : t.dims) {
        if (!is_power_of_two(d)) {
          throw WorkloadError(t.name + ": sizes must be powers of two");
        }
      }
      if (prog_.find_tensor(t.name) >= 0) {
        throw WorkloadError("duplicate tensor " + t.name);
      }
      t.role = TensorRole::kInput;
      prog_.inputs.push_back(static_cast<int>(prog_.tensors.size()));
      prog_.tensors.push_back(t);
    }
  }

  void apply(const WorkloadOp &op) {
    std::vector<int> in;
    for (const std::string &name : op.inputs) {
      int t = prog_.find_tensor(name);
      if (t < 0) throw WorkloadError(op.op + ": undefined tensor " + name);
      in.push_back(t);
    }
    if (prog_.find_tensor(op.output) >= 0) {
      throw WorkloadError("tensor " + op.output + " defined twice");
    }
    if (op.op == "softmax" || op.op == "rms_norm") {
      if (in.size() != 1) throw WorkloadError(op.op + " takes one input");
      int t = in[0];
      int axis = resolve_axis(op, t);
      if (op.op == "softmax") {
        int e = emit(OpKind::kExp, {t});
        int s = emit(OpKind::kSumData, {e}, axis);
        emit(OpKind::kDiv, {e, s}, -1, 1, op.output);
      } else {
        std::int64_t n = prog_.tensors[t].dims[axis];
        int sq = emit(OpKind::kSquare, {t});
        int s = emit(OpKind::kSumData, {sq}, axis);
        int m = emit(OpKind::kScaleConst, {s}, -1, Rational(1, n));
        int r = emit(OpKind::kSqrt, {m});
        emit(OpKind::kDiv, {t, r}, -1, 1, op.output);
      }
      return;
    }
    std::optional<OpKind> kind = primitive(op.op);
    if (!kind) throw WorkloadError("unknown operator " + op.op);
    if (static_cast<int>(in.size()) != op_arity(*kind)) {
      throw WorkloadError(op.op + ": wrong operand count");
    }
    int axis = *kind == OpKind::kSumData ? resolve_axis(op, in[0]) : -1;
    emit(*kind, in, axis, op.scale, op.output);
  }

  Program finish(const std::vector<std::string> &outputs) {
    if (outputs.empty()) throw WorkloadError("no outputs");
    for (const std::string &name : outputs) {
      int t = prog_.find_tensor(name);
      if (t < 0) throw WorkloadError("undefined output " + name);
      prog_.outputs.push_back(t);
      if (prog_.tensors[t].role == TensorRole::kIntermediate) {
        prog_.tensors[t].role = TensorRole::kOutput;
      }
    }
    return std::move(prog_);
  }

 private:
  int resolve_axis(const WorkloadOp &op, int t) const {
    int rank = static_cast<int>(prog_.tensors[t].dims.size());
    int axis = op.axis < 0 ? op.axis + rank : op.axis;
    if (axis < 0 || axis >= rank) throw WorkloadError(op.op + ": bad axis");
    return axis;
  }

  int emit(OpKind kind, const std::vector<int> &in, int axis = -1,
           Rational scale = 1, std::string name = "") {
    std::vector<std::vector<std::int64_t>> shapes;
    for (int t : in) shapes.push_back(prog_.tensors[t].dims);
    TensorSpec out;
    try {
      out.dims = result_shape(kind, axis, shapes);
    } catch (const ShapeError &e) {
      throw WorkloadError(e.what());
    }
    out.name = name.empty() ? "t" + std::to_string(prog_.tensors.size()) : name;
    int id = static_cast<int>(prog_.tensors.size());
    prog_.tensors.push_back(out);
    prog_.ops.push_back({kind, in, id, axis, scale});
    return id;
  }

  Program prog_;
};

}  // namespace

WorkloadSpec workload_from_json(const json &j) {
  WorkloadSpec spec;
  try {
    spec.name = j.value("name", "workload");
    for (const json &t : j.at("tensors")) {
      TensorSpec ts;
      ts.name = t.at("name").get<std::string>();
      ts.dims = t.at("dims").get<std::vector<std::int64_t>>();
      if (t.value("role", "input") != "input") {
        throw WorkloadError(ts.name + ": only inputs are declared");
      }
      ts.role = TensorRole::kInput;
      spec.tensors.push_back(ts);
    }
    for (const json &o : j.at("ops")) {
      WorkloadOp op;
      op.op = o.at("op").get<std::string>();
      op.inputs = o.at("inputs").get<std::vector<std::string>>();
      op.output = o.at("output").get<std::string>();
      op.axis = o.value("axis", -1);
      if (o.contains("scale")) {
        const json &s = o.at("scale");
        op.scale = s.is_string() ? parse_rational(s.get<std::string>())
                                 : Rational(s.get<std::int64_t>());
      }
      spec.ops.push_back(op);
    }
    spec.outputs = j.at("outputs").get<std::vector<std::string>>();
    if (j.contains("scale")) {
      spec.scale = j.at("scale")
                       .get<std::map<std::string, std::vector<std::int64_t>>>();
    }
  } catch (const json::exception &e) {
    throw WorkloadError(std::string("bad workload: ") + e.what());
  } catch (const ParseError &e) {
    throw WorkloadError(e.what());
  }
  return spec;
}

json to_json(const WorkloadSpec &spec) {
  json j;
  j["name"] = spec.name;
  j["tensors"] = json::array();
  for (const TensorSpec &t : spec.tensors) {
    j["tensors"].push_back({{"name", t.name}, {"dims", t.dims}});
  }
  j["ops"] = json::array();
  for (const WorkloadOp &op : spec.ops) {
    json o = {{"op", op.op}, {"inputs", op.inputs}, {"output", op.output}};
    if (op.op == "sum" || op.op == "softmax" || op.op == "rms_norm") {
      o["axis"] = op.axis;
    }
    if (op.op == "scale") o["scale"] = rational_str(op.scale);
    j["ops"].push_back(o);
  }
  j["outputs"] = spec.outputs;
  if (!spec.scale.empty()) j["scale"] = spec.scale;
  return j;
}

std::vector<std::string> builtin_workloads() {
  std::vector<std::string> names;
  for (const auto &[name, src] : builtin_sources()) names.push_back(name);
  return names;
}

WorkloadSpec builtin_workload(const std::string &name) {
  auto it = builtin_sources().find(name);
  if (it == builtin_sources().end()) {
    throw WorkloadError("unknown builtin workload " + name);
  }
  return workload_from_json(json::parse(it->second));
}

WorkloadSpec load_workload(const std::string &source) {
  const std::string prefix = "builtin:";
  if (source.rfind(prefix, 0) == 0) {
    return builtin_workload(source.substr(prefix.size()));
  }
  std::ifstream in(source);
  if (!in) throw WorkloadError("cannot open " + source);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw WorkloadError(source + ": " + e.what());
  }
  return workload_from_json(j);
}

Program lower(const WorkloadSpec &spec) {
  Lowering l(spec);
  for (const WorkloadOp &op : spec.ops) l.apply(op);
  Program p = l.finish(spec.outputs);
  int rank = p.rank();
  for (const TensorSpec &t : p.tensors) {
    if (static_cast<int>(t.dims.size()) != rank) {
      throw WorkloadError("all tensors must share one rank");
    }
  }
  return p;
}

}  // namespace symopt
