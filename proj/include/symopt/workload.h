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
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symopt/graph_ir.h"

namespace symopt {

class WorkloadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WorkloadOp {
  std::string op;  // primitive or composite name, lower case
  std::vector<std::string> inputs;
  std::string output;
  int axis = -1;  // sum, softmax, rms_norm; negative counts from the end
  Rational scale{1};
};

struct WorkloadSpec {
  std::string name;
  std::vector<TensorSpec> tensors;  // declared inputs
  std::vector<WorkloadOp> ops;
  std::vector<std::string> outputs;
  std::map<std::string, std::vector<std::int64_t>> scale;  // size overrides
};

WorkloadSpec workload_from_json(const nlohmann::json &j);
nlohmann::json to_json(const WorkloadSpec &spec);

// A path to a JSON file, or "builtin:<name>".
WorkloadSpec load_workload(const std::string &source);
std::vector<std::string> builtin_workloads();
WorkloadSpec builtin_workload(const std::string &name);

/// Expands softmax and rms_norm into primitives and infers every
/// intermediate shape. Throws WorkloadError.
///   softmax(t, d)  = div(exp t, sum(exp t, d))
///   rms_norm(t, d) = div(t, sqrt(scale_{1/n}(sum(square t, d))))
Program lower(const WorkloadSpec &spec);

}  // namespace symopt
