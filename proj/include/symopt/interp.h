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

#include "symopt/dense_tensor.h"
#include "symopt/expr.h"
#include "symopt/graph_ir.h"

namespace symopt {

using TensorMap = std::map<std::string, DenseTensor>;

class InterpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TensorMap random_inputs(const std::vector<TensorSpec> &inputs,
                        std::mt19937_64 &rng);

/// Reference execution of the lowered program. Returns the outputs by name.
TensorMap run_program(const Program &program, const TensorMap &inputs,
                      Precision precision = Precision::kFp64);

/// Executes every block and forloop iteration of a concrete graph. `inputs`
/// follow io order. Throws InterpError if two blocks write the same output
/// element or an element is never written.
std::vector<DenseTensor> run_concrete(const ConcreteGraph &graph,
                                      const std::vector<DenseTensor> &inputs,
                                      Precision precision = Precision::kFp64);

/// Value of a term with parallel operators: one tile per point of the index
/// set `pars` (sorted), mixed radix with the first par most significant.
/// `collapsed` marks dims of size 1 by construction (size-1 inputs and
/// summed dims); only those may broadcast.
struct ParTensor {
  std::vector<int> pars;
  std::vector<DenseTensor> tiles;
  std::uint32_t collapsed = 0;
};

// Throws ShapeError when the term is ill-typed for these sizes: shape
// mismatches, indivisible splits, parallel index sets that disagree, or a
// broadcast of a dim that only became size 1 by splitting.
ParTensor eval_expr(const ExprPtr &e, const TensorMap &vars,
                    const ParamValues &params,
                    Precision precision = Precision::kFp64);

struct EquivTestOptions {
  int trials = 3;
  std::uint64_t seed = 0;
  std::uint64_t candidate = 0;  // mixed into the per-trial seed
  double tolerance = 1e-6;
  Precision precision = Precision::kFp64;
};

struct EquivTestResult {
  bool equivalent = false;
  double max_error = 0.0;
  std::string error;  // interpreter failure, if any
};

EquivTestResult random_equiv_test(const Program &program,
                                  const ConcreteGraph &candidate,
                                  const EquivTestOptions &opts = {});

}  // namespace symopt
