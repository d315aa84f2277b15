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
#include <stdexcept>
#include <vector>

#include "symopt/graph_ir.h"
#include "symopt/interp.h"

namespace symopt {

inline constexpr std::int64_t kDefaultSmemBudget = 164 * 1024;
inline constexpr std::int64_t kSmemElementBytes = 2;

class EmptyParamSpace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bytes of all block tensors of one block at 2 bytes per element.
std::int64_t smem_usage(const ConcreteGraph &graph);
std::int64_t smem_usage(const SGraph &graph, const MappingAssignment &m,
                        const ParamValues &params);

/// Valid parallelization sizes of one (sgraph, mapping): powers of two up
/// to the largest dim each active parallel dim partitions, filtered by
/// divisibility and the shared-memory budget (a negative budget disables
/// the memory filter). Points are in lexicographic order.
class ParamSpace {
 public:
  ParamSpace(const SGraph &graph, const MappingAssignment &m,
             std::int64_t smem_budget = kDefaultSmemBudget);

  // Parallel dims with more than one candidate value.
  const std::vector<int> &active() const { return active_; }
  const std::vector<ParamValues> &points() const { return points_; }
  bool contains(const ParamValues &p) const;

 private:
  SGraph graph_;
  MappingAssignment mapping_;
  std::int64_t budget_;
  std::vector<int> active_;
  std::vector<ParamValues> points_;
};

struct CostModel {
  double alpha = 1.0;  // per byte of global traffic
  double beta = 1.0;   // per flop, divided by the achieved parallelism
  std::int64_t num_sms = 108;

  struct Breakdown {
    double bytes_loaded = 0;
    double bytes_stored = 0;
    double flops = 0;
    std::int64_t blocks = 1;
  };
  static Breakdown measure(const ConcreteGraph &graph);
  double score(const ConcreteGraph &graph) const;
};

enum class Backend { kCost, kInterp };
const char *backend_name(Backend b);

struct ProfileResult {
  ParamValues params{};
  double score = 0.0;
  bool equivalence_checked = false;
};

// Median wall time of `trials` runs on fixed pseudorandom inputs.
double score_interp(const ConcreteGraph &graph, int trials = 3);

struct TuneOptions {
  Backend backend = Backend::kCost;
  int samples = 16;
  std::uint64_t seed = 0;
  std::int64_t smem_budget = kDefaultSmemBudget;
  CostModel cost;
  int interp_trials = 3;
};

/// Scores up to `samples` distinct valid points drawn without replacement
/// and returns the best; ties go to the lexicographically smallest params.
/// Throws EmptyParamSpace.
ProfileResult tune(const SGraph &graph, const MappingAssignment &m,
                   const TuneOptions &opts = {});

struct TemplateTestOptions {
  int trials = 20;
  int param_samples = 3;
  double tolerance = 1e-9;
  std::uint64_t seed = 0;
  std::uint64_t candidate = 0;
  Precision precision = Precision::kFp64;
};

struct TemplateTestResult {
  bool equivalent = true;
  double max_error = 0.0;
  std::vector<ParamValues> tested;
  std::string error;
};

/// Random testing of a (template, mapping) pair against the program over
/// `param_samples` distinct parallelization sizes, each with `trials`
/// random inputs. Sizes are drawn from the divisibility-valid space without
/// a memory limit.
TemplateTestResult template_equiv_test(const Program &program,
                                       const SGraph &graph,
                                       const MappingAssignment &m,
                                       const TemplateTestOptions &opts = {});

}  // namespace symopt
