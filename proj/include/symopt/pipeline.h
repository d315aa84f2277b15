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

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "symopt/generator.h"
#include "symopt/instantiator.h"
#include "symopt/verifier.h"
#include "symopt/workload.h"

namespace symopt {

// Families of mapping variables: loader grid dims, loader forloop, saver
// grid dims.
enum class MapFamily { kImap, kFmap, kOmap };
const char *map_family_name(MapFamily f);

struct PipelineConfig {
  int grid_dims = 1;
  int max_ops = 0;  // 0: inputs + outputs + program ops + 2
  std::uint64_t seed = 0;
  int samples = 16;
  std::int64_t smem_budget = kDefaultSmemBudget;
  Backend backend = Backend::kCost;
  // Families enumerated concretely before the search instead of being kept
  // symbolic.
  std::vector<MapFamily> concrete;
  bool run_verify = true;
  bool run_tune = true;
  VerifyOptions verify;
  TemplateTestOptions oracle;
  std::uint64_t node_budget = 10'000'000;
  double time_budget = 600.0;
};

int default_max_ops(const Program &program);

struct CandidateRecord {
  SGraph graph;
  MappingAssignment mapping;
  std::string key;  // template_key
  bool verified = false;
  Verdict verdict = Verdict::kNotProven;
  SaturationStats saturation;
  std::optional<TemplateTestResult> oracle;
  std::optional<ProfileResult> best;
  std::int64_t best_smem = 0;
  std::string note;  // tuning failure, if any
};

struct StageTimes {
  double generate = 0, mappings = 0, verify = 0, tune = 0, total = 0;
};

struct RunReport {
  std::string workload;
  PipelineConfig config;
  int max_ops = 0;
  GenerateStats search;
  GenerateStatus status = GenerateStatus::kComplete;
  std::size_t generator_runs = 0;
  std::size_t graphs = 0;  // distinct structures generated
  std::size_t raw_mappings = 0;
  std::vector<CandidateRecord> candidates;  // sorted by key
  StageTimes timing;

  std::vector<std::string> verified_keys() const;
  std::size_t unique_templates() const;  // verified, distinct keys
  std::size_t verified_structures() const;
};

/// Generation, mapping enumeration with symmetry breaking, verification,
/// random testing and tuning of every verified candidate.
RunReport run_pipeline(const Program &program, const PipelineConfig &config);
RunReport run_pipeline(const WorkloadSpec &spec, const PipelineConfig &config);

// Sorted keys; wall-clock values only under "timing".
nlohmann::json to_json(const RunReport &report);

}  // namespace symopt
