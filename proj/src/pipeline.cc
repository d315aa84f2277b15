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

#include "symopt/pipeline.h"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <set>

#include "symopt/mapping.h"
#include "symopt/serialize.h"

namespace symopt {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

bool has(const std::vector<MapFamily> &fs, MapFamily f) {
  return std::find(fs.begin(), fs.end(), f) != fs.end();
}

using Partial = std::vector<std::pair<VarId, int>>;

// Assignments of the selected families on one io tensor that respect the
// partition constraints.
std::vector<Partial> tensor_options(int t, int rank, bool input, int k,
                                    const std::vector<MapFamily> &fams) {
  std::vector<int> pars;
  if (input && has(fams, MapFamily::kImap)) {
    for (int p = 0; p < k; ++p) pars.push_back(p);
  }
  if (!input && has(fams, MapFamily::kOmap)) {
    for (int p = 0; p < k; ++p) pars.push_back(p);
  }
  if (input && has(fams, MapFamily::kFmap)) pars.push_back(kForloop);
  std::vector<Partial> out;
  Partial cur;
  std::vector<bool> grid_used(rank, false);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == pars.size()) {
      out.push_back(cur);
      return;
    }
    int p = pars[i];
    bool grid = p != kForloop;
    // Unmapped (not allowed for saver grid dims).
    if (input || !grid) {
      for (int d = 0; d < rank; ++d) cur.push_back({map_var(t, d, p), 0});
      rec(i + 1);
      cur.resize(cur.size() - rank);
    }
    for (int d = 0; d < rank; ++d) {
      if (grid && grid_used[d]) continue;
      for (int e = 0; e < rank; ++e) cur.push_back({map_var(t, e, p), e == d});
      if (grid) grid_used[d] = true;
      rec(i + 1);
      if (grid) grid_used[d] = false;
      cur.resize(cur.size() - rank);
    }
  };
  rec(0);
  return out;
}

std::vector<ConstraintStore> family_presets(const std::vector<TensorSpec> &io,
                                            int num_inputs, int k,
                                            const std::vector<MapFamily> &fams) {
  std::vector<ConstraintStore> out{ConstraintStore()};
  for (int t = 0; t < static_cast<int>(io.size()); ++t) {
    auto opts = tensor_options(t, static_cast<int>(io[t].dims.size()),
                               t < num_inputs, k, fams);
    std::vector<ConstraintStore> next;
    for (const ConstraintStore &base : out) {
      for (const Partial &p : opts) {
        ConstraintStore s = base;
        for (auto [v, bit] : p) s.unite(v, bit ? kOne : kZero);
        next.push_back(std::move(s));
      }
    }
    out = std::move(next);
  }
  return out;
}

json params_json(const ParamValues &p, const BlockGraph &bg) {
  json j = json::object();
  for (int g : bg.grid_pars()) j[std::string(1, parallel_dim_name(g))] = p[g];
  j["i"] = p[kForloop];
  return j;
}

}  // namespace

const char *map_family_name(MapFamily f) {
  switch (f) {
    case MapFamily::kImap: return "imap";
    case MapFamily::kFmap: return "fmap";
    case MapFamily::kOmap: return "omap";
  }
  return "?";
}

int default_max_ops(const Program &program) {
  return static_cast<int>(program.inputs.size() + program.outputs.size() +
                          program.ops.size()) + 2;
}

std::vector<std::string> RunReport::verified_keys() const {
  std::vector<std::string> out;
  for (const CandidateRecord &c : candidates) {
    if (c.verified) out.push_back(c.key);
  }
  return out;
}

std::size_t RunReport::unique_templates() const {
  auto keys = verified_keys();
  return std::set<std::string>(keys.begin(), keys.end()).size();
}

std::size_t RunReport::verified_structures() const {
  std::set<std::string> s;
  for (const CandidateRecord &c : candidates) {
    if (c.verified) s.insert(structure_key(c.graph));
  }
  return s.size();
}

RunReport run_pipeline(const Program &program, const PipelineConfig &config) {
  auto start = Clock::now();
  RunReport report;
  report.workload = program.name;
  report.config = config;
  report.max_ops = config.max_ops > 0 ? config.max_ops : default_max_ops(program);

  // Generation, once per preset of the concrete families.
  auto t = Clock::now();
  SearchConfig sc;
  sc.max_block_ops = report.max_ops;
  sc.num_grid_dims = config.grid_dims;
  sc.node_budget = config.node_budget;
  sc.time_budget = config.time_budget;
  std::vector<TensorSpec> io = program.io();
  int num_inputs = static_cast<int>(program.inputs.size());
  std::vector<ConstraintStore> presets =
      family_presets(io, num_inputs, config.grid_dims, config.concrete);
  auto pruner = std::make_shared<AbstractPruner>(program, sc.limits);
  // structure key -> (graph with its own constraints, raw mappings by lex key)
  using MappingsByKey = std::map<std::string, MappingAssignment>;
  std::map<std::string, std::pair<SGraph, MappingsByKey>> found;
  double mapping_time = 0;
  for (const ConstraintStore &preset : presets) {
    SearchConfig run_cfg = sc;
    run_cfg.preset = preset;
    Generator g(program, run_cfg, pruner);
    GenerateResult r = g.run();
    ++report.generator_runs;
    report.search += r.stats;
    if (r.status != GenerateStatus::kComplete) report.status = r.status;
    auto tm = Clock::now();
    for (const SGraph &graph : r.graphs) {
      std::string skey = structure_key(graph);
      auto it = found.find(skey);
      if (it == found.end()) {
        SGraph clean = graph;
        clean.constraints = ConstraintStore();
        collect_constraints(clean);
        it = found.emplace(skey, std::make_pair(clean, MappingsByKey{})).first;
      }
      for (MappingAssignment &m : enumerate_raw_mappings(graph)) {
        it->second.second.emplace(lex_key(graph, m), std::move(m));
      }
    }
    mapping_time += since(tm);
  }
  report.timing.generate = since(t) - mapping_time;
  report.graphs = found.size();

  // Symmetry breaking over the union of the runs.
  t = Clock::now();
  for (auto &[skey, entry] : found) {
    const SGraph &graph = entry.first;
    std::vector<MappingAssignment> raw;
    for (auto &[lk, m] : entry.second) raw.push_back(m);
    report.raw_mappings += raw.size();
    for (MappingAssignment &m : symmetry_break(graph, raw)) {
      CandidateRecord c;
      c.graph = graph;
      c.key = template_key(graph, m);
      c.mapping = std::move(m);
      report.candidates.push_back(std::move(c));
    }
  }
  std::sort(report.candidates.begin(), report.candidates.end(),
            [](const CandidateRecord &a, const CandidateRecord &b) {
              return a.key < b.key;
            });
  report.timing.mappings = mapping_time + since(t);

  if (config.run_verify) {
    t = Clock::now();
    for (CandidateRecord &c : report.candidates) {
      VerifyResult v = verify(program, c.graph, c.mapping, config.verify);
      c.verdict = v.verdict;
      c.saturation = v.stats;
    }
    report.timing.verify = since(t);
  }

  t = Clock::now();
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    CandidateRecord &c = report.candidates[i];
    if (c.verdict != Verdict::kEquivalent) continue;
    TemplateTestOptions to = config.oracle;
    to.seed = config.seed;
    to.candidate = i;
    c.oracle = template_equiv_test(program, c.graph, c.mapping, to);
    c.verified = c.oracle->equivalent;
    if (!c.verified || !config.run_tune) continue;
    TuneOptions tune_opts;
    tune_opts.backend = config.backend;
    tune_opts.samples = config.samples;
    tune_opts.seed = config.seed;
    tune_opts.smem_budget = config.smem_budget;
    try {
      ProfileResult best = tune(c.graph, c.mapping, tune_opts);
      best.equivalence_checked = true;
      c.best_smem = smem_usage(c.graph, c.mapping, best.params);
      c.best = best;
    } catch (const EmptyParamSpace &e) {
      c.note = e.what();
    }
  }
  report.timing.tune = since(t);
  report.timing.total = since(start);
  return report;
}

RunReport run_pipeline(const WorkloadSpec &spec, const PipelineConfig &config) {
  return run_pipeline(lower(spec), config);
}

json to_json(const RunReport &r) {
  json j;
  j["workload"] = r.workload;
  const PipelineConfig &c = r.config;
  json concrete = json::array();
  for (MapFamily f : c.concrete) concrete.push_back(map_family_name(f));
  j["config"] = {{"grid_dims", c.grid_dims},
                 {"max_ops", r.max_ops},
                 {"seed", c.seed},
                 {"samples", c.samples},
                 {"smem_budget", c.smem_budget},
                 {"backend", backend_name(c.backend)},
                 {"concrete_maps", concrete},
                 {"inverse_rules", c.verify.inverse_rules},
                 {"oracle_trials", c.oracle.trials},
                 {"oracle_param_samples", c.oracle.param_samples},
                 {"oracle_tolerance", c.oracle.tolerance}};
  json cands = json::array();
  for (const CandidateRecord &cr : r.candidates) {
    json jc;
    jc["graph"] = to_json(cr.graph);
    jc["graph"].erase("constraints");
    jc["mapping"] = to_json(cr.mapping, cr.graph.io);
    jc["verdict"] = verdict_name(cr.verdict);
    jc["saturation"] = {{"stop", stop_reason_name(cr.saturation.reason)},
                        {"iterations", cr.saturation.iterations},
                        {"nodes", cr.saturation.nodes},
                        {"classes", cr.saturation.classes}};
    jc["verified"] = cr.verified;
    if (cr.oracle) {
      json tested = json::array();
      for (const ParamValues &p : cr.oracle->tested) {
        tested.push_back(params_json(p, cr.graph.block));
      }
      jc["oracle"] = {{"passed", cr.oracle->equivalent},
                      {"max_error", cr.oracle->max_error},
                      {"params", tested}};
      if (!cr.oracle->error.empty()) jc["oracle"]["error"] = cr.oracle->error;
    }
    if (cr.best) {
      jc["best"] = {{"params", params_json(cr.best->params, cr.graph.block)},
                    {"score", cr.best->score},
                    {"smem_bytes", cr.best_smem},
                    {"equivalence_checked", cr.best->equivalence_checked}};
    }
    if (!cr.note.empty()) jc["note"] = cr.note;
    cands.push_back(jc);
  }
  j["candidates"] = cands;
  j["stats"] = {{"explored", r.search.explored},
                {"pruned_dim", r.search.pruned_dim},
                {"pruned_expr", r.search.pruned_expr},
                {"pruned_structure", r.search.pruned_structure},
                {"duplicates", r.search.duplicates},
                {"generator_runs", r.generator_runs},
                {"generate_status", generate_status_name(r.status)},
                {"graphs", r.graphs},
                {"raw_mappings", r.raw_mappings},
                {"mappings", r.candidates.size()},
                {"verified", r.verified_keys().size()},
                {"verified_structures", r.verified_structures()},
                {"unique_templates", r.unique_templates()}};
  j["timing"] = {{"generate", r.timing.generate},
                 {"mappings", r.timing.mappings},
                 {"verify", r.timing.verify},
                 {"tune", r.timing.tune},
                 {"total", r.timing.total}};
  return j;
}

}  // namespace symopt
