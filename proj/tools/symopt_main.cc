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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "symopt/axioms.h"
#include "symopt/pipeline.h"
#include "symopt/serialize.h"

namespace {

using namespace symopt;
using nlohmann::json;

struct SearchArgs {
  std::string workload;
  int grid_dims = 1;
  int max_ops = 0;
  std::uint64_t seed = 0;
  int samples = 16;
  std::int64_t budget = kDefaultSmemBudget;
  std::string backend = "cost";
  std::vector<std::string> ablate;
  bool no_verify = false;
  bool no_tune = false;
  bool no_inverse = false;
  int oracle_trials = 20;
  int oracle_params = 3;
  std::uint64_t node_budget = 10'000'000;
  double time_budget = 600.0;
  std::string out;
  std::string dot;
};

std::vector<MapFamily> parse_ablations(const std::vector<std::string> &items) {
  static const std::map<std::string, MapFamily> kFamilies = {
      {"imap", MapFamily::kImap},
      {"fmap", MapFamily::kFmap},
      {"omap", MapFamily::kOmap}};
  std::vector<MapFamily> out;
  for (const std::string &item : items) {
    auto eq = item.find('=');
    std::string fam = item.substr(0, eq);
    std::string mode = eq == std::string::npos ? "concrete" : item.substr(eq + 1);
    auto it = kFamilies.find(fam);
    if (it == kFamilies.end() || (mode != "concrete" && mode != "symbolic")) {
      throw CLI::ValidationError("--ablate", "expected {imap,fmap,omap}=concrete");
    }
    if (mode == "concrete" &&
        std::find(out.begin(), out.end(), it->second) == out.end()) {
      out.push_back(it->second);
    }
  }
  return out;
}

void write_text(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

int run_search(const SearchArgs &a) {
  PipelineConfig cfg;
  cfg.concrete = parse_ablations(a.ablate);
  WorkloadSpec spec = load_workload(a.workload);
  cfg.grid_dims = a.grid_dims;
  cfg.max_ops = a.max_ops;
  cfg.seed = a.seed;
  cfg.samples = a.samples;
  cfg.smem_budget = a.budget;
  cfg.backend = a.backend == "interp" ? Backend::kInterp : Backend::kCost;
  cfg.run_verify = !a.no_verify;
  cfg.run_tune = !a.no_tune;
  cfg.verify.inverse_rules = !a.no_inverse;
  cfg.oracle.trials = a.oracle_trials;
  cfg.oracle.param_samples = a.oracle_params;
  cfg.node_budget = a.node_budget;
  cfg.time_budget = a.time_budget;

  RunReport report = run_pipeline(spec, cfg);
  write_text(a.out, to_json(report).dump(2) + "\n");

  if (!a.dot.empty()) {
    std::filesystem::create_directories(a.dot);
    int n = 0;
    for (const CandidateRecord &c : report.candidates) {
      if (!c.verified) continue;
      char name[32];
      std::snprintf(name, sizeof name, "template_%03d.dot", n++);
      std::unique_ptr<ConcreteGraph> concrete;
      if (c.best) {
        concrete = std::make_unique<ConcreteGraph>(
            instantiate(c.graph, c.mapping, c.best->params));
      }
      write_text((std::filesystem::path(a.dot) / name).string(),
                 to_dot(c.graph, concrete.get()));
    }
  }
  std::cerr << report.workload << ": " << report.graphs << " graphs, "
            << report.candidates.size() << " candidates, "
            << report.unique_templates() << " verified templates, "
            << report.search.explored << " explored ("
            << generate_status_name(report.status) << ")\n";
  return 0;
}

int run_lower(const std::string &source) {
  Program p = lower(load_workload(source));
  json j;
  j["name"] = p.name;
  json tensors = json::array();
  for (const TensorSpec &t : p.tensors) tensors.push_back({{"name", t.name}, {"dims", t.dims}});
  j["tensors"] = tensors;
  json ops = json::array();
  for (const ProgramOp &op : p.ops) {
    json o = {{"op", op_name(op.kind)}, {"output", p.tensors[op.output].name}};
    json ins = json::array();
    for (int k : op.inputs) ins.push_back(p.tensors[k].name);
    o["inputs"] = ins;
    if (op.kind == OpKind::kSumData) o["axis"] = op.axis;
    if (op.kind == OpKind::kScaleConst) o["scale"] = rational_str(op.scale);
    ops.push_back(o);
  }
  j["ops"] = ops;
  json terms = json::array();
  for (const ExprPtr &e : encode_program(p)) terms.push_back(to_string(e, p.rank()));
  j["terms"] = terms;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_axioms(int rank, int grid_dims, bool inverse) {
  AxiomOptions opts;
  opts.rank = rank;
  opts.grid_dims = grid_dims;
  opts.inverse_rules = inverse;
  json out = json::array();
  for (const AxiomSpec &s : axiom_specs(opts)) {
    out.push_back({{"name", s.name},
                   {"group", axiom_group_name(s.group)},
                   {"rule", s.text},
                   {"guards", s.guards}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Symbolic tensor-program superoptimizer"};
  app.require_subcommand(1);

  SearchArgs sa;
  CLI::App *search = app.add_subcommand("search", "Run the full pipeline on a workload");
  search->add_option("--workload", sa.workload, "Workload JSON file or builtin:<name>")
      ->required();
  search->add_option("--grid-dims", sa.grid_dims, "Number of grid dims")
      ->check(CLI::Range(1, kMaxGridDims));
  search->add_option("--max-ops", sa.max_ops,
                     "Block node limit, loaders and savers included (0: default)");
  search->add_option("--seed", sa.seed, "Seed for sampling and random testing");
  search->add_option("--samples", sa.samples, "Parameter points scored per template")
      ->check(CLI::PositiveNumber);
  search->add_option("--budget", sa.budget, "Shared-memory budget in bytes");
  search->add_option("--backend", sa.backend, "Scoring backend")
      ->check(CLI::IsMember({"cost", "interp"}));
  search->add_option("--ablate", sa.ablate,
                     "Enumerate a mapping family before the search: "
                     "{imap,fmap,omap}=concrete");
  search->add_flag("--no-verify", sa.no_verify, "Skip verification");
  search->add_flag("--no-tune", sa.no_tune, "Skip parameter tuning");
  search->add_flag("--no-inverse-rules", sa.no_inverse,
                   "Verify without the inverse rewrite rules");
  search->add_option("--oracle-trials", sa.oracle_trials, "Random inputs per parameter point");
  search->add_option("--oracle-params", sa.oracle_params,
                     "Parameter points per verified template");
  search->add_option("--node-budget", sa.node_budget, "Generator extension budget");
  search->add_option("--time-budget", sa.time_budget, "Generator time budget in seconds");
  search->add_option("--out", sa.out, "Report file (default: stdout)");
  search->add_option("--dot", sa.dot, "Directory for DOT files of verified templates");

  CLI::App *workloads = app.add_subcommand("workloads", "List builtin workloads");

  std::string lower_src;
  CLI::App *lower_cmd = app.add_subcommand("lower", "Print the lowered program");
  lower_cmd->add_option("--workload", lower_src, "Workload JSON file or builtin:<name>")
      ->required();

  int rank = 2, grid = 3;
  bool no_inverse = false;
  CLI::App *axioms = app.add_subcommand("axioms", "Print the rewrite axioms");
  axioms->add_option("--rank", rank, "Tensor rank")->check(CLI::Range(2, 4));
  axioms->add_option("--grid-dims", grid, "Grid dims")->check(CLI::Range(1, kMaxGridDims));
  axioms->add_flag("--no-inverse-rules", no_inverse, "Omit the inverse rules");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*search) return run_search(sa);
    if (*workloads) {
      for (const std::string &n : builtin_workloads()) std::cout << n << "\n";
      return 0;
    }
    if (*lower_cmd) return run_lower(lower_src);
    if (*axioms) return run_axioms(rank, grid, !no_inverse);
  } catch (const CLI::Error &e) {
    return app.exit(e);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
