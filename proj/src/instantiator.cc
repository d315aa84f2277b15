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

#include "symopt/instantiator.h"

#include <algorithm>
#include <chrono>
#include <functional>
#include <numeric>
#include <random>

namespace symopt {

namespace {

std::int64_t numel(const std::vector<std::int64_t> &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1},
                         std::multiplies<>());
}

// Indices of `n` distinct items drawn from [0, size), in increasing order.
std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n,
                                        std::mt19937_64 &rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  if (n < size) {
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, size - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

}  // namespace

std::int64_t smem_usage(const ConcreteGraph &graph) {
  std::int64_t elems = 0;
  for (const auto &shape : graph.shapes) elems += numel(shape);
  return elems * kSmemElementBytes;
}

std::int64_t smem_usage(const SGraph &graph, const MappingAssignment &m,
                        const ParamValues &params) {
  return smem_usage(instantiate(graph, m, params));
}

ParamSpace::ParamSpace(const SGraph &graph, const MappingAssignment &m,
                       std::int64_t smem_budget)
    : graph_(graph), mapping_(m), budget_(smem_budget) {
  std::vector<int> pars = graph.block.grid_pars();
  if (graph.block.has_accum()) pars.push_back(kForloop);
  std::vector<std::vector<std::int64_t>> values(kNumParallelDims, {1});
  for (int p : pars) {
    std::int64_t largest = 1;
    for (VarId v : mapping_variables(graph)) {
      if (var_par(v) == p && m.get(v)) {
        largest = std::max(largest, graph.io[var_tensor(v)].dims[var_dim(v)]);
      }
    }
    for (std::int64_t s = 2; s <= largest; s *= 2) values[p].push_back(s);
    if (values[p].size() > 1) active_.push_back(p);
  }
  ParamValues point;
  point.fill(1);
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == active_.size()) {
      if (contains(point)) points_.push_back(point);
      return;
    }
    for (std::int64_t s : values[active_[k]]) {
      point[active_[k]] = s;
      rec(k + 1);
    }
    point[active_[k]] = 1;
  };
  rec(0);
}

bool ParamSpace::contains(const ParamValues &p) const {
  try {
    ConcreteGraph c = instantiate(graph_, mapping_, p);
    if (c.params != p) return false;  // not in normal form
    return budget_ < 0 || smem_usage(c) <= budget_;
  } catch (const InstantiationError &) {
    return false;
  }
}

CostModel::Breakdown CostModel::measure(const ConcreteGraph &graph) {
  Breakdown b;
  const BlockGraph &bg = graph.sgraph.block;
  for (int p : bg.grid_pars()) b.blocks *= graph.params[p];
  double iters = static_cast<double>(graph.params[kForloop]);
  std::vector<int> phase = bg.phases();
  for (std::size_t id = 0; id < bg.nodes.size(); ++id) {
    const BlockNode &n = bg.nodes[id];
    double out = static_cast<double>(numel(graph.shapes[id]));
    // Accum nodes take one step per iteration.
    double reps = phase[id] == 0 || n.kind == OpKind::kAccum ? iters : 1.0;
    switch (n.kind) {
      case OpKind::kInputLoader:
        b.bytes_loaded += reps * out * kSmemElementBytes;
        break;
      case OpKind::kOutputSaver:
        b.bytes_stored += out * kSmemElementBytes;
        break;
      case OpKind::kMatmul: {
        double k = static_cast<double>(graph.shapes[n.inputs[0]].back());
        b.flops += reps * 2.0 * out * k;
        break;
      }
      default:
        b.flops += reps * static_cast<double>(numel(graph.shapes[n.inputs[0]]));
    }
  }
  double blocks = static_cast<double>(b.blocks);
  b.bytes_loaded *= blocks;
  b.bytes_stored *= blocks;
  b.flops *= blocks;
  return b;
}

double CostModel::score(const ConcreteGraph &graph) const {
  Breakdown b = measure(graph);
  double parallel = static_cast<double>(std::min(b.blocks, num_sms));
  return alpha * (b.bytes_loaded + b.bytes_stored) + beta * b.flops / parallel;
}

const char *backend_name(Backend b) {
  return b == Backend::kCost ? "cost" : "interp";
}

double score_interp(const ConcreteGraph &graph, int trials) {
  std::mt19937_64 rng(0);
  std::vector<TensorSpec> specs(graph.sgraph.io.begin(),
                                graph.sgraph.io.begin() + graph.sgraph.num_inputs);
  TensorMap named = random_inputs(specs, rng);
  std::vector<DenseTensor> inputs;
  for (const TensorSpec &s : specs) inputs.push_back(named.at(s.name));
  std::vector<double> times;
  for (int t = 0; t < std::max(trials, 1); ++t) {
    auto start = std::chrono::steady_clock::now();
    run_concrete(graph, inputs);
    times.push_back(std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count());
  }
  std::sort(times.begin(), times.end());
  std::size_t n = times.size();
  return n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

ProfileResult tune(const SGraph &graph, const MappingAssignment &m,
                   const TuneOptions &opts) {
  ParamSpace space(graph, m, opts.smem_budget);
  const auto &points = space.points();
  if (points.empty()) {
    throw EmptyParamSpace("no parallelization sizes fit the memory budget");
  }
  std::mt19937_64 rng(opts.seed);
  std::size_t n = static_cast<std::size_t>(std::max(opts.samples, 1));
  ProfileResult best;
  bool have = false;
  for (std::size_t i : sample_indices(points.size(), n, rng)) {
    ConcreteGraph c = instantiate(graph, m, points[i]);
    double s = opts.backend == Backend::kCost ? opts.cost.score(c)
                                              : score_interp(c, opts.interp_trials);
    if (!have || s < best.score ||
        (s == best.score && points[i] < best.params)) {
      best.params = points[i];
      best.score = s;
      have = true;
    }
  }
  return best;
}

TemplateTestResult template_equiv_test(const Program &program,
                                       const SGraph &graph,
                                       const MappingAssignment &m,
                                       const TemplateTestOptions &opts) {
  TemplateTestResult result;
  ParamSpace space(graph, m, -1);
  std::seed_seq seq{opts.seed, opts.candidate};
  std::mt19937_64 rng(seq);
  std::size_t n = static_cast<std::size_t>(std::max(opts.param_samples, 0));
  for (std::size_t i : sample_indices(space.points().size(), n, rng)) {
    const ParamValues &p = space.points()[i];
    result.tested.push_back(p);
    EquivTestOptions eo;
    eo.trials = opts.trials;
    eo.seed = opts.seed;
    eo.candidate = opts.candidate * 1024 + result.tested.size();
    eo.tolerance = opts.tolerance;
    eo.precision = opts.precision;
    EquivTestResult r =
        random_equiv_test(program, instantiate(graph, m, p), eo);
    result.max_error = std::max(result.max_error, r.max_error);
    if (!r.equivalent) {
      result.equivalent = false;
      if (result.error.empty()) result.error = r.error;
    }
  }
  if (result.tested.empty()) {
    result.equivalent = false;
    result.error = "no valid parallelization sizes";
  }
  return result;
}

}  // namespace symopt
