// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "brute_force.h"
#include "fixtures.h"
#include "soundness_harness.h"
#include "symopt/mapping.h"
#include "symopt/pipeline.h"

namespace symopt {
namespace {

using testing_fixtures::brute_force_graphs;
using testing_fixtures::mapping_with;
using testing_fixtures::row_split_mapping;
using testing_fixtures::softmax_matmul_sgraph;
using testing_fixtures::var;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::map<std::string, RunReport> &reports() {
  static std::map<std::string, RunReport> r;
  return r;
}

// Pipeline run without tuning, shared by several criteria.
const RunReport &verified_run(const std::string &workload) {
  auto it = reports().find(workload);
  if (it != reports().end()) return it->second;
  PipelineConfig cfg;
  cfg.run_tune = false;
  return reports().emplace(workload, run_pipeline(builtin_workload(workload), cfg))
      .first->second;
}

Outcome fused_softmax_matmul() {
  auto start = std::chrono::steady_clock::now();
  RunReport r = run_pipeline(builtin_workload("softmax_matmul"), PipelineConfig{});
  double secs = seconds_since(start);
  SGraph want = softmax_matmul_sgraph(256, 64);
  std::string want_key = template_key(want, row_split_mapping(want));
  bool structure = false, mapping = false, tuned = false;
  for (const CandidateRecord &c : r.candidates) {
    if (!c.verified || structure_key(c.graph) != structure_key(want)) continue;
    structure = true;
    if (c.key == want_key) {
      mapping = true;
      tuned = c.best && c.best->equivalence_checked;
    }
  }
  std::ostringstream os;
  os << r.unique_templates() << " verified templates, fused structure "
     << (structure ? "found" : "missing") << ", row-split mapping "
     << (mapping ? "verified" : "missing") << ", " << secs << " s";
  return {structure && mapping && tuned && secs < 60.0, os.str()};
}

Outcome random_testing() {
  std::ostringstream os;
  bool ok = true;
  for (const char *w : {"rmsnorm", "rmsnorm_mlp", "swiglu", "attention", "qk_attention"}) {
    const RunReport &r = verified_run(w);
    std::size_t n = 0;
    double worst = 0.0;
    for (const CandidateRecord &c : r.candidates) {
      if (c.verdict != Verdict::kEquivalent) continue;
      ++n;
      std::size_t space = ParamSpace(c.graph, c.mapping, -1).points().size();
      bool good = c.oracle && c.oracle->equivalent &&
                  c.oracle->tested.size() >= std::min<std::size_t>(3, space) &&
                  r.config.oracle.trials >= 20 && c.oracle->max_error <= 1e-9;
      if (c.oracle) worst = std::max(worst, c.oracle->max_error);
      ok = ok && good && c.verified;
    }
    ok = ok && n > 0;
    os << w << " " << n << " (max err " << worst << ") ";
  }
  return {ok, os.str()};
}

Outcome rejection_sentinel() {
  PipelineConfig defaults;
  Program p = lower(builtin_workload("softmax_matmul"));
  SGraph g = softmax_matmul_sgraph(256, 64);
  auto X = [&](int d, int par) { return var(g, "X", d, par); };
  auto W = [&](int d, int par) { return var(g, "W", d, par); };
  auto O = [&](int d, int par) { return var(g, "O", d, par); };
  const int r = 0, c = 1, x = kGridX, i = kForloop;
  std::vector<std::pair<std::string, MappingAssignment>> cases = {
      {"both X dims on x", mapping_with(g, {X(r, x), X(c, x), W(r, x), O(r, x)})},
      {"W rows on x and i",
       mapping_with(g, {X(r, x), X(c, i), W(r, x), W(r, i), O(r, x)})},
      {"softmax axis on the grid",
       mapping_with(g, {X(c, x), W(r, x), O(r, x), X(r, i)})},
      {"loop on W columns only", mapping_with(g, {X(r, x), X(c, i), W(c, i), O(r, x)})},
      {"X rows on x and i", mapping_with(g, {X(r, x), X(r, i), W(r, i), O(r, x)})},
      {"output columns on x",
       mapping_with(g, {X(r, x), X(c, i), W(r, i), O(c, x)})},
      {"output not split", mapping_with(g, {X(r, x), X(c, i), W(r, i)})},
      {"output rows without X rows",
       mapping_with(g, {X(c, i), W(r, i), W(c, x), O(r, x)})},
      {"W columns split, output rows",
       mapping_with(g, {X(r, x), X(c, i), W(r, i), W(c, x), O(r, x)})},
      {"loop over X rows", mapping_with(g, {X(r, i), W(c, x), O(c, x)})},
      {"both output dims on x",
       mapping_with(g, {X(r, x), X(c, i), W(r, i), O(r, x), O(c, x)})},
      {"loop on X only", mapping_with(g, {X(r, x), X(c, i), O(r, x)})},
  };
  int by_verifier = 0, by_oracle = 0, false_accepts = 0;
  std::uint64_t id = 0;
  for (const auto &[name, m] : cases) {
    Verdict v = Verdict::kNotProven;
    try {
      v = verify(p, g, m, defaults.verify).verdict;
    } catch (const std::exception &) {
    }
    TemplateTestOptions to = defaults.oracle;
    to.candidate = id++;
    bool oracle = template_equiv_test(p, g, m, to).equivalent;
    by_verifier += v != Verdict::kEquivalent;
    by_oracle += !oracle;
    false_accepts += v == Verdict::kEquivalent && oracle;
    if (std::getenv("ACCEPTANCE_VERBOSE")) {
      std::fprintf(stderr, "  %s: %s, random testing %s\n", name.c_str(), verdict_name(v),
                   oracle ? "passes" : "fails");
    }
  }
  std::ostringstream os;
  os << cases.size() << " mutated mappings: " << by_verifier
     << " rejected by the verifier, " << by_oracle << " fail random testing, "
     << false_accepts << " false accepts";
  return {cases.size() >= 10 && false_accepts == 0, os.str()};
}

Outcome axiom_soundness() {
  std::ostringstream os;
  bool ok = true;
  for (int k : {1, 2}) {
    AxiomOptions opts;
    opts.rank = 2;
    opts.grid_dims = k;
    testing_harness::Harness h(2, k, 77 + k);
    int rules = 0, failures = 0, thin = 0;
    for (const RewriteRule &rule : build_axioms(opts)) {
      testing_harness::HarnessResult res = h.check(rule, 50, 40000);
      ++rules;
      failures += res.failures;
      thin += res.verified < 50;
    }
    ok = ok && failures == 0 && thin == 0;
    os << "k=" << k << ": " << rules << " rules, " << failures << " failures, "
       << thin << " under 50 instances; ";
  }
  return {ok, os.str()};
}

Outcome generator_vs_brute_force() {
  std::ostringstream os;
  bool ok = true;
  std::vector<std::pair<Program, int>> cases = {
      {lower(builtin_workload("softmax_matmul")), 6},
      {lower(builtin_workload("identity")), 5},
      {testing_fixtures::exp_matmul_program(), 6}};
  for (const auto &[p, max] : cases) {
    os << p.name << ":";
    for (int n = 2; n <= max; ++n) {
      SearchConfig c;
      c.max_block_ops = n;
      GenerateResult r = generate(p, c);
      std::set<std::string> got;
      for (const SGraph &g : r.graphs) got.insert(structure_key(g));
      std::set<std::string> want = brute_force_graphs(p, n);
      ok = ok && r.status == GenerateStatus::kComplete && got == want &&
           got.size() == r.graphs.size();
      os << " " << got.size() << "/" << want.size();
    }
    os << "; ";
  }
  return {ok, os.str() + "generator/brute force per op limit from 2"};
}

std::size_t orbits(const SGraph &g, const std::vector<MappingAssignment> &raw) {
  std::set<std::string> seen, reps;
  for (const MappingAssignment &m : raw) {
    std::string a = lex_key(g, m), b = lex_key(g, permute_grid(m, {1, 0}));
    if (seen.count(a)) continue;
    seen.insert(a);
    seen.insert(b);
    reps.insert(a);
  }
  return reps.size();
}

Outcome symmetry_breaking() {
  std::ostringstream os;
  bool ok = true;
  for (auto [w, ops] : {std::pair{"identity", 4}, std::pair{"softmax_matmul", 7}}) {
    SearchConfig c;
    c.max_block_ops = ops;
    c.num_grid_dims = 2;
    Program p = lower(builtin_workload(w));
    std::size_t raw_total = 0, kept_total = 0, orbit_total = 0;
    for (const SGraph &g : generate(p, c).graphs) {
      std::vector<MappingAssignment> raw = enumerate_raw_mappings(g);
      std::size_t kept = symmetry_break(g, raw).size();
      std::size_t orb = orbits(g, raw);
      ok = ok && kept == orb && 2 * kept >= raw.size() && kept <= raw.size();
      raw_total += raw.size();
      kept_total += kept;
      orbit_total += orb;
    }
    ok = ok && raw_total > kept_total;
    os << w << " raw " << raw_total << " kept " << kept_total << " orbits "
       << orbit_total << "; ";
  }
  return {ok, os.str()};
}

Outcome symbolic_ablation() {
  const RunReport &sym = verified_run("rmsnorm");
  PipelineConfig cfg;
  cfg.run_tune = false;
  cfg.concrete = {MapFamily::kImap, MapFamily::kFmap, MapFamily::kOmap};
  RunReport conc = run_pipeline(builtin_workload("rmsnorm"), cfg);
  double ratio = static_cast<double>(conc.search.explored) /
                 static_cast<double>(std::max<std::uint64_t>(sym.search.explored, 1));
  bool same = sym.verified_keys() == conc.verified_keys();
  std::ostringstream os;
  os << "explored " << sym.search.explored << " symbolic vs "
     << conc.search.explored << " concrete (" << ratio << "x, "
     << conc.generator_runs << " runs), verified sets "
     << (same ? "identical" : "differ") << " (" << sym.unique_templates() << ")";
  return {ratio >= 10.0 && same && conc.status == GenerateStatus::kComplete, os.str()};
}

Outcome diversity() {
  std::size_t rms = verified_run("rmsnorm").unique_templates();
  std::size_t swi = verified_run("swiglu").unique_templates();
  std::ostringstream os;
  os << "rmsnorm " << rms << " unique verified templates ("
     << verified_run("rmsnorm").verified_structures() << " structures), swiglu "
     << swi << " (" << verified_run("swiglu").verified_structures() << " structures)";
  return {rms >= 5 && swi >= 2, os.str()};
}

Outcome inverse_rules() {
  using ex::comb, ex::part, ex::repl;
  ExprPtr A = ex::var("A"), B = ex::var("B"), C = ex::var("C");
  // Rows of the first product over x, columns of the second over y.
  ExprPtr a = repl(part(A, 0, kGridX), kGridY);
  ExprPtr b = repl(repl(B, kGridX), kGridY);
  ExprPtr c = repl(part(C, 1, kGridY), kGridX);
  ExprPtr cand = comb(comb(ex::matmul(ex::matmul(a, b), c), 0, kGridX), 1, kGridY);
  ExprPtr target = ex::matmul(ex::matmul(A, B), C);
  std::map<std::string, std::uint32_t> collapsed = {{"A", 0}, {"B", 0}, {"C", 0}};
  VerifyOptions off;
  off.inverse_rules = false;
  Verdict without = verify_exprs({target}, {cand}, 2, collapsed, off).verdict;
  Verdict with = verify_exprs({target}, {cand}, 2, collapsed, {}).verdict;

  // The candidate really computes the product.
  std::mt19937_64 rng(5);
  TensorMap vars = random_inputs({{"A", {16, 8}, TensorRole::kInput},
                                  {"B", {8, 8}, TensorRole::kInput},
                                  {"C", {8, 16}, TensorRole::kInput}},
                                 rng);
  double err = relative_error(eval_expr(cand, vars, {4, 2, 1, 1}).tiles.at(0),
                              eval_expr(target, vars, {1, 1, 1, 1}).tiles.at(0));
  std::ostringstream os;
  os << "without inverse rules " << verdict_name(without) << ", with "
     << verdict_name(with) << ", interpreter error " << err;
  return {without == Verdict::kNotProven && with == Verdict::kEquivalent && err <= 1e-9,
          os.str()};
}

Outcome determinism() {
  std::ostringstream os;
  bool ok = true;
  for (const char *w : {"rmsnorm", "softmax_matmul"}) {
    PipelineConfig cfg;
    cfg.seed = 11;
    nlohmann::json a = to_json(run_pipeline(builtin_workload(w), cfg));
    nlohmann::json b = to_json(run_pipeline(builtin_workload(w), cfg));
    a.erase("timing");
    b.erase("timing");
    bool same = a.dump() == b.dump();
    ok = ok && same;
    os << w << " " << (same ? "identical" : "differs") << " (" << a.dump().size()
       << " bytes) ";
  }
  return {ok, os.str()};
}

}  // namespace
}  // namespace symopt

int main() {
  using namespace symopt;
  struct Criterion {
    const char *name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria = {
      {"fused softmax-matmul template found", fused_softmax_matmul},
      {"verified pairs pass random testing", random_testing},
      {"mutated mappings rejected", rejection_sentinel},
      {"axiom soundness k=1,2", axiom_soundness},
      {"generator equals brute force", generator_vs_brute_force},
      {"symmetry breaking keeps one per orbit", symmetry_breaking},
      {"symbolic maps shrink the search", symbolic_ablation},
      {"template diversity", diversity},
      {"inverse rules needed for chained matmul", inverse_rules},
      {"reports are deterministic", determinism},
  };
  // ACCEPTANCE_ONLY=3 runs a single criterion.
  const char *only = std::getenv("ACCEPTANCE_ONLY");
  int failed = 0, ran = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only && std::atoi(only) != static_cast<int>(k + 1)) continue;
    ++ran;
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].name, o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
