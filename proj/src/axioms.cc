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

#include "symopt/axioms.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "symopt/graph_ir.h"

namespace symopt {

const char *axiom_group_name(AxiomGroup g) {
  switch (g) {
    case AxiomGroup::kCompute: return "compute";
    case AxiomGroup::kParallel: return "parallel";
    case AxiomGroup::kInverse: return "inverse";
  }
  return "?";
}

namespace {

class RuleParser {
 public:
  RuleParser(int rank, std::vector<std::string> &vars)
      : rank_(rank), vars_(vars) {}

  Pattern pattern(std::string_view text) {
    text_ = text;
    pos_ = 0;
    Pattern p = term();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return p;
  }

  Guard guard(std::string_view text) {
    text_ = text;
    pos_ = 0;
    Guard g{Guard::kNeq, -1};
    skip_ws();
    if (peek() == '?') {
      g.a = var(false);
      expect('!');
      expect('=');
      g.b = var(false);
    } else {
      bool negate = false;
      if (peek() == '!') {
        ++pos_;
        negate = true;
      }
      std::string fn = ident();
      expect('(');
      g.a = var(false);
      expect(',');
      skip_ws();
      if (fn == "same" || fn == "covers") {
        g.kind = fn == "same" ? Guard::kSameCollapse : Guard::kCovers;
        g.b = var(false);
      } else if (fn == "collapsed") {
        g.kind = negate ? Guard::kNotCollapsed : Guard::kCollapsed;
        if (peek() == '?') {
          g.b = var(false);
        } else {
          g.fixed_dim = literal_dim();
        }
      } else {
        fail("unknown guard '" + fn + "'");
      }
      expect(')');
    }
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return g;
  }

 private:
  [[noreturn]] void fail(const std::string &msg) {
    throw RuleParseError(msg + " in '" + std::string(text_) + "'");
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(text_[pos_])) ++pos_;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(text_[pos_]) || text_[pos_] == '_' ||
            text_[pos_] == '/' || text_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  // New variables may only be introduced while parsing the left side.
  int var(bool allow_new) {
    expect('?');
    std::string name = ident();
    auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it != vars_.end()) return static_cast<int>(it - vars_.begin());
    if (!allow_new || !introducing_) fail("unbound variable ?" + name);
    vars_.push_back(name);
    return static_cast<int>(vars_.size() - 1);
  }

  int literal_dim() {
    std::string t = ident();
    int d = parse_dim_name(rank_, t);
    if (d < 0) fail("unknown data dim '" + t + "'");
    return d;
  }

  Pattern symbol(NodeOp op) {
    Pattern p;
    if (peek() == '?') {
      p.var = var(true);
      return p;
    }
    p.op = op;
    std::string t = ident();
    if (op == NodeOp::kDimSym) {
      p.leaf = parse_dim_name(rank_, t);
      if (p.leaf < 0) fail("unknown data dim '" + t + "'");
    } else if (op == NodeOp::kParSym) {
      p.leaf = -1;
      for (int q = 0; q < kNumParallelDims; ++q) {
        if (t.size() == 1 && t[0] == parallel_dim_name(q)) p.leaf = q;
      }
      if (p.leaf < 0) fail("unknown parallel dim '" + t + "'");
    } else {
      fail("constants must be pattern variables");
    }
    return p;
  }

  Pattern term() {
    if (peek() == '?') {
      Pattern p;
      p.var = var(true);
      return p;
    }
    std::string name = ident();
    int op = -1;
    for (int k = static_cast<int>(ExprOp::kMatmul);
         k <= static_cast<int>(ExprOp::kRepl); ++k) {
      if (name == expr_op_name(static_cast<ExprOp>(k))) op = k;
    }
    if (op < 0) fail("unknown operator '" + name + "'");
    auto kind = static_cast<ExprOp>(op);
    Pattern p;
    p.op = to_node_op(kind);
    expect('(');
    for (int k = 0; k < expr_arity(kind); ++k) {
      if (k) expect(',');
      p.kids.push_back(term());
    }
    if (expr_has_dim(kind)) {
      expect(',');
      p.kids.push_back(symbol(NodeOp::kDimSym));
    }
    if (expr_has_par(kind)) {
      expect(',');
      p.kids.push_back(symbol(NodeOp::kParSym));
    }
    if (kind == ExprOp::kScale) {
      expect(',');
      p.kids.push_back(symbol(NodeOp::kConstSym));
    }
    expect(')');
    return p;
  }

 public:
  bool introducing_ = true;

 private:
  int rank_;
  std::vector<std::string> &vars_;
  std::string_view text_;
  std::size_t pos_ = 0;
};

void collect_vars(const Pattern &p, std::set<int> &out) {
  if (p.var >= 0) out.insert(p.var);
  for (const Pattern &k : p.kids) collect_vars(k, out);
}

RewriteRule compile_direction(const std::string &name, std::string_view lhs,
                              std::string_view rhs,
                              const std::vector<std::string> &guards,
                              int rank) {
  RewriteRule rule;
  rule.name = name;
  RuleParser parser(rank, rule.var_names);
  rule.lhs = parser.pattern(lhs);
  if (rule.lhs.var >= 0) throw RuleParseError(name + ": bare variable lhs");
  parser.introducing_ = false;
  rule.rhs = parser.pattern(rhs);
  for (const std::string &g : guards) rule.guards.push_back(parser.guard(g));
  return rule;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(s.front())) s.remove_prefix(1);
  while (!s.empty() && std::isspace(s.back())) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

std::vector<RewriteRule> compile_axiom(const AxiomSpec &spec, int rank) {
  std::string_view text = spec.text;
  bool both = false;
  std::size_t at = text.find("<=>");
  std::size_t width = 3;
  if (at != std::string_view::npos) {
    both = true;
  } else {
    at = text.find("=>");
    width = 2;
  }
  if (at == std::string_view::npos) {
    throw RuleParseError(spec.name + ": missing '=>'");
  }
  std::string lhs = trim(text.substr(0, at));
  std::string rhs = trim(text.substr(at + width));
  std::vector<RewriteRule> out;
  out.push_back(compile_direction(spec.name, lhs, rhs, spec.guards, rank));
  if (both) {
    RewriteRule rev =
        compile_direction(spec.name + "/rev", rhs, lhs, spec.guards, rank);
    std::set<int> l, r;
    collect_vars(out[0].lhs, l);
    collect_vars(out[0].rhs, r);
    if (l != r) {
      throw RuleParseError(spec.name + ": both sides need the same variables");
    }
    out.push_back(std::move(rev));
  }
  return out;
}

std::vector<AxiomSpec> axiom_specs(const AxiomOptions &opts) {
  if (opts.rank < 2 || opts.rank > kMaxRank) {
    throw RuleParseError("axioms need rank in [2, 8]");
  }
  if (opts.grid_dims < 1 || opts.grid_dims > kMaxGridDims) {
    throw RuleParseError("axioms need 1 to 3 grid dims");
  }
  using G = AxiomGroup;
  std::vector<AxiomSpec> s = {
      {"matmul-assoc", G::kCompute,
       "matmul(matmul(?a, ?b), ?c) <=> matmul(?a, matmul(?b, ?c))", {}},
      {"matmul-dist-left", G::kCompute,
       "matmul(add(?a, ?b), ?c) <=> add(matmul(?a, ?c), matmul(?b, ?c))",
       {"same(?a, ?b)"}},
      {"matmul-dist-right", G::kCompute,
       "matmul(?a, add(?b, ?c)) <=> add(matmul(?a, ?b), matmul(?a, ?c))",
       {"same(?b, ?c)"}},
      {"matmul-mul-left", G::kCompute,
       "matmul(mul(?a, ?v), ?b) <=> mul(matmul(?a, ?b), ?v)",
       {"collapsed(?v, c)", "covers(?a, ?v)"}},
      {"matmul-mul-right", G::kCompute,
       "matmul(?a, mul(?b, ?v)) <=> mul(matmul(?a, ?b), ?v)",
       {"collapsed(?v, r)", "covers(?b, ?v)"}},
      {"matmul-div-left", G::kCompute,
       "matmul(div(?a, ?v), ?b) <=> div(matmul(?a, ?b), ?v)",
       {"collapsed(?v, c)", "covers(?a, ?v)"}},
      {"matmul-div-right", G::kCompute,
       "matmul(?a, div(?b, ?v)) <=> div(matmul(?a, ?b), ?v)",
       {"collapsed(?v, r)", "covers(?b, ?v)"}},
      {"matmul-scale-left", G::kCompute,
       "matmul(scale(?a, ?k), ?b) <=> scale(matmul(?a, ?b), ?k)", {}},
      {"matmul-scale-right", G::kCompute,
       "matmul(?a, scale(?b, ?k)) <=> scale(matmul(?a, ?b), ?k)", {}},
      {"add-comm", G::kCompute, "add(?a, ?b) => add(?b, ?a)", {}},
      {"mul-comm", G::kCompute, "mul(?a, ?b) => mul(?b, ?a)", {}},
      {"sum-collapsed", G::kCompute, "sum(?t, ?d) => ?t",
       {"collapsed(?t, ?d)"}},
  };
  if (opts.compute_only) return s;

  auto add = [&s](std::string name, G g, std::string text,
                  std::vector<std::string> guards = {}) {
    s.push_back({std::move(name), g, std::move(text), std::move(guards)});
  };
  add("part-repl", G::kParallel,
      "part(repl(?t, ?q), ?d, ?p) <=> repl(part(?t, ?d, ?p), ?q)",
      {"?p != ?q"});
  add("comb-repl", G::kParallel,
      "comb(repl(?t, ?q), ?d, ?p) <=> repl(comb(?t, ?d, ?p), ?q)",
      {"?p != ?q"});
  add("red-part", G::kParallel,
      "red(part(?t, ?d, ?p), ?q) <=> part(red(?t, ?q), ?d, ?p)",
      {"?p != ?q"});
  add("comb-red", G::kParallel,
      "comb(red(?t, ?q), ?d, ?p) <=> red(comb(?t, ?d, ?p), ?q)",
      {"?p != ?q"});
  add("part-part", G::kParallel,
      "part(part(?t, ?d, ?p), ?e, ?q) <=> part(part(?t, ?e, ?q), ?d, ?p)",
      {"?p != ?q", "?d != ?e"});
  add("comb-comb", G::kParallel,
      "comb(comb(?t, ?d, ?p), ?e, ?q) <=> comb(comb(?t, ?e, ?q), ?d, ?p)",
      {"?p != ?q", "?d != ?e"});
  add("comb-part", G::kParallel,
      "comb(part(?t, ?d, ?p), ?e, ?q) <=> part(comb(?t, ?e, ?q), ?d, ?p)",
      {"?p != ?q", "?d != ?e"});
  add("red-red", G::kParallel, "red(red(?t, ?p), ?q) => red(red(?t, ?q), ?p)");
  add("repl-repl", G::kParallel,
      "repl(repl(?t, ?p), ?q) => repl(repl(?t, ?q), ?p)");
  add("red-repl", G::kParallel,
      "red(repl(?t, ?q), ?p) <=> repl(red(?t, ?p), ?q)", {"?p != ?q"});
  add("comb-part-cancel", G::kParallel, "comb(part(?t, ?d, ?p), ?d, ?p) => ?t");
  add("part-comb-cancel", G::kParallel, "part(comb(?t, ?d, ?p), ?d, ?p) => ?t");
  add("matmul-par-reduce", G::kParallel,
      "red(matmul(part(?a, c, ?p), part(?b, r, ?p)), ?p) => matmul(?a, ?b)");
  add("matmul-par-row", G::kParallel,
      "comb(matmul(part(?a, r, ?p), repl(?b, ?p)), r, ?p) => matmul(?a, ?b)");
  add("matmul-par-col", G::kParallel,
      "comb(matmul(repl(?a, ?p), part(?b, c, ?p)), c, ?p) => matmul(?a, ?b)");
  for (int l = 0; l + 2 < opts.rank; ++l) {
    std::string b = dim_name(opts.rank, l);
    add("matmul-par-" + b, G::kParallel,
        "comb(matmul(part(?a, " + b + ", ?p), part(?b, " + b + ", ?p)), " + b +
            ", ?p) => matmul(?a, ?b)");
  }
  add("sum-part", G::kParallel,
      "sum(part(?t, ?d, ?p), ?e) <=> part(sum(?t, ?e), ?d, ?p)", {"?d != ?e"});
  add("sum-comb", G::kParallel,
      "sum(comb(?t, ?d, ?p), ?e) <=> comb(sum(?t, ?e), ?d, ?p)", {"?d != ?e"});
  add("sum-repl", G::kParallel,
      "sum(repl(?t, ?p), ?d) <=> repl(sum(?t, ?d), ?p)");
  add("red-sum", G::kParallel, "red(sum(?t, ?d), ?p) <=> sum(red(?t, ?p), ?d)");
  add("red-scale", G::kParallel,
      "red(scale(?t, ?k), ?p) <=> scale(red(?t, ?p), ?k)");

  // Compound partial sums. The last three keep the outer sum so both sides
  // have the same shape.
  add("sum-form-1", G::kParallel,
      "sum(red(part(?t, ?d, ?p), ?p), ?d) => sum(?t, ?d)");
  add("sum-form-2", G::kParallel,
      "sum(comb(sum(part(?t, ?d, ?p), ?d), ?d, ?p), ?d) => sum(?t, ?d)");
  add("sum-form-3", G::kParallel,
      "sum(comb(red(part(part(?t, ?d, ?p), ?d, ?q), ?q), ?d, ?p), ?d) => "
      "sum(?t, ?d)",
      {"?p != ?q"});
  add("sum-form-4", G::kParallel,
      "sum(comb(red(part(part(?t, ?d, ?p), ?d, ?q), ?p), ?d, ?q), ?d) => "
      "sum(?t, ?d)",
      {"?p != ?q"});
  add("sum-form-5", G::kParallel,
      "sum(red(comb(part(part(?t, ?d, ?p), ?d, ?q), ?d, ?p), ?q), ?d) => "
      "sum(?t, ?d)",
      {"?p != ?q"});
  add("sum-form-6", G::kParallel,
      "sum(red(part(red(part(?t, ?d, ?p), ?p), ?d, ?q), ?q), ?d) => "
      "sum(red(part(?t, ?d, ?p), ?p), ?d)",
      {"?p != ?q"});
  add("sum-form-7", G::kParallel,
      "sum(red(red(part(part(?t, ?d, ?p), ?d, ?q), ?p), ?q), ?d) => "
      "sum(red(part(?t, ?d, ?p), ?p), ?d)",
      {"?p != ?q"});
  add("sum-form-8", G::kParallel,
      "sum(red(red(part(part(?t, ?d, ?p), ?d, ?q), ?q), ?p), ?d) => "
      "sum(red(part(?t, ?d, ?p), ?p), ?d)",
      {"?p != ?q"});

  for (const char *op : {"exp", "silu", "square", "sqrt"}) {
    std::string u = op;
    add(u + "-part", G::kParallel,
        "part(" + u + "(?t), ?d, ?p) <=> " + u + "(part(?t, ?d, ?p))");
    add(u + "-comb", G::kParallel,
        "comb(" + u + "(?t), ?d, ?p) <=> " + u + "(comb(?t, ?d, ?p))");
    add(u + "-repl", G::kParallel,
        "repl(" + u + "(?t), ?p) <=> " + u + "(repl(?t, ?p))");
  }
  add("scale-part", G::kParallel,
      "part(scale(?t, ?k), ?d, ?p) <=> scale(part(?t, ?d, ?p), ?k)");
  add("scale-comb", G::kParallel,
      "comb(scale(?t, ?k), ?d, ?p) <=> scale(comb(?t, ?d, ?p), ?k)");
  add("scale-repl", G::kParallel,
      "repl(scale(?t, ?k), ?p) <=> scale(repl(?t, ?p), ?k)");

  for (const char *op : {"add", "mul", "div"}) {
    std::string b = op;
    add(b + "-part", G::kParallel,
        "part(" + b + "(?a, ?b), ?d, ?p) <=> " + b +
            "(part(?a, ?d, ?p), part(?b, ?d, ?p))",
        {"!collapsed(?a, ?d)", "!collapsed(?b, ?d)"});
    add(b + "-comb", G::kParallel,
        "comb(" + b + "(?a, ?b), ?d, ?p) <=> " + b +
            "(comb(?a, ?d, ?p), comb(?b, ?d, ?p))",
        {"!collapsed(?a, ?d)", "!collapsed(?b, ?d)"});
    add(b + "-repl", G::kParallel,
        "repl(" + b + "(?a, ?b), ?p) <=> " + b + "(repl(?a, ?p), repl(?b, ?p))");
    // One operand broadcast along the split dim.
    add(b + "-part-bcast-r", G::kParallel,
        "part(" + b + "(?a, ?v), ?d, ?p) <=> " + b +
            "(part(?a, ?d, ?p), repl(?v, ?p))",
        {"collapsed(?v, ?d)", "!collapsed(?a, ?d)"});
    add(b + "-part-bcast-l", G::kParallel,
        "part(" + b + "(?v, ?a), ?d, ?p) <=> " + b +
            "(repl(?v, ?p), part(?a, ?d, ?p))",
        {"collapsed(?v, ?d)", "!collapsed(?a, ?d)"});
    add(b + "-comb-bcast-r", G::kParallel,
        "comb(" + b + "(?a, repl(?v, ?p)), ?d, ?p) <=> " + b +
            "(comb(?a, ?d, ?p), ?v)",
        {"collapsed(?v, ?d)", "!collapsed(?a, ?d)"});
    add(b + "-comb-bcast-l", G::kParallel,
        "comb(" + b + "(repl(?v, ?p), ?a), ?d, ?p) <=> " + b +
            "(?v, comb(?a, ?d, ?p))",
        {"collapsed(?v, ?d)", "!collapsed(?a, ?d)"});
  }

  if (opts.inverse_rules) {
    add("matmul-inv-row", G::kInverse,
        "matmul(part(?a, r, ?p), repl(?b, ?p)) => part(matmul(?a, ?b), r, ?p)");
    add("matmul-inv-col", G::kInverse,
        "matmul(repl(?a, ?p), part(?b, c, ?p)) => part(matmul(?a, ?b), c, ?p)");
    for (int l = 0; l + 2 < opts.rank; ++l) {
      std::string b = dim_name(opts.rank, l);
      add("matmul-inv-" + b, G::kInverse,
          "matmul(part(?a, " + b + ", ?p), part(?b, " + b + ", ?p)) => part(matmul(?a, ?b), " +
              b + ", ?p)");
    }
    add("matmul-inv-repl", G::kInverse,
        "matmul(repl(?a, ?p), repl(?b, ?p)) => repl(matmul(?a, ?b), ?p)");
  }
  return s;
}

std::vector<RewriteRule> build_axioms(const AxiomOptions &opts) {
  std::vector<RewriteRule> rules;
  for (const AxiomSpec &spec : axiom_specs(opts)) {
    for (RewriteRule &r : compile_axiom(spec, opts.rank)) {
      rules.push_back(std::move(r));
    }
  }
  return rules;
}

}  // namespace symopt
