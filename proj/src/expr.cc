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

#include "symopt/expr.h"

#include <cctype>
#include <sstream>

#include "symopt/graph_ir.h"

namespace symopt {

namespace {

struct ExprOpInfo {
  const char *name;
  int arity;
  bool has_dim;
  bool has_par;
};

constexpr ExprOpInfo kExprOps[] = {
    {"var", 0, false, false},   {"matmul", 2, false, false},
    {"sum", 1, true, false},    {"add", 2, false, false},
    {"mul", 2, false, false},   {"div", 2, false, false},
    {"exp", 1, false, false},   {"silu", 1, false, false},
    {"square", 1, false, false}, {"sqrt", 1, false, false},
    {"scale", 1, false, false}, {"part", 1, true, true},
    {"comb", 1, true, true},    {"red", 1, false, true},
    {"repl", 1, false, true},
};

const ExprOpInfo &info(ExprOp op) { return kExprOps[static_cast<int>(op)]; }

}  // namespace

const char *expr_op_name(ExprOp op) { return info(op).name; }
int expr_arity(ExprOp op) { return info(op).arity; }
bool expr_has_dim(ExprOp op) { return info(op).has_dim; }
bool expr_has_par(ExprOp op) { return info(op).has_par; }

bool is_parallel_op(ExprOp op) {
  return op == ExprOp::kPart || op == ExprOp::kComb || op == ExprOp::kRed ||
         op == ExprOp::kRepl;
}

ExprPtr Expr::var(std::string name) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::kVar;
  e->name = std::move(name);
  return e;
}

ExprPtr Expr::make(ExprOp op, std::vector<ExprPtr> kids, int dim, int par,
                   Rational scale) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->kids = std::move(kids);
  e->dim = dim;
  e->par = par;
  e->scale = scale;
  return e;
}

namespace ex {
ExprPtr var(const std::string &name) { return Expr::var(name); }
ExprPtr matmul(ExprPtr a, ExprPtr b) {
  return Expr::make(ExprOp::kMatmul, {std::move(a), std::move(b)});
}
ExprPtr sum(ExprPtr t, int dim) {
  return Expr::make(ExprOp::kSum, {std::move(t)}, dim);
}
ExprPtr add(ExprPtr a, ExprPtr b) {
  return Expr::make(ExprOp::kAdd, {std::move(a), std::move(b)});
}
ExprPtr mul(ExprPtr a, ExprPtr b) {
  return Expr::make(ExprOp::kMul, {std::move(a), std::move(b)});
}
ExprPtr div(ExprPtr a, ExprPtr b) {
  return Expr::make(ExprOp::kDiv, {std::move(a), std::move(b)});
}
ExprPtr exp(ExprPtr t) { return Expr::make(ExprOp::kExp, {std::move(t)}); }
ExprPtr silu(ExprPtr t) { return Expr::make(ExprOp::kSilu, {std::move(t)}); }
ExprPtr square(ExprPtr t) {
  return Expr::make(ExprOp::kSquare, {std::move(t)});
}
ExprPtr sqrt(ExprPtr t) { return Expr::make(ExprOp::kSqrt, {std::move(t)}); }
ExprPtr scale(ExprPtr t, Rational c) {
  return Expr::make(ExprOp::kScale, {std::move(t)}, -1, -1, c);
}
ExprPtr part(ExprPtr t, int dim, int par) {
  return Expr::make(ExprOp::kPart, {std::move(t)}, dim, par);
}
ExprPtr comb(ExprPtr t, int dim, int par) {
  return Expr::make(ExprOp::kComb, {std::move(t)}, dim, par);
}
ExprPtr red(ExprPtr t, int par) {
  return Expr::make(ExprOp::kRed, {std::move(t)}, -1, par);
}
ExprPtr repl(ExprPtr t, int par) {
  return Expr::make(ExprOp::kRepl, {std::move(t)}, -1, par);
}
}  // namespace ex

bool expr_equal(const ExprPtr &a, const ExprPtr &b) {
  if (a == b) return true;
  if (a->op != b->op || a->name != b->name || a->dim != b->dim ||
      a->par != b->par || a->scale != b->scale ||
      a->kids.size() != b->kids.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a->kids.size(); ++i) {
    if (!expr_equal(a->kids[i], b->kids[i])) return false;
  }
  return true;
}

std::size_t expr_size(const ExprPtr &e) {
  std::size_t n = 1;
  for (const ExprPtr &k : e->kids) n += expr_size(k);
  return n;
}

namespace {

void print(std::ostream &os, const ExprPtr &e, int rank) {
  if (e->op == ExprOp::kVar) {
    os << "v_" << e->name;
    return;
  }
  os << expr_op_name(e->op) << "(";
  for (std::size_t i = 0; i < e->kids.size(); ++i) {
    if (i) os << ", ";
    print(os, e->kids[i], rank);
  }
  if (expr_has_dim(e->op)) os << ", " << dim_name(rank, e->dim);
  if (expr_has_par(e->op)) os << ", " << parallel_dim_name(e->par);
  if (e->op == ExprOp::kScale) {
    os << ", " << e->scale.numerator();
    if (e->scale.denominator() != 1) os << "/" << e->scale.denominator();
  }
  os << ")";
}

class Parser {
 public:
  Parser(std::string_view text, int rank) : text_(text), rank_(rank) {}

  ExprPtr parse() {
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string &msg) {
    throw ExprParseError(msg + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(text_[pos_])) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  std::string token() {
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

  int dim_arg() {
    expect(',');
    std::string t = token();
    int d = parse_dim_name(rank_, t);
    if (d < 0) fail("unknown data dim '" + t + "'");
    return d;
  }

  int par_arg() {
    expect(',');
    std::string t = token();
    for (int p = 0; p < kNumParallelDims; ++p) {
      if (t.size() == 1 && parallel_dim_name(p) == t[0]) return p;
    }
    fail("unknown parallel dim '" + t + "'");
  }

  Rational rational_arg() {
    expect(',');
    std::string t = token();
    try {
      auto slash = t.find('/');
      if (slash == std::string::npos) return Rational(std::stoll(t));
      return Rational(std::stoll(t.substr(0, slash)),
                      std::stoll(t.substr(slash + 1)));
    } catch (const std::exception &) {
      fail("bad constant '" + t + "'");
    }
  }

  ExprPtr expr() {
    std::string name = token();
    if (name.rfind("v_", 0) == 0 && name.size() > 2) {
      return Expr::var(name.substr(2));
    }
    int op = -1;
    for (int i = 1; i < static_cast<int>(std::size(kExprOps)); ++i) {
      if (name == kExprOps[i].name) op = i;
    }
    if (op < 0) fail("unknown operator '" + name + "'");
    ExprOp kind = static_cast<ExprOp>(op);
    expect('(');
    std::vector<ExprPtr> kids;
    for (int i = 0; i < expr_arity(kind); ++i) {
      if (i) expect(',');
      kids.push_back(expr());
    }
    int dim = expr_has_dim(kind) ? dim_arg() : -1;
    int par = expr_has_par(kind) ? par_arg() : -1;
    Rational c = kind == ExprOp::kScale ? rational_arg() : Rational(1);
    expect(')');
    return Expr::make(kind, std::move(kids), dim, par, c);
  }

  std::string_view text_;
  int rank_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_string(const ExprPtr &e, int rank) {
  std::ostringstream os;
  print(os, e, rank);
  return os.str();
}

ExprPtr parse_expr(std::string_view text, int rank) {
  return Parser(text, rank).parse();
}

}  // namespace symopt
