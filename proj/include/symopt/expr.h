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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "symopt/symdim.h"

namespace symopt {

enum class ExprOp {
  kVar,
  kMatmul,
  kSum,
  kAdd,
  kMul,
  kDiv,
  kExp,
  kSilu,
  kSquare,
  kSqrt,
  kScale,
  kPart,
  kComb,
  kRed,
  kRepl,
};

const char *expr_op_name(ExprOp op);
int expr_arity(ExprOp op);
bool is_parallel_op(ExprOp op);
bool expr_has_dim(ExprOp op);  // sum, part, comb
bool expr_has_par(ExprOp op);  // part, comb, red, repl

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Term over tensor variables, compute operators and the parallel operators
/// part(t,d,p), comb(t,d,p), red(t,p), repl(t,p).
struct Expr {
  ExprOp op;
  std::string name;  // kVar
  int dim = -1;
  int par = -1;
  Rational scale{1};
  std::vector<ExprPtr> kids;

  static ExprPtr var(std::string name);
  static ExprPtr make(ExprOp op, std::vector<ExprPtr> kids, int dim = -1,
                      int par = -1, Rational scale = Rational(1));
};

namespace ex {
ExprPtr var(const std::string &name);
ExprPtr matmul(ExprPtr a, ExprPtr b);
ExprPtr sum(ExprPtr t, int dim);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr exp(ExprPtr t);
ExprPtr silu(ExprPtr t);
ExprPtr square(ExprPtr t);
ExprPtr sqrt(ExprPtr t);
ExprPtr scale(ExprPtr t, Rational c);
ExprPtr part(ExprPtr t, int dim, int par);
ExprPtr comb(ExprPtr t, int dim, int par);
ExprPtr red(ExprPtr t, int par);
ExprPtr repl(ExprPtr t, int par);
}  // namespace ex

bool expr_equal(const ExprPtr &a, const ExprPtr &b);
std::size_t expr_size(const ExprPtr &e);

// Data dims print by positional name for the given rank (r, c, ...).
std::string to_string(const ExprPtr &e, int rank = 2);

class ExprParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the printed syntax, e.g.
///   comb(div(matmul(exp(part(v_X, r, x)), v_W), sum(exp(v_X), c)), r, x)
ExprPtr parse_expr(std::string_view text, int rank = 2);

}  // namespace symopt
