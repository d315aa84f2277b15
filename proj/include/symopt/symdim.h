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

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/rational.hpp>

namespace symopt {

using Rational = boost::rational<std::int64_t>;

// Parallelization dimensions carry fixed identities: grid dims x, y, z and
// the single for-loop dim i. A block graph with k grid dims uses ids [0, k)
// plus kForloop.
enum ParallelDimId : int {
  kGridX = 0,
  kGridY = 1,
  kGridZ = 2,
  kForloop = 3,
};
inline constexpr int kNumParallelDims = 4;
inline constexpr int kMaxGridDims = 3;
inline constexpr int kMaxRank = 8;

char parallel_dim_name(int par);

using ParamValues = std::array<std::int64_t, kNumParallelDims>;

// Mapping variable m_{T,d,p}. Negative ids are the constants 0 and 1 in
// constraint terms.
using VarId = std::int32_t;
inline constexpr VarId kZero = -1;
inline constexpr VarId kOne = -2;

constexpr VarId map_var(int tensor, int dim, int par) {
  return (tensor * kMaxRank + dim) * kNumParallelDims + par;
}
constexpr int var_tensor(VarId v) { return v / (kMaxRank * kNumParallelDims); }
constexpr int var_dim(VarId v) { return (v / kNumParallelDims) % kMaxRank; }
constexpr int var_par(VarId v) { return v % kNumParallelDims; }

class NonIntegerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rational expression over integer literals, parallelization-size symbols
/// d_p and mapping variables. Immutable; copies share structure.
class SymDimExpr {
 public:
  enum class Kind { kLiteral, kParam, kMapVar, kAdd, kSub, kMul, kDiv };

  SymDimExpr() : SymDimExpr(literal(1)) {}

  static SymDimExpr literal(std::int64_t value);
  static SymDimExpr param(int par);
  static SymDimExpr var(VarId v);

  Kind kind() const { return node_->kind; }
  std::int64_t value() const { return node_->value; }
  SymDimExpr lhs() const { return SymDimExpr(node_->lhs); }
  SymDimExpr rhs() const { return SymDimExpr(node_->rhs); }

  bool is_literal(std::int64_t v) const {
    return kind() == Kind::kLiteral && value() == v;
  }

  friend SymDimExpr operator+(const SymDimExpr &a, const SymDimExpr &b);
  friend SymDimExpr operator-(const SymDimExpr &a, const SymDimExpr &b);
  friend SymDimExpr operator*(const SymDimExpr &a, const SymDimExpr &b);
  friend SymDimExpr operator/(const SymDimExpr &a, const SymDimExpr &b);

  // Replaces mapping variables through `subst` (may return a literal 0/1
  // expression or another variable).
  SymDimExpr substitute(
      const std::function<SymDimExpr(VarId)> &subst) const;

  // `var_name` renders a mapping variable, e.g. "m_{X,r,x}".
  std::string to_string(
      const std::function<std::string(VarId)> &var_name = {}) const;

 private:
  struct Node {
    Kind kind;
    std::int64_t value = 0;
    std::shared_ptr<const Node> lhs, rhs;
  };
  explicit SymDimExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static SymDimExpr make(Kind k, const SymDimExpr &a, const SymDimExpr &b);

  std::shared_ptr<const Node> node_;
};

// σ(T,d) = ∏_p (m_{T,d,p}·d_p + 1 − m_{T,d,p}) over the given parallel dims.
SymDimExpr sigma(int tensor, int dim, const std::vector<int> &pars);

// D / σ(T,d).
SymDimExpr partitioned_dim(std::int64_t size, int tensor, int dim,
                           const std::vector<int> &pars);

// Multivariate polynomial with rational coefficients. Symbols are encoded
// as ints: params 0..3, mapping variable v as kVarSymbolBase + v.
class Poly {
 public:
  static constexpr int kVarSymbolBase = 16;
  using Monomial = std::vector<std::pair<int, int>>;  // (symbol, exponent)

  Poly() = default;
  static Poly constant(Rational c);
  static Poly symbol(int sym);

  Poly operator+(const Poly &o) const;
  Poly operator-(const Poly &o) const;
  Poly operator*(const Poly &o) const;
  bool operator==(const Poly &o) const { return terms_ == o.terms_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, Rational> &terms() const { return terms_; }

 private:
  void add_term(const Monomial &m, Rational c);
  std::map<Monomial, Rational> terms_;
};

struct RationalFunction {
  Poly num;
  Poly den;
};

RationalFunction to_rational_function(const SymDimExpr &e);

/// True iff `a` and `b` are equal as rational functions of their symbols.
bool symbolic_equiv(const SymDimExpr &a, const SymDimExpr &b);

/// Exact evaluation. `mapping` returns the 0/1 value of a variable.
Rational eval_rational(const SymDimExpr &e,
                       const std::function<int(VarId)> &mapping,
                       const ParamValues &params);

/// Like eval_rational but throws NonIntegerError unless the result is a
/// positive integer.
std::int64_t eval(const SymDimExpr &e,
                  const std::function<int(VarId)> &mapping,
                  const ParamValues &params);

/// lhs = rhs, where rhs may be the constant kZero / kOne.
struct EqualityConstraint {
  VarId lhs;
  VarId rhs;
  bool operator==(const EqualityConstraint &) const = default;
};

/// Union-find over mapping variables and the two constants. Constants are
/// always class roots; otherwise the smallest variable id is.
class ConstraintStore {
 public:
  VarId find(VarId v) const;
  // Returns false (and leaves the store unchanged) if this would equate
  // the constants 0 and 1.
  bool unite(VarId a, VarId b);
  bool same(VarId a, VarId b) const { return find(a) == find(b); }
  // 0/1 if the class of `v` is tied to a constant.
  std::optional<int> value_of(VarId v) const;

  SymDimExpr substitute(const SymDimExpr &e) const;

  // Every constraint accepted so far, in insertion order.
  const std::vector<EqualityConstraint> &constraints() const {
    return constraints_;
  }
  // Variables that were ever mentioned.
  std::vector<VarId> variables() const;

 private:
  mutable std::unordered_map<VarId, VarId> parent_;
  std::vector<EqualityConstraint> constraints_;
};

/// Coefficient matching of two D/σ dimension expressions. Returns the
/// equality constraints that make them identical (relative to `store`, if
/// given), or nullopt when no such constraints exist.
std::optional<std::vector<EqualityConstraint>> match_dims(
    const SymDimExpr &a, const SymDimExpr &b,
    const ConstraintStore *store = nullptr);

}  // namespace symopt
