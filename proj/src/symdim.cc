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

#include "symopt/symdim.h"

#include <algorithm>
#include <set>
#include <sstream>

namespace symopt {

char parallel_dim_name(int par) {
  static constexpr char kNames[kNumParallelDims] = {'x', 'y', 'z', 'i'};
  return (par >= 0 && par < kNumParallelDims) ? kNames[par] : '?';
}

SymDimExpr SymDimExpr::literal(std::int64_t value) {
  return SymDimExpr(std::make_shared<const Node>(
      Node{Kind::kLiteral, value, nullptr, nullptr}));
}

SymDimExpr SymDimExpr::param(int par) {
  return SymDimExpr(std::make_shared<const Node>(
      Node{Kind::kParam, par, nullptr, nullptr}));
}

SymDimExpr SymDimExpr::var(VarId v) {
  return SymDimExpr(std::make_shared<const Node>(
      Node{Kind::kMapVar, v, nullptr, nullptr}));
}

SymDimExpr SymDimExpr::make(Kind k, const SymDimExpr &a, const SymDimExpr &b) {
  return SymDimExpr(
      std::make_shared<const Node>(Node{k, 0, a.node_, b.node_}));
}

SymDimExpr operator+(const SymDimExpr &a, const SymDimExpr &b) {
  return SymDimExpr::make(SymDimExpr::Kind::kAdd, a, b);
}
SymDimExpr operator-(const SymDimExpr &a, const SymDimExpr &b) {
  return SymDimExpr::make(SymDimExpr::Kind::kSub, a, b);
}
SymDimExpr operator*(const SymDimExpr &a, const SymDimExpr &b) {
  return SymDimExpr::make(SymDimExpr::Kind::kMul, a, b);
}
SymDimExpr operator/(const SymDimExpr &a, const SymDimExpr &b) {
  return SymDimExpr::make(SymDimExpr::Kind::kDiv, a, b);
}

SymDimExpr SymDimExpr::substitute(
    const std::function<SymDimExpr(VarId)> &subst) const {
  switch (kind()) {
    case Kind::kLiteral:
    case Kind::kParam:
      return *this;
    case Kind::kMapVar:
      return subst(static_cast<VarId>(value()));
    default:
      return make(kind(), lhs().substitute(subst), rhs().substitute(subst));
  }
}

std::string SymDimExpr::to_string(
    const std::function<std::string(VarId)> &var_name) const {
  std::ostringstream os;
  switch (kind()) {
    case Kind::kLiteral:
      os << value();
      break;
    case Kind::kParam:
      os << "d_" << parallel_dim_name(static_cast<int>(value()));
      break;
    case Kind::kMapVar:
      if (var_name) {
        os << var_name(static_cast<VarId>(value()));
      } else {
        os << "m" << value();
      }
      break;
    default: {
      const char *op = kind() == Kind::kAdd   ? " + "
                       : kind() == Kind::kSub ? " - "
                       : kind() == Kind::kMul ? "*"
                                              : "/";
      os << "(" << lhs().to_string(var_name) << op
         << rhs().to_string(var_name) << ")";
    }
  }
  return os.str();
}

SymDimExpr sigma(int tensor, int dim, const std::vector<int> &pars) {
  std::optional<SymDimExpr> prod;
  for (int p : pars) {
    SymDimExpr m = SymDimExpr::var(map_var(tensor, dim, p));
    SymDimExpr factor =
        m * SymDimExpr::param(p) + SymDimExpr::literal(1) - m;
    prod = prod ? *prod * factor : factor;
  }
  return prod ? *prod : SymDimExpr::literal(1);
}

SymDimExpr partitioned_dim(std::int64_t size, int tensor, int dim,
                           const std::vector<int> &pars) {
  return SymDimExpr::literal(size) / sigma(tensor, dim, pars);
}

// ---------------------------------------------------------------------------
// Polynomials

Poly Poly::constant(Rational c) {
  Poly p;
  p.add_term({}, c);
  return p;
}

Poly Poly::symbol(int sym) {
  Poly p;
  p.add_term({{sym, 1}}, Rational(1));
  return p;
}

void Poly::add_term(const Monomial &m, Rational c) {
  if (c.numerator() == 0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.numerator() == 0) terms_.erase(it);
  }
}

Poly Poly::operator+(const Poly &o) const {
  Poly r = *this;
  for (const auto &[m, c] : o.terms_) r.add_term(m, c);
  return r;
}

Poly Poly::operator-(const Poly &o) const {
  Poly r = *this;
  for (const auto &[m, c] : o.terms_) r.add_term(m, -c);
  return r;
}

Poly Poly::operator*(const Poly &o) const {
  Poly r;
  for (const auto &[ma, ca] : terms_) {
    for (const auto &[mb, cb] : o.terms_) {
      std::map<int, int> merged;
      for (auto [s, e] : ma) merged[s] += e;
      for (auto [s, e] : mb) merged[s] += e;
      r.add_term(Monomial(merged.begin(), merged.end()), ca * cb);
    }
  }
  return r;
}

RationalFunction to_rational_function(const SymDimExpr &e) {
  using K = SymDimExpr::Kind;
  switch (e.kind()) {
    case K::kLiteral:
      return {Poly::constant(Rational(e.value())), Poly::constant(1)};
    case K::kParam:
      return {Poly::symbol(static_cast<int>(e.value())), Poly::constant(1)};
    case K::kMapVar:
      return {Poly::symbol(Poly::kVarSymbolBase + static_cast<int>(e.value())),
              Poly::constant(1)};
    default:
      break;
  }
  RationalFunction a = to_rational_function(e.lhs());
  RationalFunction b = to_rational_function(e.rhs());
  switch (e.kind()) {
    case K::kAdd:
      return {a.num * b.den + b.num * a.den, a.den * b.den};
    case K::kSub:
      return {a.num * b.den - b.num * a.den, a.den * b.den};
    case K::kMul:
      return {a.num * b.num, a.den * b.den};
    default:
      return {a.num * b.den, a.den * b.num};
  }
}

bool symbolic_equiv(const SymDimExpr &a, const SymDimExpr &b) {
  RationalFunction fa = to_rational_function(a);
  RationalFunction fb = to_rational_function(b);
  // A zero denominator makes the expression undefined everywhere.
  if (fa.den.is_zero() || fb.den.is_zero()) return false;
  return fa.num * fb.den == fb.num * fa.den;
}

Rational eval_rational(const SymDimExpr &e,
                       const std::function<int(VarId)> &mapping,
                       const ParamValues &params) {
  using K = SymDimExpr::Kind;
  switch (e.kind()) {
    case K::kLiteral:
      return Rational(e.value());
    case K::kParam:
      return Rational(params.at(static_cast<std::size_t>(e.value())));
    case K::kMapVar:
      return Rational(mapping(static_cast<VarId>(e.value())));
    default:
      break;
  }
  Rational a = eval_rational(e.lhs(), mapping, params);
  Rational b = eval_rational(e.rhs(), mapping, params);
  switch (e.kind()) {
    case K::kAdd:
      return a + b;
    case K::kSub:
      return a - b;
    case K::kMul:
      return a * b;
    default:
      if (b.numerator() == 0) throw NonIntegerError("division by zero in dimension");
      return a / b;
  }
}

std::int64_t eval(const SymDimExpr &e,
                  const std::function<int(VarId)> &mapping,
                  const ParamValues &params) {
  Rational r = eval_rational(e, mapping, params);
  if (r.denominator() != 1 || r.numerator() <= 0) {
    std::ostringstream os;
    os << "dimension " << e.to_string() << " evaluates to " << r.numerator()
       << "/" << r.denominator();
    throw NonIntegerError(os.str());
  }
  return r.numerator();
}

// ---------------------------------------------------------------------------
// Constraint store

VarId ConstraintStore::find(VarId v) const {
  auto it = parent_.find(v);
  if (it == parent_.end()) return v;
  VarId root = v;
  while (true) {
    auto jt = parent_.find(root);
    if (jt == parent_.end() || jt->second == root) break;
    root = jt->second;
  }
  // Path compression.
  while (v != root) {
    VarId next = parent_[v];
    parent_[v] = root;
    v = next;
  }
  return root;
}

bool ConstraintStore::unite(VarId a, VarId b) {
  VarId ra = find(a), rb = find(b);
  parent_.try_emplace(a, a);
  parent_.try_emplace(b, b);
  if (ra == rb) return true;
  if (ra < 0 && rb < 0) return false;
  // Constants (negative) win; otherwise the smaller variable id.
  VarId root, child;
  if (ra < 0 || (rb >= 0 && ra < rb)) {
    root = ra;
    child = rb;
  } else {
    root = rb;
    child = ra;
  }
  parent_[child] = root;
  parent_.try_emplace(root, root);
  constraints_.push_back({a, b});
  return true;
}

std::optional<int> ConstraintStore::value_of(VarId v) const {
  VarId r = find(v);
  if (r == kZero) return 0;
  if (r == kOne) return 1;
  return std::nullopt;
}

SymDimExpr ConstraintStore::substitute(const SymDimExpr &e) const {
  return e.substitute([this](VarId v) {
    VarId r = find(v);
    if (r == kZero) return SymDimExpr::literal(0);
    if (r == kOne) return SymDimExpr::literal(1);
    return SymDimExpr::var(r);
  });
}

std::vector<VarId> ConstraintStore::variables() const {
  std::vector<VarId> out;
  for (const auto &[v, p] : parent_) {
    if (v >= 0) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Coefficient matching

namespace {

struct PartitionForm {
  Rational numerator;
  // Parameter -> mapping term multiplying it (variable id or kZero/kOne).
  std::map<int, VarId> factors;
};

std::optional<VarId> as_term(const SymDimExpr &e) {
  if (e.kind() == SymDimExpr::Kind::kMapVar) {
    return static_cast<VarId>(e.value());
  }
  if (e.is_literal(0)) return kZero;
  if (e.is_literal(1)) return kOne;
  return std::nullopt;
}

bool same_term(const SymDimExpr &a, const SymDimExpr &b) {
  auto ta = as_term(a), tb = as_term(b);
  return ta && tb && *ta == *tb;
}

// Recognizes (m·d_p + 1 − m).
bool extract_factor(const SymDimExpr &e, PartitionForm &form) {
  using K = SymDimExpr::Kind;
  if (e.kind() != K::kSub) return false;
  SymDimExpr add = e.lhs();
  if (add.kind() != K::kAdd || !add.rhs().is_literal(1)) return false;
  SymDimExpr mul = add.lhs();
  if (mul.kind() != K::kMul || mul.rhs().kind() != K::kParam) return false;
  if (!same_term(mul.lhs(), e.rhs())) return false;
  int p = static_cast<int>(mul.rhs().value());
  if (form.factors.count(p)) return false;
  form.factors[p] = *as_term(e.rhs());
  return true;
}

bool extract_product(const SymDimExpr &e, PartitionForm &form) {
  if (e.kind() == SymDimExpr::Kind::kMul && !extract_factor(e, form)) {
    // A Mul node is either a factor's inner m·d_p (handled above via Sub)
    // or a product of factors.
    return extract_product(e.lhs(), form) && extract_product(e.rhs(), form);
  }
  if (e.is_literal(1)) return true;
  return extract_factor(e, form);
}

std::optional<PartitionForm> extract(const SymDimExpr &e) {
  PartitionForm form;
  if (e.kind() == SymDimExpr::Kind::kLiteral) {
    form.numerator = Rational(e.value());
    return form;
  }
  if (e.kind() != SymDimExpr::Kind::kDiv ||
      e.lhs().kind() != SymDimExpr::Kind::kLiteral) {
    return std::nullopt;
  }
  form.numerator = Rational(e.lhs().value());
  if (!extract_product(e.rhs(), form)) return std::nullopt;
  return form;
}

}  // namespace

std::optional<std::vector<EqualityConstraint>> match_dims(
    const SymDimExpr &a, const SymDimExpr &b, const ConstraintStore *store) {
  std::optional<PartitionForm> fa = extract(a), fb = extract(b);
  if (!fa || !fb) return std::nullopt;

  ConstraintStore local = store ? *store : ConstraintStore();
  std::set<int> params;
  for (const auto &[p, t] : fa->factors) params.insert(p);
  for (const auto &[p, t] : fb->factors) params.insert(p);

  std::vector<EqualityConstraint> out;
  for (int p : params) {
    auto ia = fa->factors.find(p), ib = fb->factors.find(p);
    VarId ta = ia == fa->factors.end() ? kZero : ia->second;
    VarId tb = ib == fb->factors.end() ? kZero : ib->second;
    if (local.same(ta, tb)) continue;
    if (!local.unite(ta, tb)) return std::nullopt;
    if (ta < 0) std::swap(ta, tb);
    out.push_back({ta, tb});
  }
  // Both denominators are now the same product of factors, so the
  // expressions agree iff the numerators do.
  if (fa->numerator != fb->numerator) return std::nullopt;
  return out;
}

}  // namespace symopt
