// Simplification: linear normal form for integer expressions, constant
// folding and flattening for predicates. Equivalence is the only contract.

#include <algorithm>
#include <map>

#include "locelim/error.hpp"
#include "locelim/expr.hpp"

namespace locelim {
namespace {

using K = IntExpr::Kind;

// sum(coeff * atom) + constant. Atoms are variables, constants and opaque
// non-linear subterms, keyed by their printed form.
struct Linear {
  std::map<std::string, std::pair<Int, IntExpr>> terms;
  Int constant = 0;

  [[nodiscard]] bool is_constant() const { return terms.empty(); }
};

Int add_or_throw(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) throw Error(Errc::Overflow, "overflow");
  return r;
}
Int mul_or_throw(Int a, Int b) {
  Int r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(Errc::Overflow, "overflow");
  return r;
}

void add_term(Linear& l, Int coeff, const IntExpr& atom) {
  if (coeff == 0) return;
  std::string key = to_string(atom);
  auto it = l.terms.find(key);
  if (it == l.terms.end()) {
    l.terms.emplace(key, std::make_pair(coeff, atom));
    return;
  }
  it->second.first = add_or_throw(it->second.first, coeff);
  if (it->second.first == 0) l.terms.erase(it);
}

Linear scaled(const Linear& l, Int factor) {
  Linear out;
  if (factor == 0) return out;
  out.constant = mul_or_throw(l.constant, factor);
  for (const auto& [k, t] : l.terms) out.terms.emplace(k, std::make_pair(mul_or_throw(t.first, factor), t.second));
  return out;
}

Linear combined(const Linear& a, const Linear& b, Int sign) {
  Linear out = a;
  out.constant = add_or_throw(out.constant, mul_or_throw(b.constant, sign));
  for (const auto& [k, t] : b.terms) add_term(out, mul_or_throw(t.first, sign), t.second);
  return out;
}

IntExpr rebuild(const Linear& l);

Linear linearize(const IntExpr& e) {
  Linear out;
  switch (e.kind()) {
    case K::Literal:
      out.constant = e.value();
      return out;
    case K::Var:
    case K::Const:
      add_term(out, 1, e);
      return out;
    case K::Neg: return scaled(linearize(e.args()[0]), -1);
    case K::Add: return combined(linearize(e.args()[0]), linearize(e.args()[1]), 1);
    case K::Sub: return combined(linearize(e.args()[0]), linearize(e.args()[1]), -1);
    case K::Mul: {
      Linear a = linearize(e.args()[0]);
      Linear b = linearize(e.args()[1]);
      if (a.is_constant()) return scaled(b, a.constant);
      if (b.is_constant()) return scaled(a, b.constant);
      add_term(out, 1, IntExpr::mul(rebuild(a), rebuild(b)));
      return out;
    }
    case K::Div: {
      Linear a = linearize(e.args()[0]);
      const IntExpr& d = e.args()[1];
      if (d.is_literal(1)) return a;
      if (d.is_literal() && d.value() != 0 && a.is_constant()) {
        out.constant = floor_div(a.constant, d.value());
        return out;
      }
      add_term(out, 1, IntExpr::div(rebuild(a), d));
      return out;
    }
    case K::Min:
    case K::Max: {
      Linear a = linearize(e.args()[0]);
      Linear b = linearize(e.args()[1]);
      bool is_min = e.kind() == K::Min;
      Linear diff = combined(a, b, -1);
      if (diff.is_constant()) return (diff.constant <= 0) == is_min ? a : b;
      IntExpr ra = rebuild(a), rb = rebuild(b);
      add_term(out, 1, is_min ? IntExpr::min(ra, rb) : IntExpr::max(ra, rb));
      return out;
    }
  }
  return out;
}

IntExpr rebuild(const Linear& l) {
  // Variables before constants keeps "x-1" and "N-1" readable.
  std::vector<std::pair<Int, IntExpr>> ordered;
  for (const auto& [k, t] : l.terms)
    if (t.second.kind() != K::Const) ordered.push_back(t);
  for (const auto& [k, t] : l.terms)
    if (t.second.kind() == K::Const) ordered.push_back(t);

  std::optional<IntExpr> acc;
  for (const auto& [coeff, atom] : ordered) {
    Int mag = coeff < 0 ? -coeff : coeff;
    IntExpr term = mag == 1 ? atom : IntExpr::mul(IntExpr::literal(mag), atom);
    if (!acc)
      acc = coeff < 0 ? IntExpr::negate(term) : term;
    else
      acc = coeff < 0 ? IntExpr::sub(*acc, term) : IntExpr::add(*acc, term);
  }
  if (!acc) return IntExpr::literal(l.constant);
  if (l.constant > 0) return IntExpr::add(*acc, IntExpr::literal(l.constant));
  if (l.constant < 0 && l.constant != INT64_MIN) return IntExpr::sub(*acc, IntExpr::literal(-l.constant));
  if (l.constant < 0) return IntExpr::add(*acc, IntExpr::literal(l.constant));
  return *acc;
}

bool fold_compare(CmpOp op, Int d) {
  switch (op) {
    case CmpOp::Eq: return d == 0;
    case CmpOp::Ne: return d != 0;
    case CmpOp::Lt: return d < 0;
    case CmpOp::Le: return d <= 0;
    case CmpOp::Gt: return d > 0;
    case CmpOp::Ge: return d >= 0;
  }
  return false;
}

Predicate simplify_cmp(CmpOp op, const IntExpr& lhs, const IntExpr& rhs) {
  try {
    Linear a = linearize(lhs);
    Linear b = linearize(rhs);
    Linear diff = combined(a, b, -1);
    if (diff.is_constant()) return Predicate::truth(fold_compare(op, diff.constant));
    return Predicate::compare(op, rebuild(a), rebuild(b));
  } catch (const Error&) {
    return Predicate::compare(op, lhs, rhs);
  }
}

Predicate simplify_impl(const Predicate& p, bool negate);

Predicate simplify_junction(std::span<const Predicate> args, bool conj) {
  // conj selects And; the identity element is true for And, false for Or.
  std::vector<Predicate> out;
  auto push = [&](const Predicate& q) {
    if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
  };
  for (const auto& a : args) {
    Predicate s = simplify_impl(a, false);
    if (s.kind() == (conj ? Predicate::Kind::False : Predicate::Kind::True)) return s;
    if (s.kind() == (conj ? Predicate::Kind::True : Predicate::Kind::False)) continue;
    if (s.kind() == (conj ? Predicate::Kind::And : Predicate::Kind::Or)) {
      for (const auto& inner : s.args()) push(inner);
    } else {
      push(s);
    }
  }
  for (const auto& q : out) {
    Predicate nq = simplify_impl(q, true);
    if (std::find(out.begin(), out.end(), nq) != out.end()) return Predicate::truth(!conj);
  }
  return conj ? Predicate::conjunction(std::move(out)) : Predicate::disjunction(std::move(out));
}

Predicate simplify_impl(const Predicate& p, bool negate) {
  using PK = Predicate::Kind;
  switch (p.kind()) {
    case PK::True: return Predicate::truth(!negate);
    case PK::False: return Predicate::truth(negate);
    case PK::Cmp: return simplify_cmp(negate ? negated(p.op()) : p.op(), p.lhs(), p.rhs());
    case PK::Not: return simplify_impl(p.args()[0], !negate);
    case PK::And:
    case PK::Or: {
      bool conj = (p.kind() == PK::And) != negate;
      if (!negate) return simplify_junction(p.args(), conj);
      std::vector<Predicate> flipped;
      for (const auto& a : p.args()) flipped.push_back(Predicate::negation(a));
      return simplify_junction(flipped, conj);
    }
  }
  return p;
}

}  // namespace

IntExpr simplify(const IntExpr& e) {
  try {
    return rebuild(linearize(e));
  } catch (const Error&) {
    return e;
  }
}

Predicate simplify(const Predicate& p) { return simplify_impl(p, false); }

}  // namespace locelim
