#include "linear.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <map>
#include <optional>
#include <set>

namespace locelim::detail {

namespace {

constexpr std::size_t kMaxDisjuncts = 256;
constexpr std::size_t kMaxConstraints = 4000;

// sum coeff[k] * k + c. Keys are "v:x" for variables and "c:N" for constants.
struct Lin {
  std::map<std::string, mpz_class> coeff;
  mpz_class c = 0;

  Lin& add(const Lin& o, const mpz_class& f) {
    for (const auto& [k, a] : o.coeff) {
      mpz_class& slot = coeff[k];
      slot += f * a;
      if (slot == 0) coeff.erase(k);
    }
    c += f * o.c;
    return *this;
  }
  bool is_constant() const { return coeff.empty(); }
};

std::optional<Lin> linear(const IntExpr& e) {
  using K = IntExpr::Kind;
  Lin r;
  switch (e.kind()) {
    case K::Literal: r.c = static_cast<long>(e.value()); return r;
    case K::Var: r.coeff["v:" + e.name()] = 1; return r;
    case K::Const: r.coeff["c:" + e.name()] = 1; return r;
    case K::Neg: {
      auto a = linear(e.args()[0]);
      if (!a) return std::nullopt;
      return Lin{}.add(*a, -1);
    }
    case K::Add:
    case K::Sub: {
      auto a = linear(e.args()[0]), b = linear(e.args()[1]);
      if (!a || !b) return std::nullopt;
      return a->add(*b, e.kind() == K::Add ? 1 : -1);
    }
    case K::Mul: {
      auto a = linear(e.args()[0]), b = linear(e.args()[1]);
      if (!a || !b) return std::nullopt;
      if (a->is_constant()) return Lin{}.add(*b, a->c);
      if (b->is_constant()) return Lin{}.add(*a, b->c);
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

// lin <= 0, divided by the gcd of its coefficients with the constant rounded up.
Lin tightened(Lin l) {
  mpz_class g = 0;
  for (const auto& [k, a] : l.coeff) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), a.get_mpz_t());
  if (g > 1) {
    for (auto& [k, a] : l.coeff) a /= g;
    mpz_cdiv_q(l.c.get_mpz_t(), l.c.get_mpz_t(), g.get_mpz_t());
  }
  return l;
}

using Conj = std::vector<Lin>;
using Dnf = std::vector<Conj>;

// a <= b  as  a - b <= 0;  a < b  as  a - b + 1 <= 0.
Lin le(const Lin& a, const Lin& b, bool strict) {
  Lin d = a;
  d.add(b, -1);
  if (strict) d.c += 1;
  return d;
}

std::optional<Dnf> atom(CmpOp op, const IntExpr& lhs, const IntExpr& rhs) {
  auto a = linear(lhs), b = linear(rhs);
  if (!a || !b) return Dnf{Conj{}};  // unknown atom: no constraint
  switch (op) {
    case CmpOp::Le: return Dnf{{le(*a, *b, false)}};
    case CmpOp::Lt: return Dnf{{le(*a, *b, true)}};
    case CmpOp::Ge: return Dnf{{le(*b, *a, false)}};
    case CmpOp::Gt: return Dnf{{le(*b, *a, true)}};
    case CmpOp::Eq: return Dnf{{le(*a, *b, false), le(*b, *a, false)}};
    case CmpOp::Ne: return Dnf{{le(*a, *b, true)}, {le(*b, *a, true)}};
  }
  return std::nullopt;
}

std::optional<Dnf> dnf(const Predicate& p, bool positive) {
  using K = Predicate::Kind;
  switch (p.kind()) {
    case K::True: return positive ? Dnf{Conj{}} : Dnf{};
    case K::False: return positive ? Dnf{} : Dnf{Conj{}};
    case K::Cmp: return atom(positive ? p.op() : negated(p.op()), p.lhs(), p.rhs());
    case K::Not: return dnf(p.args()[0], !positive);
    case K::And:
    case K::Or: {
      bool conj = (p.kind() == K::And) == positive;
      Dnf acc = conj ? Dnf{Conj{}} : Dnf{};
      for (const auto& q : p.args()) {
        auto d = dnf(q, positive);
        if (!d) return std::nullopt;
        if (!conj) {
          acc.insert(acc.end(), d->begin(), d->end());
        } else {
          Dnf next;
          for (const auto& x : acc)
            for (const auto& y : *d) {
              Conj z = x;
              z.insert(z.end(), y.begin(), y.end());
              next.push_back(std::move(z));
            }
          acc = std::move(next);
        }
        if (acc.size() > kMaxDisjuncts) return std::nullopt;
      }
      return acc;
    }
  }
  return std::nullopt;
}

// True once the constraint set is shown infeasible over the integers.
bool infeasible(Conj cs) {
  while (true) {
    std::set<std::string> keys;
    std::vector<Lin> next;
    for (auto& l : cs) {
      l = tightened(std::move(l));
      if (l.is_constant()) {
        if (l.c > 0) return true;
        continue;
      }
      for (const auto& [k, a] : l.coeff) keys.insert(k);
      next.push_back(std::move(l));
    }
    if (keys.empty()) return false;
    // Eliminate the key with the fewest generated pairs.
    std::string pick;
    std::size_t best = SIZE_MAX;
    for (const auto& k : keys) {
      std::size_t pos = 0, neg = 0;
      for (const auto& l : next) {
        auto it = l.coeff.find(k);
        if (it == l.coeff.end()) continue;
        (it->second > 0 ? pos : neg)++;
      }
      if (pos * neg < best) {
        best = pos * neg;
        pick = k;
      }
    }
    std::vector<Lin> lower, upper;
    cs.clear();
    for (auto& l : next) {
      auto it = l.coeff.find(pick);
      if (it == l.coeff.end())
        cs.push_back(std::move(l));
      else
        (it->second > 0 ? upper : lower).push_back(std::move(l));
    }
    for (const auto& u : upper)
      for (const auto& lo : lower) {
        mpz_class a = u.coeff.at(pick), b = -lo.coeff.at(pick);
        Lin s = u;
        s.coeff.clear();
        s.c = 0;
        s.add(u, b).add(lo, a);
        cs.push_back(std::move(s));
      }
    if (cs.size() > kMaxConstraints) return false;
  }
}

}  // namespace

bool linear_refutes(const Predicate& phi, const DomainMap& dom, const ConstEnv& consts) {
  Predicate p = simplify(bind_constants(phi, consts));
  if (p.is_false()) return true;
  auto d = dnf(p, true);
  if (!d) return false;
  for (auto& conj : *d) {
    std::set<std::string> vars;
    for (const auto& l : conj)
      for (const auto& [k, a] : l.coeff)
        if (k.starts_with("v:")) vars.insert(k.substr(2));
    for (const auto& v : vars) {
      auto it = dom.find(v);
      if (it == dom.end()) continue;
      Lin x;
      x.coeff["v:" + v] = 1;
      if (auto lo = linear(simplify(bind_constants(it->second.lo, consts)))) conj.push_back(le(*lo, x, false));
      if (auto hi = linear(simplify(bind_constants(it->second.hi, consts)))) conj.push_back(le(x, *hi, false));
    }
    if (!infeasible(std::move(conj))) return false;
  }
  return true;
}

}  // namespace locelim::detail
