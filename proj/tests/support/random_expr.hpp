#pragma once

#include <random>
#include <string>
#include <vector>

#include "locelim/expr.hpp"

namespace testsupport {

using namespace locelim;

inline IntExpr V(const std::string& n) { return IntExpr::var(n); }
inline IntExpr C(const std::string& n) { return IntExpr::constant(n); }
inline IntExpr L(Int v) { return IntExpr::literal(v); }
inline Predicate cmp(CmpOp op, IntExpr a, IntExpr b) { return Predicate::compare(op, std::move(a), std::move(b)); }

class ExprGen {
 public:
  ExprGen(std::uint64_t seed, std::vector<std::string> vars) : rng_(seed), vars_(std::move(vars)) {}

  std::mt19937_64& rng() { return rng_; }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  IntExpr expr(int depth) {
    if (depth <= 0 || pick(3) == 0) {
      if (pick(2) == 0) return IntExpr::literal(pick(7) - 3);
      return IntExpr::var(vars_[pick(static_cast<int>(vars_.size()))]);
    }
    switch (pick(7)) {
      case 0: return IntExpr::negate(expr(depth - 1));
      case 1: return IntExpr::add(expr(depth - 1), expr(depth - 1));
      case 2: return IntExpr::sub(expr(depth - 1), expr(depth - 1));
      case 3: return IntExpr::mul(expr(depth - 1), IntExpr::literal(pick(5) - 2));
      case 4: return IntExpr::div(expr(depth - 1), IntExpr::literal(pick(2) == 0 ? 2 : -3));
      case 5: return IntExpr::min(expr(depth - 1), expr(depth - 1));
      default: return IntExpr::max(expr(depth - 1), expr(depth - 1));
    }
  }

  Predicate pred(int depth) {
    if (depth <= 0 || pick(3) == 0) {
      int r = pick(10);
      if (r == 0) return Predicate::truth(pick(2) == 0);
      return Predicate::compare(static_cast<CmpOp>(pick(6)), expr(2), expr(2));
    }
    switch (pick(3)) {
      case 0: return Predicate::negation(pred(depth - 1));
      case 1: return Predicate::conjunction({pred(depth - 1), pred(depth - 1)});
      default: return Predicate::disjunction({pred(depth - 1), pred(depth - 1)});
    }
  }

  // One simultaneous block over a random subset of the variables.
  Update block() {
    Update::Block b;
    for (const auto& v : vars_)
      if (pick(2) == 0) b.push_back({v, expr(2)});
    if (b.empty()) return Update{};
    return Update(std::move(b));
  }

 private:
  std::mt19937_64 rng_;
  std::vector<std::string> vars_;
};

// Every total valuation of `vars` over [lo..hi].
inline std::vector<Valuation> all_valuations(const std::vector<std::string>& vars, Int lo, Int hi) {
  std::vector<Valuation> out{Valuation{}};
  for (const auto& v : vars) {
    std::vector<Valuation> next;
    for (const auto& nu : out)
      for (Int x = lo; x <= hi; ++x) {
        Valuation w = nu;
        w.set(v, x);
        next.push_back(std::move(w));
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace testsupport
