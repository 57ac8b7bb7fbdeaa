#include <doctest.h>

#include "locelim/driver.hpp"
#include "locelim/error.hpp"
#include "locelim/solver.hpp"
#include "locelim/unfold.hpp"
#include "support/fixtures.hpp"
#include "support/random_expr.hpp"
#include "support/random_pcfp.hpp"

using namespace locelim;
using namespace testsupport;

namespace {

Pcfp with_updates(const std::vector<std::pair<std::string, IntExpr>>& assigns, const std::vector<std::string>& vars) {
  Pcfp p;
  p.locations.push_back({"l", "l", {}});
  for (const auto& v : vars) p.variables.push_back({v, L(0), L(2), L(0), false});
  int k = 0;
  for (const auto& [lhs, rhs] : assigns)
    p.commands.push_back({0, Predicate::truth(true), {{Rational(1), Update({{lhs, rhs}}), 0}}, "c" + std::to_string(k++)});
  return p;
}

// Guard equivalence by enumeration over x in [0..N+1] for the coin game.
bool same_on_coin(const Predicate& a, const Predicate& b, Int n, const Valuation& extra = {}) {
  for (Int x = 0; x <= n + 1; ++x) {
    Valuation nu = extra.merged(Valuation{{"x", x}});
    if (evaluate(a, nu, {{"N", n}}) != evaluate(b, nu, {{"N", n}})) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("dependency graph") {
  Pcfp c = coin(std::nullopt);
  DependencyGraph g = dependency_graph(c);
  CHECK(g.at("x") == VarSet{"x"});
  CHECK(g.at("f").empty());
  CHECK(dependency_graph(with_updates({{"x", V("y")}}, {"x", "y"})).at("x") == VarSet{"y"});
  CHECK(dependency_graph(Pcfp{}).empty());
}

TEST_CASE("directly unfoldable variables") {
  CHECK(directly_unfoldable(coin(std::nullopt)) == VarSet{"f", "x"});
  CHECK(directly_unfoldable(with_updates({{"x", V("y")}, {"y", V("x")}}, {"x", "y"})).empty());
  Pcfp e = gen_expfamily(3);
  CHECK(directly_unfoldable(e) == VarSet{"x1", "x2", "x3", "y1", "y2", "y3"});
}

TEST_CASE("unfoldable sets are the bottom SCCs") {
  CHECK(unfoldable_sets(coin(std::nullopt)) == std::vector<VarSet>{{"f"}, {"x"}});
  CHECK(unfoldable_sets(with_updates({{"x", V("y")}, {"y", V("x")}}, {"x", "y"})) == std::vector<VarSet>{{"x", "y"}});
  Pcfp chain = with_updates({{"x", V("y")}, {"y", V("z")}, {"z", V("z") + L(1)}}, {"x", "y", "z"});
  CHECK(unfoldable_sets(chain) == std::vector<VarSet>{{"z"}});
}

TEST_CASE("unfolding the coin flag") {
  Pcfp p = coin(std::nullopt);
  Pcfp u = unfold(p, {"f"});
  REQUIRE(u.locations.size() == 2);
  CHECK(u.variables.size() == 1);
  REQUIRE(u.unfolded.size() == 1);
  CHECK(u.unfolded[0].name == "f");
  LocIndex nf = u.locations[0].label.get("f") == 0 ? 0 : 1, f = 1 - nf;
  CHECK(u.initial == nf);
  CHECK(u.locations[f].label == Valuation{{"f", 1}});

  Predicate inner = cmp(CmpOp::Lt, L(0), V("x")) && cmp(CmpOp::Lt, V("x"), C("N"));
  Predicate edge = cmp(CmpOp::Eq, V("x"), L(0)) || cmp(CmpOp::Ge, V("x"), C("N"));
  // The commands of the unfolded program: at !f a flip into f or a step down,
  // at f a step down or two up back to !f; absorbing commands at both.
  for (const auto& c : u.commands) {
    for (Int n : {2, 6, 10}) {
      bool is_inner = same_on_coin(c.guard, inner, n);
      bool is_edge = same_on_coin(c.guard, edge, n);
      CHECK(is_inner != is_edge);
    }
    CHECK(free_variables(c.guard).count("f") == 0);
    for (const auto& d : c.destinations) CHECK(d.update.written().count("f") == 0);
  }
  std::size_t inner_at_nf = 0, inner_at_f = 0;
  for (const auto& c : u.commands) {
    if (!same_on_coin(c.guard, inner, 6)) continue;
    REQUIRE(c.destinations.size() == 2);
    if (c.source == nf) {
      ++inner_at_nf;
      CHECK(c.destinations[0].target == nf);
      CHECK(c.destinations[0].update == Update({{"x", V("x") - L(1)}}));
      CHECK(c.destinations[1].target == f);
      CHECK(c.destinations[1].update.is_nop());
    } else {
      ++inner_at_f;
      CHECK(c.destinations[0].target == nf);
      CHECK(c.destinations[1].target == nf);
      CHECK(c.destinations[1].update == Update({{"x", V("x") + L(2)}}));
    }
  }
  CHECK(inner_at_nf == 1);
  CHECK(inner_at_f == 1);

  Pcfp p6 = instantiate(p, {{"N", 6}});
  CHECK(canonical_compare(build_semantics(p6), build_semantics(unfold(p6, {"f"}))));
}

TEST_CASE("unfolding the coin budget") {
  Pcfp p = coin(6);
  Pcfp u = unfold(p, {"x"});
  CHECK(u.locations.size() == 8);
  CHECK(canonical_compare(build_semantics(p), build_semantics(u)));
  Pcfp both = unfold(u, {"f"});
  CHECK(both.variables.empty());
  CHECK(canonical_compare(build_semantics(p), build_semantics(both)));
}

TEST_CASE("unfolding nothing changes nothing") {
  Pcfp p = coin(6);
  CHECK(unfold(p, {}) == p);
}

TEST_CASE("unfold errors") {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::BadParams;
  };
  Pcfp symbolic = coin(std::nullopt);
  CHECK(code([&] { unfold(symbolic, {"x"}); }) == Errc::SymbolicBound);
  Pcfp dep = with_updates({{"x", V("y")}}, {"x", "y"});
  CHECK(code([&] { unfold(dep, {"x"}); }) == Errc::NotClosed);
  CHECK(code([&] { unfold(dep, {"q"}); }) == Errc::InvalidProgram);
}

TEST_CASE("unfolding preserves the semantics of random programs") {
  PcfpGen gen(11);
  int unfolded = 0;
  for (int i = 0; i < 150; ++i) {
    Pcfp p = gen.program({});
    ExplicitModel m = build_semantics(p);
    for (const auto& set : unfoldable_sets(p)) {
      Pcfp u = unfold(p, set);
      ++unfolded;
      CHECK(canonical_compare(m, build_semantics(u)));
      // Label discipline and no residual occurrences.
      for (const auto& l : u.locations)
        for (const auto& v : set) CHECK(l.label.contains(v));
      for (const auto& c : u.commands) {
        for (const auto& v : free_variables(c.guard)) CHECK(set.count(v) == 0);
        for (const auto& d : c.destinations) {
          for (const auto& v : d.update.written()) CHECK(set.count(v) == 0);
          for (const auto& v : free_variables(d.update)) CHECK(set.count(v) == 0);
        }
      }
      for (const auto& v : u.variables) CHECK(set.count(v.name) == 0);
    }
  }
  CHECK(unfolded > 150);
}
