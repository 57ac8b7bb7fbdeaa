#include <doctest.h>

#include "locelim/driver.hpp"
#include "locelim/error.hpp"
#include "locelim/unfold.hpp"
#include "support/fixtures.hpp"
#include "support/random_pcfp.hpp"

using namespace locelim;
using namespace testsupport;

namespace {

Pcfp no_commands() {
  Pcfp p;
  p.locations.push_back({"l", "l", {}});
  p.variables.push_back({"x", IntExpr::literal(0), IntExpr::literal(3), IntExpr::literal(1), false});
  return p;
}

}  // namespace

TEST_CASE("coin semantics has 13 states, the reduced one 8") {
  Pcfp p = coin(6);
  ExplicitModel m = build_semantics(p);
  CHECK(m.states.size() == 13);
  CHECK_FALSE(m.bottom);
  CHECK(m.is_chain());
  CHECK(m.states[m.initial].valuation == Valuation{{"f", 0}, {"x", 3}});

  Pcfp r = eliminate_all(unfold(p, {"f"}), coin_goal(p));
  CHECK(build_semantics(r).states.size() == 8);
}

TEST_CASE("program without commands") {
  ExplicitModel m = build_semantics(no_commands());
  CHECK(m.states.size() == 1);
  CHECK(model_stats(m).transitions == 0);
  CHECK(check_well_formed(no_commands()));
  CHECK(check_deterministic(no_commands()));
}

TEST_CASE("well-formedness") {
  Pcfp p = coin(6);
  CHECK(check_well_formed(p));
  // With x : [0..N] the step x+2 from N-1 leaves the domain.
  p.variables[0].hi = IntExpr::constant("N");
  REQUIRE(p.variables[0].name == "x");
  CHECK_FALSE(check_well_formed(p));
  ExplicitModel m = build_semantics(p);
  REQUIRE(m.bottom);
  CHECK(m.states[*m.bottom].location == kBottomTarget);
  // x=5 with f set is the only state that can step out.
  std::size_t into_bottom = 0;
  for (StateIndex s = 0; s < m.states.size(); ++s)
    for (const auto& a : m.actions[s])
      for (const auto& t : a.transitions)
        if (t.target == *m.bottom && s != *m.bottom) {
          ++into_bottom;
          CHECK(m.states[s].valuation == Valuation{{"f", 1}, {"x", 5}});
        }
  CHECK(into_bottom == 1);
}

TEST_CASE("determinism") {
  CHECK(check_deterministic(coin(6)));
  Pcfp p = no_commands();
  p.commands.push_back({0, Predicate::truth(true), {{Rational(1), Update(), 0}}, "a"});
  p.commands.push_back({0, Predicate::truth(true), {{Rational(1), Update({{"x", IntExpr::literal(0)}}), 0}}, "b"});
  CHECK_FALSE(check_deterministic(p));
  CHECK(check_deterministic(gen_expfamily(2)));
}

TEST_CASE("potential goals follow the location label") {
  Pcfp p = coin(std::nullopt);
  Pcfp u = unfold(p, {"f"});
  GoalSpec g = parse_property("P=? [ F x=N & !f ]", u);
  REQUIRE(u.locations.size() == 2);
  for (LocIndex l = 0; l < 2; ++l) {
    bool flag = u.locations[l].label.get("f") == 1;
    CHECK(check_potential_goal(u, l, g) == !flag);
  }
  GoalSpec never{Objective::Forced, Predicate::truth(false)};
  CHECK_FALSE(check_potential_goal(u, 0, never));
}

TEST_CASE("goal marking") {
  Pcfp p = coin(6);
  ExplicitModel m = mark_goal_states(build_semantics(p), coin_goal(p));
  std::size_t marked = 0;
  for (StateIndex s = 0; s < m.states.size(); ++s) {
    Int x = *m.states[s].valuation.get("x"), f = *m.states[s].valuation.get("f");
    CHECK(m.goal[s] == (x >= 6 && f == 0));
    marked += m.goal[s];
  }
  CHECK(marked == 2);

  Pcfp q = p;
  q.variables[0].hi = IntExpr::constant("N");
  ExplicitModel all = mark_goal_states(build_semantics(q), {Objective::Forced, Predicate::truth(true)});
  for (StateIndex s = 0; s < all.states.size(); ++s) CHECK(all.goal[s] == (all.bottom != s));

  // After unfolding, f lives in the label and is still visible to goals.
  Pcfp u = unfold(p, {"f"});
  ExplicitModel mu = mark_goal_states(build_semantics(u), parse_property("P=? [ F f ]", u));
  for (StateIndex s = 0; s < mu.states.size(); ++s) CHECK(mu.goal[s] == (mu.states[s].valuation.get("f") == 1));
}

TEST_CASE("validate rejects malformed programs") {
  Pcfp p = coin(6);
  Pcfp bad = p;
  bad.commands[0].destinations[0].prob = Rational(1, 3);
  CHECK_THROWS_AS(validate(bad), Error);
  bad = p;
  bad.commands[1].action = bad.commands[0].action;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = p;
  bad.commands[0].destinations[0].target = 5;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = p;
  bad.locations.clear();
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("undefined constants are reported") {
  try {
    build_semantics(coin(std::nullopt));
    FAIL("expected UnboundConstant");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnboundConstant);
  }
}

TEST_CASE("state budget") {
  BuildOptions o;
  o.max_states = 5;
  try {
    build_semantics(coin(6), o);
    FAIL("expected ExplosionLimit");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ExplosionLimit);
  }
}

TEST_CASE("semantics invariants on random programs") {
  PcfpGen gen(7);
  for (int i = 0; i < 200; ++i) {
    PcfpShape shape;
    shape.deterministic = i % 2 == 0;
    Pcfp p = gen.program(shape);
    ExplicitModel m = build_semantics(p);
    // Distributions sum to one and targets are sorted and distinct.
    std::vector<bool> entered(m.states.size(), false);
    for (StateIndex s = 0; s < m.states.size(); ++s)
      for (const auto& a : m.actions[s]) {
        Rational sum = 0;
        for (std::size_t k = 0; k < a.transitions.size(); ++k) {
          sum += a.transitions[k].prob;
          if (k > 0) CHECK(a.transitions[k - 1].target < a.transitions[k].target);
          if (a.transitions[k].target != s) entered[a.transitions[k].target] = true;
        }
        CHECK(sum == 1);
      }
    for (StateIndex s = 0; s < m.states.size(); ++s)
      if (s != m.initial) CHECK(entered[s]);
    if (m.bottom) {
      REQUIRE(m.actions[*m.bottom].size() == 1);
      CHECK(m.actions[*m.bottom][0].transitions == std::vector<Transition>{{Rational(1), *m.bottom}});
    }
    CHECK(check_deterministic(p) == m.is_chain());
    if (shape.deterministic) CHECK(m.is_chain());
    // Exploration is reproducible.
    CHECK(export_explicit(m) == export_explicit(build_semantics(p)));
  }
}

TEST_CASE("remove_locations renumbers targets") {
  Pcfp p;
  for (const char* n : {"a", "b", "c"}) p.locations.push_back({n, n, {}});
  p.commands.push_back({0, Predicate::truth(true), {{Rational(1), Update(), 2}}, "ac"});
  p.commands.push_back({1, Predicate::truth(true), {{Rational(1), Update(), 1}}, "bb"});
  p.commands.push_back({2, Predicate::truth(true), {{Rational(1), Update(), 0}}, "ca"});
  std::vector<bool> reach = reachable_locations(p);
  CHECK(reach == std::vector<bool>{true, false, true});
  Pcfp q = remove_locations(p, reach);
  REQUIRE(q.locations.size() == 2);
  CHECK(q.locations[1].name == "c");
  REQUIRE(q.commands.size() == 2);
  CHECK(q.commands[0].destinations[0].target == 1);
  CHECK(q.commands[1].destinations[0].target == 0);
}
