#include <doctest.h>

#include "locelim/driver.hpp"
#include "locelim/eliminate.hpp"
#include "locelim/error.hpp"
#include "locelim/unfold.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/preservation.hpp"
#include "support/random_expr.hpp"
#include "support/random_pcfp.hpp"

using namespace locelim;
using namespace testsupport;

namespace {

template <class F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::BadParams;
}

// Locations labelled pc=i so goals can name them; variables x, y in [0..3].
struct Builder {
  Pcfp p;
  explicit Builder(int locations) {
    for (int i = 0; i < locations; ++i) {
      std::string n = "l" + std::to_string(i);
      p.locations.push_back({n, n, Valuation{{"pc", i}}});
    }
    p.unfolded.push_back({"pc", L(0), L(locations - 1), L(0), false});
    p.variables.push_back({"x", L(0), L(3), L(0), false});
    p.variables.push_back({"y", L(0), L(3), L(0), false});
  }
  Builder& cmd(LocIndex src, Predicate guard, std::vector<Destination> ds) {
    p.commands.push_back({src, std::move(guard), std::move(ds), "c" + std::to_string(p.commands.size())});
    return *this;
  }
  Builder& absorbing(LocIndex l) { return cmd(l, Predicate::truth(true), {{Rational(1), Update(), l}}); }
};

Destination dest(Rational pr, Update u, LocIndex t) {
  pr.canonicalize();
  return {pr, std::move(u), t};
}

Update set(const std::string& v, IntExpr e) { return Update({{v, std::move(e)}}); }

Predicate at(int pc) { return cmp(CmpOp::Eq, V("pc"), L(pc)); }

std::size_t commands_at(const Pcfp& p, LocIndex l) { return p.commands_at(l).size(); }

bool has_self_loop(const Pcfp& p, LocIndex l) {
  for (std::size_t c : p.commands_at(l))
    for (const auto& d : p.commands[c].destinations)
      if (d.target == l) return true;
  return false;
}

void require_same_values(const Pcfp& a, const Pcfp& b, const Predicate& goal) {
  ReachValues va = reach_values(a, goal), vb = reach_values(b, goal);
  REQUIRE(va.max);
  REQUIRE(vb.max);
  CHECK(*va.max == *vb.max);
  CHECK(*va.min == *vb.min);
}

}  // namespace

TEST_CASE("multiplicity") {
  // l0 -> l1 twice and l0 -> l2 once.
  Builder b(3);
  b.cmd(0, Predicate::truth(true),
        {dest(Rational(1, 4), Update(), 1), dest(Rational(1, 4), set("x", L(1)), 1), dest(Rational(1, 2), Update(), 2)});
  CHECK(multiplicity(b.p, {0, 0}) == 2);
  CHECK(multiplicity(b.p, {0, 1}) == 2);
  CHECK(multiplicity(b.p, {0, 2}) == 1);
  Pcfp e = gen_expfamily(4);
  for (std::size_t d = 0; d < 4; ++d) CHECK(multiplicity(e, {0, d}) == 4);
}

TEST_CASE("eliminating the flip transition of the coin game") {
  Pcfp u = unfold(coin(std::nullopt), {"f"});
  GoalSpec g = parse_property("P=? [ F x>=N & !f ]", u);
  LocIndex nf = u.initial;
  std::optional<TransitionRef> flip;
  for (std::size_t c = 0; c < u.commands.size(); ++c)
    for (std::size_t d = 0; d < u.commands[c].destinations.size(); ++d)
      if (u.commands[c].source == nf && u.commands[c].destinations[d].target != nf) flip = TransitionRef{c, d};
  REQUIRE(flip);
  EliminationStats stats;
  Pcfp r = eliminate_transition(u, *flip, g, &stats);
  CHECK(stats.transition_eliminations == 1);
  CHECK(stats.commands_created == 2);
  CHECK(stats.commands_pruned == 1);  // the one combined with x=0|x>=N
  // The surviving command: 0<x<N -> 3/4:(x'=x-1) + 1/4:(x'=x+2), both back to !f.
  Predicate inner = cmp(CmpOp::Lt, L(0), V("x")) && cmp(CmpOp::Lt, V("x"), C("N"));
  const Command* merged = nullptr;
  for (const auto& c : r.commands)
    if (c.source == nf && c.destinations.size() == 2 && c.destinations[0].target == nf &&
        c.destinations[1].target == nf)
      merged = &c;
  REQUIRE(merged);
  for (Int n : {2, 4, 6, 100})
    for (Int x = 0; x <= n + 1; ++x)
      CHECK(evaluate(merged->guard, {{"x", x}}, {{"N", n}}) == evaluate(inner, {{"x", x}}, {{"N", n}}));
  CHECK(merged->destinations[0].prob == Rational(3, 4));
  CHECK(merged->destinations[0].update == set("x", V("x") - L(1)));
  CHECK(merged->destinations[1].prob == Rational(1, 4));
  CHECK(merged->destinations[1].update == set("x", V("x") + L(2)));
}

TEST_CASE("a nop branch into a true-guarded location keeps the guard") {
  Builder b(3);
  Predicate phi = cmp(CmpOp::Lt, V("x"), L(3));
  b.cmd(0, phi, {dest(Rational(1, 2), Update(), 1), dest(Rational(1, 2), set("x", V("x") + L(1)), 0)});
  b.cmd(1, Predicate::truth(true), {dest(Rational(1), set("y", L(2)), 2)});
  b.absorbing(2);
  Pcfp r = eliminate_transition(b.p, {0, 0}, {Objective::Forced, at(2)});
  REQUIRE(r.commands.size() == 3);
  const Command& c = r.commands[0];
  for (Int x = 0; x <= 3; ++x) CHECK(evaluate(c.guard, {{"x", x}, {"y", 0}}) == evaluate(phi, {{"x", x}}));
  REQUIRE(c.destinations.size() == 2);
  CHECK(c.destinations[1].target == 2);
  CHECK(c.destinations[1].update == set("y", L(2)));
  require_same_values(b.p, r, at(2));
}

TEST_CASE("eliminate_transition errors") {
  Builder b(3);
  b.cmd(0, Predicate::truth(true), {dest(Rational(1, 2), Update(), 1), dest(Rational(1, 2), Update(), 2)});
  b.absorbing(2);
  CHECK(error_of([&] { eliminate_transition(b.p, {0, 0}, {Objective::Forced, at(2)}); }) == Errc::NoCommandsAtTarget);
  CHECK(error_of([&] { eliminate_transition(b.p, {0, 1}, {Objective::Forced, at(2)}); }) == Errc::PotentialGoalTarget);
  CHECK(error_of([&] { eliminate_transition(b.p, {0, 5}, {Objective::Forced, at(2)}); }) == Errc::InvalidTransition);
}

TEST_CASE("eliminating location f of the unfolded coin game") {
  Pcfp u = unfold(coin(std::nullopt), {"f"});
  GoalSpec g = parse_property("P=? [ F x>=N & !f ]", u);
  // The absorbing command at f is a self-loop until the context rule drops it.
  CHECK(eliminable_locations(u, g).empty());
  u = remove_unsat_commands(u);
  CHECK(eliminable_locations(u, g) == std::vector<LocIndex>{1 - u.initial});
  Pcfp r = eliminate_location(u, 1 - u.initial, g);
  CHECK(r.locations.size() == 1);
  CHECK(r.commands.size() == 2);
  CHECK(r.destination_count() == 3);
  for (Int n : {2, 6, 12}) {
    Pcfp a = instantiate(coin(std::nullopt), {{"N", n}}), b = instantiate(r, {{"N", n}});
    ReachValues va = reach_values(a, g.target), vb = reach_values(b, g.target);
    CHECK(*va.max == *vb.max);
  }
  CHECK(eliminable_locations(coin(std::nullopt), g).empty());
}

TEST_CASE("location elimination on the exponential family") {
  for (int m = 1; m <= 4; ++m) {
    CAPTURE(m);
    Pcfp e = gen_expfamily(m);
    GoalSpec g = parse_property(kExpfamilyProperty, e);
    CHECK(eliminable_locations(e, g) == std::vector<LocIndex>{1});
    EliminationStats st;
    Pcfp r = eliminate_location(e, 1, g, &st);
    CHECK(st.transition_eliminations == (std::size_t{1} << m) - 1);
    CHECK(commands_at(r, 0) >= (std::size_t{1} << m));
    require_same_values(e, r, g.target);
  }
}

TEST_CASE("location elimination preconditions") {
  Builder b(3);
  b.cmd(0, Predicate::truth(true), {dest(Rational(1), Update(), 1)});
  b.cmd(1, cmp(CmpOp::Lt, V("x"), L(3)), {dest(Rational(1, 2), set("x", V("x") + L(1)), 1), dest(Rational(1, 2), Update(), 2)});
  b.absorbing(2);
  GoalSpec g{Objective::Forced, at(2)};
  CHECK(error_of([&] { eliminate_location(b.p, 0, g); }) == Errc::IsInitial);
  CHECK(error_of([&] { eliminate_location(b.p, 1, g); }) == Errc::HasSelfLoop);
  Builder d(3);
  d.cmd(0, Predicate::truth(true), {dest(Rational(1), Update(), 1)});
  d.cmd(1, Predicate::truth(true), {dest(Rational(1), Update(), 2)});
  d.absorbing(2);
  CHECK(error_of([&] { eliminate_location(d.p, 1, {Objective::Forced, at(1)}); }) == Errc::PotentialGoalTarget);
  CHECK(eliminate_location(d.p, 1, {Objective::Forced, at(2)}).locations.size() == 2);

  // No ingoing transitions: removed without any elimination.
  Builder c(3);
  c.cmd(0, Predicate::truth(true), {dest(Rational(1), Update(), 0)});
  c.cmd(1, Predicate::truth(true), {dest(Rational(1), Update(), 2)});
  c.absorbing(2);
  EliminationStats st;
  Pcfp r = eliminate_location(c.p, 1, {Objective::Forced, Predicate::truth(false)}, &st);
  CHECK(st.transition_eliminations == 0);
  CHECK(r.locations.size() == 2);
  CHECK(r.commands.size() == 2);
}

TEST_CASE("unsat command removal") {
  Pcfp u = unfold(coin(std::nullopt), {"f"});
  LocIndex f = 1 - u.initial;
  REQUIRE(commands_at(u, f) == 2);
  EliminationStats st;
  Pcfp r = remove_unsat_commands(u, &st);
  REQUIRE(commands_at(r, f) == 1);
  CHECK(st.unsat_commands_removed == 1);
  CHECK(commands_at(r, r.initial) == 2);  // the initial location keeps x=0|x>=N

  Builder b(2);
  b.cmd(0, Predicate::truth(false), {dest(Rational(1), Update(), 1)});
  b.cmd(0, Predicate::truth(true), {dest(Rational(1), Update(), 1)});
  b.absorbing(1);
  Pcfp q = remove_unsat_commands(b.p);
  CHECK(q.commands.size() == 2);

  // The context rule never applies at the initial location: y=1 is
  // unreachable from the ingoing transition but holds initially.
  Builder c(2);
  c.p.variables[1].init = L(1);
  c.cmd(0, cmp(CmpOp::Eq, V("y"), L(1)), {dest(Rational(1), Update(), 1)});
  c.cmd(1, Predicate::truth(true), {dest(Rational(1), set("y", L(0)), 0)});
  CHECK(remove_unsat_commands(c.p).commands.size() == 2);
}

TEST_CASE("rescaling nop self-loops") {
  Builder b(3);
  b.cmd(0, Predicate::truth(true), {dest(Rational(1, 2), Update(), 0), dest(Rational(1, 2), set("x", L(1)), 1)});
  b.cmd(1, Predicate::truth(true),
        {dest(Rational(1, 4), Update(), 1), dest(Rational(1, 4), set("x", L(2)), 0), dest(Rational(1, 2), set("y", L(1)), 2)});
  b.absorbing(2);
  Pcfp r = rescale_nop_self_loop(b.p, {0, 0});
  REQUIRE(r.commands[0].destinations.size() == 1);
  CHECK(r.commands[0].destinations[0].prob == 1);
  CHECK(r.commands[0].destinations[0].target == 1);

  Pcfp s = rescale_nop_self_loop(b.p, {1, 0});
  REQUIRE(s.commands[1].destinations.size() == 2);
  CHECK(s.commands[1].destinations[0].prob == Rational(1, 3));
  CHECK(s.commands[1].destinations[1].prob == Rational(2, 3));
  require_same_values(b.p, s, at(2));

  CHECK(error_of([&] { rescale_nop_self_loop(b.p, {2, 0}); }) == Errc::FullLoop);
  CHECK(error_of([&] { rescale_nop_self_loop(b.p, {0, 1}); }) == Errc::NotSelfLoop);
  Builder c(2);
  c.cmd(0, Predicate::truth(true), {dest(Rational(1, 2), set("x", L(1)), 0), dest(Rational(1, 2), Update(), 1)});
  CHECK(error_of([&] { rescale_nop_self_loop(c.p, {0, 0}); }) == Errc::NotNop);
}

TEST_CASE("idempotent self-loop rule") {
  // l0 enters l1; l1 has the loop x<3 -> 1/2:(y'=1):l1 + 1/2:(x'=x+1):l2 and
  // a second command y=1 -> 1/3:(x'=0):l3 + 2/3:true:l4.
  Builder b(5);
  b.cmd(0, Predicate::truth(true), {dest(Rational(1), Update(), 1)});
  b.cmd(1, cmp(CmpOp::Lt, V("x"), L(3)), {dest(Rational(1, 2), set("y", L(1)), 1), dest(Rational(1, 2), set("x", V("x") + L(1)), 2)});
  b.cmd(1, cmp(CmpOp::Eq, V("y"), L(1)), {dest(Rational(1, 3), set("x", L(0)), 3), dest(Rational(2, 3), Update(), 4)});
  for (LocIndex l : {2, 3, 4}) b.absorbing(l);
  for (int goal : {2, 3, 4}) {
    CAPTURE(goal);
    GoalSpec g{Objective::Maximize, at(goal)};
    EliminationStats st;
    Pcfp r = eliminate_idempotent_self_loop(b.p, {1, 0}, g, &st);
    CHECK(st.self_loops_removed == 1);
    CHECK_FALSE(has_self_loop(r, 1));
    CHECK(r.locations.size() == b.p.locations.size());
    // The looping command became two: one per command at l1.
    CHECK(commands_at(r, 1) == 3);
    require_same_values(b.p, r, at(goal));
  }

  // A loop back into l1 through a nop behaves like rescaling.
  Builder n(3);
  n.cmd(0, Predicate::truth(true), {dest(Rational(1, 4), Update(), 0), dest(Rational(3, 4), set("x", L(2)), 1)});
  n.cmd(0, cmp(CmpOp::Eq, V("y"), L(0)), {dest(Rational(1), set("y", L(1)), 2)});
  n.absorbing(1);
  n.absorbing(2);
  for (int goal : {1, 2}) require_same_values(n.p, eliminate_idempotent_self_loop(n.p, {0, 0}, {Objective::Maximize, at(goal)}), at(goal));
  Pcfp det = n.p;
  det.commands.erase(det.commands.begin() + 1);
  require_same_values(rescale_nop_self_loop(det, {0, 0}),
                      eliminate_idempotent_self_loop(det, {0, 0}, {Objective::Forced, at(1)}), at(1));

  // The loop's target equals one of the other command's targets.
  Builder s(3);
  s.cmd(0, cmp(CmpOp::Lt, V("x"), L(3)), {dest(Rational(1, 2), set("y", L(2)), 0), dest(Rational(1, 2), set("x", V("x") + L(1)), 0)});
  s.cmd(0, cmp(CmpOp::Ge, V("x"), L(3)), {dest(Rational(1), Update(), 1)});
  s.absorbing(1);
  Pcfp sr = eliminate_idempotent_self_loop(s.p, {0, 0}, {Objective::Forced, at(1)});
  require_same_values(s.p, sr, at(1));
}

TEST_CASE("idempotent self-loop side conditions") {
  Builder b(3);
  b.cmd(0, cmp(CmpOp::Lt, V("x"), L(3)), {dest(Rational(1, 2), set("y", L(1)), 0), dest(Rational(1, 2), set("x", V("x") + L(1)), 1)});
  b.cmd(0, cmp(CmpOp::Lt, V("x"), L(3)), {dest(Rational(1, 2), set("x", V("x") + L(1)), 0), dest(Rational(1, 2), Update(), 2)});
  b.absorbing(1);
  b.absorbing(2);
  // The location itself may be a goal, yet no goal state follows the loop.
  Predicate here = at(0) && cmp(CmpOp::Eq, V("y"), L(0));
  Pcfp r = eliminate_idempotent_self_loop(b.p, {0, 0}, {Objective::Maximize, here});
  require_same_values(b.p, r, here);
  CHECK(error_of([&] { eliminate_idempotent_self_loop(b.p, {0, 0}, {Objective::Maximize, at(0)}); }) ==
        Errc::PotentialGoal);
  CHECK(error_of([&] { eliminate_idempotent_self_loop(b.p, {1, 0}, {Objective::Maximize, at(1)}); }) ==
        Errc::NotIdempotent);
  CHECK(error_of([&] { eliminate_idempotent_self_loop(b.p, {0, 1}, {Objective::Maximize, at(1)}); }) ==
        Errc::NotSelfLoop);
}

TEST_CASE("eliminate_all") {
  Pcfp c = coin(std::nullopt);
  GoalSpec g = coin_goal(c);
  Pcfp r = eliminate_all(unfold(c, {"f"}), g);
  CHECK(r.locations.size() == 1);
  CHECK(r.commands.size() == 2);
  CHECK(r.destination_count() == 3);
  CHECK(c.destination_count() == 5);
  // Nothing eliminable: only the cleanup runs.
  CHECK(eliminate_all(c, g) == remove_unsat_commands(c));
}

TEST_CASE("suggest_unfold") {
  Pcfp c = coin(std::nullopt);
  GoalSpec g = coin_goal(c);
  CHECK(suggest_unfold(c, g) == VarSet{"f"});
  CHECK(suggest_unfold(instantiate(c, {{"N", 6}}), g) == VarSet{"f"});
  Pcfp only_x = c;
  only_x.variables.erase(only_x.variables.begin() + 1);
  REQUIRE(only_x.variables[0].name == "x");
  for (auto& cmd : only_x.commands) {
    cmd.guard = cmp(CmpOp::Lt, V("x"), C("N"));
    for (auto& d : cmd.destinations) d.update = set("x", V("x") + L(1));
  }
  CHECK_FALSE(suggest_unfold(only_x, g));
}

TEST_CASE("transition elimination growth bound") {
  PcfpGen gen(5);
  std::size_t checked = 0;
  for (int i = 0; i < 300; ++i) {
    Pcfp p = gen.program({});
    GoalSpec g{Objective::Maximize, gen.goal(p)};
    for (std::size_t c = 0; c < p.commands.size(); ++c)
      for (std::size_t d = 0; d < p.commands[c].destinations.size(); ++d) {
        LocIndex target = p.commands[c].destinations[d].target;
        if (target == kBottomTarget) continue;
        EliminationStats st;
        Pcfp r;
        try {
          r = eliminate_transition(p, {c, d}, g, &st);
        } catch (const Error& e) {
          CHECK(not_applicable(e.code()));
          continue;
        }
        if (st.completion_commands > 0) continue;
        std::size_t m = commands_at(p, target), n = p.commands[c].destinations.size(), sum_mi = 0;
        for (std::size_t k : p.commands_at(target)) sum_mi += p.commands[k].destinations.size();
        CHECK(st.commands_created <= m);
        CHECK(r.commands.size() <= p.commands.size() + m - 1);
        CHECK(r.destination_count() <= p.destination_count() + (m - 1) * n + sum_mi - 1);
        ++checked;
      }
  }
  CHECK(checked > 100);
}

TEST_CASE("rules preserve reachability on random programs") {
  PcfpGen gen(3);
  RuleTally tally;
  for (int i = 0; i < 60; ++i) {
    PcfpShape shape;
    shape.deterministic = i % 2 == 0;
    Pcfp p = gen.program(shape);
    Predicate goal = gen.goal(p);
    check_all_rules(p, goal, "program " + std::to_string(i), tally);
    for (const auto& set : unfoldable_sets(p))
      check_all_rules(unfold(p, set), goal, "program " + std::to_string(i) + " unfolded", tally);
  }
  for (const auto& f : tally.failures) MESSAGE(f);
  CHECK(tally.failures.empty());
  CHECK(tally.applications > 100);
}
