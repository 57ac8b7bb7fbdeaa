#pragma once

// Applies every rewrite rule that is applicable to a program and compares
// reachability values against the oracles.

#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "locelim/eliminate.hpp"
#include "locelim/error.hpp"
#include "support/oracles.hpp"

namespace testsupport {

using namespace locelim;

struct ReachValues {
  bool chain = false;
  std::optional<Rational> max;  // equals min on chains
  std::optional<Rational> min;
};

inline ReachValues reach_values(const Pcfp& p, const Predicate& goal) {
  ExplicitModel m = mark_goal_states(build_semantics(p), {Objective::Maximize, goal});
  ReachValues v;
  v.chain = m.is_chain();
  if (v.chain) {
    v.max = v.min = oracle::chain_value(m);
  } else {
    v.max = oracle::mdp_value(m, true);
    v.min = oracle::mdp_value(m, false);
  }
  return v;
}

struct RuleTally {
  std::size_t applications = 0;  // rule applications that produced a program
  std::size_t comparisons = 0;   // exact value comparisons performed
  std::size_t skipped = 0;       // comparisons skipped: too many schedulers
  std::size_t determinism_checks = 0;
  std::vector<std::string> failures;
};

inline bool not_applicable(Errc c) {
  switch (c) {
    case Errc::IsInitial:
    case Errc::HasSelfLoop:
    case Errc::PotentialGoalTarget:
    case Errc::PotentialGoal:
    case Errc::NoCommandsAtTarget:
    case Errc::InvalidTransition:
    case Errc::NotSelfLoop:
    case Errc::NotNop:
    case Errc::FullLoop:
    case Errc::NotIdempotent:
    case Errc::ExplosionLimit: return true;
    default: return false;
  }
}

// Runs every rule at every applicable position of `p` and checks that the
// Forced (on chains), Maximize and Minimize values are unchanged.
inline void check_all_rules(const Pcfp& p, const Predicate& goal, const std::string& name, RuleTally& tally) {
  GoalSpec g{Objective::Maximize, goal};
  const ReachValues before = reach_values(p, goal);
  const bool deterministic = before.chain;

  auto compare = [&](const std::string& rule, const Pcfp& q, bool determinism_required) {
    ++tally.applications;
    ReachValues after = reach_values(q, goal);
    if (determinism_required) {
      ++tally.determinism_checks;
      if (deterministic && !after.chain) tally.failures.push_back(name + ": " + rule + " lost determinism");
    }
    for (auto [b, a, what] : {std::tuple{before.max, after.max, "max"}, std::tuple{before.min, after.min, "min"}}) {
      if (!b || !a) {
        ++tally.skipped;
        continue;
      }
      ++tally.comparisons;
      if (*a != *b)
        tally.failures.push_back(name + ": " + rule + " changed the " + (before.chain && after.chain ? "forced" : what) +
                                 " value " + to_string(*b) + " -> " + to_string(*a));
    }
  };
  auto attempt = [&](const std::string& rule, const std::function<Pcfp()>& f, bool determinism_required = false) {
    try {
      compare(rule, f(), determinism_required);
    } catch (const Error& e) {
      if (!not_applicable(e.code())) tally.failures.push_back(name + ": " + rule + " threw " + e.what());
    }
  };

  for (LocIndex l = 0; l < p.locations.size(); ++l)
    attempt("eliminate_location " + p.locations[l].name, [&] { return eliminate_location(p, l, g); });
  for (std::size_t c = 0; c < p.commands.size(); ++c)
    for (std::size_t d = 0; d < p.commands[c].destinations.size(); ++d) {
      std::string where = p.commands[c].action + "#" + std::to_string(d);
      TransitionRef t{c, d};
      attempt("eliminate_transition " + where, [&] { return eliminate_transition(p, t, g); }, true);
      if (p.commands[c].destinations[d].target == p.commands[c].source) {
        attempt("rescale_nop_self_loop " + where, [&] { return rescale_nop_self_loop(p, t); });
        attempt("eliminate_idempotent_self_loop " + where, [&] { return eliminate_idempotent_self_loop(p, t, g); });
      }
    }
  attempt("remove_unsat_commands", [&] { return remove_unsat_commands(p); });
  attempt("eliminate_all", [&] { return eliminate_all(p, g); });
}

}  // namespace testsupport
