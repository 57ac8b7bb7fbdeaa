#pragma once

// Reachability analysis on explicit models.

#include <optional>
#include <string>
#include <vector>

#include "locelim/pcfp.hpp"

namespace locelim {

enum class Method { GaussianExact, EliminationExact, ValueIteration, SchedulerEnumerationExact };

const char* method_name(Method m);

struct ReachResult {
  Method method = Method::GaussianExact;
  std::optional<Rational> exact;  // absent for value iteration
  double value = 0.0;
  std::optional<std::vector<std::string>> scheduler;  // action tag per state, "" if none
};

// All solvers read the goal mask of the model; call mark_goal_states first.

// Throws NotAChain.
ReachResult solve_mc_exact(const ExplicitModel& m);

// Removes state s from a chain. Throws IsInitialOrGoal, AbsorbingState,
// NotAChain. State indices above s shift down by one.
ExplicitModel mc_eliminate_state(const ExplicitModel& m, StateIndex s);

ReachResult solve_mc_by_elimination(const ExplicitModel& m);

struct MdpOptions {
  double epsilon = 1e-10;  // target on the estimated remaining error
  std::size_t max_iterations = 10'000'000;
  std::uint64_t max_schedulers = 1u << 16;
};

// Objective Forced is accepted on chains only. Throws TooLargeForEnumeration.
ReachResult solve_mdp(const ExplicitModel& m, Objective objective, Method method, const MdpOptions& opts = {});

// Equal up to renaming of states and action tags, keying each state by its
// base location and label-plus-variable valuation.
bool canonical_compare(const ExplicitModel& a, const ExplicitModel& b);

struct ModelStats {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t actions = 0;
};

ModelStats model_stats(const ExplicitModel& m);

}  // namespace locelim
