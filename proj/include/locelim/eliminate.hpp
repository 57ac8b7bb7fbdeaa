#pragma once

// Location elimination and the rewrite rules it is built from.

#include <optional>
#include <vector>

#include "locelim/pcfp.hpp"
#include "locelim/unfold.hpp"

namespace locelim {

struct TransitionRef {
  std::size_t command = 0;
  std::size_t destination = 0;
};

struct EliminationStats {
  std::size_t transition_eliminations = 0;
  std::size_t commands_created = 0;     // before pruning
  std::size_t commands_pruned = 0;      // new commands dropped as unsatisfiable
  std::size_t completion_commands = 0;  // deadlock or out-of-domain cases made explicit
  std::size_t locations_eliminated = 0;
  std::size_t unsat_commands_removed = 0;
  std::size_t self_loops_removed = 0;

  EliminationStats& operator+=(const EliminationStats& o);
};

struct EliminateOptions {
  std::uint64_t sat_budget = kDefaultSatBudget;
  std::size_t max_commands = 10'000;
};

std::size_t multiplicity(const Pcfp& p, TransitionRef t);

// Replaces t's command by one command per command at t's target.
// Throws InvalidTransition, PotentialGoalTarget, NoCommandsAtTarget.
Pcfp eliminate_transition(const Pcfp& p, TransitionRef t, const GoalSpec& g, EliminationStats* stats = nullptr,
                          const EliminateOptions& opts = {});

// Throws IsInitial, HasSelfLoop, PotentialGoalTarget, NoCommandsAtTarget and
// ExplosionLimit once the program grows past opts.max_commands.
Pcfp eliminate_location(const Pcfp& p, LocIndex l, const GoalSpec& g, EliminationStats* stats = nullptr,
                        const EliminateOptions& opts = {});

Pcfp remove_unsat_commands(const Pcfp& p, EliminationStats* stats = nullptr, const EliminateOptions& opts = {});

// Throws NotSelfLoop, NotNop, FullLoop.
Pcfp rescale_nop_self_loop(const Pcfp& p, TransitionRef t);

// Throws NotSelfLoop, NotIdempotent, FullLoop, PotentialGoal.
Pcfp eliminate_idempotent_self_loop(const Pcfp& p, TransitionRef t, const GoalSpec& g,
                                    EliminationStats* stats = nullptr, const EliminateOptions& opts = {});

std::vector<LocIndex> eliminable_locations(const Pcfp& p, const GoalSpec& g, const EliminateOptions& opts = {});

Pcfp eliminate_all(const Pcfp& p, const GoalSpec& g, EliminationStats* stats = nullptr,
                   const EliminateOptions& opts = {});

struct SuggestOptions {
  EliminateOptions eliminate;
  std::size_t max_locations = 100'000;
  // Skip the candidate that would unfold every remaining variable.
  bool exclude_all_variables = false;
};

std::optional<VarSet> suggest_unfold(const Pcfp& p, const GoalSpec& g, const SuggestOptions& opts = {});

}  // namespace locelim
