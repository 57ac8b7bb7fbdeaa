#pragma once

// Probabilistic control-flow programs and their explicit MDP semantics.

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "locelim/expr.hpp"
#include "locelim/rational.hpp"

namespace locelim {

using LocIndex = std::size_t;
// Destination that leaves the program (out of domain). Never a real location.
inline constexpr LocIndex kBottomTarget = std::numeric_limits<LocIndex>::max();

struct VarDecl {
  std::string name;
  IntExpr lo;
  IntExpr hi;
  IntExpr init;
  bool boolean = false;
  bool operator==(const VarDecl&) const = default;
};

struct Location {
  std::string base;  // location of the program before any unfolding
  std::string name;  // display name, unique
  Valuation label;   // values of unfolded variables
  bool operator==(const Location&) const = default;
};

struct Destination {
  Rational prob;
  Update update;
  LocIndex target = 0;
  bool operator==(const Destination&) const = default;
};

struct Command {
  LocIndex source = 0;
  Predicate guard;
  std::vector<Destination> destinations;
  std::string action;
  bool operator==(const Command&) const = default;
};

struct Pcfp {
  ConstEnv constants;
  std::vector<VarDecl> variables;  // Var
  std::vector<VarDecl> unfolded;   // moved into location labels
  std::vector<Location> locations;
  std::vector<Command> commands;
  LocIndex initial = 0;
  std::map<std::string, Predicate> labels;  // named predicates from the source model

  [[nodiscard]] DomainMap domain() const;  // variables only
  [[nodiscard]] DomainMap full_domain() const;  // variables and unfolded ones
  [[nodiscard]] const VarDecl* find_variable(std::string_view name) const;
  [[nodiscard]] std::vector<std::size_t> commands_at(LocIndex l) const;
  [[nodiscard]] std::size_t destination_count() const;
  [[nodiscard]] std::optional<LocIndex> find_location(std::string_view name) const;

  bool operator==(const Pcfp&) const = default;
};

// Throws InvalidProgram on structural violations: bad indices, probabilities
// outside (0,1] or not summing to one, duplicate names or action tags.
void validate(const Pcfp& p);

// Locations reachable from the initial one in the location graph (guards ignored).
std::vector<bool> reachable_locations(const Pcfp& p);

// Drops locations with keep[l] == false together with their commands and
// renumbers the rest. No kept command may target a dropped location.
Pcfp remove_locations(const Pcfp& p, const std::vector<bool>& keep);

// The same program with every undefined constant given a value.
Pcfp instantiate(const Pcfp& p, const std::map<std::string, Int>& values);

std::string to_string(const Pcfp& p);

// ---- goals -----------------------------------------------------------------

enum class Objective { Forced, Maximize, Minimize };

struct GoalSpec {
  Objective objective = Objective::Forced;
  Predicate target;  // over variables and unfolded variables
};

// ϑ specialised by the label is not known to be unsatisfiable.
bool check_potential_goal(const Pcfp& p, LocIndex l, const GoalSpec& g,
                          std::uint64_t budget = kDefaultSatBudget);

// ---- explicit semantics ----------------------------------------------------

using StateIndex = std::size_t;

struct Transition {
  Rational prob;
  StateIndex target = 0;
  bool operator==(const Transition&) const = default;
};

struct Action {
  std::string tag;
  std::vector<Transition> transitions;  // sorted by target, targets distinct
};

struct State {
  LocIndex location = kBottomTarget;  // kBottomTarget for ⊥
  std::string base;
  Valuation valuation;  // label merged with the variable values
};

struct ExplicitModel {
  std::vector<State> states;
  StateIndex initial = 0;
  std::optional<StateIndex> bottom;
  std::vector<std::vector<Action>> actions;  // per state
  std::vector<bool> goal;                    // empty until marked
  ConstEnv constants;

  [[nodiscard]] bool is_chain() const;  // at most one action per state
};

struct BuildOptions {
  std::size_t max_states = 10'000'000;
};

// Breadth-first exploration, states interned in discovery order and commands
// visited in program order. Throws ExplosionLimit, UnboundConstant.
ExplicitModel build_semantics(const Pcfp& p, const BuildOptions& opts = {});

bool check_well_formed(const Pcfp& p, const BuildOptions& opts = {});
bool check_deterministic(const Pcfp& p, const BuildOptions& opts = {});

// ⊥ is never a goal.
ExplicitModel mark_goal_states(ExplicitModel m, const GoalSpec& g);

}  // namespace locelim
