#pragma once

// Text formats: the PRISM subset, property strings, pipeline scripts, the
// PCFP JSON document and the explicit-model listing.

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "locelim/pcfp.hpp"

namespace locelim {

// Single-module dtmc/mdp programs. Throws SyntaxError carrying one of
// SyntaxError, TypeError, MultipleModules, DuplicateVariable.
Pcfp parse_model(std::string_view text);

// P=? / Pmax=? / Pmin=? [ F pred ]. Identifiers resolve against the
// program's variables, unfolded variables, constants and labels.
GoalSpec parse_property(std::string_view text, const Pcfp& p);

// A predicate in the model syntax, resolved against `p` like a property.
Predicate parse_predicate(std::string_view text, const Pcfp& p);

struct Directive {
  enum class Kind { Unfold, Eliminate, EliminateAll, RemoveUnsat, Stats, Check };
  Kind kind = Kind::Stats;
  std::vector<std::string> vars;  // Unfold
  Valuation selector;             // Eliminate: label equalities
  std::size_t line = 0;
  bool operator==(const Directive&) const = default;
};

const char* directive_name(Directive::Kind k);

// Throws SyntaxError (codes SyntaxError, UnknownDirective).
std::vector<Directive> parse_pipeline(std::string_view text);

// Prefix s-expressions, e.g. "(and (< 0 x) (< x N))". Identifiers in
// `constants` become constants, everything else a variable.
std::string to_sexpr(const IntExpr& e);
std::string to_sexpr(const Predicate& p);
IntExpr parse_sexpr_int(std::string_view text, const std::set<std::string>& constants);
Predicate parse_sexpr_pred(std::string_view text, const std::set<std::string>& constants);

std::string serialize_pcfp(const Pcfp& p);
Pcfp parse_pcfp(std::string_view text);  // throws SyntaxError

std::string export_explicit(const ExplicitModel& m);
// Structure only: states get no valuations. Throws SyntaxError.
ExplicitModel import_explicit(std::string_view text);

}  // namespace locelim
