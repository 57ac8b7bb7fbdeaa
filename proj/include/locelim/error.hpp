#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace locelim {

enum class Errc {
  // expr
  UnboundVariable,
  UnboundConstant,
  DivisionByZero,
  Overflow,
  InvalidExpression,
  // pcfp
  InvalidProgram,
  ExplosionLimit,
  // unfold
  SymbolicBound,
  NotClosed,
  // eliminate
  InvalidTransition,
  PotentialGoalTarget,
  NoCommandsAtTarget,
  IsInitial,
  HasSelfLoop,
  FullLoop,
  NotNop,
  NotSelfLoop,
  NotIdempotent,
  PotentialGoal,
  MayLeaveDomain,
  // solver
  NotAChain,
  AbsorbingState,
  IsInitialOrGoal,
  TooLargeForEnumeration,
  // frontend
  SyntaxError,
  TypeError,
  MultipleModules,
  DuplicateVariable,
  UnknownVariable,
  UnknownDirective,
  // cli
  BadParams,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] Errc code() const { return code_; }

 private:
  Errc code_;
};

// Parse errors carry a 1-based source position.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message,
              Errc code = Errc::SyntaxError);
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace locelim
