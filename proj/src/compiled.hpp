#pragma once

// Slot-indexed postfix evaluator for hot loops (satisfiability enumeration,
// state-space exploration). Variables are resolved to slots at compile time.

#include <functional>
#include <optional>
#include <vector>

#include "locelim/expr.hpp"

namespace locelim::detail {

enum class Op : std::uint8_t {
  Push, Load, Neg, Add, Sub, Mul, Div, Min, Max,
  Eq, Ne, Lt, Le, Gt, Ge, Not, And, Or,
};

struct Instr {
  Op op;
  Int arg = 0;  // literal for Push, slot for Load, arity for And/Or
};

// Returns the slot of a variable, or nullopt if it is not bound.
using SlotOf = std::function<std::optional<int>(const std::string&)>;

class Compiled {
 public:
  Compiled() = default;
  // Throws UnboundVariable / UnboundConstant when a leaf cannot be resolved.
  static Compiled compile(const IntExpr& e, const SlotOf& slot_of, const ConstEnv& consts);
  static Compiled compile(const Predicate& p, const SlotOf& slot_of, const ConstEnv& consts);

  // Throws DivisionByZero / Overflow like evaluate().
  Int run(const Int* slots) const;
  bool test(const Int* slots) const { return run(slots) != 0; }

 private:
  std::vector<Instr> code_;
};

}  // namespace locelim::detail
