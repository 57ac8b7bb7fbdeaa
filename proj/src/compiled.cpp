#include "compiled.hpp"

#include <algorithm>

#include "locelim/error.hpp"

namespace locelim::detail {
namespace {

void emit(std::vector<Instr>& code, const IntExpr& e, const SlotOf& slot_of, const ConstEnv& consts) {
  using K = IntExpr::Kind;
  switch (e.kind()) {
    case K::Literal: code.push_back({Op::Push, e.value()}); return;
    case K::Var: {
      auto slot = slot_of(e.name());
      if (!slot) throw Error(Errc::UnboundVariable, "unbound variable '" + e.name() + "'");
      code.push_back({Op::Load, *slot});
      return;
    }
    case K::Const: {
      auto it = consts.find(e.name());
      if (it == consts.end() || !it->second)
        throw Error(Errc::UnboundConstant, "undefined constant '" + e.name() + "'");
      code.push_back({Op::Push, *it->second});
      return;
    }
    case K::Neg:
      emit(code, e.args()[0], slot_of, consts);
      code.push_back({Op::Neg});
      return;
    default: break;
  }
  emit(code, e.args()[0], slot_of, consts);
  emit(code, e.args()[1], slot_of, consts);
  switch (e.kind()) {
    case K::Add: code.push_back({Op::Add}); break;
    case K::Sub: code.push_back({Op::Sub}); break;
    case K::Mul: code.push_back({Op::Mul}); break;
    case K::Div: code.push_back({Op::Div}); break;
    case K::Min: code.push_back({Op::Min}); break;
    case K::Max: code.push_back({Op::Max}); break;
    default: break;
  }
}

void emit(std::vector<Instr>& code, const Predicate& p, const SlotOf& slot_of, const ConstEnv& consts) {
  using PK = Predicate::Kind;
  switch (p.kind()) {
    case PK::True: code.push_back({Op::Push, 1}); return;
    case PK::False: code.push_back({Op::Push, 0}); return;
    case PK::Cmp: {
      emit(code, p.lhs(), slot_of, consts);
      emit(code, p.rhs(), slot_of, consts);
      static constexpr Op ops[] = {Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge};
      code.push_back({ops[static_cast<int>(p.op())]});
      return;
    }
    case PK::Not:
      emit(code, p.args()[0], slot_of, consts);
      code.push_back({Op::Not});
      return;
    case PK::And:
    case PK::Or:
      for (const auto& a : p.args()) emit(code, a, slot_of, consts);
      code.push_back({p.kind() == PK::And ? Op::And : Op::Or, static_cast<Int>(p.args().size())});
      return;
  }
}

void overflow_if(bool overflow) {
  if (overflow) throw Error(Errc::Overflow, "integer overflow");
}

}  // namespace

Compiled Compiled::compile(const IntExpr& e, const SlotOf& slot_of, const ConstEnv& consts) {
  Compiled c;
  emit(c.code_, e, slot_of, consts);
  return c;
}

Compiled Compiled::compile(const Predicate& p, const SlotOf& slot_of, const ConstEnv& consts) {
  Compiled c;
  emit(c.code_, p, slot_of, consts);
  return c;
}

Int Compiled::run(const Int* slots) const {
  thread_local std::vector<Int> stack;
  stack.clear();
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Push: stack.push_back(in.arg); continue;
      case Op::Load: stack.push_back(slots[in.arg]); continue;
      case Op::Neg: {
        Int r = 0;
        overflow_if(__builtin_sub_overflow(Int{0}, stack.back(), &r));
        stack.back() = r;
        continue;
      }
      case Op::Not: stack.back() = stack.back() == 0; continue;
      case Op::And:
      case Op::Or: {
        auto n = static_cast<std::size_t>(in.arg);
        auto first = stack.end() - static_cast<std::ptrdiff_t>(n);
        bool r = in.op == Op::And ? std::all_of(first, stack.end(), [](Int v) { return v != 0; })
                                  : std::any_of(first, stack.end(), [](Int v) { return v != 0; });
        stack.resize(stack.size() - n);
        stack.push_back(r);
        continue;
      }
      default: break;
    }
    Int b = stack.back();
    stack.pop_back();
    Int& a = stack.back();
    Int r = 0;
    switch (in.op) {
      case Op::Add: overflow_if(__builtin_add_overflow(a, b, &r)); a = r; break;
      case Op::Sub: overflow_if(__builtin_sub_overflow(a, b, &r)); a = r; break;
      case Op::Mul: overflow_if(__builtin_mul_overflow(a, b, &r)); a = r; break;
      case Op::Div: a = floor_div(a, b); break;
      case Op::Min: a = std::min(a, b); break;
      case Op::Max: a = std::max(a, b); break;
      case Op::Eq: a = a == b; break;
      case Op::Ne: a = a != b; break;
      case Op::Lt: a = a < b; break;
      case Op::Le: a = a <= b; break;
      case Op::Gt: a = a > b; break;
      case Op::Ge: a = a >= b; break;
      default: break;
    }
  }
  return stack.back();
}

}  // namespace locelim::detail
