#include "locelim/expr.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "locelim/error.hpp"

namespace locelim {

// ---- Valuation -----------------------------------------------------------

std::optional<Int> Valuation::get(std::string_view name) const {
  auto it = values_.find(name);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void Valuation::erase(std::string_view name) {
  auto it = values_.find(name);
  if (it != values_.end()) values_.erase(it);
}

std::set<std::string> Valuation::support() const {
  std::set<std::string> out;
  for (const auto& [k, v] : values_) out.insert(k);
  return out;
}

Valuation Valuation::merged(const Valuation& other) const {
  Valuation out = *this;
  for (const auto& [k, v] : other.values_) out.values_[k] = v;
  return out;
}

Valuation Valuation::restricted(const std::set<std::string>& names) const {
  Valuation out;
  for (const auto& [k, v] : values_)
    if (names.contains(k)) out.values_.emplace(k, v);
  return out;
}

Valuation Valuation::without(const std::set<std::string>& names) const {
  Valuation out;
  for (const auto& [k, v] : values_)
    if (!names.contains(k)) out.values_.emplace(k, v);
  return out;
}

std::string to_string(const Valuation& v) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, x] : v.values()) {
    if (!first) out += ",";
    first = false;
    out += k + "=" + std::to_string(x);
  }
  return out + "}";
}

// ---- IntExpr ---------------------------------------------------------------

struct IntExpr::Node {
  Kind kind = Kind::Literal;
  Int value = 0;
  std::string name;
  std::vector<IntExpr> args;
};

IntExpr::IntExpr() : IntExpr(literal(0)) {}

IntExpr IntExpr::literal(Int value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Literal;
  n->value = value;
  return IntExpr(std::move(n));
}

IntExpr IntExpr::var(std::string name) {
  if (name.empty()) throw Error(Errc::InvalidExpression, "empty variable name");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->name = std::move(name);
  return IntExpr(std::move(n));
}

IntExpr IntExpr::constant(std::string name) {
  if (name.empty()) throw Error(Errc::InvalidExpression, "empty constant name");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->name = std::move(name);
  return IntExpr(std::move(n));
}

IntExpr IntExpr::negate(IntExpr operand) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Neg;
  n->args = {std::move(operand)};
  return IntExpr(std::move(n));
}

#define LOCELIM_BINARY(fn, K)                      \
  IntExpr IntExpr::fn(IntExpr lhs, IntExpr rhs) {  \
    auto n = std::make_shared<Node>();             \
    n->kind = Kind::K;                             \
    n->args = {std::move(lhs), std::move(rhs)};    \
    return IntExpr(std::move(n));                  \
  }
LOCELIM_BINARY(add, Add)
LOCELIM_BINARY(sub, Sub)
LOCELIM_BINARY(mul, Mul)
LOCELIM_BINARY(min, Min)
LOCELIM_BINARY(max, Max)
#undef LOCELIM_BINARY

IntExpr IntExpr::div(IntExpr lhs, IntExpr rhs) {
  if (rhs.kind() != Kind::Literal && rhs.kind() != Kind::Const)
    throw Error(Errc::InvalidExpression, "divisor must be a literal or a constant: " + to_string(rhs));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Div;
  n->args = {std::move(lhs), std::move(rhs)};
  return IntExpr(std::move(n));
}

IntExpr::Kind IntExpr::kind() const { return node_->kind; }
Int IntExpr::value() const {
  assert(node_->kind == Kind::Literal);
  return node_->value;
}
const std::string& IntExpr::name() const { return node_->name; }
std::span<const IntExpr> IntExpr::args() const { return node_->args; }

bool IntExpr::operator==(const IntExpr& other) const {
  if (node_ == other.node_) return true;
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Literal: return a.value == b.value;
    case Kind::Var:
    case Kind::Const: return a.name == b.name;
    default: return a.args == b.args;
  }
}

IntExpr operator+(IntExpr lhs, IntExpr rhs) { return IntExpr::add(std::move(lhs), std::move(rhs)); }
IntExpr operator-(IntExpr lhs, IntExpr rhs) { return IntExpr::sub(std::move(lhs), std::move(rhs)); }
IntExpr operator*(IntExpr lhs, IntExpr rhs) { return IntExpr::mul(std::move(lhs), std::move(rhs)); }
IntExpr operator-(IntExpr operand) { return IntExpr::negate(std::move(operand)); }

// ---- Predicate -----------------------------------------------------------

const char* cmp_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

CmpOp negated(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::Ge: return CmpOp::Lt;
  }
  return op;
}

CmpOp mirrored(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return CmpOp::Gt;
    case CmpOp::Le: return CmpOp::Ge;
    case CmpOp::Gt: return CmpOp::Lt;
    case CmpOp::Ge: return CmpOp::Le;
    default: return op;
  }
}

struct Predicate::Node {
  Kind kind = Kind::True;
  CmpOp op = CmpOp::Eq;
  IntExpr lhs;
  IntExpr rhs;
  std::vector<Predicate> args;
};

Predicate::Predicate() : Predicate(truth(true)) {}

Predicate Predicate::truth(bool value) {
  auto n = std::make_shared<Node>();
  n->kind = value ? Kind::True : Kind::False;
  return Predicate(std::move(n));
}

Predicate Predicate::compare(CmpOp op, IntExpr lhs, IntExpr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Cmp;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return Predicate(std::move(n));
}

Predicate Predicate::negation(Predicate operand) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->args = {std::move(operand)};
  return Predicate(std::move(n));
}

Predicate Predicate::conjunction(std::vector<Predicate> operands) {
  if (operands.empty()) return truth(true);
  if (operands.size() == 1) return std::move(operands.front());
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->args = std::move(operands);
  return Predicate(std::move(n));
}

Predicate Predicate::disjunction(std::vector<Predicate> operands) {
  if (operands.empty()) return truth(false);
  if (operands.size() == 1) return std::move(operands.front());
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->args = std::move(operands);
  return Predicate(std::move(n));
}

Predicate::Kind Predicate::kind() const { return node_->kind; }
CmpOp Predicate::op() const { return node_->op; }
const IntExpr& Predicate::lhs() const { return node_->lhs; }
const IntExpr& Predicate::rhs() const { return node_->rhs; }
std::span<const Predicate> Predicate::args() const { return node_->args; }

bool Predicate::operator==(const Predicate& other) const {
  if (node_ == other.node_) return true;
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::True:
    case Kind::False: return true;
    case Kind::Cmp: return a.op == b.op && a.lhs == b.lhs && a.rhs == b.rhs;
    default: return a.args == b.args;
  }
}

Predicate operator&&(Predicate lhs, Predicate rhs) {
  return Predicate::conjunction({std::move(lhs), std::move(rhs)});
}
Predicate operator||(Predicate lhs, Predicate rhs) {
  return Predicate::disjunction({std::move(lhs), std::move(rhs)});
}
Predicate operator!(Predicate operand) { return Predicate::negation(std::move(operand)); }

// ---- Update ----------------------------------------------------------------

namespace {

void normalize_block(Update::Block& block) {
  std::sort(block.begin(), block.end(), [](const Assignment& a, const Assignment& b) { return a.lhs < b.lhs; });
  for (std::size_t i = 1; i < block.size(); ++i)
    if (block[i].lhs == block[i - 1].lhs)
      throw Error(Errc::InvalidExpression, "variable '" + block[i].lhs + "' assigned twice in one update");
}

}  // namespace

Update::Update(Block block) {
  normalize_block(block);
  blocks_.push_back(std::move(block));
}

Update Update::from_blocks(std::vector<Block> blocks) {
  Update u;
  for (auto& b : blocks) {
    normalize_block(b);
    u.blocks_.push_back(std::move(b));
  }
  return u;
}

Update Update::chain(const Update& first, const Update& second) {
  Update u = first;
  u.blocks_.insert(u.blocks_.end(), second.blocks_.begin(), second.blocks_.end());
  return u;
}

std::set<std::string> Update::written() const {
  std::set<std::string> out;
  for (const auto& b : blocks_)
    for (const auto& a : b) out.insert(a.lhs);
  return out;
}

Update Update::normalized() const {
  // Compose blocks: the running substitution maps each written variable to
  // its value in terms of the pre-state.
  Substitution current;
  for (const auto& block : blocks_) {
    Substitution next = current;
    for (const auto& a : block) next[a.lhs] = substitute(a.rhs, current);
    current = std::move(next);
  }
  Block out;
  for (const auto& [lhs, rhs] : current) {
    IntExpr s = simplify(rhs);
    if (s.kind() == IntExpr::Kind::Var && s.name() == lhs) continue;
    out.push_back({lhs, std::move(s)});
  }
  if (out.empty()) return Update{};
  return Update(std::move(out));
}

// ---- evaluation --------------------------------------------------------------

namespace {

Int checked_add(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) throw Error(Errc::Overflow, "integer overflow");
  return r;
}
Int checked_sub(Int a, Int b) {
  Int r;
  if (__builtin_sub_overflow(a, b, &r)) throw Error(Errc::Overflow, "integer overflow");
  return r;
}
Int checked_mul(Int a, Int b) {
  Int r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(Errc::Overflow, "integer overflow");
  return r;
}

}  // namespace

Int floor_div(Int a, Int b) {
  if (b == 0) throw Error(Errc::DivisionByZero, "division by zero");
  if (a == INT64_MIN && b == -1) throw Error(Errc::Overflow, "integer overflow");
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Int evaluate(const IntExpr& e, const Valuation& nu, const ConstEnv& consts) {
  using K = IntExpr::Kind;
  switch (e.kind()) {
    case K::Literal: return e.value();
    case K::Var: {
      auto v = nu.get(e.name());
      if (!v) throw Error(Errc::UnboundVariable, "unbound variable '" + e.name() + "'");
      return *v;
    }
    case K::Const: {
      auto it = consts.find(e.name());
      if (it == consts.end() || !it->second)
        throw Error(Errc::UnboundConstant, "undefined constant '" + e.name() + "'");
      return *it->second;
    }
    case K::Neg: return checked_sub(0, evaluate(e.args()[0], nu, consts));
    default: break;
  }
  Int a = evaluate(e.args()[0], nu, consts);
  Int b = evaluate(e.args()[1], nu, consts);
  switch (e.kind()) {
    case K::Add: return checked_add(a, b);
    case K::Sub: return checked_sub(a, b);
    case K::Mul: return checked_mul(a, b);
    case K::Div: return floor_div(a, b);
    case K::Min: return std::min(a, b);
    case K::Max: return std::max(a, b);
    default: break;
  }
  throw Error(Errc::InvalidExpression, "bad expression node");
}

namespace {

bool compare_values(CmpOp op, Int a, Int b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
  }
  return false;
}

}  // namespace

bool evaluate(const Predicate& p, const Valuation& nu, const ConstEnv& consts) {
  using K = Predicate::Kind;
  switch (p.kind()) {
    case K::True: return true;
    case K::False: return false;
    case K::Cmp: return compare_values(p.op(), evaluate(p.lhs(), nu, consts), evaluate(p.rhs(), nu, consts));
    case K::Not: return !evaluate(p.args()[0], nu, consts);
    case K::And: {
      // All operands are evaluated so that errors do not depend on order.
      bool result = true;
      for (const auto& a : p.args()) result = evaluate(a, nu, consts) && result;
      return result;
    }
    case K::Or: {
      bool result = false;
      for (const auto& a : p.args()) result = evaluate(a, nu, consts) || result;
      return result;
    }
  }
  return false;
}

Valuation apply_update(const Update& u, const Valuation& nu, const ConstEnv& consts) {
  Valuation current = nu;
  for (const auto& block : u.blocks()) {
    Valuation next = current;
    for (const auto& a : block) next.set(a.lhs, evaluate(a.rhs, current, consts));
    current = std::move(next);
  }
  return current;
}

// ---- substitution ------------------------------------------------------------

namespace {

template <typename Leaf>
IntExpr rebuild(const IntExpr& e, const Leaf& leaf) {
  using K = IntExpr::Kind;
  switch (e.kind()) {
    case K::Literal: return e;
    case K::Var:
    case K::Const: return leaf(e);
    case K::Neg: return IntExpr::negate(rebuild(e.args()[0], leaf));
    case K::Add: return IntExpr::add(rebuild(e.args()[0], leaf), rebuild(e.args()[1], leaf));
    case K::Sub: return IntExpr::sub(rebuild(e.args()[0], leaf), rebuild(e.args()[1], leaf));
    case K::Mul: return IntExpr::mul(rebuild(e.args()[0], leaf), rebuild(e.args()[1], leaf));
    case K::Div: return IntExpr::div(rebuild(e.args()[0], leaf), rebuild(e.args()[1], leaf));
    case K::Min: return IntExpr::min(rebuild(e.args()[0], leaf), rebuild(e.args()[1], leaf));
    case K::Max: return IntExpr::max(rebuild(e.args()[0], leaf), rebuild(e.args()[1], leaf));
  }
  return e;
}

template <typename Leaf>
Predicate rebuild(const Predicate& p, const Leaf& leaf) {
  using K = Predicate::Kind;
  switch (p.kind()) {
    case K::True:
    case K::False: return p;
    case K::Cmp: return Predicate::compare(p.op(), rebuild(p.lhs(), leaf), rebuild(p.rhs(), leaf));
    case K::Not: return Predicate::negation(rebuild(p.args()[0], leaf));
    case K::And:
    case K::Or: {
      std::vector<Predicate> args;
      args.reserve(p.args().size());
      for (const auto& a : p.args()) args.push_back(rebuild(a, leaf));
      return p.kind() == K::And ? Predicate::conjunction(std::move(args))
                                : Predicate::disjunction(std::move(args));
    }
  }
  return p;
}

struct ValuationLeaf {
  const Valuation& nu;
  IntExpr operator()(const IntExpr& e) const {
    if (e.kind() == IntExpr::Kind::Var)
      if (auto v = nu.get(e.name())) return IntExpr::literal(*v);
    return e;
  }
};

struct SubstitutionLeaf {
  const Substitution& s;
  IntExpr operator()(const IntExpr& e) const {
    if (e.kind() == IntExpr::Kind::Var) {
      auto it = s.find(e.name());
      if (it != s.end()) return it->second;
    }
    return e;
  }
};

struct ConstLeaf {
  const ConstEnv& consts;
  IntExpr operator()(const IntExpr& e) const {
    if (e.kind() == IntExpr::Kind::Const) {
      auto it = consts.find(e.name());
      if (it != consts.end() && it->second) return IntExpr::literal(*it->second);
    }
    return e;
  }
};

}  // namespace

IntExpr substitute(const IntExpr& e, const Valuation& nu) { return rebuild(e, ValuationLeaf{nu}); }
Predicate substitute(const Predicate& p, const Valuation& nu) { return rebuild(p, ValuationLeaf{nu}); }

Update substitute(const Update& u, const Valuation& nu) {
  // Later blocks read values produced by earlier ones, so a multi-block
  // update is specialised through its single-block form.
  Update single = u.blocks().size() > 1 ? u.normalized() : u;
  if (single.empty()) return single;
  Update::Block out;
  for (const auto& a : single.blocks().front()) {
    if (nu.contains(a.lhs)) continue;
    out.push_back({a.lhs, substitute(a.rhs, nu)});
  }
  if (out.empty()) return Update{};
  return Update(std::move(out));
}

IntExpr substitute(const IntExpr& e, const Substitution& s) { return rebuild(e, SubstitutionLeaf{s}); }
Predicate substitute(const Predicate& p, const Substitution& s) { return rebuild(p, SubstitutionLeaf{s}); }

IntExpr bind_constants(const IntExpr& e, const ConstEnv& consts) { return rebuild(e, ConstLeaf{consts}); }
Predicate bind_constants(const Predicate& p, const ConstEnv& consts) { return rebuild(p, ConstLeaf{consts}); }

Predicate wp(const Update& u, const Predicate& post) {
  Predicate result = post;
  const auto& blocks = u.blocks();
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    Substitution s;
    for (const auto& a : *it) s.emplace(a.lhs, a.rhs);
    result = substitute(result, s);
  }
  return result;
}

// ---- free names --------------------------------------------------------------

namespace {

void collect(const IntExpr& e, IntExpr::Kind leaf, std::set<std::string>& out) {
  if (e.kind() == leaf) out.insert(e.name());
  for (const auto& a : e.args()) collect(a, leaf, out);
}

void collect(const Predicate& p, IntExpr::Kind leaf, std::set<std::string>& out) {
  if (p.kind() == Predicate::Kind::Cmp) {
    collect(p.lhs(), leaf, out);
    collect(p.rhs(), leaf, out);
  }
  for (const auto& a : p.args()) collect(a, leaf, out);
}

}  // namespace

std::set<std::string> free_variables(const IntExpr& e) {
  std::set<std::string> out;
  collect(e, IntExpr::Kind::Var, out);
  return out;
}
std::set<std::string> free_variables(const Predicate& p) {
  std::set<std::string> out;
  collect(p, IntExpr::Kind::Var, out);
  return out;
}
std::set<std::string> free_variables(const Update& u) {
  std::set<std::string> out;
  for (const auto& b : u.blocks())
    for (const auto& a : b) collect(a.rhs, IntExpr::Kind::Var, out);
  return out;
}
std::set<std::string> free_constants(const IntExpr& e) {
  std::set<std::string> out;
  collect(e, IntExpr::Kind::Const, out);
  return out;
}
std::set<std::string> free_constants(const Predicate& p) {
  std::set<std::string> out;
  collect(p, IntExpr::Kind::Const, out);
  return out;
}

// ---- printing --------------------------------------------------------------

namespace {

int precedence(const IntExpr& e) {
  using K = IntExpr::Kind;
  switch (e.kind()) {
    case K::Add:
    case K::Sub: return 1;
    case K::Mul:
    case K::Div: return 2;
    case K::Neg: return 3;
    case K::Literal: return e.value() < 0 ? 3 : 4;
    default: return 4;
  }
}

void print(std::ostream& os, const IntExpr& e, int min_prec) {
  using K = IntExpr::Kind;
  int prec = precedence(e);
  bool parens = prec < min_prec;
  if (parens) os << '(';
  switch (e.kind()) {
    case K::Literal: os << e.value(); break;
    case K::Var:
    case K::Const: os << e.name(); break;
    case K::Neg:
      os << '-';
      print(os, e.args()[0], 4);
      break;
    case K::Add:
      print(os, e.args()[0], 1);
      os << '+';
      print(os, e.args()[1], 2);
      break;
    case K::Sub:
      print(os, e.args()[0], 1);
      os << '-';
      print(os, e.args()[1], 2);
      break;
    case K::Mul:
      print(os, e.args()[0], 2);
      os << '*';
      print(os, e.args()[1], 3);
      break;
    case K::Div:
      print(os, e.args()[0], 2);
      os << '/';
      print(os, e.args()[1], 3);
      break;
    case K::Min:
    case K::Max:
      os << (e.kind() == K::Min ? "min(" : "max(");
      print(os, e.args()[0], 0);
      os << ',';
      print(os, e.args()[1], 0);
      os << ')';
      break;
  }
  if (parens) os << ')';
}

int precedence(const Predicate& p) {
  using K = Predicate::Kind;
  switch (p.kind()) {
    case K::Or: return 1;
    case K::And: return 2;
    case K::Not: return 3;
    default: return 4;
  }
}

void print(std::ostream& os, const Predicate& p, int min_prec) {
  using K = Predicate::Kind;
  int prec = precedence(p);
  bool parens = prec < min_prec;
  if (parens) os << '(';
  switch (p.kind()) {
    case K::True: os << "true"; break;
    case K::False: os << "false"; break;
    case K::Cmp:
      print(os, p.lhs(), 1);
      os << cmp_symbol(p.op());
      print(os, p.rhs(), 1);
      break;
    case K::Not:
      os << '!';
      print(os, p.args()[0], 4);
      break;
    case K::And:
    case K::Or: {
      const char* sep = p.kind() == K::And ? " & " : " | ";
      bool first = true;
      for (const auto& a : p.args()) {
        if (!first) os << sep;
        first = false;
        print(os, a, prec + 1);
      }
      break;
    }
  }
  if (parens) os << ')';
}

}  // namespace

std::string to_string(const IntExpr& e) {
  std::ostringstream os;
  print(os, e, 0);
  return os.str();
}

std::string to_string(const Predicate& p) {
  std::ostringstream os;
  print(os, p, 0);
  return os.str();
}

std::string to_string(const Update& u) {
  if (u.empty()) return "true";
  std::string out;
  bool first_block = true;
  for (const auto& b : u.blocks()) {
    if (!first_block) out += " ; ";
    first_block = false;
    if (b.empty()) {
      out += "true";
      continue;
    }
    bool first = true;
    for (const auto& a : b) {
      if (!first) out += "&";
      first = false;
      out += "(" + a.lhs + "'=" + to_string(a.rhs) + ")";
    }
  }
  return out;
}

}  // namespace locelim
