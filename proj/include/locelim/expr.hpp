#pragma once

// Symbolic integer expressions, guards and updates over bounded integer
// variables, together with weakest preconditions and the enumeration-based
// decision procedures used by the reduction engine.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace locelim {

using Int = std::int64_t;

// A (possibly partial) assignment of integers to variable names.
class Valuation {
 public:
  using Map = std::map<std::string, Int, std::less<>>;

  Valuation() = default;
  Valuation(std::initializer_list<Map::value_type> init) : values_(init) {}
  explicit Valuation(Map values) : values_(std::move(values)) {}

  [[nodiscard]] std::optional<Int> get(std::string_view name) const;
  [[nodiscard]] bool contains(std::string_view name) const { return values_.find(name) != values_.end(); }
  void set(const std::string& name, Int value) { values_[name] = value; }
  void erase(std::string_view name);
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] bool empty() const { return values_.empty(); }
  [[nodiscard]] const Map& values() const { return values_; }
  [[nodiscard]] std::set<std::string> support() const;

  // Union; entries of `other` win on overlap.
  [[nodiscard]] Valuation merged(const Valuation& other) const;
  [[nodiscard]] Valuation restricted(const std::set<std::string>& names) const;
  [[nodiscard]] Valuation without(const std::set<std::string>& names) const;

  bool operator==(const Valuation&) const = default;
  auto operator<=>(const Valuation&) const = default;

 private:
  Map values_;
};

std::string to_string(const Valuation& v);

// Named integer constants; an empty optional marks an undefined constant.
using ConstEnv = std::map<std::string, std::optional<Int>, std::less<>>;

class IntExpr {
 public:
  enum class Kind : std::uint8_t { Literal, Var, Const, Neg, Add, Sub, Mul, Div, Min, Max };

  IntExpr();  // literal 0

  static IntExpr literal(Int value);
  static IntExpr var(std::string name);
  static IntExpr constant(std::string name);
  static IntExpr negate(IntExpr operand);
  static IntExpr add(IntExpr lhs, IntExpr rhs);
  static IntExpr sub(IntExpr lhs, IntExpr rhs);
  static IntExpr mul(IntExpr lhs, IntExpr rhs);
  // Floor division. The divisor must be a literal or a constant.
  static IntExpr div(IntExpr lhs, IntExpr rhs);
  static IntExpr min(IntExpr lhs, IntExpr rhs);
  static IntExpr max(IntExpr lhs, IntExpr rhs);

  [[nodiscard]] Kind kind() const;
  [[nodiscard]] Int value() const;               // Literal only
  [[nodiscard]] const std::string& name() const;  // Var / Const only
  [[nodiscard]] std::span<const IntExpr> args() const;

  [[nodiscard]] bool is_literal() const { return kind() == Kind::Literal; }
  [[nodiscard]] bool is_literal(Int v) const { return is_literal() && value() == v; }

  bool operator==(const IntExpr& other) const;

 private:
  struct Node;
  explicit IntExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

IntExpr operator+(IntExpr lhs, IntExpr rhs);
IntExpr operator-(IntExpr lhs, IntExpr rhs);
IntExpr operator*(IntExpr lhs, IntExpr rhs);
IntExpr operator-(IntExpr operand);

enum class CmpOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

const char* cmp_symbol(CmpOp op);
CmpOp negated(CmpOp op);  // !(a < b)  <=>  a >= b
CmpOp mirrored(CmpOp op);  // a < b  <=>  b > a

class Predicate {
 public:
  enum class Kind : std::uint8_t { True, False, Cmp, Not, And, Or };

  Predicate();  // true

  static Predicate truth(bool value);
  static Predicate compare(CmpOp op, IntExpr lhs, IntExpr rhs);
  static Predicate negation(Predicate operand);
  static Predicate conjunction(std::vector<Predicate> operands);
  static Predicate disjunction(std::vector<Predicate> operands);

  [[nodiscard]] Kind kind() const;
  [[nodiscard]] CmpOp op() const;  // Cmp only
  [[nodiscard]] const IntExpr& lhs() const;
  [[nodiscard]] const IntExpr& rhs() const;
  [[nodiscard]] std::span<const Predicate> args() const;  // Not / And / Or

  [[nodiscard]] bool is_true() const { return kind() == Kind::True; }
  [[nodiscard]] bool is_false() const { return kind() == Kind::False; }

  bool operator==(const Predicate& other) const;

 private:
  struct Node;
  explicit Predicate(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Predicate operator&&(Predicate lhs, Predicate rhs);
Predicate operator||(Predicate lhs, Predicate rhs);
Predicate operator!(Predicate operand);

struct Assignment {
  std::string lhs;
  IntExpr rhs;
  bool operator==(const Assignment&) const = default;
};

// A sequence of simultaneous-assignment blocks executed left to right.
// The empty sequence is nop. Within a block the left-hand sides are distinct
// and kept sorted by name.
class Update {
 public:
  using Block = std::vector<Assignment>;

  Update() = default;
  explicit Update(Block block);
  static Update from_blocks(std::vector<Block> blocks);
  // First `first`, then `second`.
  static Update chain(const Update& first, const Update& second);

  [[nodiscard]] const std::vector<Block>& blocks() const { return blocks_; }
  [[nodiscard]] bool empty() const { return blocks_.empty(); }
  // Variables written by any block.
  [[nodiscard]] std::set<std::string> written() const;
  // Equivalent single block with simplified right-hand sides and without
  // x'=x assignments; nop collapses to the empty sequence.
  [[nodiscard]] Update normalized() const;
  [[nodiscard]] bool is_nop() const { return normalized().empty(); }

  bool operator==(const Update&) const = default;

 private:
  std::vector<Block> blocks_;
};

struct Bounds {
  IntExpr lo;
  IntExpr hi;
  bool operator==(const Bounds&) const = default;
};
using DomainMap = std::map<std::string, Bounds, std::less<>>;

// Bounds as integers, or nullopt while a bound mentions an undefined constant.
std::optional<std::pair<Int, Int>> resolve_bounds(const Bounds& b, const ConstEnv& consts);

// ---- evaluation --------------------------------------------------------

Int evaluate(const IntExpr& e, const Valuation& nu, const ConstEnv& consts = {});
bool evaluate(const Predicate& p, const Valuation& nu, const ConstEnv& consts = {});
Valuation apply_update(const Update& u, const Valuation& nu, const ConstEnv& consts = {});

// Floor division on integers; throws DivisionByZero.
Int floor_div(Int a, Int b);

// ---- syntactic operations ----------------------------------------------

IntExpr substitute(const IntExpr& e, const Valuation& nu);
Predicate substitute(const Predicate& p, const Valuation& nu);
// Right-hand sides are specialised; assignments to variables in the support
// of `nu` are dropped (the caller tracks where those variables go).
Update substitute(const Update& u, const Valuation& nu);

// Replace every constant that has a value in `consts` by its literal.
IntExpr bind_constants(const IntExpr& e, const ConstEnv& consts);
Predicate bind_constants(const Predicate& p, const ConstEnv& consts);

// Simultaneous substitution of variables by expressions.
using Substitution = std::map<std::string, IntExpr, std::less<>>;
IntExpr substitute(const IntExpr& e, const Substitution& s);
Predicate substitute(const Predicate& p, const Substitution& s);

Predicate wp(const Update& u, const Predicate& post);

IntExpr simplify(const IntExpr& e);
Predicate simplify(const Predicate& p);

std::set<std::string> free_variables(const IntExpr& e);
std::set<std::string> free_variables(const Predicate& p);
std::set<std::string> free_variables(const Update& u);  // read by some rhs
std::set<std::string> free_constants(const IntExpr& e);
std::set<std::string> free_constants(const Predicate& p);

// Infix rendering in the PRISM style, e.g. "0<x & x<N".
std::string to_string(const IntExpr& e);
std::string to_string(const Predicate& p);
std::string to_string(const Update& u);  // "(x'=x-1)&(f'=0)", "nop", blocks joined by ";"

// ---- decision procedures -------------------------------------------------

inline constexpr std::uint64_t kDefaultSatBudget = std::uint64_t{1} << 20;

struct Satisfiable {
  Valuation witness;
};
struct Unsatisfiable {};
struct Unknown {
  std::string reason;
};
using SatResult = std::variant<Satisfiable, Unsatisfiable, Unknown>;

inline bool is_unsat(const SatResult& r) { return std::holds_alternative<Unsatisfiable>(r); }
inline bool is_sat(const SatResult& r) { return std::holds_alternative<Satisfiable>(r); }

// Enumerates the product domain of the variables occurring in `phi`.
SatResult check_sat(const Predicate& phi, const DomainMap& dom, const ConstEnv& consts,
                    std::uint64_t budget = kDefaultSatBudget);

enum class Tristate { Yes, No, Unknown };

// Is u(u(v)) = u(v) for every v in the domain of the variables u touches?
Tristate check_idempotent(const Update& u, const DomainMap& dom, const ConstEnv& consts,
                          std::uint64_t budget = kDefaultSatBudget);

// Predicate stating that every variable written by `u` stays within bounds,
// expressed over the pre-state.
Predicate stays_in_domain(const Update& u, const DomainMap& dom);

}  // namespace locelim
