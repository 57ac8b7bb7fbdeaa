// Recursive-descent parser for the single-module PRISM subset and for
// property strings.

#include <map>
#include <set>

#include "lexer.hpp"
#include "locelim/error.hpp"
#include "locelim/frontend.hpp"

namespace locelim {
namespace {

using detail::Token;

// Expressions are typed while parsing. Booleans keep an integer encoding
// when they have one (bool variables and literals), so f=true and f'=g work.
struct Val {
  bool is_bool = false;
  IntExpr i;
  Predicate b;
  bool has_int = true;
};

Val int_val(IntExpr e) { return {false, std::move(e), Predicate::truth(true), true}; }
Val bool_val(Predicate p) { return {true, IntExpr::literal(0), std::move(p), false}; }
Val encoded_bool(IntExpr e) {
  return {true, e, Predicate::compare(CmpOp::Eq, e, IntExpr::literal(1)), true};
}

struct Scope {
  const ConstEnv* constants = nullptr;
  std::map<std::string, bool> vars;  // name -> boolean
  const std::map<std::string, Predicate>* labels = nullptr;
  bool allow_vars = true;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(detail::tokenize(text)) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg, Errc code = Errc::SyntaxError) const {
    throw SyntaxError(t.line, t.col, msg, code);
  }
  std::string describe(const Token& t) const {
    if (t.kind == Token::Kind::End) return "end of input";
    return "'" + t.text + "'";
  }
  const Token& expect(std::string_view sym) {
    if (!peek().is(sym)) fail(peek(), "expected '" + std::string(sym) + "' but found " + describe(peek()));
    return next();
  }
  const Token& expect_word(std::string_view w) {
    if (!peek().is_word(w)) fail(peek(), "expected '" + std::string(w) + "' but found " + describe(peek()));
    return next();
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Token::Kind::Ident) fail(peek(), std::string("expected ") + what + " but found " + describe(peek()));
    return next().text;
  }
  bool accept(std::string_view sym) {
    if (!peek().is(sym)) return false;
    next();
    return true;
  }
  bool at_end() const { return peek().kind == Token::Kind::End; }

  // ---- typed expressions ----

  IntExpr as_int(const Val& v, const Token& at) const {
    if (v.is_bool) fail(at, "expected an integer expression", Errc::TypeError);
    return v.i;
  }
  Predicate as_bool(const Val& v, const Token& at) const {
    if (!v.is_bool) fail(at, "expected a boolean expression", Errc::TypeError);
    return v.b;
  }

  Val expr(const Scope& s) { return or_expr(s); }

  Val or_expr(const Scope& s) {
    const Token& at = peek();
    Val v = and_expr(s);
    if (!peek().is("|")) return v;
    std::vector<Predicate> parts{as_bool(v, at)};
    while (accept("|")) {
      const Token& t = peek();
      parts.push_back(as_bool(and_expr(s), t));
    }
    return bool_val(Predicate::disjunction(std::move(parts)));
  }

  Val and_expr(const Scope& s) {
    const Token& at = peek();
    Val v = not_expr(s);
    if (!peek().is("&")) return v;
    std::vector<Predicate> parts{as_bool(v, at)};
    while (accept("&")) {
      const Token& t = peek();
      parts.push_back(as_bool(not_expr(s), t));
    }
    return bool_val(Predicate::conjunction(std::move(parts)));
  }

  Val not_expr(const Scope& s) {
    if (peek().is("!")) {
      next();
      const Token& t = peek();
      return bool_val(Predicate::negation(as_bool(not_expr(s), t)));
    }
    return rel_expr(s);
  }

  static std::optional<CmpOp> relop(const Token& t) {
    if (t.kind != Token::Kind::Sym) return std::nullopt;
    if (t.text == "=") return CmpOp::Eq;
    if (t.text == "!=") return CmpOp::Ne;
    if (t.text == "<") return CmpOp::Lt;
    if (t.text == "<=") return CmpOp::Le;
    if (t.text == ">") return CmpOp::Gt;
    if (t.text == ">=") return CmpOp::Ge;
    return std::nullopt;
  }

  Val rel_expr(const Scope& s) {
    const Token& first = peek();
    Val lhs = add_expr(s);
    auto op = relop(peek());
    if (!op) return lhs;
    // 0<x<N abbreviates 0<x & x<N.
    std::vector<Predicate> parts;
    while (op) {
      const Token& opt = next();
      Val rhs = add_expr(s);
      parts.push_back(compare(*op, lhs, rhs, parts.empty() ? first : opt));
      lhs = rhs;
      op = relop(peek());
    }
    return bool_val(Predicate::conjunction(std::move(parts)));
  }

  Predicate compare(CmpOp op, const Val& a, const Val& b, const Token& at) const {
    if (a.is_bool != b.is_bool) fail(at, "comparison mixes boolean and integer operands", Errc::TypeError);
    if (!a.is_bool) return Predicate::compare(op, a.i, b.i);
    if (op != CmpOp::Eq && op != CmpOp::Ne) fail(at, "booleans can only be compared with = and !=", Errc::TypeError);
    if (a.has_int && b.has_int) return Predicate::compare(op, a.i, b.i);
    Predicate same = (a.b && b.b) || (!a.b && !b.b);
    return op == CmpOp::Eq ? same : !same;
  }

  Val add_expr(const Scope& s) {
    const Token& at = peek();
    Val v = mul_expr(s);
    while (peek().is("+") || peek().is("-")) {
      bool plus = next().text == "+";
      const Token& t = peek();
      IntExpr rhs = as_int(mul_expr(s), t);
      v = int_val(plus ? IntExpr::add(as_int(v, at), rhs) : IntExpr::sub(as_int(v, at), rhs));
    }
    return v;
  }

  Val mul_expr(const Scope& s) {
    const Token& at = peek();
    Val v = unary_expr(s);
    while (peek().is("*") || peek().is("/")) {
      const Token& op = next();
      const Token& t = peek();
      IntExpr rhs = as_int(unary_expr(s), t);
      if (op.text == "*") {
        v = int_val(IntExpr::mul(as_int(v, at), rhs));
      } else {
        if (rhs.kind() != IntExpr::Kind::Literal && rhs.kind() != IntExpr::Kind::Const)
          fail(t, "divisor must be an integer literal or constant", Errc::TypeError);
        if (rhs.is_literal(0)) fail(t, "division by zero", Errc::TypeError);
        v = int_val(IntExpr::div(as_int(v, at), rhs));
      }
    }
    return v;
  }

  Val unary_expr(const Scope& s) {
    if (peek().is("-")) {
      next();
      const Token& t = peek();
      Val v = unary_expr(s);
      IntExpr e = as_int(v, t);
      if (e.is_literal()) return int_val(IntExpr::literal(-e.value()));
      return int_val(IntExpr::negate(e));
    }
    return atom(s);
  }

  Val atom(const Scope& s) {
    const Token& t = peek();
    switch (t.kind) {
      case Token::Kind::Int: {
        next();
        try {
          return int_val(IntExpr::literal(std::stoll(t.text)));
        } catch (const std::out_of_range&) {
          fail(t, "integer literal out of range");
        }
      }
      case Token::Kind::Decimal: fail(t, "non-integer literal in an integer expression", Errc::TypeError);
      case Token::Kind::String: {
        next();
        if (!s.labels) fail(t, "labels are not available here", Errc::UnknownVariable);
        auto it = s.labels->find(t.text);
        if (it == s.labels->end()) fail(t, "unknown label \"" + t.text + "\"", Errc::UnknownVariable);
        return bool_val(it->second);
      }
      case Token::Kind::Sym:
        if (t.is("(")) {
          next();
          Val v = expr(s);
          expect(")");
          return v;
        }
        fail(t, "unexpected " + describe(t));
      case Token::Kind::End: fail(t, "unexpected end of input");
      case Token::Kind::Ident: break;
    }
    next();
    if (t.text == "true" || t.text == "false") {
      Val v = encoded_bool(IntExpr::literal(t.text == "true" ? 1 : 0));
      v.b = Predicate::truth(t.text == "true");
      return v;
    }
    if ((t.text == "min" || t.text == "max") && peek().is("(")) {
      next();
      const Token& a0 = peek();
      IntExpr a = as_int(expr(s), a0);
      expect(",");
      const Token& b0 = peek();
      IntExpr b = as_int(expr(s), b0);
      expect(")");
      return int_val(t.text == "min" ? IntExpr::min(a, b) : IntExpr::max(a, b));
    }
    if (auto it = s.vars.find(t.text); it != s.vars.end()) {
      if (!s.allow_vars) fail(t, "variable '" + t.text + "' is not allowed here", Errc::TypeError);
      return it->second ? encoded_bool(IntExpr::var(t.text)) : int_val(IntExpr::var(t.text));
    }
    if (s.constants && s.constants->contains(t.text)) return int_val(IntExpr::constant(t.text));
    fail(t, "unknown identifier '" + t.text + "'", Errc::UnknownVariable);
  }

  Predicate predicate(const Scope& s) {
    const Token& t = peek();
    return as_bool(expr(s), t);
  }

  IntExpr integer(const Scope& s) {
    const Token& t = peek();
    return as_int(expr(s), t);
  }

  // ---- probabilities: exact rational arithmetic over literals and constants ----

  Rational prob_add(const ConstEnv& consts) {
    Rational v = prob_mul(consts);
    while (peek().is("+") || peek().is("-")) {
      bool plus = next().text == "+";
      Rational r = prob_mul(consts);
      v = plus ? Rational(v + r) : Rational(v - r);
    }
    return v;
  }

  Rational prob_mul(const ConstEnv& consts) {
    Rational v = prob_unary(consts);
    while (peek().is("*") || peek().is("/")) {
      bool times = next().text == "*";
      const Token& t = peek();
      Rational r = prob_unary(consts);
      if (!times && r == 0) fail(t, "division by zero in probability", Errc::TypeError);
      v = times ? Rational(v * r) : Rational(v / r);
    }
    return v;
  }

  Rational prob_unary(const ConstEnv& consts) {
    if (accept("-")) return -prob_unary(consts);
    const Token& t = next();
    if (t.kind == Token::Kind::Int || t.kind == Token::Kind::Decimal) return parse_rational(t.text);
    if (t.is("(")) {
      Rational v = prob_add(consts);
      expect(")");
      return v;
    }
    if (t.kind == Token::Kind::Ident) {
      auto it = consts.find(t.text);
      if (it == consts.end()) fail(t, "probabilities may only use literals and constants", Errc::TypeError);
      if (!it->second) fail(t, "probability uses undefined constant '" + t.text + "'", Errc::TypeError);
      return Rational(static_cast<long>(*it->second));
    }
    fail(t, "expected a probability but found " + describe(t));
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

class ModelParser {
 public:
  explicit ModelParser(std::string_view text) : p_(text) {}

  Pcfp run() {
    if (p_.peek().is_word("dtmc") || p_.peek().is_word("mdp") || p_.peek().is_word("probabilistic") ||
        p_.peek().is_word("nondeterministic"))
      p_.next();
    else if (p_.peek().is_word("ctmc") || p_.peek().is_word("pta") || p_.peek().is_word("stochastic"))
      p_.fail(p_.peek(), "only dtmc and mdp models are supported", Errc::TypeError);

    while (!p_.at_end()) {
      const Token& t = p_.peek();
      if (t.is_word("const")) {
        constant();
      } else if (t.is_word("module")) {
        module();
      } else if (t.is_word("label")) {
        label();
      } else if (t.kind == Token::Kind::Ident &&
                 (t.text == "formula" || t.text == "rewards" || t.text == "init" || t.text == "global" ||
                  t.text == "system")) {
        p_.fail(t, "'" + t.text + "' is not supported");
      } else {
        p_.fail(t, "unexpected " + p_.describe(t));
      }
    }
    if (!seen_module_) p_.fail(p_.peek(), "model has no module");

    Pcfp out;
    out.constants = consts_;
    out.labels = labels_;
    out.locations.push_back({module_name_, module_name_, {}});
    out.initial = 0;
    for (auto& v : vars_) out.variables.push_back(v);
    out.commands = std::move(commands_);
    validate(out);
    return out;
  }

 private:
  Scope scope(bool allow_vars) const {
    Scope s;
    s.constants = &consts_;
    s.labels = &labels_;
    s.allow_vars = allow_vars;
    for (const auto& v : vars_) s.vars[v.name] = v.boolean;
    return s;
  }

  void declare(const Token& t) {
    if (!names_.insert(t.text).second)
      p_.fail(t, "'" + t.text + "' is declared twice", Errc::DuplicateVariable);
  }

  IntExpr fold(const IntExpr& e) const { return simplify(bind_constants(e, consts_)); }

  void constant() {
    p_.expect_word("const");
    bool boolean = false;
    if (p_.peek().is_word("int")) {
      p_.next();
    } else if (p_.peek().is_word("bool")) {
      p_.next();
      boolean = true;
    } else if (p_.peek().is_word("double")) {
      p_.fail(p_.peek(), "double constants are not supported; write probabilities as rationals", Errc::TypeError);
    }
    const Token& name = p_.peek();
    p_.expect_ident("constant name");
    declare(name);
    std::optional<Int> value;
    if (p_.accept("=")) {
      const Token& at = p_.peek();
      Val v = p_.expr(scope(false));
      if (v.is_bool != boolean) p_.fail(at, "constant value has the wrong type", Errc::TypeError);
      IntExpr e = boolean ? (v.has_int ? v.i : IntExpr::literal(0)) : v.i;
      if (boolean && !v.has_int) p_.fail(at, "boolean constants must be true or false", Errc::TypeError);
      try {
        value = evaluate(e, {}, consts_);
      } catch (const Error& err) {
        p_.fail(at, std::string("cannot evaluate constant: ") + err.what(), Errc::TypeError);
      }
    }
    p_.expect(";");
    consts_[name.text] = value;
  }

  void label() {
    p_.expect_word("label");
    const Token& name = p_.next();
    if (name.kind != Token::Kind::String) p_.fail(name, "expected a quoted label name");
    if (labels_.contains(name.text)) p_.fail(name, "label \"" + name.text + "\" is declared twice", Errc::DuplicateVariable);
    p_.expect("=");
    labels_[name.text] = p_.predicate(scope(true));
    p_.expect(";");
  }

  void module() {
    const Token& kw = p_.next();
    if (seen_module_)
      p_.fail(kw, "only a single module is supported", Errc::MultipleModules);
    seen_module_ = true;
    module_name_ = p_.expect_ident("module name");
    while (true) {
      const Token& t = p_.peek();
      if (t.is_word("endmodule")) {
        p_.next();
        return;
      }
      if (t.is_word("end") && p_.peek(1).is_word("module")) {
        p_.next();
        p_.next();
        return;
      }
      if (t.kind == Token::Kind::Ident && p_.peek(1).is(":")) {
        variable();
      } else if (t.is("[")) {
        command();
      } else {
        p_.fail(t, "expected a variable, a command or 'endmodule' but found " + p_.describe(t));
      }
    }
  }

  void variable() {
    const Token& name = p_.next();
    declare(name);
    p_.expect(":");
    VarDecl d;
    d.name = name.text;
    if (p_.accept("[")) {
      d.lo = fold(p_.integer(scope(false)));
      p_.expect("..");
      d.hi = fold(p_.integer(scope(false)));
      p_.expect("]");
      d.init = d.lo;
      if (p_.peek().is_word("init")) {
        p_.next();
        d.init = fold(p_.integer(scope(false)));
      }
    } else if (p_.peek().is_word("bool")) {
      p_.next();
      d.boolean = true;
      d.lo = IntExpr::literal(0);
      d.hi = IntExpr::literal(1);
      d.init = IntExpr::literal(0);
      if (p_.peek().is_word("init")) {
        p_.next();
        const Token& at = p_.peek();
        Val v = p_.expr(scope(false));
        if (!v.is_bool || !v.has_int) p_.fail(at, "boolean initial value must be true or false", Errc::TypeError);
        d.init = fold(v.i);
      }
    } else {
      p_.fail(p_.peek(), "expected a range [lo..hi] or 'bool'");
    }
    p_.expect(";");
    vars_.push_back(std::move(d));
  }

  bool update_starts() const {
    if (p_.peek().is_word("true")) return true;
    return p_.peek().is("(") && p_.peek(1).kind == Token::Kind::Ident && p_.peek(2).is("'");
  }

  void command() {
    p_.expect("[");
    if (!p_.peek().is("]")) p_.fail(p_.peek(), "synchronisation labels are not supported");
    p_.expect("]");
    Command c;
    c.source = 0;
    c.action = "c" + std::to_string(commands_.size());
    c.guard = p_.predicate(scope(true));
    p_.expect("->");
    if (update_starts()) {
      c.destinations.push_back({Rational(1), update(), 0});
    } else {
      while (true) {
        const Token& at = p_.peek();
        Rational pr = p_.prob_add(consts_);
        if (pr <= 0 || pr > 1) p_.fail(at, "probability " + to_string(pr) + " is outside (0,1]", Errc::TypeError);
        p_.expect(":");
        c.destinations.push_back({pr, update(), 0});
        if (!p_.accept("+")) break;
      }
    }
    p_.expect(";");
    commands_.push_back(std::move(c));
  }

  Update update() {
    if (p_.peek().is_word("true")) {
      p_.next();
      return Update{};
    }
    Update::Block block;
    std::set<std::string> seen;
    do {
      p_.expect("(");
      const Token& name = p_.peek();
      std::string var = p_.expect_ident("a primed variable");
      if (p_.peek().is("=")) p_.fail(p_.peek(), "assignment to '" + var + "' must be primed, as in (" + var + "'=...)");
      p_.expect("'");
      p_.expect("=");
      const VarDecl* decl = nullptr;
      for (const auto& v : vars_)
        if (v.name == var) decl = &v;
      if (!decl) p_.fail(name, "assignment to unknown variable '" + var + "'", Errc::UnknownVariable);
      if (!seen.insert(var).second) p_.fail(name, "variable '" + var + "' is assigned twice", Errc::TypeError);
      const Token& at = p_.peek();
      Val v = p_.expr(scope(true));
      bool boolean = decl->boolean;
      if (v.is_bool != boolean) p_.fail(at, "assigned value has the wrong type for '" + var + "'", Errc::TypeError);
      if (boolean && !v.has_int)
        p_.fail(at, "boolean assignments must be true, false or a boolean variable", Errc::TypeError);
      block.push_back({var, v.i});
      if (p_.peek().is(";"))
        p_.fail(p_.peek(), "assignments are joined with '&', as in (x'=...)&(f'=...)");
      p_.expect(")");
    } while (p_.accept("&"));
    return Update(std::move(block));
  }

  Parser p_;
  ConstEnv consts_;
  std::set<std::string> names_;
  std::vector<VarDecl> vars_;
  std::vector<Command> commands_;
  std::map<std::string, Predicate> labels_;
  std::string module_name_;
  bool seen_module_ = false;
};

Scope program_scope(const Pcfp& p) {
  Scope s;
  s.constants = &p.constants;
  s.labels = &p.labels;
  for (const auto& v : p.variables) s.vars[v.name] = v.boolean;
  for (const auto& v : p.unfolded) s.vars[v.name] = v.boolean;
  return s;
}

}  // namespace

Pcfp parse_model(std::string_view text) { return ModelParser(text).run(); }

GoalSpec parse_property(std::string_view text, const Pcfp& p) {
  Parser ps(text);
  GoalSpec g;
  const Token& head = ps.peek();
  std::string kind = ps.expect_ident("P=?, Pmax=? or Pmin=?");
  if (kind == "P")
    g.objective = Objective::Forced;
  else if (kind == "Pmax")
    g.objective = Objective::Maximize;
  else if (kind == "Pmin")
    g.objective = Objective::Minimize;
  else
    ps.fail(head, "expected P=?, Pmax=? or Pmin=?");
  ps.expect("=");
  ps.expect("?");
  ps.expect("[");
  ps.expect_word("F");
  g.target = ps.predicate(program_scope(p));
  ps.expect("]");
  if (!ps.at_end()) ps.fail(ps.peek(), "unexpected " + ps.describe(ps.peek()) + " after property");
  return g;
}

Predicate parse_predicate(std::string_view text, const Pcfp& p) {
  Parser ps(text);
  Predicate out = ps.predicate(program_scope(p));
  if (!ps.at_end()) ps.fail(ps.peek(), "unexpected " + ps.describe(ps.peek()));
  return out;
}

}  // namespace locelim
