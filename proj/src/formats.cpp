#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "locelim/error.hpp"
#include "locelim/frontend.hpp"

namespace locelim {

using Json = nlohmann::ordered_json;

// ---- s-expressions ---------------------------------------------------------

namespace {

const char* int_op(IntExpr::Kind k) {
  switch (k) {
    case IntExpr::Kind::Neg:
    case IntExpr::Kind::Sub: return "-";
    case IntExpr::Kind::Add: return "+";
    case IntExpr::Kind::Mul: return "*";
    case IntExpr::Kind::Div: return "/";
    case IntExpr::Kind::Min: return "min";
    case IntExpr::Kind::Max: return "max";
    default: return "";
  }
}

void write(std::string& out, const IntExpr& e) {
  switch (e.kind()) {
    case IntExpr::Kind::Literal: out += std::to_string(e.value()); return;
    case IntExpr::Kind::Var:
    case IntExpr::Kind::Const: out += e.name(); return;
    default: break;
  }
  out += '(';
  out += int_op(e.kind());
  for (const auto& a : e.args()) {
    out += ' ';
    write(out, a);
  }
  out += ')';
}

void write(std::string& out, const Predicate& p) {
  switch (p.kind()) {
    case Predicate::Kind::True: out += "true"; return;
    case Predicate::Kind::False: out += "false"; return;
    case Predicate::Kind::Cmp:
      out += '(';
      out += cmp_symbol(p.op());
      out += ' ';
      write(out, p.lhs());
      out += ' ';
      write(out, p.rhs());
      out += ')';
      return;
    default: break;
  }
  out += p.kind() == Predicate::Kind::Not ? "(not" : p.kind() == Predicate::Kind::And ? "(and" : "(or";
  for (const auto& a : p.args()) {
    out += ' ';
    write(out, a);
  }
  out += ')';
}

struct SNode {
  std::string atom;  // empty for lists
  std::vector<SNode> items;
  std::size_t col = 1;
  bool is_list() const { return atom.empty(); }
};

class SReader {
 public:
  explicit SReader(std::string_view text) : s_(text) {}

  SNode read_all() {
    SNode n = read();
    skip();
    if (i_ < s_.size()) fail("trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(1, i_ + 1, msg + " in s-expression"); }
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  SNode read() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end");
    SNode n;
    n.col = i_ + 1;
    if (s_[i_] == '(') {
      ++i_;
      while (true) {
        skip();
        if (i_ >= s_.size()) fail("missing ')'");
        if (s_[i_] == ')') {
          ++i_;
          break;
        }
        n.items.push_back(read());
      }
      return n;
    }
    if (s_[i_] == ')') fail("unexpected ')'");
    std::size_t j = i_;
    while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && s_[j] != '(' && s_[j] != ')') ++j;
    n.atom = std::string(s_.substr(i_, j - i_));
    i_ = j;
    return n;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

[[noreturn]] void sfail(const SNode& n, const std::string& msg) { throw SyntaxError(1, n.col, msg); }

bool is_integer_atom(const std::string& a) {
  std::size_t k = (a.size() > 1 && a[0] == '-') ? 1 : 0;
  if (k == a.size()) return false;
  return std::all_of(a.begin() + static_cast<std::ptrdiff_t>(k), a.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_identifier(const std::string& a) {
  if (a.empty() || !(std::isalpha(static_cast<unsigned char>(a[0])) || a[0] == '_')) return false;
  return std::all_of(a.begin(), a.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

IntExpr to_int(const SNode& n, const std::set<std::string>& consts) {
  if (!n.is_list()) {
    if (is_integer_atom(n.atom)) {
      try {
        return IntExpr::literal(std::stoll(n.atom));
      } catch (const std::out_of_range&) {
        sfail(n, "integer literal out of range");
      }
    }
    if (!is_identifier(n.atom) || n.atom == "true" || n.atom == "false")
      sfail(n, "expected an integer expression, found '" + n.atom + "'");
    return consts.contains(n.atom) ? IntExpr::constant(n.atom) : IntExpr::var(n.atom);
  }
  if (n.items.empty() || n.items[0].is_list()) sfail(n, "expected an operator");
  const std::string& op = n.items[0].atom;
  std::vector<IntExpr> args;
  for (std::size_t k = 1; k < n.items.size(); ++k) args.push_back(to_int(n.items[k], consts));
  if (op == "-" && args.size() == 1) return IntExpr::negate(args[0]);
  if (args.size() != 2) sfail(n, "operator '" + op + "' expects two operands");
  if (op == "+") return IntExpr::add(args[0], args[1]);
  if (op == "-") return IntExpr::sub(args[0], args[1]);
  if (op == "*") return IntExpr::mul(args[0], args[1]);
  if (op == "min") return IntExpr::min(args[0], args[1]);
  if (op == "max") return IntExpr::max(args[0], args[1]);
  if (op == "/") {
    if (!args[1].is_literal() && args[1].kind() != IntExpr::Kind::Const)
      sfail(n, "divisor must be a literal or a constant");
    return IntExpr::div(args[0], args[1]);
  }
  sfail(n, "unknown integer operator '" + op + "'");
}

Predicate to_pred(const SNode& n, const std::set<std::string>& consts) {
  if (!n.is_list()) {
    if (n.atom == "true") return Predicate::truth(true);
    if (n.atom == "false") return Predicate::truth(false);
    sfail(n, "expected a predicate, found '" + n.atom + "'");
  }
  if (n.items.empty() || n.items[0].is_list()) sfail(n, "expected an operator");
  const std::string& op = n.items[0].atom;
  static const std::map<std::string, CmpOp> kCmp = {{"=", CmpOp::Eq},  {"!=", CmpOp::Ne}, {"<", CmpOp::Lt},
                                                   {"<=", CmpOp::Le}, {">", CmpOp::Gt},  {">=", CmpOp::Ge}};
  if (auto it = kCmp.find(op); it != kCmp.end()) {
    if (n.items.size() != 3) sfail(n, "comparison expects two operands");
    return Predicate::compare(it->second, to_int(n.items[1], consts), to_int(n.items[2], consts));
  }
  std::vector<Predicate> args;
  for (std::size_t k = 1; k < n.items.size(); ++k) args.push_back(to_pred(n.items[k], consts));
  if (op == "not") {
    if (args.size() != 1) sfail(n, "'not' expects one operand");
    return Predicate::negation(args[0]);
  }
  if (op == "and" || op == "or") {
    if (args.size() < 2) sfail(n, "'" + op + "' expects at least two operands");
    return op == "and" ? Predicate::conjunction(std::move(args)) : Predicate::disjunction(std::move(args));
  }
  sfail(n, "unknown predicate operator '" + op + "'");
}

}  // namespace

std::string to_sexpr(const IntExpr& e) {
  std::string out;
  write(out, e);
  return out;
}

std::string to_sexpr(const Predicate& p) {
  std::string out;
  write(out, p);
  return out;
}

IntExpr parse_sexpr_int(std::string_view text, const std::set<std::string>& constants) {
  return to_int(SReader(text).read_all(), constants);
}

Predicate parse_sexpr_pred(std::string_view text, const std::set<std::string>& constants) {
  return to_pred(SReader(text).read_all(), constants);
}

// ---- PCFP JSON -------------------------------------------------------------

namespace {

Json valuation_json(const Valuation& v) {
  Json out = Json::object();
  for (const auto& [k, x] : v.values()) out[k] = x;
  return out;
}

Json decl_json(const VarDecl& d) {
  Json j;
  j["name"] = d.name;
  j["lo"] = to_sexpr(d.lo);
  j["hi"] = to_sexpr(d.hi);
  j["init"] = to_sexpr(d.init);
  if (d.boolean) j["boolean"] = true;
  return j;
}

[[noreturn]] void schema_fail(const std::string& where, const std::string& msg) {
  throw SyntaxError(1, 1, where + ": " + msg);
}

// Wraps s-expression and JSON type errors with the path of the offending field.
template <class F>
auto at_path(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const SyntaxError& e) {
    schema_fail(where, e.what());
  } catch (const Json::exception& e) {
    schema_fail(where, e.what());
  } catch (const Error& e) {
    schema_fail(where, e.what());
  }
}

VarDecl decl_from(const Json& j, const std::set<std::string>& consts, const std::string& where) {
  return at_path(where, [&] {
    VarDecl d;
    d.name = j.at("name").get<std::string>();
    d.lo = parse_sexpr_int(j.at("lo").get<std::string>(), consts);
    d.hi = parse_sexpr_int(j.at("hi").get<std::string>(), consts);
    d.init = j.contains("init") ? parse_sexpr_int(j.at("init").get<std::string>(), consts) : d.lo;
    d.boolean = j.value("boolean", false);
    return d;
  });
}

Valuation valuation_from(const Json& j, const std::string& where) {
  return at_path(where, [&] {
    Valuation v;
    for (const auto& [k, x] : j.items()) v.set(k, x.get<Int>());
    return v;
  });
}

}  // namespace

std::string serialize_pcfp(const Pcfp& p) {
  Json doc;
  Json consts = Json::object();
  for (const auto& [k, v] : p.constants) consts[k] = v ? Json(*v) : Json(nullptr);
  doc["constants"] = consts;
  doc["variables"] = Json::array();
  for (const auto& d : p.variables) doc["variables"].push_back(decl_json(d));
  doc["unfolded"] = Json::array();
  for (const auto& d : p.unfolded) doc["unfolded"].push_back(decl_json(d));
  doc["locations"] = Json::array();
  for (std::size_t i = 0; i < p.locations.size(); ++i) {
    const auto& l = p.locations[i];
    doc["locations"].push_back({{"id", i}, {"name", l.name}, {"base", l.base}, {"label", valuation_json(l.label)}});
  }
  Json init = Json::object();
  for (const auto& d : p.variables) init[d.name] = to_sexpr(d.init);
  doc["initial"] = {{"location", p.initial}, {"valuation", init}};
  doc["commands"] = Json::array();
  for (const auto& c : p.commands) {
    Json jc;
    jc["source"] = c.source;
    jc["action"] = c.action;
    jc["guard"] = to_sexpr(c.guard);
    jc["branches"] = Json::array();
    for (const auto& d : c.destinations) {
      Json blocks = Json::array();
      for (const auto& b : d.update.blocks()) {
        Json jb = Json::array();
        for (const auto& a : b) jb.push_back({{"lhs", a.lhs}, {"rhs", to_sexpr(a.rhs)}});
        blocks.push_back(jb);
      }
      jc["branches"].push_back({{"prob", to_string(d.prob)},
                                {"update", blocks},
                                {"target", d.target == kBottomTarget ? Json(nullptr) : Json(d.target)}});
    }
    doc["commands"].push_back(jc);
  }
  Json labels = Json::object();
  for (const auto& [k, v] : p.labels) labels[k] = to_sexpr(v);
  doc["labels"] = labels;
  return doc.dump(2) + "\n";
}

Pcfp parse_pcfp(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SyntaxError(1, e.byte, e.what());
  }
  if (!doc.is_object()) schema_fail("document", "expected a JSON object");
  Pcfp p;
  std::set<std::string> const_names;
  at_path("constants", [&] {
    const Json consts = doc.value("constants", Json::object());
    for (const auto& [k, v] : consts.items()) {
      p.constants[k] = v.is_null() ? std::nullopt : std::optional<Int>(v.get<Int>());
      const_names.insert(k);
    }
    return 0;
  });
  const Json& vars = at_path("variables", [&]() -> const Json& { return doc.at("variables"); });
  for (std::size_t i = 0; i < vars.size(); ++i)
    p.variables.push_back(decl_from(vars[i], const_names, "variables[" + std::to_string(i) + "]"));
  if (doc.contains("unfolded"))
    for (std::size_t i = 0; i < doc["unfolded"].size(); ++i)
      p.unfolded.push_back(decl_from(doc["unfolded"][i], const_names, "unfolded[" + std::to_string(i) + "]"));

  const Json& locs = at_path("locations", [&]() -> const Json& { return doc.at("locations"); });
  for (std::size_t i = 0; i < locs.size(); ++i) {
    std::string where = "locations[" + std::to_string(i) + "]";
    Location l = at_path(where, [&] {
      const Json& j = locs[i];
      if (j.contains("id") && j["id"].get<std::size_t>() != i) schema_fail(where, "ids must be 0,1,2,... in order");
      Location out;
      out.name = j.contains("name") ? j["name"].get<std::string>() : "l" + std::to_string(i);
      out.base = j.value("base", out.name);
      return out;
    });
    if (locs[i].contains("label")) l.label = valuation_from(locs[i]["label"], where + ".label");
    p.locations.push_back(std::move(l));
  }

  at_path("initial", [&] {
    const Json& init = doc.at("initial");
    p.initial = init.at("location").get<LocIndex>();
    // Variables without their own init take it from the initial valuation.
    if (init.contains("valuation"))
      for (std::size_t i = 0; i < vars.size(); ++i)
        if (!vars[i].contains("init") && init["valuation"].contains(p.variables[i].name)) {
          const Json& v = init["valuation"][p.variables[i].name];
          p.variables[i].init = v.is_string() ? parse_sexpr_int(v.get<std::string>(), const_names)
                                              : IntExpr::literal(v.get<Int>());
        }
    return 0;
  });

  std::set<std::string> var_names;
  const Json& cmds = at_path("commands", [&]() -> const Json& { return doc.at("commands"); });
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    std::string where = "commands[" + std::to_string(i) + "]";
    p.commands.push_back(at_path(where, [&] {
      const Json& j = cmds[i];
      Command c;
      c.source = j.at("source").get<LocIndex>();
      c.action = j.value("action", "c" + std::to_string(i));
      c.guard = parse_sexpr_pred(j.value("guard", std::string("true")), const_names);
      for (const auto& b : j.at("branches")) {
        Destination d;
        d.prob = parse_rational(b.at("prob").get<std::string>());
        std::vector<Update::Block> blocks;
        for (const auto& jb : b.value("update", Json::array())) {
          Update::Block block;
          for (const auto& a : jb)
            block.push_back({a.at("lhs").get<std::string>(), parse_sexpr_int(a.at("rhs").get<std::string>(), const_names)});
          blocks.push_back(std::move(block));
        }
        d.update = Update::from_blocks(std::move(blocks));
        d.target = b.contains("target") && !b["target"].is_null() ? b["target"].get<LocIndex>() : kBottomTarget;
        c.destinations.push_back(std::move(d));
      }
      return c;
    }));
  }
  if (doc.contains("labels"))
    at_path("labels", [&] {
      for (const auto& [k, v] : doc["labels"].items()) p.labels[k] = parse_sexpr_pred(v.get<std::string>(), const_names);
      return 0;
    });
  try {
    validate(p);
  } catch (const Error& e) {
    schema_fail("program", e.what());
  }
  return p;
}

// ---- explicit models -------------------------------------------------------

std::string export_explicit(const ExplicitModel& m) {
  std::ostringstream out;
  out << "STATES " << m.states.size() << "\n";
  out << "INITIAL " << m.initial << "\n";
  if (m.bottom) out << "BOTTOM " << *m.bottom << "\n";
  std::vector<std::tuple<std::size_t, std::string, std::size_t, std::string>> lines;
  for (std::size_t s = 0; s < m.actions.size(); ++s)
    for (const auto& a : m.actions[s])
      for (const auto& t : a.transitions) lines.emplace_back(s, a.tag, t.target, to_string(t.prob));
  std::sort(lines.begin(), lines.end());
  for (const auto& [s, tag, t, p] : lines) out << s << ' ' << tag << ' ' << t << ' ' << p << "\n";
  for (std::size_t s = 0; s < m.goal.size(); ++s)
    if (m.goal[s]) out << "GOAL " << s << "\n";
  return out.str();
}

ExplicitModel import_explicit(std::string_view text) {
  ExplicitModel m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool have_states = false;
  auto fail = [&](const std::string& msg) -> void { throw SyntaxError(lineno, 1, msg); };
  auto check_state = [&](std::size_t s) {
    if (!have_states) fail("STATES must come first");
    if (s >= m.states.size()) fail("state " + std::to_string(s) + " out of range");
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    std::size_t s = 0;
    if (head == "STATES") {
      if (!(ls >> s)) fail("expected a state count");
      m.states.resize(s);
      for (auto& st : m.states) st.location = 0;
      m.actions.resize(s);
      m.goal.assign(s, false);
      have_states = true;
    } else if (head == "INITIAL" || head == "BOTTOM" || head == "GOAL") {
      if (!(ls >> s)) fail("expected a state index");
      check_state(s);
      if (head == "INITIAL") m.initial = s;
      if (head == "BOTTOM") {
        m.bottom = s;
        m.states[s].location = kBottomTarget;
      }
      if (head == "GOAL") m.goal[s] = true;
    } else {
      std::string tag, prob;
      std::size_t t = 0;
      try {
        s = std::stoul(head);
      } catch (const std::exception&) {
        fail("unexpected '" + head + "'");
      }
      if (!(ls >> tag >> t >> prob)) fail("expected 'src action dst prob'");
      check_state(s);
      check_state(t);
      Rational q;
      try {
        q = parse_rational(prob);
      } catch (const Error& e) {
        fail(e.what());
      }
      auto& acts = m.actions[s];
      auto it = std::find_if(acts.begin(), acts.end(), [&](const Action& a) { return a.tag == tag; });
      if (it == acts.end()) {
        acts.push_back({tag, {}});
        it = std::prev(acts.end());
      }
      it->transitions.push_back({q, t});
    }
    std::string rest;
    if (ls >> rest) fail("trailing '" + rest + "'");
  }
  if (!have_states) fail("missing STATES line");
  for (auto& acts : m.actions)
    for (auto& a : acts)
      std::sort(a.transitions.begin(), a.transitions.end(),
                [](const Transition& x, const Transition& y) { return x.target < y.target; });
  return m;
}

// ---- pipeline scripts --------------------------------------------------------

const char* directive_name(Directive::Kind k) {
  switch (k) {
    case Directive::Kind::Unfold: return "unfold";
    case Directive::Kind::Eliminate: return "eliminate";
    case Directive::Kind::EliminateAll: return "eliminate-all";
    case Directive::Kind::RemoveUnsat: return "remove-unsat";
    case Directive::Kind::Stats: return "stats";
    case Directive::Kind::Check: return "check";
  }
  return "?";
}

std::vector<Directive> parse_pipeline(std::string_view text) {
  static const std::regex kHead(R"(^\s*([A-Za-z_][A-Za-z0-9_-]*)\s*(.*?)\s*$)");
  static const std::regex kCall(R"(^\((.*)\)\s*;?$)");
  static const std::regex kPair(R"(^([A-Za-z_][A-Za-z0-9_]*)=(-?[0-9]+)$)");
  static const std::regex kIdent(R"(^[A-Za-z_][A-Za-z0-9_]*$)");
  std::vector<Directive> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
    if (auto c = line.find("//"); c != std::string::npos) line.erase(c);
    if (std::all_of(line.begin(), line.end(), [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); }))
      continue;
    std::smatch m;
    if (!std::regex_match(line, m, kHead)) throw SyntaxError(lineno, 1, "expected a directive");
    std::string name = m[1].str();
    std::replace(name.begin(), name.end(), '_', '-');
    std::string rest = m[2].str();
    // Function-call form: unfold("s"), eliminate_all()
    if (std::smatch call; std::regex_match(rest, call, kCall)) rest = call[1].str();
    for (char& ch : rest)
      if (ch == '"' || ch == ',' || ch == '\'') ch = ' ';
    std::vector<std::string> args;
    std::istringstream as(rest);
    for (std::string a; as >> a;) args.push_back(a);

    Directive d;
    d.line = lineno;
    auto no_args = [&] {
      if (!args.empty()) throw SyntaxError(lineno, 1, "'" + name + "' takes no arguments");
    };
    if (name == "unfold") {
      d.kind = Directive::Kind::Unfold;
      if (args.empty()) throw SyntaxError(lineno, 1, "unfold needs at least one variable");
      for (const auto& a : args) {
        if (!std::regex_match(a, kIdent)) throw SyntaxError(lineno, 1, "bad variable name '" + a + "'");
        d.vars.push_back(a);
      }
    } else if (name == "eliminate") {
      d.kind = Directive::Kind::Eliminate;
      if (args.empty()) throw SyntaxError(lineno, 1, "eliminate needs a location selector such as f=1");
      for (const auto& a : args) {
        std::smatch pm;
        if (!std::regex_match(a, pm, kPair)) throw SyntaxError(lineno, 1, "bad selector '" + a + "', expected name=value");
        if (d.selector.contains(pm[1].str())) throw SyntaxError(lineno, 1, "selector repeats '" + pm[1].str() + "'");
        d.selector.set(pm[1].str(), std::stoll(pm[2].str()));
      }
    } else if (name == "eliminate-all") {
      d.kind = Directive::Kind::EliminateAll;
      no_args();
    } else if (name == "remove-unsat") {
      d.kind = Directive::Kind::RemoveUnsat;
      no_args();
    } else if (name == "stats") {
      d.kind = Directive::Kind::Stats;
      no_args();
    } else if (name == "check") {
      d.kind = Directive::Kind::Check;
      no_args();
    } else {
      throw SyntaxError(lineno, 1, "unknown directive '" + m[1].str() + "'", Errc::UnknownDirective);
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace locelim
