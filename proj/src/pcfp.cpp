#include "locelim/pcfp.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>

#include "compiled.hpp"
#include "locelim/error.hpp"

namespace locelim {

DomainMap Pcfp::domain() const {
  DomainMap d;
  for (const auto& v : variables) d.emplace(v.name, Bounds{v.lo, v.hi});
  return d;
}

DomainMap Pcfp::full_domain() const {
  DomainMap d = domain();
  for (const auto& v : unfolded) d.emplace(v.name, Bounds{v.lo, v.hi});
  return d;
}

const VarDecl* Pcfp::find_variable(std::string_view name) const {
  for (const auto& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

std::vector<std::size_t> Pcfp::commands_at(LocIndex l) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < commands.size(); ++i)
    if (commands[i].source == l) out.push_back(i);
  return out;
}

std::size_t Pcfp::destination_count() const {
  std::size_t n = 0;
  for (const auto& c : commands) n += c.destinations.size();
  return n;
}

std::optional<LocIndex> Pcfp::find_location(std::string_view name) const {
  for (LocIndex l = 0; l < locations.size(); ++l)
    if (locations[l].name == name) return l;
  return std::nullopt;
}

void validate(const Pcfp& p) {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidProgram, msg); };
  if (p.locations.empty()) fail("program has no locations");
  if (p.initial >= p.locations.size()) fail("initial location out of range");
  std::set<std::string> names;
  for (const auto& l : p.locations)
    if (!names.insert(l.name).second) fail("duplicate location name '" + l.name + "'");
  std::set<std::string> vars;
  for (const auto& v : p.variables)
    if (!vars.insert(v.name).second) fail("duplicate variable '" + v.name + "'");
  for (const auto& v : p.unfolded)
    if (!vars.insert(v.name).second) fail("variable '" + v.name + "' is both unfolded and live");
  std::set<std::string> tags;
  for (const auto& c : p.commands) {
    if (!tags.insert(c.action).second) fail("duplicate action tag '" + c.action + "'");
    if (c.source >= p.locations.size()) fail("command '" + c.action + "' has an invalid source");
    if (c.destinations.empty()) fail("command '" + c.action + "' has no destinations");
    Rational sum = 0;
    for (const auto& d : c.destinations) {
      if (d.prob <= 0 || d.prob > 1) fail("command '" + c.action + "' has probability " + to_string(d.prob));
      if (d.target != kBottomTarget && d.target >= p.locations.size())
        fail("command '" + c.action + "' has an invalid target");
      sum += d.prob;
    }
    if (sum != 1) fail("probabilities of command '" + c.action + "' sum to " + to_string(sum));
  }
}

std::vector<bool> reachable_locations(const Pcfp& p) {
  std::vector<std::vector<LocIndex>> succ(p.locations.size());
  for (const auto& c : p.commands)
    for (const auto& d : c.destinations)
      if (d.target != kBottomTarget) succ[c.source].push_back(d.target);
  std::vector<bool> seen(p.locations.size(), false);
  std::vector<LocIndex> stack{p.initial};
  seen[p.initial] = true;
  while (!stack.empty()) {
    LocIndex l = stack.back();
    stack.pop_back();
    for (LocIndex t : succ[l])
      if (!seen[t]) {
        seen[t] = true;
        stack.push_back(t);
      }
  }
  return seen;
}

Pcfp remove_locations(const Pcfp& p, const std::vector<bool>& keep) {
  std::vector<LocIndex> remap(p.locations.size(), kBottomTarget);
  Pcfp out = p;
  out.locations.clear();
  out.commands.clear();
  for (LocIndex l = 0; l < p.locations.size(); ++l)
    if (keep[l]) {
      remap[l] = out.locations.size();
      out.locations.push_back(p.locations[l]);
    }
  if (remap[p.initial] == kBottomTarget) throw Error(Errc::InvalidProgram, "cannot remove the initial location");
  out.initial = remap[p.initial];
  for (const auto& c : p.commands) {
    if (!keep[c.source]) continue;
    Command nc = c;
    nc.source = remap[c.source];
    for (auto& d : nc.destinations) {
      if (d.target == kBottomTarget) continue;
      if (!keep[d.target])
        throw Error(Errc::InvalidProgram, "command '" + c.action + "' targets a removed location");
      d.target = remap[d.target];
    }
    out.commands.push_back(std::move(nc));
  }
  return out;
}

Pcfp instantiate(const Pcfp& p, const std::map<std::string, Int>& values) {
  Pcfp out = p;
  for (const auto& [k, v] : values) out.constants[k] = v;
  return out;
}

namespace {

std::string target_name(const Pcfp& p, LocIndex t) {
  return t == kBottomTarget ? std::string("⊥") : p.locations[t].name;
}

}  // namespace

std::string to_string(const Pcfp& p) {
  std::ostringstream os;
  for (const auto& [k, v] : p.constants) os << "const " << k << (v ? " = " + std::to_string(*v) : "") << "\n";
  for (const auto& v : p.variables)
    os << "var " << v.name << " : [" << to_string(v.lo) << ".." << to_string(v.hi) << "] init "
       << to_string(v.init) << "\n";
  for (const auto& v : p.unfolded) os << "unfolded " << v.name << "\n";
  os << "initial " << p.locations[p.initial].name << "\n";
  for (LocIndex l = 0; l < p.locations.size(); ++l) {
    os << "location " << p.locations[l].name << "\n";
    for (std::size_t ci : p.commands_at(l)) {
      const Command& c = p.commands[ci];
      os << "  [" << c.action << "] " << to_string(c.guard) << " ->";
      bool first = true;
      for (const auto& d : c.destinations) {
        os << (first ? " " : " + ") << to_string(d.prob) << ":" << to_string(d.update) << ":"
           << target_name(p, d.target);
        first = false;
      }
      os << "\n";
    }
  }
  return os.str();
}

bool check_potential_goal(const Pcfp& p, LocIndex l, const GoalSpec& g, std::uint64_t budget) {
  Predicate spec = substitute(g.target, p.locations.at(l).label);
  return !is_unsat(check_sat(spec, p.domain(), p.constants, budget));
}

// ---- explicit semantics ----------------------------------------------------

bool ExplicitModel::is_chain() const {
  return std::all_of(actions.begin(), actions.end(), [](const auto& a) { return a.size() <= 1; });
}

namespace {

struct Key {
  LocIndex loc;
  std::vector<Int> vals;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::size_t h = std::hash<LocIndex>{}(k.loc);
    for (Int v : k.vals) h = h * 1000003u ^ std::hash<Int>{}(v);
    return h;
  }
};

struct CompiledDest {
  std::vector<std::pair<int, detail::Compiled>> writes;
  Rational prob;
  LocIndex target;
};

struct CompiledCommand {
  detail::Compiled guard;
  std::vector<CompiledDest> dests;
  std::string action;
};

}  // namespace

ExplicitModel build_semantics(const Pcfp& p, const BuildOptions& opts) {
  const std::size_t nvars = p.variables.size();
  std::vector<std::pair<Int, Int>> bounds;
  std::vector<Int> init;
  for (const auto& v : p.variables) {
    auto b = resolve_bounds({v.lo, v.hi}, p.constants);
    if (!b) throw Error(Errc::UnboundConstant, "bounds of '" + v.name + "' need undefined constants");
    bounds.push_back(*b);
    init.push_back(evaluate(v.init, {}, p.constants));
  }
  auto slot_of = [&](const std::string& name) -> std::optional<int> {
    for (std::size_t i = 0; i < nvars; ++i)
      if (p.variables[i].name == name) return static_cast<int>(i);
    return std::nullopt;
  };

  std::vector<std::vector<CompiledCommand>> at(p.locations.size());
  for (const auto& c : p.commands) {
    CompiledCommand cc;
    cc.guard = detail::Compiled::compile(c.guard, slot_of, p.constants);
    cc.action = c.action;
    for (const auto& d : c.destinations) {
      CompiledDest cd{{}, d.prob, d.target};
      Update n = d.update.normalized();
      if (!n.empty())
        for (const auto& a : n.blocks().front()) {
          auto slot = slot_of(a.lhs);
          if (!slot) throw Error(Errc::UnboundVariable, "update writes unknown variable '" + a.lhs + "'");
          cd.writes.emplace_back(*slot, detail::Compiled::compile(a.rhs, slot_of, p.constants));
        }
      cc.dests.push_back(std::move(cd));
    }
    at[c.source].push_back(std::move(cc));
  }

  ExplicitModel m;
  m.constants = p.constants;
  std::unordered_map<Key, StateIndex, KeyHash> index;
  std::vector<Key> keys;
  auto intern = [&](Key k) -> StateIndex {
    auto [it, fresh] = index.try_emplace(k, keys.size());
    if (fresh) {
      if (keys.size() >= opts.max_states)
        throw Error(Errc::ExplosionLimit, "state space exceeds " + std::to_string(opts.max_states) + " states");
      keys.push_back(std::move(k));
    }
    return it->second;
  };

  m.initial = intern({p.initial, init});
  std::vector<Int> next(nvars);
  for (StateIndex s = 0; s < keys.size(); ++s) {
    const Key key = keys[s];
    std::vector<Action> acts;
    if (key.loc == kBottomTarget) {
      acts.push_back({"⊥", {{Rational(1), s}}});
      m.actions.push_back(std::move(acts));
      continue;
    }
    for (const auto& cc : at[key.loc]) {
      if (!cc.guard.test(key.vals.data())) continue;
      std::map<StateIndex, Rational> dist;
      for (const auto& cd : cc.dests) {
        next = key.vals;
        bool out = cd.target == kBottomTarget;
        for (const auto& [slot, code] : cd.writes) {
          Int v = code.run(key.vals.data());
          if (v < bounds[slot].first || v > bounds[slot].second) out = true;
          next[slot] = v;
        }
        StateIndex t = out ? intern({kBottomTarget, {}}) : intern({cd.target, next});
        dist[t] += cd.prob;
      }
      Action a{cc.action, {}};
      for (auto& [t, pr] : dist) a.transitions.push_back({pr, t});
      acts.push_back(std::move(a));
    }
    m.actions.push_back(std::move(acts));
  }

  m.states.reserve(keys.size());
  for (StateIndex s = 0; s < keys.size(); ++s) {
    const Key& k = keys[s];
    State st;
    st.location = k.loc;
    if (k.loc == kBottomTarget) {
      m.bottom = s;
      st.base = "⊥";
    } else {
      st.base = p.locations[k.loc].base;
      st.valuation = p.locations[k.loc].label;
      for (std::size_t i = 0; i < nvars; ++i) st.valuation.set(p.variables[i].name, k.vals[i]);
    }
    m.states.push_back(std::move(st));
  }
  return m;
}

bool check_well_formed(const Pcfp& p, const BuildOptions& opts) {
  return !build_semantics(p, opts).bottom.has_value();
}

bool check_deterministic(const Pcfp& p, const BuildOptions& opts) { return build_semantics(p, opts).is_chain(); }

ExplicitModel mark_goal_states(ExplicitModel m, const GoalSpec& g) {
  m.goal.assign(m.states.size(), false);
  Predicate target = bind_constants(g.target, m.constants);
  for (StateIndex s = 0; s < m.states.size(); ++s) {
    if (m.bottom && *m.bottom == s) continue;
    m.goal[s] = evaluate(target, m.states[s].valuation, m.constants);
  }
  return m;
}

}  // namespace locelim
