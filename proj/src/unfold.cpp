#include "locelim/unfold.hpp"

#include <algorithm>
#include <deque>

#include "locelim/error.hpp"

namespace locelim {

DependencyGraph dependency_graph(const Pcfp& p) {
  DependencyGraph g;
  for (const auto& v : p.variables) g[v.name];
  for (const auto& c : p.commands)
    for (const auto& d : c.destinations)
      for (const auto& block : d.update.blocks())
        for (const auto& a : block) {
          auto reads = free_variables(a.rhs);
          g[a.lhs].insert(reads.begin(), reads.end());
        }
  return g;
}

VarSet directly_unfoldable(const Pcfp& p) {
  VarSet out;
  for (const auto& [x, deps] : dependency_graph(p))
    if (std::all_of(deps.begin(), deps.end(), [&](const std::string& y) { return y == x; })) out.insert(x);
  return out;
}

namespace {

VarSet reach(const DependencyGraph& g, const std::string& from) {
  VarSet seen{from};
  std::vector<std::string> stack{from};
  while (!stack.empty()) {
    std::string x = stack.back();
    stack.pop_back();
    auto it = g.find(x);
    if (it == g.end()) continue;
    for (const auto& y : it->second)
      if (seen.insert(y).second) stack.push_back(y);
  }
  return seen;
}

}  // namespace

std::vector<VarSet> unfoldable_sets(const Pcfp& p) {
  DependencyGraph g = dependency_graph(p);
  std::map<std::string, VarSet> r;
  for (const auto& [x, deps] : g) r[x] = reach(g, x);
  std::set<VarSet> out;
  for (const auto& [x, rx] : r) {
    // x lies in a bottom SCC iff everything it reaches reaches it back.
    bool bottom = std::all_of(rx.begin(), rx.end(), [&](const std::string& y) { return r[y].contains(x); });
    if (bottom) out.insert(rx);
  }
  std::vector<VarSet> sorted(out.begin(), out.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const VarSet& a, const VarSet& b) { return a.size() < b.size(); });
  return sorted;
}

namespace {

struct Spec {
  std::string name;
  Int lo;
  Int hi;
};

std::string label_suffix(const Valuation& mu) {
  std::string s;
  for (const auto& [k, v] : mu.values()) s += (s.empty() ? "" : ",") + k + "=" + std::to_string(v);
  return s;
}

}  // namespace

Pcfp unfold(const Pcfp& p, const VarSet& vars) {
  if (vars.empty()) return p;
  std::vector<Spec> specs;
  Valuation mu0;
  for (const auto& x : vars) {
    const VarDecl* decl = p.find_variable(x);
    if (!decl) throw Error(Errc::InvalidProgram, "cannot unfold unknown variable '" + x + "'");
    auto b = resolve_bounds({decl->lo, decl->hi}, p.constants);
    if (!b) throw Error(Errc::SymbolicBound, "bounds of '" + x + "' depend on an undefined constant");
    specs.push_back({x, b->first, b->second});
    mu0.set(x, evaluate(decl->init, {}, p.constants));
  }
  for (const auto& [x, deps] : dependency_graph(p)) {
    if (!vars.contains(x)) continue;
    for (const auto& y : deps)
      if (!vars.contains(y))
        throw Error(Errc::NotClosed, "'" + x + "' depends on '" + y + "', which is not unfolded");
  }

  // Single-block forms of all updates, computed once.
  std::vector<std::vector<Update>> normal(p.commands.size());
  for (std::size_t ci = 0; ci < p.commands.size(); ++ci)
    for (const auto& d : p.commands[ci].destinations) normal[ci].push_back(d.update.normalized());

  auto in_domain = [&](const Valuation& mu) {
    for (const auto& s : specs) {
      Int v = *mu.get(s.name);
      if (v < s.lo || v > s.hi) return false;
    }
    return true;
  };

  struct PendingDest {
    Rational prob;
    Update update;
    std::optional<std::pair<LocIndex, Valuation>> target;  // nullopt is ⊥
  };
  struct PendingCommand {
    Predicate guard;
    std::vector<PendingDest> dests;
    std::string action;
  };
  using NodeKey = std::pair<LocIndex, Valuation>;
  std::map<NodeKey, std::vector<PendingCommand>> nodes;
  std::deque<NodeKey> queue{{p.initial, mu0}};
  nodes[queue.front()];
  std::vector<std::vector<std::size_t>> at(p.locations.size());
  for (std::size_t ci = 0; ci < p.commands.size(); ++ci) at[p.commands[ci].source].push_back(ci);

  while (!queue.empty()) {
    NodeKey node = queue.front();
    queue.pop_front();
    const auto& [l, mu] = node;
    std::vector<PendingCommand> cmds;
    for (std::size_t ci : at[l]) {
      const Command& c = p.commands[ci];
      Predicate guard = simplify(substitute(c.guard, mu));
      if (guard.is_false()) continue;
      PendingCommand pc{guard, {}, c.action + "/" + label_suffix(mu)};
      for (std::size_t di = 0; di < c.destinations.size(); ++di) {
        const Destination& d = c.destinations[di];
        const Update& n = normal[ci][di];
        Valuation next = mu;
        if (!n.empty())
          for (const auto& a : n.blocks().front())
            if (vars.contains(a.lhs)) next.set(a.lhs, evaluate(a.rhs, mu, p.constants));
        PendingDest pd{d.prob, substitute(n, mu).normalized(), std::nullopt};
        if (d.target != kBottomTarget && in_domain(next)) {
          pd.target = NodeKey{d.target, next};
          if (nodes.try_emplace(*pd.target).second) queue.push_back(*pd.target);
        }
        pc.dests.push_back(std::move(pd));
      }
      cmds.push_back(std::move(pc));
    }
    nodes[node] = std::move(cmds);
  }

  Pcfp out;
  out.constants = p.constants;
  out.labels = p.labels;
  out.unfolded = p.unfolded;
  for (const auto& v : p.variables) (vars.contains(v.name) ? out.unfolded : out.variables).push_back(v);

  // Map order is (old location, unfolded values), which fixes the numbering.
  std::map<NodeKey, LocIndex> index;
  for (const auto& [key, cmds] : nodes) {
    index.emplace(key, out.locations.size());
    const Location& old = p.locations[key.first];
    Location loc;
    loc.base = old.base;
    loc.label = old.label.merged(key.second);
    loc.name = old.base + "{" + label_suffix(loc.label) + "}";
    out.locations.push_back(std::move(loc));
  }
  out.initial = index.at({p.initial, mu0});
  for (const auto& [key, cmds] : nodes) {
    for (const auto& pc : cmds) {
      Command c;
      c.source = index.at(key);
      c.guard = pc.guard;
      c.action = pc.action;
      for (const auto& pd : pc.dests)
        c.destinations.push_back({pd.prob, pd.update, pd.target ? index.at(*pd.target) : kBottomTarget});
      out.commands.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace locelim
