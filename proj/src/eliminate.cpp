#include "locelim/eliminate.hpp"

#include <algorithm>
#include <numeric>

#include "locelim/error.hpp"

namespace locelim {

EliminationStats& EliminationStats::operator+=(const EliminationStats& o) {
  transition_eliminations += o.transition_eliminations;
  commands_created += o.commands_created;
  commands_pruned += o.commands_pruned;
  completion_commands += o.completion_commands;
  locations_eliminated += o.locations_eliminated;
  unsat_commands_removed += o.unsat_commands_removed;
  self_loops_removed += o.self_loops_removed;
  return *this;
}

namespace {

const Destination& destination_at(const Pcfp& p, TransitionRef t) {
  if (t.command >= p.commands.size() || t.destination >= p.commands[t.command].destinations.size())
    throw Error(Errc::InvalidTransition, "transition reference out of range");
  return p.commands[t.command].destinations[t.destination];
}

bool has_self_loop(const Pcfp& p, LocIndex l) {
  for (const auto& c : p.commands)
    if (c.source == l)
      for (const auto& d : c.destinations)
        if (d.target == l) return true;
  return false;
}

// A location without commands that carries l's label; states sent there
// deadlock exactly as they would have at l.
LocIndex dead_end_for(Pcfp& p, LocIndex l) {
  std::string name = p.locations[l].name + "#dead";
  if (auto found = p.find_location(name)) return *found;
  p.locations.push_back({p.locations[l].base + "#dead", name, p.locations[l].label});
  return p.locations.size() - 1;
}

void add_branch(std::vector<Destination>& out, Destination d) {
  for (auto& e : out)
    if (e.target == d.target && e.update == d.update) {
      e.prob += d.prob;
      return;
    }
  out.push_back(std::move(d));
}

Pcfp eliminate_transition_impl(const Pcfp& p, TransitionRef t, const GoalSpec& g, EliminationStats* stats,
                               const EliminateOptions& opts, bool check_goal) {
  const Destination& elim = destination_at(p, t);
  const Command& gamma = p.commands[t.command];
  const LocIndex l1 = elim.target;
  if (l1 == kBottomTarget) throw Error(Errc::InvalidTransition, "cannot eliminate a transition into the sink");
  if (check_goal && check_potential_goal(p, l1, g, opts.sat_budget))
    throw Error(Errc::PotentialGoalTarget, "location '" + p.locations[l1].name + "' is a potential goal");
  std::vector<std::size_t> at = p.commands_at(l1);
  if (at.empty()) throw Error(Errc::NoCommandsAtTarget, "location '" + p.locations[l1].name + "' has no commands");

  const DomainMap dom = p.domain();
  const Update u = elim.update.normalized();
  const Rational& prob = elim.prob;

  std::vector<Destination> others;
  for (std::size_t j = 0; j < gamma.destinations.size(); ++j)
    if (j != t.destination) others.push_back(gamma.destinations[j]);

  auto feasible = [&](const Predicate& q) { return !is_unsat(check_sat(q, dom, p.constants, opts.sat_budget)); };

  Pcfp out = p;
  std::vector<Command> created;
  std::size_t next_tag = 0;
  auto emit = [&](Predicate guard, std::vector<Destination> branches, std::string tag) {
    if (stats) ++stats->commands_created;
    guard = simplify(guard);
    if (!feasible(guard)) {
      if (stats) ++stats->commands_pruned;
      return;
    }
    created.push_back({gamma.source, std::move(guard), std::move(branches), std::move(tag)});
  };

  // u may leave the domain: then the original step ends in the sink, and
  // the guards at l1 must not be consulted for that valuation.
  Predicate in_dom = stays_in_domain(u, dom);
  if (feasible(simplify(gamma.guard && !in_dom))) {
    std::vector<Destination> branches = others;
    add_branch(branches, {prob, u, kBottomTarget});
    emit(gamma.guard && !in_dom, std::move(branches), gamma.action + ".oob");
    if (stats) ++stats->completion_commands;
  } else {
    in_dom = Predicate::truth(true);
  }
  const Predicate phi = gamma.guard && in_dom;

  std::vector<Predicate> covered;
  for (std::size_t ci : at) {
    const Command& gi = p.commands[ci];
    covered.push_back(gi.guard);
    std::vector<Destination> branches = others;
    for (const auto& v : gi.destinations)
      add_branch(branches, {prob * v.prob, Update::chain(u, v.update).normalized(), v.target});
    emit(phi && wp(u, gi.guard), std::move(branches), gamma.action + "." + std::to_string(next_tag++));
  }

  // Valuations where no command at l1 is enabled after u deadlock there.
  Predicate uncovered = phi && wp(u, !Predicate::disjunction(covered));
  if (feasible(simplify(uncovered))) {
    LocIndex dead = dead_end_for(out, l1);
    std::vector<Destination> branches = others;
    add_branch(branches, {prob, u, dead});
    emit(uncovered, std::move(branches), gamma.action + ".dead");
    if (stats) ++stats->completion_commands;
  }

  out.commands.erase(out.commands.begin() + static_cast<std::ptrdiff_t>(t.command));
  out.commands.insert(out.commands.begin() + static_cast<std::ptrdiff_t>(t.command), created.begin(), created.end());
  if (stats) ++stats->transition_eliminations;
  return out;
}

}  // namespace

std::size_t multiplicity(const Pcfp& p, TransitionRef t) {
  const LocIndex target = destination_at(p, t).target;
  const auto& ds = p.commands[t.command].destinations;
  return static_cast<std::size_t>(std::count_if(ds.begin(), ds.end(), [&](const Destination& d) { return d.target == target; }));
}

Pcfp eliminate_transition(const Pcfp& p, TransitionRef t, const GoalSpec& g, EliminationStats* stats,
                          const EliminateOptions& opts) {
  return eliminate_transition_impl(p, t, g, stats, opts, true);
}

Pcfp eliminate_location(const Pcfp& p, LocIndex l, const GoalSpec& g, EliminationStats* stats,
                        const EliminateOptions& opts) {
  if (l >= p.locations.size()) throw Error(Errc::InvalidTransition, "location index out of range");
  if (l == p.initial) throw Error(Errc::IsInitial, "cannot eliminate the initial location");
  if (has_self_loop(p, l)) throw Error(Errc::HasSelfLoop, "location '" + p.locations[l].name + "' has a self-loop");
  if (check_potential_goal(p, l, g, opts.sat_budget))
    throw Error(Errc::PotentialGoalTarget, "location '" + p.locations[l].name + "' is a potential goal");

  Pcfp q = p;
  while (true) {
    std::optional<TransitionRef> best;
    std::size_t best_mult = 0;
    for (std::size_t ci = 0; ci < q.commands.size(); ++ci)
      for (std::size_t di = 0; di < q.commands[ci].destinations.size(); ++di) {
        if (q.commands[ci].destinations[di].target != l) continue;
        std::size_t m = multiplicity(q, {ci, di});
        if (!best || m < best_mult) {
          best = TransitionRef{ci, di};
          best_mult = m;
        }
      }
    if (!best) break;
    q = eliminate_transition_impl(q, *best, g, stats, opts, false);
    if (q.commands.size() > opts.max_commands)
      throw Error(Errc::ExplosionLimit, "eliminating '" + p.locations[l].name + "' exceeds " +
                                            std::to_string(opts.max_commands) + " commands");
  }
  std::vector<bool> keep(q.locations.size(), true);
  keep[l] = false;
  if (stats) ++stats->locations_eliminated;
  return remove_locations(q, keep);
}

Pcfp remove_unsat_commands(const Pcfp& p, EliminationStats* stats, const EliminateOptions& opts) {
  Pcfp q = p;
  const DomainMap dom = p.domain();
  auto unsat = [&](const Predicate& phi) { return is_unsat(check_sat(phi, dom, q.constants, opts.sat_budget)); };
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::vector<TransitionRef>> ingoing(q.locations.size());
    for (std::size_t ci = 0; ci < q.commands.size(); ++ci)
      for (std::size_t di = 0; di < q.commands[ci].destinations.size(); ++di) {
        LocIndex t = q.commands[ci].destinations[di].target;
        if (t != kBottomTarget) ingoing[t].push_back({ci, di});
      }
    std::vector<Command> kept;
    for (std::size_t ci = 0; ci < q.commands.size(); ++ci) {
      const Command& c = q.commands[ci];
      bool drop = unsat(c.guard);
      if (!drop && c.source != q.initial) {
        // Some way into the location must be able to enable the guard. The
        // command's own self-loops cannot be the first way in.
        std::vector<Predicate> context;
        for (const auto& in : ingoing[c.source]) {
          if (in.command == ci) continue;
          const Command& src = q.commands[in.command];
          context.push_back(src.guard && wp(src.destinations[in.destination].update, c.guard));
        }
        drop = unsat(Predicate::disjunction(std::move(context)));
      }
      if (drop) {
        changed = true;
        if (stats) ++stats->unsat_commands_removed;
      } else {
        kept.push_back(c);
      }
    }
    q.commands = std::move(kept);
    std::vector<bool> reach = reachable_locations(q);
    if (std::find(reach.begin(), reach.end(), false) != reach.end()) {
      q = remove_locations(q, reach);
      changed = true;
    }
  }
  return q;
}

Pcfp rescale_nop_self_loop(const Pcfp& p, TransitionRef t) {
  const Destination& d = destination_at(p, t);
  const Command& c = p.commands[t.command];
  if (d.target != c.source) throw Error(Errc::NotSelfLoop, "transition is not a self-loop");
  if (!d.update.is_nop()) throw Error(Errc::NotNop, "self-loop update is not nop");
  if (d.prob == 1) throw Error(Errc::FullLoop, "self-loop has probability one");
  Pcfp q = p;
  Command& nc = q.commands[t.command];
  Rational scale = 1 / (1 - d.prob);
  nc.destinations.erase(nc.destinations.begin() + static_cast<std::ptrdiff_t>(t.destination));
  for (auto& e : nc.destinations) e.prob *= scale;
  return q;
}

Pcfp eliminate_idempotent_self_loop(const Pcfp& p, TransitionRef t, const GoalSpec& g, EliminationStats* stats,
                                    const EliminateOptions& opts) {
  const Destination& d = destination_at(p, t);
  const Command& gamma = p.commands[t.command];
  const LocIndex l = gamma.source;
  if (d.target != l) throw Error(Errc::NotSelfLoop, "transition is not a self-loop");
  if (d.prob == 1) throw Error(Errc::FullLoop, "self-loop has probability one");
  if (check_idempotent(d.update, p.domain(), p.constants, opts.sat_budget) != Tristate::Yes)
    throw Error(Errc::NotIdempotent, "self-loop update " + to_string(d.update) + " is not known to be idempotent");
  if (check_potential_goal(p, l, g, opts.sat_budget)) {
    Predicate after = wp(d.update, substitute(g.target, p.locations[l].label));
    if (!is_unsat(check_sat(after, p.domain(), p.constants, opts.sat_budget)))
      throw Error(Errc::PotentialGoal, "a goal may hold after the self-loop at '" + p.locations[l].name + "'");
  }

  // Route the loop through a copy of l. Every valuation there is an image of
  // the idempotent update, so repeating the update is a nop self-loop, which
  // is rescaled away before the detour itself is eliminated.
  Pcfp q = p;
  LocIndex copy = q.locations.size();
  q.locations.push_back({p.locations[l].base + "#loop", p.locations[l].name + "#loop", p.locations[l].label});
  std::size_t copy_of_gamma = 0;
  for (std::size_t ci : p.commands_at(l)) {
    Command c = p.commands[ci];
    c.source = copy;
    c.action += "#loop";
    if (ci == t.command) {
      c.destinations[t.destination] = {d.prob, Update{}, copy};
      copy_of_gamma = q.commands.size();
    }
    q.commands.push_back(std::move(c));
  }
  q.commands[t.command].destinations[t.destination].target = copy;
  q = rescale_nop_self_loop(q, {copy_of_gamma, t.destination});
  q = eliminate_transition_impl(q, t, g, stats, opts, false);
  std::vector<bool> keep(q.locations.size(), true);
  keep[copy] = false;
  if (stats) ++stats->self_loops_removed;
  return remove_locations(q, keep);
}

std::vector<LocIndex> eliminable_locations(const Pcfp& p, const GoalSpec& g, const EliminateOptions& opts) {
  std::vector<std::size_t> in(p.locations.size(), 0), out(p.locations.size(), 0);
  std::vector<bool> loops(p.locations.size(), false);
  for (const auto& c : p.commands) {
    ++out[c.source];
    for (const auto& d : c.destinations) {
      if (d.target == kBottomTarget) continue;
      ++in[d.target];
      if (d.target == c.source) loops[c.source] = true;
    }
  }
  std::vector<std::pair<std::size_t, LocIndex>> ranked;
  for (LocIndex l = 0; l < p.locations.size(); ++l) {
    if (l == p.initial || loops[l]) continue;
    if (out[l] == 0 && in[l] > 0) continue;
    if (check_potential_goal(p, l, g, opts.sat_budget)) continue;
    ranked.emplace_back(in[l] * out[l], l);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<LocIndex> result;
  for (const auto& [score, l] : ranked) result.push_back(l);
  return result;
}

Pcfp eliminate_all(const Pcfp& p, const GoalSpec& g, EliminationStats* stats, const EliminateOptions& opts) {
  Pcfp q = p;
  std::set<std::string> skipped;
  while (true) {
    q = remove_unsat_commands(q, stats, opts);
    if (q.commands.size() > opts.max_commands) break;
    std::optional<LocIndex> pick;
    for (LocIndex l : eliminable_locations(q, g, opts))
      if (!skipped.contains(q.locations[l].name)) {
        pick = l;
        break;
      }
    if (!pick) break;
    EliminationStats local;
    try {
      q = eliminate_location(q, *pick, g, &local, opts);
      if (stats) *stats += local;
    } catch (const Error& e) {
      if (e.code() != Errc::ExplosionLimit) throw;
      skipped.insert(q.locations[*pick].name);
    }
  }
  return q;
}

std::optional<VarSet> suggest_unfold(const Pcfp& p, const GoalSpec& g, const SuggestOptions& opts) {
  struct Candidate {
    std::size_t score;
    unsigned __int128 product;
    VarSet vars;
  };
  std::optional<Candidate> best;
  for (const VarSet& vars : unfoldable_sets(p)) {
    if (opts.exclude_all_variables && vars.size() == p.variables.size()) continue;
    unsigned __int128 product = 1;
    bool symbolic = false;
    for (const auto& x : vars) {
      const VarDecl* decl = p.find_variable(x);
      auto b = resolve_bounds({decl->lo, decl->hi}, p.constants);
      if (!b) {
        symbolic = true;
        break;
      }
      product *= static_cast<unsigned __int128>(std::max<Int>(b->second - b->first + 1, 0));
    }
    if (symbolic || product * p.locations.size() > opts.max_locations) continue;
    Pcfp trial;
    try {
      trial = remove_unsat_commands(unfold(p, vars), nullptr, opts.eliminate);
    } catch (const Error&) {
      continue;
    }
    std::size_t score = eliminable_locations(trial, g, opts.eliminate).size();
    Candidate c{score, product, vars};
    auto better = [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.product != b.product) return a.product < b.product;
      return a.vars < b.vars;
    };
    if (!best || better(c, *best)) best = std::move(c);
  }
  if (!best || best->score == 0) return std::nullopt;
  return best->vars;
}

}  // namespace locelim
