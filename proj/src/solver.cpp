#include "locelim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>

#include "locelim/error.hpp"

namespace locelim {

const char* method_name(Method m) {
  switch (m) {
    case Method::GaussianExact: return "gaussian-exact";
    case Method::EliminationExact: return "elimination-exact";
    case Method::ValueIteration: return "value-iteration";
    case Method::SchedulerEnumerationExact: return "scheduler-enumeration-exact";
  }
  return "?";
}

namespace {

void require_goals(const ExplicitModel& m) {
  if (m.goal.size() != m.states.size()) throw Error(Errc::InvalidProgram, "goal states have not been marked");
}

void require_chain(const ExplicitModel& m) {
  if (!m.is_chain()) throw Error(Errc::NotAChain, "model has a state with several actions");
}

std::vector<bool> forward_reachable(const ExplicitModel& m) {
  std::vector<bool> seen(m.states.size(), false);
  std::vector<StateIndex> stack{m.initial};
  seen[m.initial] = true;
  while (!stack.empty()) {
    StateIndex s = stack.back();
    stack.pop_back();
    for (const auto& a : m.actions[s])
      for (const auto& t : a.transitions)
        if (!seen[t.target]) {
          seen[t.target] = true;
          stack.push_back(t.target);
        }
  }
  return seen;
}

// States from which some path reaches a goal.
std::vector<bool> can_reach_goal(const ExplicitModel& m) {
  std::vector<std::vector<StateIndex>> pred(m.states.size());
  for (StateIndex s = 0; s < m.states.size(); ++s)
    for (const auto& a : m.actions[s])
      for (const auto& t : a.transitions)
        if (t.prob != 0) pred[t.target].push_back(s);
  std::vector<bool> seen(m.states.size(), false);
  std::vector<StateIndex> stack;
  for (StateIndex s = 0; s < m.states.size(); ++s)
    if (m.goal[s]) {
      seen[s] = true;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    StateIndex s = stack.back();
    stack.pop_back();
    for (StateIndex p : pred[s])
      if (!seen[p]) {
        seen[p] = true;
        stack.push_back(p);
      }
  }
  return seen;
}

// States that reach a goal with positive probability under every scheduler.
std::vector<bool> must_reach_goal(const ExplicitModel& m) {
  std::vector<bool> in(m.goal.begin(), m.goal.end());
  bool changed = true;
  while (changed) {
    changed = false;
    for (StateIndex s = 0; s < m.states.size(); ++s) {
      if (in[s] || m.actions[s].empty()) continue;
      bool all = std::all_of(m.actions[s].begin(), m.actions[s].end(), [&](const Action& a) {
        return std::any_of(a.transitions.begin(), a.transitions.end(),
                           [&](const Transition& t) { return t.prob != 0 && in[t.target]; });
      });
      if (all) {
        in[s] = true;
        changed = true;
      }
    }
  }
  return in;
}

ReachResult exact_result(Method method, Rational v) {
  ReachResult r;
  r.method = method;
  r.value = to_double(v);
  r.exact = std::move(v);
  return r;
}

}  // namespace

ReachResult solve_mc_exact(const ExplicitModel& m) {
  require_goals(m);
  require_chain(m);
  if (m.goal[m.initial]) return exact_result(Method::GaussianExact, 1);
  std::vector<bool> reach = forward_reachable(m);
  std::vector<bool> live = can_reach_goal(m);
  if (!live[m.initial]) return exact_result(Method::GaussianExact, 0);

  std::vector<long> column(m.states.size(), -1);
  std::vector<StateIndex> unknowns;
  // Reverse discovery order: far states go first and the initial state is
  // eliminated last, so its value is read off without back-substitution.
  for (StateIndex s = m.states.size(); s-- > 0;)
    if (reach[s] && live[s] && !m.goal[s] && s != m.initial) {
      column[s] = static_cast<long>(unknowns.size());
      unknowns.push_back(s);
    }
  column[m.initial] = static_cast<long>(unknowns.size());
  unknowns.push_back(m.initial);
  const std::size_t n = unknowns.size();

  // (I - P) x = b over the unknowns; b collects one-step goal probability.
  std::vector<std::map<std::size_t, Rational>> rows(n);
  std::vector<Rational> rhs(n);
  std::vector<std::set<std::size_t>> col_rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i][i] = 1;
    for (const auto& t : m.actions[unknowns[i]].front().transitions) {
      if (m.goal[t.target]) {
        rhs[i] += t.prob;
      } else if (column[t.target] >= 0) {
        auto j = static_cast<std::size_t>(column[t.target]);
        rows[i][j] -= t.prob;
        if (j != i) col_rows[j].insert(i);
      }
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    Rational pivot = rows[k].at(k);
    if (pivot == 0) throw Error(Errc::InvalidProgram, "singular reachability system");
    if (pivot != 1) {
      for (auto& [j, a] : rows[k]) a /= pivot;
      rhs[k] /= pivot;
    }
    for (std::size_t i : col_rows[k]) {
      if (i <= k) continue;
      auto it = rows[i].find(k);
      if (it == rows[i].end()) continue;
      Rational f = it->second;
      rows[i].erase(it);
      for (const auto& [j, a] : rows[k]) {
        if (j == k) continue;
        Rational& e = rows[i][j];
        e -= f * a;
        if (e == 0) {
          rows[i].erase(j);
          col_rows[j].erase(i);
        } else if (j != i) {
          col_rows[j].insert(i);
        }
      }
      rhs[i] -= f * rhs[k];
    }
  }
  return exact_result(Method::GaussianExact, rhs[n - 1]);
}

ExplicitModel mc_eliminate_state(const ExplicitModel& m, StateIndex s) {
  require_goals(m);
  require_chain(m);
  if (s >= m.states.size()) throw Error(Errc::InvalidProgram, "state index out of range");
  if (s == m.initial || m.goal[s]) throw Error(Errc::IsInitialOrGoal, "cannot eliminate the initial state or a goal");
  if (m.actions[s].empty()) throw Error(Errc::AbsorbingState, "state has no successors");
  Rational loop = 0;
  std::vector<Transition> succ;
  for (const auto& t : m.actions[s].front().transitions) {
    if (t.target == s)
      loop = t.prob;
    else
      succ.push_back(t);
  }
  if (loop == 1) throw Error(Errc::AbsorbingState, "state has a self-loop with probability one");
  Rational scale = 1 / (1 - loop);

  ExplicitModel out = m;
  for (StateIndex p = 0; p < m.states.size(); ++p) {
    if (p == s || out.actions[p].empty()) continue;
    auto& trans = out.actions[p].front().transitions;
    auto it = std::find_if(trans.begin(), trans.end(), [&](const Transition& t) { return t.target == s; });
    if (it == trans.end()) continue;
    Rational w = it->prob;
    trans.erase(it);
    std::map<StateIndex, Rational> merged;
    for (const auto& t : trans) merged[t.target] += t.prob;
    for (const auto& t : succ) merged[t.target] += w * t.prob * scale;
    trans.clear();
    for (auto& [t, pr] : merged) trans.push_back({pr, t});
  }

  auto shift = [&](StateIndex t) { return t > s ? t - 1 : t; };
  out.states.erase(out.states.begin() + static_cast<std::ptrdiff_t>(s));
  out.actions.erase(out.actions.begin() + static_cast<std::ptrdiff_t>(s));
  out.goal.erase(out.goal.begin() + static_cast<std::ptrdiff_t>(s));
  for (auto& acts : out.actions)
    for (auto& a : acts)
      for (auto& t : a.transitions) t.target = shift(t.target);
  out.initial = shift(m.initial);
  if (m.bottom) {
    if (*m.bottom == s)
      out.bottom.reset();
    else
      out.bottom = shift(*m.bottom);
  }
  return out;
}

ReachResult solve_mc_by_elimination(const ExplicitModel& m) {
  require_goals(m);
  require_chain(m);
  if (m.goal[m.initial]) return exact_result(Method::EliminationExact, 1);
  std::vector<bool> reach = forward_reachable(m);
  std::vector<bool> live = can_reach_goal(m);
  if (!live[m.initial]) return exact_result(Method::EliminationExact, 0);

  const std::size_t n = m.states.size();
  std::vector<std::map<StateIndex, Rational>> out(n);
  std::vector<std::set<StateIndex>> in(n);
  for (StateIndex s = 0; s < n; ++s) {
    if (!reach[s] || !live[s] || m.goal[s]) continue;
    for (const auto& t : m.actions[s].front().transitions) {
      if (!live[t.target]) continue;  // contributes nothing
      out[s][t.target] += t.prob;
      in[t.target].insert(s);
    }
  }

  using Entry = std::pair<std::size_t, StateIndex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  auto eliminable = [&](StateIndex s) { return s != m.initial && reach[s] && live[s] && !m.goal[s]; };
  auto cost = [&](StateIndex s) { return in[s].size() * out[s].size(); };
  std::vector<bool> done(n, false);
  for (StateIndex s = 0; s < n; ++s)
    if (eliminable(s)) heap.emplace(cost(s), s);

  while (!heap.empty()) {
    auto [c, s] = heap.top();
    heap.pop();
    if (done[s] || c != cost(s)) continue;
    done[s] = true;
    Rational loop = 0;
    if (auto it = out[s].find(s); it != out[s].end()) {
      loop = it->second;
      out[s].erase(it);
      in[s].erase(s);
    }
    Rational scale = 1 / (1 - loop);
    for (StateIndex p : in[s]) {
      Rational w = out[p][s];
      out[p].erase(s);
      for (const auto& [t, q] : out[s]) {
        out[p][t] += w * q * scale;
        in[t].insert(p);
      }
    }
    for (const auto& [t, q] : out[s]) in[t].erase(s);
    std::set<StateIndex> touched(in[s].begin(), in[s].end());
    for (const auto& [t, q] : out[s]) touched.insert(t);
    out[s].clear();
    in[s].clear();
    for (StateIndex t : touched)
      if (eliminable(t) && !done[t]) heap.emplace(cost(t), t);
  }

  Rational loop = 0, to_goal = 0;
  for (const auto& [t, q] : out[m.initial]) {
    if (t == m.initial)
      loop = q;
    else if (m.goal[t])
      to_goal += q;
  }
  return exact_result(Method::EliminationExact, to_goal / (1 - loop));
}

namespace {

ReachResult value_iteration(const ExplicitModel& m, Objective objective, const MdpOptions& opts) {
  const std::size_t n = m.states.size();
  bool minimize = objective == Objective::Minimize;
  std::vector<bool> positive = minimize ? must_reach_goal(m) : can_reach_goal(m);
  std::vector<double> x(n, 0.0);
  for (StateIndex s = 0; s < n; ++s)
    if (m.goal[s]) x[s] = 1.0;
  std::vector<std::vector<std::vector<std::pair<double, StateIndex>>>> dist(n);
  for (StateIndex s = 0; s < n; ++s)
    for (const auto& a : m.actions[s]) {
      std::vector<std::pair<double, StateIndex>> d;
      for (const auto& t : a.transitions) d.emplace_back(to_double(t.prob), t.target);
      dist[s].push_back(std::move(d));
    }
  // The remaining error is about delta * r / (1 - r) for a per-sweep
  // contraction r, estimated from successive deltas.
  double previous = 0.0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    double delta = 0.0;
    for (StateIndex s = 0; s < n; ++s) {
      if (m.goal[s] || !positive[s] || dist[s].empty()) continue;
      double best = minimize ? 2.0 : -1.0;
      for (const auto& d : dist[s]) {
        double v = 0.0;
        for (const auto& [p, t] : d) v += p * x[t];
        best = minimize ? std::min(best, v) : std::max(best, v);
      }
      delta = std::max(delta, std::abs(best - x[s]));
      x[s] = best;
    }
    if (delta == 0.0) break;
    double r = previous > 0.0 ? std::min(delta / previous, 1.0 - 1e-12) : 0.5;
    previous = delta;
    if (delta < opts.epsilon && delta * r / (1.0 - r) < opts.epsilon) break;
  }
  ReachResult r;
  r.method = Method::ValueIteration;
  r.value = x[m.initial];
  return r;
}

ReachResult enumerate_schedulers(const ExplicitModel& m, Objective objective, const MdpOptions& opts) {
  std::vector<bool> reach = forward_reachable(m);
  std::vector<StateIndex> choice;
  std::uint64_t total = 1;
  for (StateIndex s = 0; s < m.states.size(); ++s)
    if (reach[s] && m.actions[s].size() > 1) {
      choice.push_back(s);
      total *= m.actions[s].size();
      if (total > opts.max_schedulers)
        throw Error(Errc::TooLargeForEnumeration, "more than " + std::to_string(opts.max_schedulers) + " schedulers");
    }
  std::vector<std::size_t> pick(choice.size(), 0);
  std::optional<ReachResult> best;
  ExplicitModel induced = m;
  while (true) {
    for (std::size_t i = 0; i < choice.size(); ++i) induced.actions[choice[i]] = {m.actions[choice[i]][pick[i]]};
    for (StateIndex s = 0; s < m.states.size(); ++s)
      if (!reach[s] && induced.actions[s].size() > 1) induced.actions[s].resize(1);
    ReachResult r = solve_mc_exact(induced);
    bool better = !best || (objective == Objective::Minimize ? *r.exact < *best->exact : *r.exact > *best->exact);
    if (better) {
      std::vector<std::string> sched(m.states.size());
      for (StateIndex s = 0; s < m.states.size(); ++s)
        if (!induced.actions[s].empty()) sched[s] = induced.actions[s].front().tag;
      r.scheduler = std::move(sched);
      best = std::move(r);
    }
    std::size_t i = 0;
    for (; i < choice.size(); ++i) {
      if (++pick[i] < m.actions[choice[i]].size()) break;
      pick[i] = 0;
    }
    if (i == choice.size()) break;
  }
  best->method = Method::SchedulerEnumerationExact;
  return *best;
}

}  // namespace

ReachResult solve_mdp(const ExplicitModel& m, Objective objective, Method method, const MdpOptions& opts) {
  require_goals(m);
  if (objective == Objective::Forced) require_chain(m);
  switch (method) {
    case Method::GaussianExact: require_chain(m); return solve_mc_exact(m);
    case Method::EliminationExact: require_chain(m); return solve_mc_by_elimination(m);
    case Method::ValueIteration: return value_iteration(m, objective, opts);
    case Method::SchedulerEnumerationExact: return enumerate_schedulers(m, objective, opts);
  }
  throw Error(Errc::InvalidProgram, "unknown method");
}

namespace {

std::vector<std::string> state_keys(const ExplicitModel& m) {
  std::vector<std::string> keys;
  keys.reserve(m.states.size());
  for (const auto& s : m.states)
    keys.push_back(s.location == kBottomTarget ? std::string("⊥") : s.base + to_string(s.valuation));
  return keys;
}

using Distribution = std::vector<std::pair<std::string, std::string>>;  // (target key, prob)

std::vector<Distribution> canonical_actions(const ExplicitModel& m, const std::vector<std::string>& keys,
                                            StateIndex s) {
  std::vector<Distribution> out;
  for (const auto& a : m.actions[s]) {
    std::map<std::string, Rational> merged;
    for (const auto& t : a.transitions) merged[keys[t.target]] += t.prob;
    Distribution d;
    for (const auto& [k, p] : merged) d.emplace_back(k, to_string(p));
    out.push_back(std::move(d));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

bool canonical_compare(const ExplicitModel& a, const ExplicitModel& b) {
  if (a.states.size() != b.states.size()) return false;
  auto ka = state_keys(a);
  auto kb = state_keys(b);
  std::map<std::string, StateIndex> ib;
  for (StateIndex s = 0; s < kb.size(); ++s)
    if (!ib.emplace(kb[s], s).second) return false;
  std::set<std::string> seen;
  for (StateIndex s = 0; s < ka.size(); ++s) {
    if (!seen.insert(ka[s]).second) return false;
    auto it = ib.find(ka[s]);
    if (it == ib.end()) return false;
    if (canonical_actions(a, ka, s) != canonical_actions(b, kb, it->second)) return false;
    if (!a.goal.empty() && !b.goal.empty() && a.goal[s] != b.goal[it->second]) return false;
  }
  return ka[a.initial] == kb[b.initial];
}

ModelStats model_stats(const ExplicitModel& m) {
  ModelStats st;
  st.states = m.states.size();
  for (const auto& acts : m.actions) {
    st.actions += acts.size();
    for (const auto& a : acts)
      for (const auto& t : a.transitions)
        if (t.prob != 0) ++st.transitions;
  }
  return st;
}

}  // namespace locelim
