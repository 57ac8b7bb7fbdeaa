#include "locelim/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>

#include "locelim/error.hpp"
#include "locelim/unfold.hpp"

namespace locelim {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string shape(const Pcfp& p) {
  return std::to_string(p.locations.size()) + " locations, " + std::to_string(p.commands.size()) + " commands, " +
         std::to_string(p.destination_count()) + " transitions";
}

std::string join(const VarSet& vs) {
  std::string out;
  for (const auto& v : vs) out += (out.empty() ? "" : ",") + v;
  return out;
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string general(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

Pcfp load_program(std::string_view text) {
  auto k = text.find_first_not_of(" \t\r\n");
  if (k != std::string_view::npos && text[k] == '{') return parse_pcfp(text);
  return parse_model(text);
}

std::map<std::string, Int> parse_const_args(const std::vector<std::string>& args) {
  static const std::regex kPair(R"(^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(-?[0-9]+)\s*$)");
  std::map<std::string, Int> out;
  for (const auto& arg : args) {
    std::stringstream ss(arg);
    for (std::string item; std::getline(ss, item, ',');) {
      std::smatch m;
      if (!std::regex_match(item, m, kPair)) throw Error(Errc::BadParams, "bad constant '" + item + "', expected NAME=INT");
      try {
        out[m[1].str()] = std::stoll(m[2].str());
      } catch (const std::out_of_range&) {
        throw Error(Errc::BadParams, "constant '" + item + "' is out of range");
      }
    }
  }
  return out;
}

Pcfp apply_constants(const Pcfp& p, const std::map<std::string, Int>& values) {
  for (const auto& [k, v] : values)
    if (!p.constants.contains(k)) throw Error(Errc::BadParams, "the model declares no constant '" + k + "'");
  return instantiate(p, values);
}

Analysis analyze(const Pcfp& p, const GoalSpec& g, const AnalysisOptions& opts) {
  Analysis a;
  auto t0 = Clock::now();
  ExplicitModel m = mark_goal_states(build_semantics(p, opts.build), g);
  a.build_seconds = seconds_since(t0);
  a.model = model_stats(m);
  a.deterministic = m.is_chain();
  t0 = Clock::now();
  if (a.deterministic) {
    a.result = solve_mc_exact(m);
  } else if (g.objective == Objective::Forced) {
    throw Error(Errc::NotAChain, "P=? needs a deterministic model; use Pmax=? or Pmin=?");
  } else {
    try {
      a.result = solve_mdp(m, g.objective, Method::SchedulerEnumerationExact, opts.mdp);
    } catch (const Error& e) {
      if (e.code() != Errc::TooLargeForEnumeration) throw;
      a.result = solve_mdp(m, g.objective, Method::ValueIteration, opts.mdp);
    }
  }
  a.check_seconds = seconds_since(t0);
  return a;
}

Pcfp run_pipeline(const Pcfp& p, const std::vector<Directive>& steps, const GoalSpec& g, EliminationStats* stats,
                  std::vector<std::string>* log, const PipelineOptions& opts) {
  Pcfp cur = p;
  EliminationStats local;
  if (!stats) stats = &local;
  auto note = [&](const Directive& d, const std::string& msg) {
    if (log) log->push_back(std::string(directive_name(d.kind)) + ": " + msg);
  };
  for (const auto& d : steps) {
    switch (d.kind) {
      case Directive::Kind::Unfold: {
        VarSet vs(d.vars.begin(), d.vars.end());
        cur = unfold(cur, vs);
        note(d, join(vs) + " -> " + shape(cur));
        if (cur.locations.size() > opts.max_locations)
          throw Error(Errc::ExplosionLimit, "unfolding produced " + std::to_string(cur.locations.size()) + " locations");
        break;
      }
      case Directive::Kind::Eliminate: {
        std::size_t count = 0;
        std::set<std::string> tried;
        // Indices shift after every elimination, so search again each time.
        while (true) {
          std::optional<LocIndex> hit;
          for (LocIndex l = 0; l < cur.locations.size(); ++l) {
            const Location& loc = cur.locations[l];
            if (tried.contains(loc.name)) continue;
            bool match = true;
            for (const auto& [k, v] : d.selector.values())
              if (loc.label.get(k) != v) match = false;
            if (match) {
              hit = l;
              break;
            }
          }
          if (!hit) break;
          tried.insert(cur.locations[*hit].name);
          cur = eliminate_location(cur, *hit, g, stats, opts.eliminate);
          ++count;
        }
        if (count == 0) throw Error(Errc::BadParams, "line " + std::to_string(d.line) + ": no location matches " + to_string(d.selector));
        note(d, to_string(d.selector) + " (" + std::to_string(count) + " location" + (count == 1 ? "" : "s") + ") -> " +
                    shape(cur));
        break;
      }
      case Directive::Kind::EliminateAll: {
        std::size_t before = stats->locations_eliminated;
        cur = eliminate_all(cur, g, stats, opts.eliminate);
        note(d, std::to_string(stats->locations_eliminated - before) + " eliminated -> " + shape(cur));
        break;
      }
      case Directive::Kind::RemoveUnsat:
        cur = remove_unsat_commands(cur, stats, opts.eliminate);
        note(d, shape(cur));
        break;
      case Directive::Kind::Stats:
        note(d, shape(cur));
        break;
      case Directive::Kind::Check: {
        Analysis a = analyze(cur, g, opts.analysis);
        std::string value = a.result.exact ? to_string(*a.result.exact) : general(a.result.value);
        note(d, std::to_string(a.model.states) + " states, probability " + value);
        break;
      }
    }
  }
  return cur;
}

Pcfp auto_reduce(const Pcfp& p, const GoalSpec& g, EliminationStats* stats, std::vector<std::string>* log,
                 const PipelineOptions& opts) {
  EliminationStats local;
  if (!stats) stats = &local;
  auto note = [&](const std::string& msg) {
    if (log) log->push_back("auto: " + msg);
  };
  Pcfp cur = eliminate_all(p, g, stats, opts.eliminate);
  note("eliminate-all -> " + shape(cur));
  Pcfp kept = cur;
  EliminationStats pending;
  int idle = 0;
  while (true) {
    SuggestOptions so;
    so.eliminate = opts.eliminate;
    so.max_locations = opts.max_locations;
    so.exclude_all_variables = true;
    std::optional<VarSet> vs = suggest_unfold(cur, g, so);
    if (!vs) {
      note("no unfolding suggested");
      break;
    }
    Pcfp next;
    EliminationStats round;
    try {
      next = unfold(cur, *vs);
      if (next.locations.size() > opts.max_locations) {
        note("unfold " + join(*vs) + " exceeds the location limit");
        break;
      }
      next = eliminate_all(next, g, &round, opts.eliminate);
    } catch (const Error& e) {
      note("unfold " + join(*vs) + " failed: " + e.what());
      break;
    }
    note("unfold " + join(*vs) + ", eliminate-all (" + std::to_string(round.locations_eliminated) + " eliminated) -> " +
         shape(next));
    cur = std::move(next);
    pending += round;
    if (round.locations_eliminated > 0) {
      idle = 0;
      kept = cur;
      *stats += pending;
      pending = {};
    } else if (++idle >= 2) {
      break;
    }
  }
  if (!(cur == kept)) note("rolled back unproductive unfoldings -> " + shape(kept));
  return kept;
}

Verdict certify(const Analysis& before, const Analysis& after, std::string* reason) {
  auto set = [&](std::string r) {
    if (reason) *reason = std::move(r);
  };
  if (before.deterministic && !after.deterministic) {
    set("the reduced model is no longer deterministic");
    return Verdict::Fail;
  }
  if (before.result.exact && after.result.exact) {
    if (*before.result.exact != *after.result.exact) {
      set("probabilities differ: " + to_string(*before.result.exact) + " vs " + to_string(*after.result.exact));
      return Verdict::Fail;
    }
    set("exact equality");
    return Verdict::Pass;
  }
  if (std::abs(before.result.value - after.result.value) > 1e-9) {
    set("probabilities differ: " + general(before.result.value) + " vs " + general(after.result.value));
    return Verdict::Fail;
  }
  set("agreement within 1e-9 (value iteration)");
  return Verdict::Pass;
}

ReduceOutcome reduce(const Pcfp& p, const ReduceOptions& opts) {
  ReduceOutcome r;
  r.original = p;
  bool solve = opts.analyze || opts.certify;
  if (solve) r.before = analyze(p, opts.goal, opts.pipeline_options.analysis);
  auto t0 = Clock::now();
  r.reduced = opts.automatic ? auto_reduce(p, opts.goal, &r.stats, &r.log, opts.pipeline_options)
                             : run_pipeline(p, opts.pipeline, opts.goal, &r.stats, &r.log, opts.pipeline_options);
  r.reduce_seconds = seconds_since(t0);
  if (solve) r.after = analyze(r.reduced, opts.goal, opts.pipeline_options.analysis);
  if (opts.certify) r.verdict = certify(*r.before, *r.after, &r.verdict_reason);
  return r;
}

std::string format_report(const ReduceOutcome& r, const ReduceOptions& opts) {
  std::ostringstream os;
  auto row = [&](const std::string& name, const std::string& a, const std::string& b) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-22s %-24s %s\n", name.c_str(), a.c_str(), b.c_str());
    os << buf;
  };
  // Long rationals are summarised in the table and printed in full below it.
  auto prob = [](const std::optional<Analysis>& a) {
    if (!a) return std::string("-");
    if (!a->result.exact) return std::string("~") + general(a->result.value);
    std::string q = to_string(*a->result.exact);
    return q.size() <= 24 ? q : "(" + std::to_string(q.size()) + " chars, below)";
  };
  auto approx = [](const std::optional<Analysis>& a) { return a ? general(a->result.value) : std::string("-"); };
  auto count = [](const std::optional<Analysis>& a, std::size_t ModelStats::*f) {
    return a ? std::to_string(a->model.*f) : std::string("-");
  };

  os << "property               " << (opts.property.empty() ? "-" : opts.property) << "\n";
  std::string consts;
  for (const auto& [k, v] : opts.constants) consts += (consts.empty() ? "" : ",") + k + "=" + std::to_string(v);
  os << "constants              " << (consts.empty() ? "-" : consts) << "\n";
  os << "mode                   " << (opts.automatic ? "auto" : "pipeline") << "\n";
  os << "\n";
  row("", "before", "after");
  row("states", count(r.before, &ModelStats::states), count(r.after, &ModelStats::states));
  row("model transitions", count(r.before, &ModelStats::transitions), count(r.after, &ModelStats::transitions));
  row("pcfp locations", std::to_string(r.original.locations.size()), std::to_string(r.reduced.locations.size()));
  row("pcfp commands", std::to_string(r.original.commands.size()), std::to_string(r.reduced.commands.size()));
  row("pcfp transitions", std::to_string(r.original.destination_count()), std::to_string(r.reduced.destination_count()));
  row("probability", prob(r.before), prob(r.after));
  row("probability (float)", approx(r.before), approx(r.after));
  row("method", r.before ? method_name(r.before->result.method) : "-", r.after ? method_name(r.after->result.method) : "-");
  row("time build (s)", r.before ? fixed(r.before->build_seconds, 3) : "-", r.after ? fixed(r.after->build_seconds, 3) : "-");
  row("time check (s)", r.before ? fixed(r.before->check_seconds, 3) : "-", r.after ? fixed(r.after->check_seconds, 3) : "-");
  os << "time reduction (s)     " << fixed(r.reduce_seconds, 3) << "\n";
  os << "\n";
  const auto& s = r.stats;
  os << "locations eliminated   " << s.locations_eliminated << "\n";
  os << "transition elims       " << s.transition_eliminations << "\n";
  os << "commands created       " << s.commands_created << "\n";
  os << "commands pruned        " << s.commands_pruned << "\n";
  os << "completion commands    " << s.completion_commands << "\n";
  os << "unsat commands removed " << s.unsat_commands_removed << "\n";
  os << "\n";
  for (const auto& line : r.log) os << line << "\n";
  for (const auto& [tag, a] : {std::pair{"before", &r.before}, std::pair{"after", &r.after}})
    if (*a && (*a)->result.exact && to_string(*(*a)->result.exact).size() > 24)
      os << "probability " << tag << (tag[0] == 'a' ? "  " : " ") << to_string(*(*a)->result.exact) << "\n";
  os << "\n";
  switch (r.verdict) {
    case Verdict::NotRun: os << "certification          not run\n"; break;
    case Verdict::Pass: os << "certification          PASS (" << r.verdict_reason << ")\n"; break;
    case Verdict::Fail: os << "certification          FAIL (" << r.verdict_reason << ")\n"; break;
  }
  return os.str();
}

std::string gen_coin(std::optional<Int> n) {
  std::ostringstream os;
  os << "dtmc\n\n";
  os << "const int N" << (n ? " = " + std::to_string(*n) : "") << ";\n\n";
  os << "module coingame\n";
  os << "  x : [0..N+1] init N/2;\n";
  os << "  f : bool init false;\n";
  os << "  [] 0<x & x<N & !f -> 1/2:(x'=x-1) + 1/2:(f'=true);\n";
  // The second-flip tails branch also clears f, otherwise it would loop back into the second flip.
  os << "  [] 0<x & x<N & f -> 1/2:(x'=x-1)&(f'=false) + 1/2:(x'=x+2)&(f'=false);\n";
  os << "  [] x=0 | x>=N -> 1:(x'=x);\n";
  os << "endmodule\n";
  return os.str();
}

Pcfp gen_expfamily(int m) {
  if (m < 1 || m > 20) throw Error(Errc::BadParams, "expfamily needs 1 <= m <= 20");
  Pcfp p;
  const char* names[] = {"lprime", "l", "l1", "l2"};
  for (int k = 0; k < 4; ++k) p.locations.push_back({names[k], names[k], Valuation{{"loc", k}}});
  p.unfolded.push_back({"loc", IntExpr::literal(0), IntExpr::literal(3), IntExpr::literal(0), false});
  for (int i = 1; i <= m; ++i)
    p.variables.push_back({"x" + std::to_string(i), IntExpr::literal(0), IntExpr::literal(1), IntExpr::literal(i % 2), false});
  for (int i = 1; i <= m; ++i)
    p.variables.push_back({"y" + std::to_string(i), IntExpr::literal(0), IntExpr::literal(1), IntExpr::literal(0), false});
  p.initial = 0;

  // c = 2^m / (2^m - 1) makes the branch probabilities c/2^i sum to one.
  Rational c(mpz_class(1) << m, (mpz_class(1) << m) - 1);
  c.canonicalize();
  Command entry;
  entry.source = 0;
  entry.action = "enter";
  for (int i = 1; i <= m; ++i) {
    Rational pr = c / Rational(mpz_class(1) << i);
    pr.canonicalize();
    entry.destinations.push_back({pr, Update({{"y" + std::to_string(i), IntExpr::literal(1)}}), 1});
  }
  p.commands.push_back(entry);

  std::vector<Predicate> hits;
  Update::Block reset;
  for (int i = 1; i <= m; ++i) {
    IntExpr x = IntExpr::var("x" + std::to_string(i));
    IntExpr y = IntExpr::var("y" + std::to_string(i));
    hits.push_back(Predicate::compare(CmpOp::Eq, x, IntExpr::literal(1)) &&
                   Predicate::compare(CmpOp::Eq, y, IntExpr::literal(1)));
    reset.push_back({"x" + std::to_string(i), IntExpr::literal(0)});
    reset.push_back({"y" + std::to_string(i), IntExpr::literal(0)});
  }
  Predicate any = Predicate::disjunction(hits);
  p.commands.push_back({1, any, {{Rational(1), Update(reset), 2}}, "hit"});
  p.commands.push_back({1, Predicate::negation(any), {{Rational(1), Update(), 3}}, "miss"});
  p.commands.push_back({2, Predicate::truth(true), {{Rational(1), Update(), 2}}, "stay1"});
  p.commands.push_back({3, Predicate::truth(true), {{Rational(1), Update(), 3}}, "stay2"});
  validate(p);
  return p;
}

}  // namespace locelim
