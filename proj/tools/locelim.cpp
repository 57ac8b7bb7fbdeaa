// locelim: reduce probabilistic programs by unfolding and location elimination.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "locelim/driver.hpp"
#include "locelim/error.hpp"

using namespace locelim;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitCertify = 2;
constexpr int kExitBudget = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::BadParams, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::BadParams, "cannot write '" + path + "'");
  out << text;
}

struct Common {
  std::string model;
  std::vector<std::string> consts;
  std::string prop;
};

Pcfp load(const Common& c, std::map<std::string, Int>* values) {
  *values = parse_const_args(c.consts);
  return apply_constants(load_program(read_file(c.model)), *values);
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::ExplosionLimit:
    case Errc::TooLargeForEnumeration: return kExitBudget;
    default: return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simplify probabilistic programs by unfolding variables and eliminating locations"};
  app.require_subcommand(1);

  Common common;
  std::string pipeline_file, emit_pcfp, emit_model, report_file;
  bool automatic = false, certify_flag = false;
  std::size_t max_commands = 10'000, max_states = 10'000'000;

  auto add_common = [&](CLI::App* sub, bool with_prop) {
    sub->add_option("model", common.model, "PRISM model or PCFP JSON")->required();
    sub->add_option("--const,-c", common.consts, "Constant values, e.g. N=6 (repeatable)");
    if (with_prop) sub->add_option("--prop,-p", common.prop, "Property, e.g. \"P=? [ F x>=N & !f ]\"")->required();
    sub->add_option("--max-states", max_states, "State budget for explicit models");
  };

  auto* reduce_cmd = app.add_subcommand("reduce", "Run a reduction pipeline");
  add_common(reduce_cmd, true);
  auto* pipe_opt = reduce_cmd->add_option("--pipeline", pipeline_file, "Pipeline script");
  auto* auto_opt = reduce_cmd->add_flag("--auto", automatic, "Choose unfoldings automatically");
  pipe_opt->excludes(auto_opt);
  reduce_cmd->add_option("--emit-pcfp", emit_pcfp, "Write the reduced PCFP as JSON ('-' for stdout)");
  reduce_cmd->add_option("--emit-model", emit_model, "Write the reduced explicit model ('-' for stdout)");
  reduce_cmd->add_option("--report", report_file, "Write the report here instead of stdout");
  reduce_cmd->add_flag("--certify", certify_flag, "Solve both models and require equal results");
  reduce_cmd->add_option("--max-commands", max_commands, "Command budget during elimination");

  auto* check_cmd = app.add_subcommand("check", "Compute the reachability probability");
  add_common(check_cmd, true);

  auto* stats_cmd = app.add_subcommand("stats", "Size of the program and of its explicit model");
  add_common(stats_cmd, false);

  auto* gen_cmd = app.add_subcommand("gen", "Generate a benchmark model");
  gen_cmd->require_subcommand(1);
  std::optional<Int> coin_n;
  int exp_m = 0;
  auto* gen_coin_cmd = gen_cmd->add_subcommand("coin", "The coin game (PRISM)");
  gen_coin_cmd->add_option("--n,-n", coin_n, "Value of N; left undefined when absent");
  auto* gen_exp_cmd = gen_cmd->add_subcommand("expfamily", "The exponential elimination family (PCFP JSON)");
  gen_exp_cmd->add_option("--m,-m", exp_m, "Number of branches")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_coin_cmd->parsed()) {
      if (coin_n && (*coin_n < 2 || *coin_n % 2 != 0)) throw Error(Errc::BadParams, "coin needs an even N >= 2");
      std::cout << gen_coin(coin_n);
      return 0;
    }
    if (gen_exp_cmd->parsed()) {
      std::cout << serialize_pcfp(gen_expfamily(exp_m));
      return 0;
    }

    std::map<std::string, Int> values;
    Pcfp p = load(common, &values);
    AnalysisOptions aopts;
    aopts.build.max_states = max_states;

    if (stats_cmd->parsed()) {
      ExplicitModel m = build_semantics(p, aopts.build);
      ModelStats st = model_stats(m);
      std::cout << "pcfp locations    " << p.locations.size() << "\n"
                << "pcfp commands     " << p.commands.size() << "\n"
                << "pcfp transitions  " << p.destination_count() << "\n"
                << "states            " << st.states << "\n"
                << "transitions       " << st.transitions << "\n"
                << "choices           " << st.actions << "\n"
                << "deterministic     " << (m.is_chain() ? "yes" : "no") << "\n"
                << "well-formed       " << (m.bottom ? "no" : "yes") << "\n";
      return 0;
    }

    GoalSpec goal = parse_property(common.prop, p);

    if (check_cmd->parsed()) {
      Analysis a = analyze(p, goal, aopts);
      std::cout << "states       " << a.model.states << "\n"
                << "transitions  " << a.model.transitions << "\n"
                << "method       " << method_name(a.result.method) << "\n";
      if (a.result.exact) std::cout << "probability  " << to_string(*a.result.exact) << "\n";
      std::cout << "value        " << a.result.value << "\n";
      return 0;
    }

    ReduceOptions opts;
    opts.goal = goal;
    opts.property = common.prop;
    opts.constants = values;
    opts.automatic = automatic;
    opts.certify = certify_flag;
    opts.pipeline_options.eliminate.max_commands = max_commands;
    opts.pipeline_options.analysis = aopts;
    if (!automatic) {
      if (pipeline_file.empty()) throw Error(Errc::BadParams, "reduce needs --pipeline FILE or --auto");
      opts.pipeline = parse_pipeline(read_file(pipeline_file));
    }
    ReduceOutcome r = reduce(p, opts);
    std::string report = format_report(r, opts);
    if (report_file.empty())
      std::cout << report;
    else
      write_file(report_file, report);
    if (!emit_pcfp.empty()) write_file(emit_pcfp, serialize_pcfp(r.reduced));
    if (!emit_model.empty())
      write_file(emit_model, export_explicit(mark_goal_states(build_semantics(r.reduced, aopts.build), goal)));
    if (r.verdict == Verdict::Fail) {
      std::cerr << "certification failed: " << r.verdict_reason << "\n";
      return kExitCertify;
    }
    return 0;
  } catch (const SyntaxError& e) {
    std::cerr << common.model << ":" << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e);
  }
}
