#pragma once

// Orchestration used by the command-line tool: loading models, running
// reduction pipelines, certifying them and producing reports.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "locelim/eliminate.hpp"
#include "locelim/frontend.hpp"
#include "locelim/solver.hpp"

namespace locelim {

// PRISM text, or the PCFP JSON document when the first non-blank character is '{'.
Pcfp load_program(std::string_view text);

// "N=6" or "N=6,M=2"; repeated arguments accumulate. Throws BadParams.
std::map<std::string, Int> parse_const_args(const std::vector<std::string>& args);
// Throws BadParams for names the program does not declare.
Pcfp apply_constants(const Pcfp& p, const std::map<std::string, Int>& values);

struct Analysis {
  ModelStats model;
  ReachResult result;
  bool deterministic = false;
  double build_seconds = 0;
  double check_seconds = 0;
};

struct AnalysisOptions {
  BuildOptions build;
  MdpOptions mdp;
};

// Builds the semantics and solves the goal: exact Gaussian elimination for
// chains, scheduler enumeration for small MDPs, value iteration otherwise.
Analysis analyze(const Pcfp& p, const GoalSpec& g, const AnalysisOptions& opts = {});

struct PipelineOptions {
  EliminateOptions eliminate;
  std::size_t max_locations = 100'000;
  AnalysisOptions analysis;  // for the check directive
};

// Each executed step appends a line to `log`.
Pcfp run_pipeline(const Pcfp& p, const std::vector<Directive>& steps, const GoalSpec& g,
                  EliminationStats* stats, std::vector<std::string>* log, const PipelineOptions& opts = {});

// Eliminates what it can, then alternates suggest_unfold and eliminate_all.
// Stops when nothing is suggested or two rounds in a row eliminate nothing;
// such unproductive rounds are rolled back.
Pcfp auto_reduce(const Pcfp& p, const GoalSpec& g, EliminationStats* stats, std::vector<std::string>* log,
                 const PipelineOptions& opts = {});

struct ReduceOptions {
  GoalSpec goal;
  std::string property;  // as given, for the report
  std::map<std::string, Int> constants;
  std::vector<Directive> pipeline;
  bool automatic = false;
  bool analyze = true;
  bool certify = false;
  PipelineOptions pipeline_options;
};

enum class Verdict { NotRun, Pass, Fail };

struct ReduceOutcome {
  Pcfp original;
  Pcfp reduced;
  EliminationStats stats;
  std::vector<std::string> log;
  std::optional<Analysis> before;
  std::optional<Analysis> after;
  double reduce_seconds = 0;
  Verdict verdict = Verdict::NotRun;
  std::string verdict_reason;
};

ReduceOutcome reduce(const Pcfp& p, const ReduceOptions& opts);

// Results agree exactly (or within 1e-9 when either side is approximate)
// and a deterministic input stays deterministic.
Verdict certify(const Analysis& before, const Analysis& after, std::string* reason = nullptr);

// Lines that carry timings start with "time"; everything else is
// deterministic for fixed inputs.
std::string format_report(const ReduceOutcome& r, const ReduceOptions& opts);

// The coin game as PRISM text; N is left undefined when absent.
std::string gen_coin(std::optional<Int> n);
// The family of programs whose single location elimination needs 2^m - 1
// transition eliminations. Throws BadParams unless 1 <= m <= 20.
Pcfp gen_expfamily(int m);
// Property used with gen_expfamily: reach l1.
inline constexpr const char* kExpfamilyProperty = "P=? [ F loc=2 ]";

}  // namespace locelim
