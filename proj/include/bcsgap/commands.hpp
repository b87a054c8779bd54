#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bcsgap/config.hpp"
#include "bcsgap/thermodynamics.hpp"

namespace bcsgap {

enum ExitCode : int {
  exit_ok = 0,
  exit_parse = 1,
  exit_hypothesis = 2,
  exit_no_transition = 3,
  exit_non_convergence = 4,
  exit_inconclusive = 5,
};

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// Everything the solve-type commands share: potential, rule, hypotheses, T_c.
struct Prepared {
  Potential potential = Potential::constant(1.0);
  Rule rule;
  PotentialBounds bounds;
  HypothesisReport hypotheses;
  CriticalTemperature tc;
  double delta2_at_zero = 0;
};

/// Builds the potential, audits the hypotheses (HypothesisError on failure) and finds T_c.
Prepared prepare(const RunConfig& cfg);

GridSpec grid_for(const RunConfig& cfg, const Prepared& p);
SolverOptions solver_options(const RunConfig& cfg, const Prepared& p);

/// check and tc print text, or JSON when cfg.format is json.
int cmd_check(const RunConfig& cfg, std::ostream& out);
int cmd_tc(const RunConfig& cfg, std::ostream& out);
int cmd_solve(const RunConfig& cfg, std::ostream& out);
int cmd_thermo(const RunConfig& cfg, std::ostream& out, const std::optional<std::string>& field_csv);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, const std::string& parameter, const std::vector<double>& values);

/// Parses the command line (subcommands check | tc | solve | thermo | sweep) and runs it.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bcsgap
