#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bcsgap/potential.hpp"

namespace bcsgap {

/// Potential as written in a run configuration; build() turns it into a Potential.
struct PotentialSpec {
  std::string kind = "constant";  // constant | separable | polynomial-kernel | table
  double value = 0.3;             // constant
  Factor left, right;             // separable
  double offset = 0.0, scale = 1.0;
  Eigen::MatrixXd coefficients;   // polynomial-kernel
  std::filesystem::path table;    // table CSV, relative to the config file
  double coupling = 1.0;          // overall multiplier

  Potential build() const;
};

struct GridConfig {
  int t_nodes = 64;
  int quadrature_order = 64;
  int panels = 1;
  double t_lower = 0.5;  // lower grid end as a fraction of T_c
};

struct SolverConfig {
  double tolerance = 0;  // absolute; 0 selects relative_tolerance * Delta2(0)^2
  double relative_tolerance = 1e-10;
  int max_iterations = 10000;
  double damping_floor = 1.0 / 16.0;
  double initial_scale = 1.0;
};

struct ThermoConfig {
  double half_width = 0.1;  // fraction of T_c
  int samples = 16;         // per side
  double center = 1.0;      // sample window center as a fraction of T_c
};

enum class OutputFormat { csv, json };

struct RunConfig {
  ModelParams model;
  PotentialSpec potential;
  GridConfig grid;
  SolverConfig solver;
  double t0_safety = 1.05;
  ThermoConfig thermo;
  std::filesystem::path output_dir = "out";  // relative to the working directory
  OutputFormat format = OutputFormat::csv;
  int threads = 0;  // 0 selects the hardware concurrency

  /// Throws ConfigError on counts below the minimums or non-positive tolerances.
  void validate() const;
};

/// Parses a TOML document. `base` resolves relative file references.
RunConfig parse_config(const std::string& toml_text, const std::filesystem::path& base = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Applies "section.key=value" overrides, the value written in TOML syntax.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides,
                     const std::filesystem::path& base = ".");

/// Default values, one "section.key = value" line each, for --help.
std::string describe_defaults();

}  // namespace bcsgap
