#pragma once

// Transition temperature, condensation potential and the transition verdict.

#include <Eigen/Core>

#include <limits>
#include <string>
#include <vector>

#include "bcsgap/gap_operator.hpp"

namespace bcsgap {

/// Spectral radius of the linearized kernel at T.
double spectral_radius(const GapKernel& kernel, double T, double tol = 1e-15);

struct CriticalTemperature {
  double tc = 0;
  double rho_minus_one = 0;  // rho(L_tc) - 1
  int evaluations = 0;
};

/// T at which the linearized kernel reaches unit spectral radius.
/// Throws NoTransitionError when rho < 1 already at T = 1e-6 debye.
CriticalTemperature critical_temperature(const Potential& potential, const ModelParams& model, const Rule& rule,
                                         double tol = 1e-14);

/// Omega_S - Omega_N on one row:
///   int [xi - E + f / (2E) tanh(E / 2T)] - 2T int ln((1 + e^{-E/T}) / (1 + e^{-xi/T}))
double omega_row(const Rule& rule, double T, const Eigen::VectorXd& f);

struct OmegaGradient {
  double partial_T = 0;  // d/dT with f frozen
  double chain = 0;      // int dOmega/df * f_T
  double total() const { return partial_T + chain; }
};
OmegaGradient omega_gradient(const Rule& rule, double T, const Eigen::VectorXd& f, const Eigen::VectorXd& f_T);

/// Omega difference at T. Grid temperatures read the field; other T below T_c
/// solve the row there, starting from the interpolated field. T >= T_c gives 0.
double omega_difference(const GapField& f0, const Potential& potential, const ModelParams& model, double T);

/// Normal-state specific heat int (xi/T)^2 / (2 cosh^2(xi / 2T)) d xi over I.
double normal_specific_heat(double T, const Rule& rule);

enum class Classification { second_order, not_second_order, inconclusive };
std::string to_string(Classification c);

struct ThermoOptions {
  double half_width = 0;  // 0 selects 0.1 T_c
  int n_samples = 16;     // per side
  double center = std::numeric_limits<double>::quiet_NaN();  // NaN selects T_c
  double tolerance = 0;   // row solver; 0 selects 1e-12 Delta2(0)^2
  int max_iterations = 200000;
  int threads = 1;
};

struct ThermoCurve {
  std::vector<double> t_samples;
  std::vector<double> omega_diff;
  std::vector<double> entropy_diff;
  std::vector<double> specific_heat_diff;
  double tc = 0;
  double h = 0;
  double omega_left = 0;    // Omega(T_c-) by linear extrapolation from the left
  double entropy_left = 0;  // S(T_c-) by the one-sided difference
  double c_left_h = 0, c_left_2h = 0;
  double jump_at_tc = 0;    // Richardson combination 2 C(h) - C(2h)
  double c_normal_tc = 0;
  double tol_omega = 0, tol_entropy = 0, jump_floor = 0;
  Classification classification = Classification::inconclusive;
  std::string reason;
};

/// Samples Omega, S and C differences on center + k h, k = -n..n, and classifies
/// the transition from the one-sided limits at T_c. Fewer than 8 samples per
/// side is refused.
ThermoCurve thermo_curves(const GapField& f0, const Potential& potential, const ModelParams& model,
                          const ThermoOptions& opts = {});

struct NearTcFitOptions {
  int rows = 6;           // rows below T_c used for c(x)
  bool curvature = true;  // fit c (Tc - T) + b (Tc - T)^2 instead of c (Tc - T)
  int exponent_rows = 10; // rows used for the log-log fit of sqrt(f)
};

struct NearTcFit {
  Eigen::VectorXd c;         // linear coefficient per x-node
  Eigen::VectorXd b;         // quadratic coefficient (zero without curvature)
  double residual = 0;       // sup of the fit residual over the window
  Eigen::VectorXd exponent;  // per-node slope of log sqrt(f) against log(Tc - T)
  int rows_used = 0;
};

/// Least-squares fit of f0 near T_c. Throws EvaluationError when the window rows are all zero.
NearTcFit near_tc_fit(const GapField& f0, const NearTcFitOptions& opts = {});

}  // namespace bcsgap
