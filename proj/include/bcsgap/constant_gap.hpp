#pragma once

// Gap and vanishing temperature for a constant potential U(x, xi) = coupling.

#include <span>
#include <utility>
#include <vector>

#include "bcsgap/model.hpp"

namespace bcsgap {

/// coupling * integral over I of tanh(E / 2T) / E with E = sqrt(xi^2 + delta^2).
/// T below 1e-8 * debye uses the T -> 0 limit tanh -> 1.
double gap_kernel_integral(double coupling, double T, double delta, const ModelParams& model,
                           const Rule& rule);

/// Temperature at which the constant-potential gap vanishes:
///   1 = coupling * integral of tanh(xi / 2 tau) / xi.
/// Throws NoSolutionError when coupling * integral of 1/xi < 1.
double tau(double coupling, const ModelParams& model, const Rule& rule);
double tau(double coupling, const ModelParams& model);

/// Gap Delta(T) > 0 for T < tau, exactly 0 for T >= tau.
double delta_const(double coupling, double T, const ModelParams& model, const Rule& rule);
double delta_const(double coupling, double T, const ModelParams& model);

struct ConstantGapCurve {
  double coupling = 0;
  double tau = 0;
  std::vector<std::pair<double, double>> samples;  // (T, Delta(T))
};

ConstantGapCurve gap_curve(double coupling, std::span<const double> t_grid, const ModelParams& model,
                           const Rule& rule);

}  // namespace bcsgap
