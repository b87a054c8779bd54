#include "bcsgap/constant_gap.hpp"

#include <cmath>
#include <sstream>

namespace bcsgap {

namespace {

bool zero_temperature(double T, const ModelParams& model) { return T < 1e-8 * model.debye; }

}  // namespace

double gap_kernel_integral(double coupling, double T, double delta, const ModelParams& model,
                           const Rule& rule) {
  const double d2 = delta * delta;
  if (zero_temperature(T, model))
    return coupling * integrate([&](double xi) { return 1.0 / std::sqrt(xi * xi + d2); }, rule);
  return coupling * integrate(
                        [&](double xi) {
                          const double e = std::sqrt(xi * xi + d2);
                          return std::tanh(e / (2.0 * T)) / e;
                        },
                        rule);
}

double tau(double coupling, const ModelParams& model, const Rule& rule) {
  model.validate();
  if (!(coupling > 0)) throw PreconditionError("tau: coupling must be positive");
  const double bound = gap_kernel_integral(coupling, 0.0, 0.0, model, rule);
  if (!(bound > 1.0)) {
    std::ostringstream os;
    os.precision(12);
    os << "tau: no solution, coupling * integral of 1/xi = " << bound << " <= 1";
    throw NoSolutionError(os.str());
  }
  auto g = [&](double T) { return gap_kernel_integral(coupling, T, 0.0, model, rule) - 1.0; };
  // tanh(xi/2T) = 1 to double precision on I at the lower end; the upper end
  // bounds the integral by coupling * |I| / (2T) = 1/2.
  const double lo = 1e-3 * model.epsilon;
  const double hi = std::max(coupling * model.width(), 2.0 * lo);
  return find_root(g, Bracket<double>{lo, hi}, 0.0);
}

double tau(double coupling, const ModelParams& model) { return tau(coupling, model, energy_rule(model)); }

double delta_const(double coupling, double T, const ModelParams& model, const Rule& rule) {
  if (!(T >= 0)) throw PreconditionError("delta_const: need T >= 0");
  const double t = tau(coupling, model, rule);
  if (T >= t) return 0.0;
  auto g = [&](double d) { return gap_kernel_integral(coupling, T, d, model, rule) - 1.0; };
  if (!(g(0.0) > 0)) return 0.0;
  const double hi = 2.0 * coupling * model.width();
  return find_root(g, Bracket<double>{0.0, hi}, 0.0);
}

double delta_const(double coupling, double T, const ModelParams& model) {
  return delta_const(coupling, T, model, energy_rule(model));
}

ConstantGapCurve gap_curve(double coupling, std::span<const double> t_grid, const ModelParams& model,
                           const Rule& rule) {
  ConstantGapCurve curve;
  curve.coupling = coupling;
  curve.tau = tau(coupling, model, rule);
  curve.samples.reserve(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
      throw PreconditionError("gap_curve: temperature grid must be ascending");
    curve.samples.emplace_back(t_grid[i], delta_const(coupling, t_grid[i], model, rule));
  }
  return curve;
}

}  // namespace bcsgap
