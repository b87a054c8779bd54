#pragma once

#include "bcsgap/errors.hpp"
#include "bcsgap/numerics.hpp"

namespace bcsgap {

/// Energy window I = [epsilon, debye]; k_B = 1 throughout.
struct ModelParams {
  double epsilon = 1e-3;
  double debye = 1.0;

  double width() const { return debye - epsilon; }

  void validate() const {
    if (!(epsilon > 0) || !(debye > epsilon))
      throw PreconditionError("model: need 0 < epsilon < debye");
  }
};

/// Default collocation rule on I: Gauss-Legendre in log-energy.
inline Rule energy_rule(const ModelParams& model, int order = 64, int panels = 1) {
  model.validate();
  return log_gauss_legendre<double>(order, model.epsilon, model.debye, panels);
}

}  // namespace bcsgap
