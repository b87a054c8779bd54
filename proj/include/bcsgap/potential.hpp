#pragma once

#include <Eigen/Core>

#include <string>
#include <variant>
#include <vector>

#include "bcsgap/model.hpp"

namespace bcsgap {

/// One-variable factor c_0 + c_1 x + ... + s sin(w x) + k cos(w x).
struct Factor {
  std::vector<double> poly{1.0};
  double sin_amplitude = 0;
  double cos_amplitude = 0;
  double frequency = 1;

  double operator()(double x) const;
};

enum class PotentialKind { constant, separable, polynomial_kernel, table };

std::string to_string(PotentialKind kind);

/// Values of U on a rectilinear (x, xi) grid, interpolated bilinearly.
struct PotentialTable {
  std::vector<double> x;
  std::vector<double> xi;
  Eigen::MatrixXd values;  // values(i, j) = U(x[i], xi[j])
};

/// The pairing potential U(x, xi) on I x I. Not assumed symmetric.
class Potential {
 public:
  static Potential constant(double value);
  /// offset + scale * left(x) * right(xi)
  static Potential separable(Factor left, Factor right, double offset = 0.0, double scale = 1.0);
  /// sum over (i, j) of coefficients(i, j) x^i xi^j
  static Potential polynomial_kernel(Eigen::MatrixXd coefficients);
  static Potential table(PotentialTable table);

  PotentialKind kind() const;
  double operator()(double x, double xi) const;

  /// U evaluated at every pair of collocation nodes: (i, j) -> U(x_i, xi_j).
  Eigen::MatrixXd kernel_matrix(const Eigen::VectorXd& x_nodes, const Eigen::VectorXd& xi_nodes) const;

  /// Closed-form kinds are C^2 by construction; tables are not certified.
  bool smooth_guaranteed() const { return kind() != PotentialKind::table; }

  /// The same potential multiplied by factor.
  Potential scaled(double factor) const;

  /// Value for the constant kind (throws otherwise).
  double constant_value() const;

 private:
  struct Constant {
    double value;
  };
  struct Separable {
    Factor left, right;
    double offset, scale;
  };
  struct PolynomialKernel {
    Eigen::MatrixXd coefficients;
  };
  struct Table {
    PotentialTable data;
    double scale = 1.0;
  };
  using Variant = std::variant<Constant, Separable, PolynomialKernel, Table>;

  explicit Potential(Variant v) : impl_(std::move(v)) {}
  Variant impl_;
};

struct PotentialBounds {
  double u1 = 0;  // min over I^2
  double u2 = 0;  // max over I^2
  double a = 1;   // (u2 / u1)^2
};

struct BoundsOptions {
  int grid_points = 257;
  bool refine = true;
};

/// Min and max of U over I^2 from a product-grid scan followed by a local
/// golden-section refinement of the extremal cells. Throws HypothesisError when
/// U1 <= 0.
PotentialBounds bounds(const Potential& potential, const ModelParams& model, const BoundsOptions& opts = {});

enum class Smoothness { guaranteed, unchecked };

struct HypothesisReport {
  double u1 = 0, u2 = 0, a = 1;
  double t0 = 0;
  /// 1 - a^{1/4} max_x integral of U(x, xi) / xi tanh(xi / 2 T0)
  double condition_margin = 0;
  double max_row_integral = 0;
  double argmax_x = 0;
  /// U1 * integral of tanh(xi / 2 T0) / xi, must stay < 1
  double lower_coupling_integral = 0;
  Smoothness smoothness = Smoothness::unchecked;
  bool pass = false;
};

struct ConditionOptions {
  int x_points = 257;
  int quadrature_order = 128;
  /// Also scan T over [t0, tc] instead of relying on the monotone decrease in T.
  bool full_scan = false;
  double tc = 0;
  int t_points = 33;
};

/// max over x of integral_I U(x, xi) / xi tanh(xi / 2T) d xi, on a uniform x grid.
struct RowIntegralMax {
  double value;
  double argmax_x;
};
RowIntegralMax max_row_integral(const Potential& potential, double T, const ModelParams& model,
                                const ConditionOptions& opts = {});

/// Audits the smallness condition at t0. A negative margin gives pass = false;
/// it is not an exception.
HypothesisReport check_condition_2_4(const Potential& potential, double t0, const ModelParams& model,
                                     const ConditionOptions& opts = {});

/// Smallest temperature satisfying both U1 * integral tanh(xi/2T)/xi < 1 and a
/// non-negative margin, times safety (>= 1).
double compute_T0(const Potential& potential, const ModelParams& model, double safety = 1.0,
                  const ConditionOptions& opts = {});

/// Uniform bound on -f_T over the admissible set.
double compute_M_T(const PotentialBounds& b, const ModelParams& model, double tc, double delta2_at_zero,
                   const Rule& rule);
double compute_M_T(const Potential& potential, const ModelParams& model, double tc, double delta2_at_zero);

}  // namespace bcsgap
