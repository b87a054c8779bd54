#pragma once

// Nystrom discretization of the squared gap operator
//
//   Af(T, x) = ( int_I U(x, xi) sqrt(f / (xi^2 + f)) tanh(sqrt(xi^2 + f) / 2T) dxi )^2
//
// on a temperature grid [t_lower, T_c] times the collocation nodes of an
// energy rule. The operator acts row by row: Af at temperature T only reads
// f at the same T.

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "bcsgap/potential.hpp"

namespace bcsgap {

struct GridSpec {
  Eigen::VectorXd t_nodes;  // ascending, last entry is T_c exactly
  Rule x_rule;

  double tc() const { return t_nodes[t_nodes.size() - 1]; }
  Eigen::Index rows() const { return t_nodes.size(); }
  Eigen::Index cols() const { return x_rule.size(); }
  void validate() const;
};

/// Uniform temperature grid on [t_lower, tc] with n_t nodes.
GridSpec make_grid(double t_lower, double tc, int n_t, Rule x_rule);

/// Squared-gap values f(T, x) stored at (temperature node, energy node).
struct GapField {
  GridSpec grid;
  Eigen::MatrixXd values;
  bool converged = false;

  GapField() = default;
  GapField(GridSpec g, Eigen::MatrixXd v) : grid(std::move(g)), values(std::move(v)) {}
  static GapField zeros(const GridSpec& g) { return {g, Eigen::MatrixXd::Zero(g.rows(), g.cols())}; }
};

/// Row-wise evaluation of A and of its T-derivatives on fixed nodes.
class GapKernel {
 public:
  GapKernel(const Potential& potential, const ModelParams& model, const Rule& rule);

  const Rule& rule() const { return rule_; }
  const Eigen::MatrixXd& potential_matrix() const { return umat_; }
  Eigen::Index size() const { return rule_.size(); }

  /// (Af)(T, .) for one temperature row.
  Eigen::VectorXd apply(double T, const Eigen::VectorXd& f) const;

  /// (Af)_T at T < T_c; needs f > 0 at every node.
  Eigen::VectorXd apply_T(double T, const Eigen::VectorXd& f, const Eigen::VectorXd& f_T) const;

  /// (Af)_T at T_c, where f vanishes: -( int U sqrt(-f_T) / xi tanh(xi / 2T_c) )^2.
  Eigen::VectorXd apply_T_at_tc(double tc, const Eigen::VectorXd& f_T) const;

  /// (Af)_TT at T < T_c.
  Eigen::VectorXd apply_TT(double T, const Eigen::VectorXd& f, const Eigen::VectorXd& f_T,
                           const Eigen::VectorXd& f_TT) const;

  /// Linearization at f = 0: matrix of U(x_i, xi_j) w_j tanh(xi_j / 2T) / xi_j.
  Eigen::MatrixXd linearized(double T) const;

 private:
  Rule rule_;
  Eigen::MatrixXd umat_;
};

GapField apply_A(const GapField& f, const Potential& potential, const ModelParams& model);

/// (Af)_T on every row; the T_c row uses the boundary formula with f_T(T_c, .).
Eigen::MatrixXd apply_A_T(const GapField& f, const Eigen::MatrixXd& f_T, const Potential& potential,
                          const ModelParams& model);

/// (Af)_TT on the rows below T_c (the T_c row is left at zero).
Eigen::MatrixXd apply_A_TT(const GapField& f, const Eigen::MatrixXd& f_T, const Eigen::MatrixXd& f_TT,
                           const Potential& potential, const ModelParams& model);

/// Three-point column derivatives in T (one-sided at the ends).
Eigen::MatrixXd column_derivative(const Eigen::VectorXd& t, const Eigen::MatrixXd& values);
Eigen::MatrixXd column_second_derivative(const Eigen::VectorXd& t, const Eigen::MatrixXd& values);

struct ClauseResult {
  std::string name;
  bool pass = true;
  double worst_violation = 0;  // in the clause's own units, see check_W_membership
  int skipped_rows = 0;
  std::string note;
};

struct WAudit {
  std::vector<ClauseResult> clauses;
  bool pass = true;

  const ClauseResult& clause(const std::string& name) const;
};

/// Checks the admissible-set clauses on a discrete field:
///   lower_bound / upper_bound   Delta1(T)^2 <= f <= Delta2(T)^2         [f units]
///   zero_at_tc                  f(T_c, .) = 0                          [f units]
///   ratio                       max_x f <= a min_x f, slopes at T_c     [f units]
///   strict_decrease             consecutive column values decrease     [f units]
///   slope_bound                 sup(-f_T) <= M_T                       [f / T units]
/// Rows whose minimum is below 1e-14 Delta2(0)^2 skip the ratio test.
WAudit check_W_membership(const GapField& f, const Potential& potential, const ModelParams& model, double M_T);

/// 2 (U2/U1)^2 sqrt(a) + U2^2 Delta2(0)^2 / (U1 eps^2)
double lipschitz_bound(const PotentialBounds& b, const ModelParams& model, double delta2_at_zero);
double lipschitz_bound(const Potential& potential, const ModelParams& model, double delta2_at_zero);

struct SolverOptions {
  /// Absolute stopping tolerance on sup |Af - f|; 0 selects relative_tolerance * Delta2(0)^2.
  double tolerance = 0;
  double relative_tolerance = 1e-10;
  int max_iterations = 10000;
  double damping_floor = 1.0 / 16.0;
  /// Start from initial_scale * Delta2(T)^2 unless `initial` is given.
  double initial_scale = 1.0;
  std::optional<Eigen::MatrixXd> initial;
  int threads = 1;
  bool require_hypotheses = true;
  std::optional<HypothesisReport> hypotheses;
};

struct SolveReport {
  int iterations = 0;         // largest per-row count
  double residual_sup = 0;    // sup |Af - f| of the returned field
  double damping_used = 1;    // smallest damping factor any row ended with
  double tolerance = 0;
  double delta2_at_zero = 0;
  double M_T = 0;
  std::vector<double> residual_history;  // sup over rows, per iteration
  WAudit w_audit;
  bool converged = false;
};

/// Thrown when the Picard iteration exhausts its budget; carries the best iterate.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, GapField best, SolveReport report)
      : Error(what), best_(std::move(best)), report_(std::move(report)) {}
  const GapField& best_iterate() const { return best_; }
  const SolveReport& report() const { return report_; }

 private:
  GapField best_;
  SolveReport report_;
};

struct RowSolution {
  Eigen::VectorXd f;
  int iterations = 0;
  double residual = 0;
  double damping = 1;
  bool converged = false;
  std::vector<double> history;
};

/// Damped Picard iteration on one temperature row.
///
/// Stops once the residual is below tol and the error bound extrapolated from
/// the observed contraction rate, q / (1 - q) * residual, is below tol too.
RowSolution solve_row(const GapKernel& kernel, double T, Eigen::VectorXd start, double tol, int max_iterations,
                      double damping_floor);

/// Fixed point of A on the grid. The T_c row is pinned to zero.
std::pair<GapField, SolveReport> solve_fixed_point(const Potential& potential, const ModelParams& model,
                                                   const GridSpec& grid, const SolverOptions& opts = {});

struct SlopeResult {
  Eigen::VectorXd g;        // -f_T(T_c, xi) at the collocation nodes
  double residual = 0;      // sup |(L sqrt g)^2 - g| / sup g
  int iterations = 0;
  double amplitude = 0;     // factor applied to the Picard limit
};

/// Slope field at T_c.
///
/// The boundary equation g = (int U sqrt(g) / xi tanh(xi / 2T_c))^2 is
/// homogeneous of degree one, so the Picard limit from g = M_T / 2 only fixes
/// the shape; the magnitude comes from the cubic-order solvability condition
/// <l, L_T v> + <l, N3(v)> s^2 / (T_c - T) = 0, with l the left eigenvector.
SlopeResult slope_at_tc(const Potential& potential, double tc, const ModelParams& model, const Rule& rule,
                        double tol = 1e-12);

}  // namespace bcsgap
