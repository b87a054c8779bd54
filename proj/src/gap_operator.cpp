#include "bcsgap/gap_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bcsgap/constant_gap.hpp"
#include "parallel.hpp"

namespace bcsgap {

namespace {

double sech2(double z) {
  const double c = std::cosh(z);
  return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}

void require_nonnegative(const Eigen::VectorXd& f, const char* who) {
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    if (!(f[j] >= 0) || !std::isfinite(f[j])) {
      std::ostringstream os;
      os.precision(17);
      os << who << ": f must be finite and non-negative (f = " << f[j] << " at node " << j << ")";
      throw PreconditionError(os.str());
    }
  }
}

void require_positive(const Eigen::VectorXd& f, double T, const char* who) {
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    if (!(f[j] > 0)) {
      std::ostringstream os;
      os.precision(17);
      os << who << ": f vanishes at T = " << T << " below T_c (node " << j << ")";
      throw SingularityError(os.str());
    }
  }
}

void require_shape(const GapField& f, const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() != f.values.rows() || m.cols() != f.values.cols())
    throw PreconditionError(std::string(who) + ": derivative field shape does not match the grid");
}

}  // namespace

void GridSpec::validate() const {
  if (t_nodes.size() < 16) throw PreconditionError("grid: need at least 16 temperature nodes");
  if (!(t_nodes[0] > 0)) throw PreconditionError("grid: temperatures must be positive");
  for (Eigen::Index i = 1; i < t_nodes.size(); ++i)
    if (!(t_nodes[i] > t_nodes[i - 1])) throw PreconditionError("grid: temperatures must be strictly increasing");
  x_rule.validate();
}

GridSpec make_grid(double t_lower, double tc, int n_t, Rule x_rule) {
  if (!(t_lower > 0 && t_lower < tc)) throw PreconditionError("make_grid: need 0 < t_lower < tc");
  if (n_t < 16) throw PreconditionError("make_grid: need at least 16 temperature nodes");
  GridSpec g;
  g.t_nodes = Eigen::VectorXd::LinSpaced(n_t, t_lower, tc);
  g.t_nodes[n_t - 1] = tc;
  g.x_rule = std::move(x_rule);
  g.validate();
  return g;
}

GapKernel::GapKernel(const Potential& potential, const ModelParams& model, const Rule& rule) : rule_(rule) {
  model.validate();
  rule_.validate();
  umat_ = potential.kernel_matrix(rule_.nodes, rule_.nodes);
}

Eigen::VectorXd GapKernel::apply(double T, const Eigen::VectorXd& f) const {
  require_nonnegative(f, "apply_A");
  const Eigen::Index n = size();
  Eigen::VectorXd s(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double xi = rule_.nodes[j];
    const double E = std::sqrt(xi * xi + f[j]);
    s[j] = rule_.weights[j] * std::sqrt(f[j]) / E * std::tanh(E / (2 * T));
  }
  const Eigen::VectorXd m = umat_ * s;
  return m.cwiseProduct(m);
}

Eigen::VectorXd GapKernel::apply_T(double T, const Eigen::VectorXd& f, const Eigen::VectorXd& f_T) const {
  require_nonnegative(f, "apply_A_T");
  require_positive(f, T, "apply_A_T");
  const Eigen::Index n = size();
  Eigen::VectorXd s(n), j(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double xi = rule_.nodes[k], w = rule_.weights[k];
    const double e2 = xi * xi + f[k], E = std::sqrt(e2), rf = std::sqrt(f[k]);
    const double th = std::tanh(E / (2 * T)), sh = sech2(E / (2 * T));
    const double J1 = f_T[k] / rf * xi * xi / (e2 * E) * th;
    const double J2 = rf * f_T[k] / (2 * T * e2) * sh;
    const double J3 = -rf / (T * T) * sh;
    s[k] = w * rf / E * th;
    j[k] = w * (J1 + J2 + J3);
  }
  return (umat_ * s).cwiseProduct(umat_ * j);
}

Eigen::VectorXd GapKernel::apply_T_at_tc(double tc, const Eigen::VectorXd& f_T) const {
  const Eigen::Index n = size();
  Eigen::VectorXd s(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (f_T[k] > 0) throw PreconditionError("apply_A_T: slope at T_c must be non-positive");
    const double xi = rule_.nodes[k];
    s[k] = rule_.weights[k] * std::sqrt(-f_T[k]) / xi * std::tanh(xi / (2 * tc));
  }
  const Eigen::VectorXd m = umat_ * s;
  return -m.cwiseProduct(m);
}

Eigen::VectorXd GapKernel::apply_TT(double T, const Eigen::VectorXd& f, const Eigen::VectorXd& f_T,
                                    const Eigen::VectorXd& f_TT) const {
  require_nonnegative(f, "apply_A_TT");
  require_positive(f, T, "apply_A_TT");
  const Eigen::Index n = size();
  Eigen::VectorXd s(n), j(n), kk(n);
  const double T2 = T * T, T3 = T2 * T;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double xi = rule_.nodes[k], w = rule_.weights[k];
    const double ft = f_T[k], ftt = f_TT[k];
    const double e2 = xi * xi + f[k], E = std::sqrt(e2), rf = std::sqrt(f[k]);
    const double th = std::tanh(E / (2 * T)), sh = sech2(E / (2 * T));
    const double J1 = ft / rf * xi * xi / (e2 * E) * th;
    const double J2 = rf * ft / (2 * T * e2) * sh;
    const double J3 = -rf / T2 * sh;
    const double brace = ft / (2 * T * e2) - 1 / T2;
    const double K1 = (ftt / rf - ft * ft / (2 * rf * rf * rf) - 3 * ft * ft / (2 * rf * e2)) * xi * xi / (e2 * E) * th;
    const double K2 = ft / (2 * rf) * xi * xi / e2 * brace;
    const double K3 = ft / (2 * rf) * brace;
    const double K4 = rf * (ftt / (2 * T * e2) - ft / (2 * T2 * e2) - ft * ft / (2 * T * e2 * e2) + 2 / T3);
    const double K5 = -rf * E * brace * brace * th;
    s[k] = w * rf / E * th;
    j[k] = w * (J1 + J2 + J3);
    kk[k] = w * (K1 + sh * (K2 + K3 + K4 + K5));
  }
  const Eigen::VectorXd dj = umat_ * j;
  return 0.5 * dj.cwiseProduct(dj) + (umat_ * s).cwiseProduct(umat_ * kk);
}

Eigen::MatrixXd GapKernel::linearized(double T) const {
  const Eigen::Index n = size();
  Eigen::VectorXd d(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double xi = rule_.nodes[j];
    d[j] = rule_.weights[j] * std::tanh(xi / (2 * T)) / xi;
  }
  return umat_ * d.asDiagonal();
}

GapField apply_A(const GapField& f, const Potential& potential, const ModelParams& model) {
  const GapKernel kernel(potential, model, f.grid.x_rule);
  GapField out = GapField::zeros(f.grid);
  for (Eigen::Index i = 0; i < f.grid.rows(); ++i)
    out.values.row(i) = kernel.apply(f.grid.t_nodes[i], f.values.row(i).transpose()).transpose();
  return out;
}

Eigen::MatrixXd apply_A_T(const GapField& f, const Eigen::MatrixXd& f_T, const Potential& potential,
                          const ModelParams& model) {
  require_shape(f, f_T, "apply_A_T");
  const GapKernel kernel(potential, model, f.grid.x_rule);
  const Eigen::Index last = f.grid.rows() - 1;
  Eigen::MatrixXd out(f.values.rows(), f.values.cols());
  for (Eigen::Index i = 0; i < last; ++i)
    out.row(i) = kernel.apply_T(f.grid.t_nodes[i], f.values.row(i).transpose(), f_T.row(i).transpose()).transpose();
  out.row(last) = kernel.apply_T_at_tc(f.grid.tc(), f_T.row(last).transpose()).transpose();
  return out;
}

Eigen::MatrixXd apply_A_TT(const GapField& f, const Eigen::MatrixXd& f_T, const Eigen::MatrixXd& f_TT,
                           const Potential& potential, const ModelParams& model) {
  require_shape(f, f_T, "apply_A_TT");
  require_shape(f, f_TT, "apply_A_TT");
  const GapKernel kernel(potential, model, f.grid.x_rule);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.values.rows(), f.values.cols());
  for (Eigen::Index i = 0; i + 1 < f.grid.rows(); ++i)
    out.row(i) = kernel
                     .apply_TT(f.grid.t_nodes[i], f.values.row(i).transpose(), f_T.row(i).transpose(),
                               f_TT.row(i).transpose())
                     .transpose();
  return out;
}

Eigen::MatrixXd column_derivative(const Eigen::VectorXd& t, const Eigen::MatrixXd& v) {
  const Eigen::Index n = t.size();
  if (n < 3 || v.rows() != n) throw PreconditionError("column_derivative: need at least 3 rows");
  Eigen::MatrixXd d(v.rows(), v.cols());
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double h1 = t[i] - t[i - 1], h2 = t[i + 1] - t[i];
    d.row(i) = -h2 / (h1 * (h1 + h2)) * v.row(i - 1) + (h2 - h1) / (h1 * h2) * v.row(i) +
               h1 / (h2 * (h1 + h2)) * v.row(i + 1);
  }
  {
    const double h1 = t[1] - t[0], h2 = t[2] - t[1];
    d.row(0) = -(2 * h1 + h2) / (h1 * (h1 + h2)) * v.row(0) + (h1 + h2) / (h1 * h2) * v.row(1) -
               h1 / (h2 * (h1 + h2)) * v.row(2);
  }
  {
    const double h1 = t[n - 2] - t[n - 3], h2 = t[n - 1] - t[n - 2];
    d.row(n - 1) = h2 / (h1 * (h1 + h2)) * v.row(n - 3) - (h1 + h2) / (h1 * h2) * v.row(n - 2) +
                   (h1 + 2 * h2) / (h2 * (h1 + h2)) * v.row(n - 1);
  }
  return d;
}

Eigen::MatrixXd column_second_derivative(const Eigen::VectorXd& t, const Eigen::MatrixXd& v) {
  const Eigen::Index n = t.size();
  if (n < 3 || v.rows() != n) throw PreconditionError("column_second_derivative: need at least 3 rows");
  Eigen::MatrixXd d(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index c = std::clamp<Eigen::Index>(i, 1, n - 2);
    const double h1 = t[c] - t[c - 1], h2 = t[c + 1] - t[c];
    d.row(i) = 2 * (v.row(c - 1) / (h1 * (h1 + h2)) - v.row(c) / (h1 * h2) + v.row(c + 1) / (h2 * (h1 + h2)));
  }
  return d;
}

const ClauseResult& WAudit::clause(const std::string& name) const {
  for (const auto& c : clauses)
    if (c.name == name) return c;
  throw PreconditionError("W audit has no clause named " + name);
}

WAudit check_W_membership(const GapField& f, const Potential& potential, const ModelParams& model, double M_T) {
  const PotentialBounds b = bounds(potential, model);
  const Rule& rule = f.grid.x_rule;
  const Eigen::Index nt = f.grid.rows(), last = nt - 1;
  const Eigen::VectorXd& t = f.grid.t_nodes;
  const double d20 = delta_const(b.u2, 0.0, model, rule);
  const double slack = 1e-9 * d20 * d20;
  const double floor = 1e-14 * d20 * d20;
  const Eigen::MatrixXd fT = column_derivative(t, f.values);

  auto named = [](const char* name) {
    ClauseResult c;
    c.name = name;
    return c;
  };
  ClauseResult lower = named("lower_bound"), upper = named("upper_bound"), zero = named("zero_at_tc"),
               ratio = named("ratio"), decrease = named("strict_decrease"), slope = named("slope_bound");

  for (Eigen::Index i = 0; i < nt; ++i) {
    const double d1 = delta_const(b.u1, t[i], model, rule), d2 = delta_const(b.u2, t[i], model, rule);
    const auto row = f.values.row(i);
    lower.worst_violation = std::max(lower.worst_violation, d1 * d1 - row.minCoeff());
    upper.worst_violation = std::max(upper.worst_violation, row.maxCoeff() - d2 * d2);
  }
  zero.worst_violation = f.values.row(last).cwiseAbs().maxCoeff();

  for (Eigen::Index i = 0; i < last; ++i) {
    const auto row = f.values.row(i);
    if (row.minCoeff() < floor) {
      ++ratio.skipped_rows;
      continue;
    }
    ratio.worst_violation = std::max(ratio.worst_violation, row.maxCoeff() - b.a * row.minCoeff());
  }
  {
    // at T_c the ratio is taken between slopes, scaled by the last step into f units
    const Eigen::RowVectorXd g = -fT.row(last);
    if (g.minCoeff() > 0)
      ratio.worst_violation = std::max(ratio.worst_violation, (g.maxCoeff() - b.a * g.minCoeff()) * (t[last] - t[last - 1]));
    else
      ++ratio.skipped_rows;
  }

  double max_step = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i + 1 < nt; ++i)
    max_step = std::max(max_step, (f.values.row(i + 1) - f.values.row(i)).maxCoeff());
  const double max_fT = fT.maxCoeff();
  decrease.pass = max_step < 0 && max_fT < 0;
  decrease.worst_violation = std::max(0.0, max_step);
  if (!decrease.pass) {
    std::ostringstream os;
    os.precision(6);
    os << "largest consecutive step " << max_step << ", largest f_T " << max_fT;
    decrease.note = os.str();
  }

  slope.worst_violation = std::max(0.0, (-fT).maxCoeff() - M_T);

  lower.worst_violation = std::max(0.0, lower.worst_violation);
  upper.worst_violation = std::max(0.0, upper.worst_violation);
  ratio.worst_violation = std::max(0.0, ratio.worst_violation);
  lower.pass = lower.worst_violation <= slack;
  upper.pass = upper.worst_violation <= slack;
  zero.pass = zero.worst_violation == 0;
  ratio.pass = ratio.worst_violation <= slack;
  slope.pass = slope.worst_violation <= 1e-9 * M_T;
  if (ratio.skipped_rows > 0) ratio.note = std::to_string(ratio.skipped_rows) + " rows below the ratio floor";

  WAudit audit;
  audit.clauses = {lower, upper, zero, ratio, decrease, slope};
  audit.pass = std::all_of(audit.clauses.begin(), audit.clauses.end(), [](const auto& c) { return c.pass; });
  return audit;
}

double lipschitz_bound(const PotentialBounds& b, const ModelParams& model, double delta2_at_zero) {
  const double e = model.epsilon;
  return 2 * (b.u2 * b.u2) / (b.u1 * b.u1) * std::sqrt(b.a) +
         b.u2 * b.u2 * delta2_at_zero * delta2_at_zero / (b.u1 * e * e);
}

double lipschitz_bound(const Potential& potential, const ModelParams& model, double delta2_at_zero) {
  return lipschitz_bound(bounds(potential, model), model, delta2_at_zero);
}

RowSolution solve_row(const GapKernel& kernel, double T, Eigen::VectorXd f, double tol, int max_iterations,
                      double damping_floor) {
  RowSolution out;
  double lambda = 1, prev_r = std::numeric_limits<double>::infinity();
  bool prev_same_lambda = false;
  Eigen::VectorXd best = f;
  double best_r = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd af = kernel.apply(T, f);
    const double r = (af - f).cwiseAbs().maxCoeff();
    out.history.push_back(r);
    if (r < best_r) {
      best_r = r;
      best = f;
    }
    bool changed = false;
    if (r > prev_r && lambda > damping_floor) {
      lambda = std::max(lambda / 2, damping_floor);
      changed = true;
    }
    if (r <= tol) {
      // error of f is at most lambda r / (1 - q) for a damped map contracting by q
      bool done = r <= 1e-3 * tol;
      if (!done && prev_same_lambda && !changed) {
        const double q = r / prev_r;
        done = q < 1 && lambda * r / (1 - q) <= tol;
      }
      if (done) {
        out.f = std::move(f);
        out.iterations = it;
        out.residual = r;
        out.damping = lambda;
        out.converged = true;
        return out;
      }
    }
    prev_same_lambda = !changed;
    prev_r = r;
    f += lambda * (af - f);
    f = f.cwiseMax(0.0);
  }
  out.f = std::move(best);
  out.iterations = max_iterations;
  out.residual = best_r;
  out.damping = lambda;
  out.converged = false;
  return out;
}

std::pair<GapField, SolveReport> solve_fixed_point(const Potential& potential, const ModelParams& model,
                                                   const GridSpec& grid, const SolverOptions& opts) {
  model.validate();
  grid.validate();
  if (!(opts.damping_floor > 0 && opts.damping_floor <= 1))
    throw PreconditionError("solver: damping floor must lie in (0, 1]");
  if (opts.max_iterations < 1) throw PreconditionError("solver: need at least one iteration");

  SolveReport report;
  if (opts.require_hypotheses) {
    HypothesisReport hyp;
    if (opts.hypotheses) {
      hyp = *opts.hypotheses;
    } else {
      const double t0 = compute_T0(potential, model);
      hyp = check_condition_2_4(potential, t0, model);
    }
    if (!hyp.pass) {
      std::ostringstream os;
      os << "solver refuses: hypotheses fail (margin " << hyp.condition_margin << ")";
      throw HypothesisError(os.str());
    }
  }

  const PotentialBounds b = bounds(potential, model);
  const Rule& rule = grid.x_rule;
  const double d20 = delta_const(b.u2, 0.0, model, rule);
  const double tol = opts.tolerance > 0 ? opts.tolerance : opts.relative_tolerance * d20 * d20;
  if (!(tol > 0)) throw PreconditionError("solver: tolerance must be positive");
  report.tolerance = tol;
  report.delta2_at_zero = d20;

  const Eigen::Index nt = grid.rows(), nx = grid.cols(), last = nt - 1;
  Eigen::MatrixXd start(nt, nx);
  if (opts.initial) {
    if (opts.initial->rows() != nt || opts.initial->cols() != nx)
      throw PreconditionError("solver: initial field shape does not match the grid");
    start = *opts.initial;
  } else {
    for (Eigen::Index i = 0; i < nt; ++i) {
      const double d2 = delta_const(b.u2, grid.t_nodes[i], model, rule);
      start.row(i).setConstant(opts.initial_scale * d2 * d2);
    }
  }

  const GapKernel kernel(potential, model, rule);
  std::vector<RowSolution> rows(static_cast<std::size_t>(nt));
  detail::parallel_for(int(last), opts.threads, [&](int i) {
    rows[std::size_t(i)] = solve_row(kernel, grid.t_nodes[i], start.row(i).transpose(), tol, opts.max_iterations,
                                     opts.damping_floor);
  });
  rows[std::size_t(last)].f = Eigen::VectorXd::Zero(nx);
  rows[std::size_t(last)].converged = true;

  GapField field(grid, Eigen::MatrixXd(nt, nx));
  std::size_t longest = 0;
  bool all = true;
  for (Eigen::Index i = 0; i < nt; ++i) {
    const RowSolution& r = rows[std::size_t(i)];
    field.values.row(i) = r.f.transpose();
    report.iterations = std::max(report.iterations, r.iterations);
    report.residual_sup = std::max(report.residual_sup, r.residual);
    report.damping_used = std::min(report.damping_used, r.damping);
    longest = std::max(longest, r.history.size());
    all = all && r.converged;
  }
  report.residual_history.assign(longest, 0.0);
  for (const auto& r : rows)
    for (std::size_t k = 0; k < longest && !r.history.empty(); ++k)
      report.residual_history[k] = std::max(report.residual_history[k], r.history[std::min(k, r.history.size() - 1)]);

  report.converged = all && report.residual_sup <= tol;
  field.converged = report.converged;
  report.M_T = compute_M_T(b, model, grid.tc(), d20, energy_rule(model, 128));
  report.w_audit = check_W_membership(field, potential, model, report.M_T);

  if (!report.converged) {
    std::ostringstream os;
    os.precision(6);
    os << "solver did not converge in " << opts.max_iterations << " iterations (residual " << report.residual_sup
       << ", tolerance " << tol << ")";
    throw NonConvergenceError(os.str(), field, report);
  }
  return {std::move(field), std::move(report)};
}

SlopeResult slope_at_tc(const Potential& potential, double tc, const ModelParams& model, const Rule& rule, double tol) {
  if (!(tc > 0)) throw PreconditionError("slope_at_tc: need T_c > 0");
  const PotentialBounds b = bounds(potential, model);
  const double d20 = delta_const(b.u2, 0.0, model, rule);
  const double mt = compute_M_T(b, model, tc, d20, energy_rule(model, 128));

  const GapKernel kernel(potential, model, rule);
  const Eigen::MatrixXd K = kernel.linearized(tc);
  const Eigen::Index n = kernel.size();

  SlopeResult out;
  Eigen::VectorXd g = Eigen::VectorXd::Constant(n, mt / 2);
  double lambda = 1, prev = std::numeric_limits<double>::infinity(), r = 0;
  constexpr int max_iterations = 10000;
  for (int it = 1;; ++it) {
    const Eigen::VectorXd m = K * g.cwiseSqrt();
    const Eigen::VectorXd ag = m.cwiseProduct(m);
    r = (ag - g).cwiseAbs().maxCoeff() / g.maxCoeff();
    out.iterations = it;
    if (r <= tol) break;
    if (it == max_iterations) throw ConvergenceError("slope_at_tc: Picard iteration did not converge", 0.0, r);
    if (r > prev) lambda = std::max(lambda / 2, 1.0 / 16);
    prev = r;
    g += lambda * (ag - g);
  }

  // Amplitude from the solvability condition at the next order in sqrt(T_c - T).
  const Eigen::MatrixXd& U = kernel.potential_matrix();
  Eigen::VectorXd dphi_T(n), dphi_f(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double xi = rule.nodes[j], w = rule.weights[j], z = xi / (2 * tc);
    const double sh = sech2(z), th = std::tanh(z);
    dphi_T[j] = w * (-sh / (2 * tc * tc));
    dphi_f[j] = w * (sh / (2 * tc * xi) - th / (xi * xi)) / (2 * xi);
  }
  const Eigen::VectorXd v = g.cwiseSqrt();
  const Eigen::VectorXd left = perron_eigenpair<double>(K.transpose(), 1e-14).vector;
  const double lin = left.dot(U * dphi_T.cwiseProduct(v));
  const double cubic = left.dot(U * dphi_f.cwiseProduct(v.array().cube().matrix()));
  if (!(lin < 0 && cubic < 0)) throw EvaluationError("slope_at_tc: solvability coefficients have the wrong sign");
  out.amplitude = lin / cubic;
  out.g = out.amplitude * g;
  const Eigen::VectorXd m = K * out.g.cwiseSqrt();
  out.residual = (m.cwiseProduct(m) - out.g).cwiseAbs().maxCoeff() / out.g.maxCoeff();
  return out;
}

}  // namespace bcsgap
