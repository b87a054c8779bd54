#include "bcsgap/thermodynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bcsgap/constant_gap.hpp"
#include "parallel.hpp"

namespace bcsgap {

namespace {

double sech2(double z) {
  const double c = std::cosh(z);
  return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}

// ln(1 + e^{-y/T})
double log_occupation(double y, double T) { return std::log1p(std::exp(-y / T)); }

// 1 / (e^{y/T} + 1)
double fermi(double y, double T) { return 0.5 * (1 - std::tanh(y / (2 * T))); }

}  // namespace

double spectral_radius(const GapKernel& kernel, double T, double tol) {
  return perron_eigenpair<double>(kernel.linearized(T), tol).value;
}

CriticalTemperature critical_temperature(const Potential& potential, const ModelParams& model, const Rule& rule,
                                         double tol) {
  const GapKernel kernel(potential, model, rule);
  CriticalTemperature out;
  auto g = [&](double T) {
    ++out.evaluations;
    return spectral_radius(kernel, T) - 1;
  };
  const double lo = 1e-6 * model.debye;
  const double g_lo = g(lo);
  if (g_lo < 0) {
    std::ostringstream os;
    os.precision(6);
    os << "no transition: spectral radius " << g_lo + 1 << " < 1 at T = " << lo;
    throw NoTransitionError(os.str());
  }
  double hi = 2 * lo;
  try {
    hi = std::max(hi, tau(bounds(potential, model).u2, model, rule) * (1 + 1e-9));
  } catch (const NoSolutionError&) {
  }
  while (g(hi) >= 0) hi *= 2;
  out.tc = find_root(g, Bracket<double>{lo, hi}, tol * hi);
  out.rho_minus_one = g(out.tc);
  return out;
}

double omega_row(const Rule& rule, double T, const Eigen::VectorXd& f) {
  double sum = 0;
  for (Eigen::Index j = 0; j < rule.size(); ++j) {
    const double xi = rule.nodes[j], fj = f[j];
    const double E = std::sqrt(xi * xi + fj);
    const double v = -fj / (xi + E) + fj / (2 * E) * std::tanh(E / (2 * T)) -
                     2 * T * (log_occupation(E, T) - log_occupation(xi, T));
    sum += rule.weights[j] * v;
  }
  return sum;
}

OmegaGradient omega_gradient(const Rule& rule, double T, const Eigen::VectorXd& f, const Eigen::VectorXd& f_T) {
  OmegaGradient g;
  for (Eigen::Index j = 0; j < rule.size(); ++j) {
    const double xi = rule.nodes[j], fj = f[j], w = rule.weights[j];
    const double E = std::sqrt(xi * xi + fj);
    const double sh = sech2(E / (2 * T)), th = std::tanh(E / (2 * T));
    const double dT = -fj * sh / (4 * T * T) - 2 * log_occupation(E, T) - 2 * (E / T) * fermi(E, T) +
                      2 * log_occupation(xi, T) + 2 * (xi / T) * fermi(xi, T);
    const double df = fj * (sh / (4 * T * E) - th / (2 * E * E)) / (2 * E);
    g.partial_T += w * dT;
    g.chain += w * df * f_T[j];
  }
  return g;
}

namespace {

std::pair<Eigen::VectorXd, bool> solve_or_read_row(const GapField& f0, const GapKernel& kernel,
                                                   const PotentialBounds& b, const ModelParams& model, double T,
                                                   double tol, int max_iterations) {
  const GridSpec& grid = f0.grid;
  const Eigen::VectorXd& t = grid.t_nodes;
  const Eigen::Index nt = grid.rows();
  const auto it = std::lower_bound(t.data(), t.data() + nt, T);
  const Eigen::Index k = it - t.data();
  if (k < nt && t[k] == T) return {f0.values.row(k).transpose(), true};
  Eigen::VectorXd start;
  if (k == 0) {
    const double d2 = delta_const(b.u2, T, model, grid.x_rule);
    start = Eigen::VectorXd::Constant(grid.cols(), d2 * d2);
  } else {
    const double s = (T - t[k - 1]) / (t[k] - t[k - 1]);
    start = ((1 - s) * f0.values.row(k - 1) + s * f0.values.row(k)).transpose();
  }
  RowSolution r = solve_row(kernel, T, start, tol, max_iterations, 1.0 / 16);
  return {r.f, r.converged};
}

}  // namespace

double omega_difference(const GapField& f0, const Potential& potential, const ModelParams& model, double T) {
  if (!f0.converged) throw PreconditionError("omega_difference: field is not converged");
  if (T >= f0.grid.tc()) return 0.0;
  const PotentialBounds b = bounds(potential, model);
  const double d20 = delta_const(b.u2, 0.0, model, f0.grid.x_rule);
  const GapKernel kernel(potential, model, f0.grid.x_rule);
  auto [f, ok] = solve_or_read_row(f0, kernel, b, model, T, 1e-12 * d20 * d20, 200000);
  if (!ok) throw ConvergenceError("omega_difference: row solve did not converge", T, 0.0);
  return omega_row(f0.grid.x_rule, T, f);
}

double normal_specific_heat(double T, const Rule& rule) {
  return integrate(
      [T](double xi) {
        const double x = xi / T;
        return x * x * sech2(x / 2) / 2;
      },
      rule);
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::second_order:
      return "second_order";
    case Classification::not_second_order:
      return "not_second_order";
    case Classification::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

ThermoCurve thermo_curves(const GapField& f0, const Potential& potential, const ModelParams& model,
                          const ThermoOptions& opts) {
  if (!f0.converged) throw PreconditionError("thermo_curves: field is not converged");
  if (opts.n_samples < 8) throw PreconditionError("thermo_curves: need at least 8 samples per side");
  ThermoCurve c;
  const Rule& rule = f0.grid.x_rule;
  const double tc = f0.grid.tc();
  const double hw = opts.half_width > 0 ? opts.half_width : 0.1 * tc;
  const double center = std::isnan(opts.center) ? tc : opts.center;
  const int n = opts.n_samples;
  const double h = hw / n;
  if (!(center - hw > 0)) throw PreconditionError("thermo_curves: sample range reaches T <= 0");
  c.tc = tc;
  c.h = h;

  const PotentialBounds b = bounds(potential, model);
  const double d20 = delta_const(b.u2, 0.0, model, rule);
  const double tol = opts.tolerance > 0 ? opts.tolerance : 1e-12 * d20 * d20;
  const GapKernel kernel(potential, model, rule);

  // sample temperatures plus the three left points used by the one-sided limits
  std::vector<double> temps;
  for (int k = -n; k <= n; ++k) temps.push_back(k == 0 ? center : center + k * h);
  const std::size_t n_samples = temps.size();
  for (int m : {1, 2, 4}) temps.push_back(tc - m * h);
  std::vector<double> omega(temps.size(), 0.0);
  std::vector<char> ok(temps.size(), 1);
  detail::parallel_for(int(temps.size()), opts.threads, [&](int i) {
    const double T = temps[std::size_t(i)];
    if (T >= tc) return;
    auto [f, conv] = solve_or_read_row(f0, kernel, b, model, T, tol, opts.max_iterations);
    ok[std::size_t(i)] = conv;
    omega[std::size_t(i)] = omega_row(rule, T, f);
  });
  if (std::find(ok.begin(), ok.end(), 0) != ok.end())
    throw ConvergenceError("thermo_curves: a sample row did not converge", 0.0, 0.0);

  c.t_samples.assign(temps.begin(), temps.begin() + long(n_samples));
  c.omega_diff.assign(omega.begin(), omega.begin() + long(n_samples));
  c.entropy_diff.assign(n_samples, 0.0);
  c.specific_heat_diff.assign(n_samples, 0.0);
  const auto& T = c.t_samples;
  const auto& W = c.omega_diff;
  const long last = long(n_samples) - 1;
  for (long i = 0; i <= last; ++i) {
    if (T[i] > tc) continue;  // Omega difference vanishes identically above T_c
    const bool right_ok = i < last && T[i + 1] < tc;
    const bool left_ok = i > 0;
    if (left_ok && right_ok) {
      c.entropy_diff[i] = -(W[i + 1] - W[i - 1]) / (2 * h);
      c.specific_heat_diff[i] = -T[i] * (W[i + 1] - 2 * W[i] + W[i - 1]) / (h * h);
    } else if (right_ok) {
      c.entropy_diff[i] = -(W[i + 1] - W[i]) / h;
      if (i + 2 <= last)
        c.specific_heat_diff[i] = -T[i] * (W[i + 2] - 2 * W[i + 1] + W[i]) / (h * h);
    } else if (i >= 2) {
      // one-sided from below: the limit T -> T_c-
      c.entropy_diff[i] = -(W[i] - W[i - 1]) / h;
      c.specific_heat_diff[i] = -T[i] * (W[i] - 2 * W[i - 1] + W[i - 2]) / (h * h);
    }
  }

  c.c_normal_tc = normal_specific_heat(tc, rule);
  c.jump_floor = 1e-6 * c.c_normal_tc;
  double max_s = 0, max_c = 0;
  for (long i = 0; i <= last; ++i) {
    max_s = std::max(max_s, std::abs(c.entropy_diff[i]));
    max_c = std::max(max_c, std::abs(c.specific_heat_diff[i]));
  }
  c.tol_omega = 10 * h * max_s;
  c.tol_entropy = 10 * h * max_c / tc;

  if (!(T.front() < tc)) {
    c.classification = Classification::inconclusive;
    c.reason = "no samples below T_c";
    return c;
  }
  if (!(tc - 4 * h > 0)) {
    c.classification = Classification::inconclusive;
    c.reason = "sample spacing too coarse for the one-sided limits";
    return c;
  }
  const double w1 = omega[n_samples], w2 = omega[n_samples + 1], w4 = omega[n_samples + 2];
  c.omega_left = 2 * w1 - w2;
  c.entropy_left = w1 / h;
  c.c_left_h = -tc * (-2 * w1 + w2) / (h * h);
  c.c_left_2h = -tc * (-2 * w2 + w4) / (4 * h * h);
  c.jump_at_tc = 2 * c.c_left_h - c.c_left_2h;

  std::ostringstream why;
  why.precision(4);
  const bool omega_cont = std::abs(c.omega_left) <= c.tol_omega;
  const bool entropy_cont = std::abs(c.entropy_left) <= c.tol_entropy;
  const bool jump = c.jump_at_tc > c.jump_floor;
  if (omega_cont && entropy_cont && jump) {
    c.classification = Classification::second_order;
    why << "Omega and S continuous, specific-heat jump " << c.jump_at_tc;
  } else {
    c.classification = Classification::not_second_order;
    if (!omega_cont) why << "|Omega(Tc-)| = " << std::abs(c.omega_left) << " > " << c.tol_omega << "; ";
    if (!entropy_cont) why << "|S(Tc-)| = " << std::abs(c.entropy_left) << " > " << c.tol_entropy << "; ";
    if (!jump) why << "jump " << c.jump_at_tc << " <= floor " << c.jump_floor;
  }
  c.reason = why.str();
  return c;
}

NearTcFit near_tc_fit(const GapField& f0, const NearTcFitOptions& opts) {
  const Eigen::Index nt = f0.grid.rows(), nx = f0.grid.cols(), last = nt - 1;
  if (opts.rows < 4 || opts.rows > last) throw PreconditionError("near_tc_fit: need at least 4 rows below T_c");
  const double tc = f0.grid.tc();
  NearTcFit fit;
  fit.rows_used = opts.rows;
  fit.c.resize(nx);
  fit.b.setZero(nx);
  const auto window = f0.values.middleRows(last - opts.rows, opts.rows);
  if (window.cwiseAbs().maxCoeff() == 0) throw EvaluationError("near_tc_fit: window rows are all zero");
  Eigen::VectorXd d(opts.rows);
  for (int k = 0; k < opts.rows; ++k) d[k] = tc - f0.grid.t_nodes[last - opts.rows + k];
  const double s2 = d.array().square().sum(), s3 = d.array().cube().sum(), s4 = d.array().pow(4).sum();
  for (Eigen::Index j = 0; j < nx; ++j) {
    const Eigen::VectorXd y = window.col(j);
    const double p1 = d.dot(y), p2 = d.array().square().matrix().dot(y);
    if (opts.curvature) {
      const double det = s2 * s4 - s3 * s3;
      fit.c[j] = (p1 * s4 - p2 * s3) / det;
      fit.b[j] = (s2 * p2 - s3 * p1) / det;
    } else {
      fit.c[j] = p1 / s2;
    }
    const Eigen::VectorXd model = fit.c[j] * d + fit.b[j] * d.array().square().matrix();
    fit.residual = std::max(fit.residual, (y - model).cwiseAbs().maxCoeff());
  }

  const int er = std::min<int>(opts.exponent_rows, int(last));
  fit.exponent.resize(nx);
  for (Eigen::Index j = 0; j < nx; ++j) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int k = 1; k <= er; ++k) {
      const double fv = f0.values(last - k, j);
      if (!(fv > 0)) continue;
      const double lx = std::log(tc - f0.grid.t_nodes[last - k]), ly = 0.5 * std::log(fv);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++m;
    }
    if (m < 2) throw EvaluationError("near_tc_fit: too few positive rows for the exponent fit");
    fit.exponent[j] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return fit;
}

}  // namespace bcsgap
