#include "bcsgap/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bcsgap/constant_gap.hpp"

namespace bcsgap {

double Factor::operator()(double x) const {
  double p = 0;
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) p = p * x + *it;
  if (sin_amplitude != 0) p += sin_amplitude * std::sin(frequency * x);
  if (cos_amplitude != 0) p += cos_amplitude * std::cos(frequency * x);
  return p;
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::constant:
      return "constant";
    case PotentialKind::separable:
      return "separable";
    case PotentialKind::polynomial_kernel:
      return "polynomial-kernel";
    case PotentialKind::table:
      return "table";
  }
  return "unknown";
}

Potential Potential::constant(double value) { return Potential(Constant{value}); }

Potential Potential::separable(Factor left, Factor right, double offset, double scale) {
  return Potential(Separable{std::move(left), std::move(right), offset, scale});
}

Potential Potential::polynomial_kernel(Eigen::MatrixXd coefficients) {
  if (coefficients.size() == 0) throw PreconditionError("polynomial kernel: empty coefficient matrix");
  return Potential(PolynomialKernel{std::move(coefficients)});
}

Potential Potential::table(PotentialTable t) {
  const auto nx = t.x.size(), nxi = t.xi.size();
  if (nx < 2 || nxi < 2) throw PreconditionError("potential table: need at least 2 x 2 points");
  if (t.values.rows() != Eigen::Index(nx) || t.values.cols() != Eigen::Index(nxi))
    throw PreconditionError("potential table: value matrix does not match the axes");
  if (!std::is_sorted(t.x.begin(), t.x.end()) || !std::is_sorted(t.xi.begin(), t.xi.end()) ||
      std::adjacent_find(t.x.begin(), t.x.end()) != t.x.end() ||
      std::adjacent_find(t.xi.begin(), t.xi.end()) != t.xi.end())
    throw PreconditionError("potential table: axes must be strictly increasing");
  return Potential(Table{std::move(t)});
}

PotentialKind Potential::kind() const {
  return static_cast<PotentialKind>(impl_.index());
}

namespace {

// Cell index and fractional position of v on a sorted axis; tolerates
// round-off just outside the ends.
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double v) {
  const double span = axis.back() - axis.front();
  const double slack = 1e-12 * span;
  if (v < axis.front() - slack || v > axis.back() + slack) {
    std::ostringstream os;
    os.precision(17);
    os << "potential table: " << v << " lies outside [" << axis.front() << ", " << axis.back() << "]";
    throw PreconditionError(os.str());
  }
  v = std::clamp(v, axis.front(), axis.back());
  auto it = std::upper_bound(axis.begin(), axis.end(), v);
  std::size_t k = (it == axis.begin()) ? 0 : std::size_t(it - axis.begin()) - 1;
  k = std::min(k, axis.size() - 2);
  return {k, (v - axis[k]) / (axis[k + 1] - axis[k])};
}

}  // namespace

double Potential::operator()(double x, double xi) const {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return p.value;
        } else if constexpr (std::is_same_v<T, Separable>) {
          return p.offset + p.scale * p.left(x) * p.right(xi);
        } else if constexpr (std::is_same_v<T, PolynomialKernel>) {
          const auto& c = p.coefficients;
          double sum = 0, xp = 1;
          for (Eigen::Index i = 0; i < c.rows(); ++i) {
            double row = 0;
            for (Eigen::Index j = c.cols() - 1; j >= 0; --j) row = row * xi + c(i, j);
            sum += xp * row;
            xp *= x;
          }
          return sum;
        } else {
          const auto [i, s] = locate(p.data.x, x);
          const auto [j, t] = locate(p.data.xi, xi);
          const auto& v = p.data.values;
          const double u = (1 - s) * (1 - t) * v(i, j) + s * (1 - t) * v(i + 1, j) + (1 - s) * t * v(i, j + 1) +
                           s * t * v(i + 1, j + 1);
          return p.scale * u;
        }
      },
      impl_);
}

Eigen::MatrixXd Potential::kernel_matrix(const Eigen::VectorXd& x_nodes, const Eigen::VectorXd& xi_nodes) const {
  Eigen::MatrixXd m(x_nodes.size(), xi_nodes.size());
  for (Eigen::Index i = 0; i < x_nodes.size(); ++i)
    for (Eigen::Index j = 0; j < xi_nodes.size(); ++j) m(i, j) = (*this)(x_nodes[i], xi_nodes[j]);
  return m;
}

Potential Potential::scaled(double factor) const {
  return std::visit(
      [&](const auto& p) -> Potential {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return Potential(Constant{p.value * factor});
        } else if constexpr (std::is_same_v<T, Separable>) {
          return Potential(Separable{p.left, p.right, p.offset * factor, p.scale * factor});
        } else if constexpr (std::is_same_v<T, PolynomialKernel>) {
          return Potential(PolynomialKernel{p.coefficients * factor});
        } else {
          return Potential(Table{p.data, p.scale * factor});
        }
      },
      impl_);
}

double Potential::constant_value() const {
  if (const auto* c = std::get_if<Constant>(&impl_)) return c->value;
  throw PreconditionError("constant_value: potential is not of constant kind");
}

namespace {

struct Extremum {
  double x, xi, value;
};

// Alternating golden-section sweeps inside the box around a grid extremum.
// sign = +1 refines a maximum, -1 a minimum.
Extremum refine_extremum(const Potential& u, Extremum start, double x_lo, double x_hi, double xi_lo, double xi_hi,
                         double sign) {
  Extremum best = start;
  for (int sweep = 0; sweep < 4; ++sweep) {
    if (x_hi > x_lo) {
      auto m = maximize_scalar([&](double x) { return sign * u(x, best.xi); }, Bracket<double>{x_lo, x_hi},
                               1e-12 * (x_hi - x_lo + 1.0));
      if (sign * m.value > sign * best.value) best = {m.argmax, best.xi, sign * m.value};
    }
    if (xi_hi > xi_lo) {
      auto m = maximize_scalar([&](double xi) { return sign * u(best.x, xi); }, Bracket<double>{xi_lo, xi_hi},
                               1e-12 * (xi_hi - xi_lo + 1.0));
      if (sign * m.value > sign * best.value) best = {best.x, m.argmax, sign * m.value};
    }
  }
  return best;
}

Eigen::VectorXd uniform_points(const ModelParams& model, int n) {
  return Eigen::VectorXd::LinSpaced(n, model.epsilon, model.debye);
}

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

PotentialBounds bounds(const Potential& potential, const ModelParams& model, const BoundsOptions& opts) {
  model.validate();
  if (opts.grid_points < 2) throw PreconditionError("bounds: need at least two grid points");
  const Eigen::VectorXd g = uniform_points(model, opts.grid_points);
  const Eigen::MatrixXd vals = potential.kernel_matrix(g, g);
  if (!vals.allFinite()) throw EvaluationError("bounds: potential is not finite on I^2");

  Eigen::Index imin, jmin, imax, jmax;
  const double vmin = vals.minCoeff(&imin, &jmin);
  const double vmax = vals.maxCoeff(&imax, &jmax);
  Extremum lo{g[imin], g[jmin], vmin}, hi{g[imax], g[jmax], vmax};

  if (opts.refine && potential.kind() != PotentialKind::constant) {
    const Eigen::Index n = g.size() - 1;
    auto box = [&](Eigen::Index k) { return std::pair{g[std::max<Eigen::Index>(k - 1, 0)], g[std::min(k + 1, n)]}; };
    {
      auto [xl, xh] = box(imin);
      auto [sl, sh] = box(jmin);
      lo = refine_extremum(potential, lo, xl, xh, sl, sh, -1.0);
    }
    {
      auto [xl, xh] = box(imax);
      auto [sl, sh] = box(jmax);
      hi = refine_extremum(potential, hi, xl, xh, sl, sh, +1.0);
    }
  }

  PotentialBounds b{lo.value, hi.value, 1.0};
  if (!(b.u1 > 0)) throw HypothesisError("potential not admissible: U1 ≤ 0 (min U = " + format_value(b.u1) + ")");
  b.a = (b.u2 / b.u1) * (b.u2 / b.u1);
  return b;
}

RowIntegralMax max_row_integral(const Potential& potential, double T, const ModelParams& model,
                                const ConditionOptions& opts) {
  const Rule rule = energy_rule(model, opts.quadrature_order);
  const Eigen::VectorXd xs = uniform_points(model, opts.x_points);
  Eigen::VectorXd kern(rule.size());
  for (Eigen::Index j = 0; j < rule.size(); ++j) {
    const double xi = rule.nodes[j];
    const double th = (T < 1e-8 * model.debye) ? 1.0 : std::tanh(xi / (2.0 * T));
    kern[j] = rule.weights[j] * th / xi;
  }
  RowIntegralMax best{-std::numeric_limits<double>::infinity(), xs[0]};
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    double s = 0;
    for (Eigen::Index j = 0; j < rule.size(); ++j) s += potential(xs[i], rule.nodes[j]) * kern[j];
    if (s > best.value) best = {s, xs[i]};
  }
  return best;
}

HypothesisReport check_condition_2_4(const Potential& potential, double t0, const ModelParams& model,
                                     const ConditionOptions& opts) {
  model.validate();
  if (!(t0 > 0)) throw PreconditionError("check_condition_2_4: need t0 > 0");
  HypothesisReport r;
  r.t0 = t0;
  r.smoothness = potential.smooth_guaranteed() ? Smoothness::guaranteed : Smoothness::unchecked;
  const PotentialBounds b = bounds(potential, model);
  r.u1 = b.u1;
  r.u2 = b.u2;
  r.a = b.a;

  RowIntegralMax m = max_row_integral(potential, t0, model, opts);
  if (opts.full_scan) {
    if (!(opts.tc > t0)) throw PreconditionError("check_condition_2_4: full scan needs tc > t0");
    for (int k = 1; k < opts.t_points; ++k) {
      const double T = t0 + (opts.tc - t0) * k / (opts.t_points - 1);
      const RowIntegralMax mk = max_row_integral(potential, T, model, opts);
      if (mk.value > m.value) m = mk;
    }
  }
  r.max_row_integral = m.value;
  r.argmax_x = m.argmax_x;
  r.condition_margin = 1.0 - std::pow(b.a, 0.25) * m.value;

  const Rule rule = energy_rule(model, opts.quadrature_order);
  r.lower_coupling_integral = gap_kernel_integral(b.u1, t0, 0.0, model, rule);
  r.pass = r.condition_margin >= 0 && r.u1 > 0;
  return r;
}

double compute_T0(const Potential& potential, const ModelParams& model, double safety, const ConditionOptions& opts) {
  model.validate();
  if (!(safety >= 1.0)) throw PreconditionError("compute_T0: safety must be >= 1");
  const PotentialBounds b = bounds(potential, model);
  const Rule rule = energy_rule(model, opts.quadrature_order);
  const double a4 = std::pow(b.a, 0.25);
  auto margin = [&](double T) { return 1.0 - a4 * max_row_integral(potential, T, model, opts).value; };

  double lo;
  try {
    lo = tau(b.u1, model, rule);
  } catch (const NoSolutionError&) {
    lo = 1e-6 * model.debye;
  }
  double best_margin = margin(lo);
  double T_star = lo;
  if (best_margin < 0) {
    double hi = std::max(lo, 1e-6 * model.debye);
    double m_hi = best_margin;
    try {
      hi = std::max(hi, tau(b.u2, model, rule));
    } catch (const NoSolutionError&) {
    }
    for (int k = 0; k < 80 && (m_hi = margin(hi)) < 0; ++k) {
      best_margin = std::max(best_margin, m_hi);
      hi *= 2.0;
    }
    if (m_hi < 0)
      throw HypothesisError("compute_T0: no temperature satisfies the smallness condition (best margin " +
                            format_value(best_margin) + ")");
    if (m_hi == 0) {
      T_star = hi;
    } else {
      T_star = find_root(margin, Bracket<double>{lo, hi}, 0.0);
      // the root may land a rounding step on the negative side
      while (margin(T_star) < 0) T_star = std::nextafter(T_star, 2.0 * T_star + 1.0);
    }
  }

  double t0 = T_star * safety;
  for (int k = 0; k < 64; ++k) {
    if (gap_kernel_integral(b.u1, t0, 0.0, model, rule) < 1.0 && margin(t0) >= 0) return t0;
    t0 *= 1.0 + 1e-12 * (1 << std::min(k, 30));
  }
  throw HypothesisError("compute_T0: could not satisfy the strict lower-coupling inequality");
}

double compute_M_T(const PotentialBounds& b, const ModelParams& model, double tc, double delta2_at_zero,
                   const Rule& rule) {
  if (!(tc > 0)) throw PreconditionError("compute_M_T: need tc > 0");
  const double zmax = max_z_sech_z().value;
  const double w = model.epsilon / (2.0 * tc);
  double bracket;
  if (w < 1e-2) {
    const double w2 = w * w;
    bracket = w * w2 * (2.0 / 3.0 - w2 * (8.0 / 15.0 - w2 * (34.0 / 105.0)));
  } else {
    const double c = std::cosh(w);
    bracket = std::tanh(w) - w / (c * c);
  }
  const double d2 = delta2_at_zero * delta2_at_zero;
  const double denom_integral = integrate(
      [&](double xi) {
        const double e2 = xi * xi + d2;
        return 1.0 / (e2 * std::sqrt(e2));
      },
      rule);
  return 4.0 * b.a * b.u2 * zmax * zmax / (model.epsilon * b.u1 * bracket * denom_integral);
}

double compute_M_T(const Potential& potential, const ModelParams& model, double tc, double delta2_at_zero) {
  return compute_M_T(bounds(potential, model), model, tc, delta2_at_zero, energy_rule(model, 128));
}

}  // namespace bcsgap
