#pragma once

// Quadrature, bracketed root finding and scalar maximization.
//
// Everything here is templated on the scalar type so the same code paths can
// be exercised in extended precision; the rest of the library uses double.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

#include "bcsgap/errors.hpp"

namespace bcsgap {

/// A positive-weight quadrature rule on [lower, upper].
///
/// The nodes double as collocation points: fields are stored at exactly these
/// energies, so integral operators never interpolate.
template <typename Scalar>
struct QuadratureRule {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector nodes;
  Vector weights;
  int order = 0;   // nodes per panel
  int panels = 1;
  Scalar lower = 0;
  Scalar upper = 0;

  Eigen::Index size() const { return nodes.size(); }

  /// Throws PreconditionError unless nodes are strictly increasing inside
  /// (lower, upper), weights are positive, and the weights sum to the length.
  void validate() const {
    if (order <= 0 || panels <= 0 || nodes.size() != weights.size() || nodes.size() == 0)
      throw PreconditionError("quadrature rule: inconsistent sizes");
    if (!(lower < upper)) throw PreconditionError("quadrature rule: empty interval");
    for (Eigen::Index i = 0; i < nodes.size(); ++i) {
      if (!(nodes[i] > lower && nodes[i] < upper))
        throw PreconditionError("quadrature rule: node outside the open interval");
      if (i > 0 && !(nodes[i] > nodes[i - 1]))
        throw PreconditionError("quadrature rule: nodes not strictly increasing");
      if (!(weights[i] > 0)) throw PreconditionError("quadrature rule: non-positive weight");
    }
    Scalar sum = 0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) sum += weights[i];
    const Scalar len = upper - lower;
    using std::abs;
    if (abs(sum - len) > Scalar(1e-12) * len)
      throw PreconditionError("quadrature rule: weights do not sum to the interval length");
  }
};

using Rule = QuadratureRule<double>;

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
template <typename Scalar>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>
gauss_legendre_reference(int n) {
  using std::abs;
  using std::cos;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x(n), w(n);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar z = cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const Scalar dz = p1 / dp;
      z -= dz;
      if (abs(dz) <= 4 * eps) break;
    }
    {
      // one more derivative evaluation at the converged root
      Scalar p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
    }
    const Scalar wi = 2 / ((1 - z * z) * dp * dp);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
  if (n % 2 == 1) x[n / 2] = 0;
  return {x, w};
}

template <typename Scalar>
std::string describe_node(Eigen::Index i, Scalar x, Scalar v) {
  std::ostringstream os;
  os.precision(17);
  os << "non-finite integrand value " << static_cast<double>(v) << " at node " << i
     << " (x = " << static_cast<double>(x) << ")";
  return os.str();
}

}  // namespace detail

/// Composite Gauss-Legendre rule with `panels` equal panels of `order` nodes.
/// Integrates polynomials of degree 2*order-1 exactly.
template <typename Scalar = double>
QuadratureRule<Scalar> gauss_legendre(int order, Scalar a, Scalar b, int panels = 1) {
  if (order < 1 || panels < 1) throw PreconditionError("gauss_legendre: order and panels must be positive");
  if (!(a < b)) throw PreconditionError("gauss_legendre: need a < b");
  const auto [x, w] = detail::gauss_legendre_reference<Scalar>(order);
  QuadratureRule<Scalar> r;
  r.order = order;
  r.panels = panels;
  r.lower = a;
  r.upper = b;
  r.nodes.resize(Eigen::Index(order) * panels);
  r.weights.resize(Eigen::Index(order) * panels);
  const Scalar h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const Scalar lo = a + h * p;
    for (int i = 0; i < order; ++i) {
      r.nodes[p * order + i] = lo + h * (x[i] + 1) / 2;
      r.weights[p * order + i] = w[i] * h / 2;
    }
  }
  return r;
}

/// Gauss-Legendre in the logarithmic variable s = ln(x), 0 < a < b.
///
/// Panels are uniform in s (geometric in x). An integrand g(x) becomes
/// g(e^s) e^s, which removes the near-singularity of 1/x-type kernels at the
/// small end of the interval.
template <typename Scalar = double>
QuadratureRule<Scalar> log_gauss_legendre(int order, Scalar a, Scalar b, int panels = 1) {
  using std::exp;
  using std::log;
  if (!(a > 0)) throw PreconditionError("log_gauss_legendre: need a > 0");
  QuadratureRule<Scalar> s = gauss_legendre<Scalar>(order, log(a), log(b), panels);
  QuadratureRule<Scalar> r = s;
  r.lower = a;
  r.upper = b;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    r.nodes[i] = exp(s.nodes[i]);
    r.weights[i] = s.weights[i] * r.nodes[i];
  }
  return r;
}

/// Sum of w_i g(x_i) in ascending node order.
template <typename Scalar, typename F>
Scalar integrate(F&& integrand, const QuadratureRule<Scalar>& rule) {
  using std::isfinite;
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const Scalar v = integrand(rule.nodes[i]);
    if (!isfinite(v)) throw EvaluationError(detail::describe_node(i, rule.nodes[i], v));
    sum += rule.weights[i] * v;
  }
  return sum;
}

template <typename Scalar>
struct Bracket {
  Scalar lo;
  Scalar hi;
};

/// Brent's method: inverse quadratic / secant steps safeguarded by bisection.
///
/// Stops when the bracket shrinks below tol (absolute, on the argument), when
/// g(x) == 0, or when |g(x)| <= ftol. Throws BracketError without a sign change and ConvergenceError (with
/// the best iterate) when max_iter is exhausted.
template <typename Scalar, typename F>
Scalar find_root(F&& g, Bracket<Scalar> bracket, Scalar tol, Scalar ftol = 0, int max_iter = 300) {
  using std::abs;
  using std::isfinite;
  if (!(bracket.lo < bracket.hi)) throw PreconditionError("find_root: need lo < hi");
  Scalar a = bracket.lo, b = bracket.hi;
  Scalar fa = g(a), fb = g(b);
  if (!isfinite(fa) || !isfinite(fb)) throw EvaluationError("find_root: non-finite value at bracket end");
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa > 0) == (fb > 0)) {
    std::ostringstream os;
    os.precision(10);
    os << "find_root: no sign change on [" << static_cast<double>(a) << ", " << static_cast<double>(b)
       << "] (g = " << static_cast<double>(fa) << ", " << static_cast<double>(fb) << ")";
    throw BracketError(os.str());
  }
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Scalar c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (abs(fc) < abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const Scalar tol1 = 2 * eps * abs(b) + tol / 2;
    const Scalar xm = (c - b) / 2;
    if (abs(xm) <= tol1 || fb == 0 || abs(fb) <= ftol) return b;
    if (abs(e) >= tol1 && abs(fa) > abs(fb)) {
      Scalar p, q, r;
      const Scalar s = fb / fa;
      if (a == c) {
        p = 2 * xm * s;
        q = 1 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2 * xm * q * (q - r) - (b - a) * (r - 1));
        q = (q - 1) * (r - 1) * (s - 1);
      }
      if (p > 0) q = -q;
      p = abs(p);
      const Scalar min1 = 3 * xm * q - abs(tol1 * q);
      const Scalar min2 = abs(e * q);
      if (2 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = g(b);
    if (!isfinite(fb)) throw EvaluationError("find_root: non-finite function value");
  }
  throw ConvergenceError("find_root: maximum iterations exceeded", static_cast<double>(b),
                         static_cast<double>(fb));
}

template <typename Scalar>
struct Maximum {
  Scalar argmax;
  Scalar value;
};

/// Golden-section search for the maximum of a unimodal function.
template <typename Scalar, typename F>
Maximum<Scalar> maximize_scalar(F&& g, Bracket<Scalar> bracket, Scalar tol) {
  using std::isfinite;
  using std::sqrt;
  if (!(bracket.lo < bracket.hi)) throw PreconditionError("maximize_scalar: need lo < hi");
  auto eval = [&](Scalar x) {
    const Scalar v = g(x);
    if (!isfinite(v)) throw EvaluationError("maximize_scalar: non-finite objective");
    return v;
  };
  const Scalar invphi = (sqrt(Scalar(5)) - 1) / 2;
  Scalar a = bracket.lo, b = bracket.hi;
  Scalar x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  Scalar f1 = eval(x1), f2 = eval(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = eval(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = eval(x1);
    }
  }
  Maximum<Scalar> best{x1, f1};
  if (f2 > best.value) best = {x2, f2};
  // the window ends may beat interior probes when the maximum sits on the boundary
  for (Scalar x : {bracket.lo, bracket.hi}) {
    const Scalar v = eval(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

template <typename Scalar>
struct PerronPair {
  Scalar value;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vector;  // positive, unit max-norm
  int iterations;
};

/// Dominant eigenpair of an entrywise positive matrix by power iteration.
///
/// Stops when the Collatz-Wielandt bounds min_i (Kv)_i / v_i <= rho <= max_i (Kv)_i / v_i
/// agree to tol relative; returns their midpoint.
template <typename Scalar>
PerronPair<Scalar> perron_eigenpair(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& K, Scalar tol,
                                    int max_iter = 100000) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (K.rows() != K.cols() || K.rows() == 0) throw PreconditionError("perron_eigenpair: need a square matrix");
  if (!(K.minCoeff() > 0)) throw PreconditionError("perron_eigenpair: matrix must be entrywise positive");
  Vector v = Vector::Ones(K.rows());
  for (int it = 1; it <= max_iter; ++it) {
    const Vector kv = K * v;
    const Vector ratio = kv.cwiseQuotient(v);
    const Scalar lo = ratio.minCoeff(), hi = ratio.maxCoeff();
    v = kv / kv.maxCoeff();
    if (hi - lo <= tol * hi) return {(lo + hi) / 2, v, it};
  }
  throw ConvergenceError("perron_eigenpair: maximum iterations exceeded", 0.0, 0.0);
}

/// max over z >= 0 of z / cosh z.
inline Maximum<double> max_z_sech_z() {
  return maximize_scalar([](double z) { return z / std::cosh(z); }, Bracket<double>{0.0, 3.0}, 1e-10);
}

}  // namespace bcsgap
