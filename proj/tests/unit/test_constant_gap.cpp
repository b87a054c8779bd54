#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "bcsgap/constant_gap.hpp"
#include "support.hpp"

using namespace bcsgap;

namespace {

// Oracle quadrature: plain Gauss-Legendre on geometrically graded panels, no change of variables.
double graded_integral(const std::function<double(double)>& g, double a, double b) {
  const int panels = 48;
  const double ratio = std::pow(b / a, 1.0 / panels);
  double sum = 0, lo = a;
  for (int p = 0; p < panels; ++p) {
    const double hi = p + 1 == panels ? b : lo * ratio;
    sum += integrate(g, gauss_legendre(24, lo, hi));
    lo = hi;
  }
  return sum;
}

double bisect(const std::function<double(double)>& g, double lo, double hi) {
  double glo = g(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = (lo + hi) / 2, gm = g(mid);
    if ((gm > 0) == (glo > 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

double oracle_tau(double u, const ModelParams& m) {
  return bisect(
      [&](double T) {
        return u * graded_integral([T](double xi) { return std::tanh(xi / (2 * T)) / xi; }, m.epsilon, m.debye) - 1;
      },
      1e-6, 1.0);
}

double oracle_delta(double u, double T, const ModelParams& m) {
  return bisect(
      [&](double d) {
        return u * graded_integral(
                       [T, d](double xi) {
                         const double E = std::hypot(xi, d);
                         return std::tanh(E / (2 * T)) / E;
                       },
                       m.epsilon, m.debye) -
               1;
      },
      1e-12, 1.0);
}

}  // namespace

TEST_CASE("tau agrees with an independent graded-rule oracle") {
  for (double eps : {1e-3, 1e-4})
    for (double u : {0.2, 0.25, 0.3, 0.5}) {
      const ModelParams m{eps, 1.0};
      if (u * std::log(1 / eps) <= 1) continue;
      CHECK(tau(u, m) == doctest::Approx(oracle_tau(u, m)).epsilon(1e-10));
    }
}

TEST_CASE("zero-temperature gap matches the closed form") {
  // 1/u = asinh(debye / D) - asinh(eps / D)
  for (double u : {0.2, 0.3, 0.6}) {
    const ModelParams m{1e-3, 1.0};
    const double d0 = bisect(
        [&](double d) { return std::asinh(m.debye / d) - std::asinh(m.epsilon / d) - 1 / u; }, 1e-12, 1.0);
    CHECK(delta_const(u, 0.0, m) == doctest::Approx(d0).epsilon(1e-11));
  }
}

TEST_CASE("finite-temperature gap agrees with the oracle") {
  const ModelParams m{1e-3, 1.0};
  const double u = 0.3, t = tau(u, m);
  for (double s : {0.1, 0.5, 0.9, 0.99}) {
    const double T = s * t;
    CHECK(delta_const(u, T, m) == doctest::Approx(oracle_delta(u, T, m)).epsilon(1e-9));
  }
}

TEST_CASE("gap vanishes at and above tau and decreases below") {
  const ModelParams m{1e-3, 1.0};
  const Rule r = energy_rule(m);
  const double u = 0.3, t = tau(u, m, r);
  CHECK(delta_const(u, t, m, r) == 0.0);
  CHECK(delta_const(u, 2 * t, m, r) == 0.0);
  double prev = delta_const(u, 0.0, m, r);
  for (int k = 1; k < 40; ++k) {
    const double d = delta_const(u, t * k / 40.0, m, r);
    // below about tau / 5 the gap is flat to rounding, root-finding noise included
    if (k >= 8) {
      CHECK(d < prev);
    } else {
      CHECK(d <= prev * (1 + 1e-14));
    }
    CHECK(d > 0);
    prev = d;
  }
}

TEST_CASE("tau increases with the coupling") {
  const ModelParams m{1e-3, 1.0};
  double prev = 0;
  for (double u = 0.16; u < 1.0; u += 0.07) {
    const double t = tau(u, m);
    CHECK(t > prev);
    prev = t;
  }
}

TEST_CASE("gap equation identity at the computed gap") {
  const ModelParams m{1e-3, 1.0};
  const Rule r = energy_rule(m);
  const double u = 0.3, t = tau(u, m, r);
  for (double s : {0.0, 0.3, 0.6, 0.9, 0.999}) {
    const double T = s * t;
    const double d = delta_const(u, T, m, r);
    CHECK(gap_kernel_integral(u, T, d, m, r) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("weak-coupling ratio 2 Delta(0) / tau is near the universal value") {
  const ModelParams m{1e-4, 1.0};
  const double u = 0.2;
  const double ratio = 2 * delta_const(u, 0.0, m) / tau(u, m);
  CHECK(ratio > 3.50);
  CHECK(ratio < 3.56);
}

TEST_CASE("too weak a coupling has no vanishing temperature") {
  const ModelParams m{1e-3, 1.0};
  CHECK_THROWS_AS(tau(0.1, m), NoSolutionError);
  CHECK_THROWS_AS(delta_const(0.1, 0.01, m), NoSolutionError);
}

TEST_CASE("gap_curve samples in order") {
  const ModelParams m{1e-3, 1.0};
  const Rule r = energy_rule(m);
  const std::vector<double> ts{0.0, 0.01, 0.02, 0.05};
  const auto c = gap_curve(0.3, ts, m, r);
  REQUIRE(c.samples.size() == ts.size());
  CHECK(c.tau == doctest::Approx(tau(0.3, m, r)));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(c.samples[i].first == ts[i]);
    CHECK(c.samples[i].second == delta_const(0.3, ts[i], m, r));
  }
}
