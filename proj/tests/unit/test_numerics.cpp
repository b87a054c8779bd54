#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

#include "bcsgap/numerics.hpp"
#include "support.hpp"

using namespace bcsgap;
using bcsgap::testing::Gen;

TEST_CASE("gauss_legendre integrates monomials up to degree 2n-1 exactly") {
  for (int n : {1, 2, 5, 16, 64}) {
    const Rule r = gauss_legendre(n, -0.5, 2.0, 3);
    r.validate();
    for (int k = 0; k <= 2 * n - 1 && k <= 40; ++k) {
      const double exact = (std::pow(2.0, k + 1) - std::pow(-0.5, k + 1)) / (k + 1);
      const double got = integrate([k](double x) { return std::pow(x, k); }, r);
      CHECK(got == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("gauss_legendre matches the Golub-Welsch eigenvalue construction") {
  for (int n : {4, 17, 64}) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const Rule r = gauss_legendre(n, -1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      const double w = 2 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
      CHECK(r.nodes[i] == doctest::Approx(es.eigenvalues()[i]).epsilon(1e-13).scale(1));
      CHECK(r.weights[i] == doctest::Approx(w).epsilon(1e-12));
    }
  }
}

TEST_CASE("extended precision instantiation") {
  const auto r = gauss_legendre<long double>(20, 0.0L, 1.0L);
  const long double got = integrate([](long double x) { return std::exp(x); }, r);
  CHECK(std::abs(got - (std::exp(1.0L) - 1)) < 1e-17L);
  CHECK(std::abs(r.weights.sum() - 1.0L) < 1e-18L);
}

TEST_CASE("log_gauss_legendre resolves 1/x near a small lower end") {
  const double eps = 1e-4;
  const Rule r = log_gauss_legendre(32, eps, 1.0);
  r.validate();
  CHECK(integrate([](double x) { return 1 / x; }, r) == doctest::Approx(-std::log(eps)).epsilon(1e-14));
  CHECK(r.weights.sum() == doctest::Approx(1 - eps).epsilon(1e-14));
  CHECK_THROWS_AS(log_gauss_legendre(8, 0.0, 1.0), PreconditionError);
}

TEST_CASE("integration is linear in the integrand") {
  Gen gen(11);
  const Rule r = gauss_legendre(24, 0.0, 3.0, 2);
  auto f = [](double x) { return std::sin(3 * x) + x * x; };
  auto g = [](double x) { return std::exp(-x) / (1 + x); };
  for (int trial = 0; trial < 200; ++trial) {
    const double a = gen.uniform(-10, 10), b = gen.uniform(-10, 10);
    const double lhs = integrate([&](double x) { return a * f(x) + b * g(x); }, r);
    const double rhs = a * integrate(f, r) + b * integrate(g, r);
    CHECK(std::abs(lhs - rhs) <= 1e-13 * (std::abs(a) + std::abs(b)) * 10);
  }
}

TEST_CASE("integrate reports the offending node of a non-finite integrand") {
  const Rule r = gauss_legendre(4, 0.0, 1.0);
  const double bad = r.nodes[2];
  try {
    integrate([bad](double x) { return x == bad ? std::nan("") : x; }, r);
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("node 2") != std::string::npos);
  }
}

TEST_CASE("rule validation") {
  Rule r = gauss_legendre(6, 0.0, 1.0);
  r.weights[3] = -r.weights[3];
  CHECK_THROWS_AS(r.validate(), PreconditionError);
  Rule s = gauss_legendre(6, 0.0, 1.0);
  std::swap(s.nodes[1], s.nodes[2]);
  CHECK_THROWS_AS(s.validate(), PreconditionError);
  CHECK_THROWS_AS(gauss_legendre(0, 0.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(gauss_legendre(4, 1.0, 1.0), PreconditionError);
}

TEST_CASE("find_root on classical examples") {
  const double dottie = find_root([](double x) { return std::cos(x) - x; }, Bracket<double>{0.0, 1.0}, 1e-15);
  CHECK(dottie == doctest::Approx(0.7390851332151607).epsilon(1e-15));
  const double cbrt2 = find_root([](double x) { return x * x * x - 2; }, Bracket<double>{0.0, 5.0}, 1e-15);
  CHECK(cbrt2 == doctest::Approx(std::cbrt(2.0)).epsilon(1e-15));
  CHECK(find_root([](double x) { return x; }, Bracket<double>{0.0, 1.0}, 1e-12) == 0.0);
}

TEST_CASE("find_root errors") {
  CHECK_THROWS_AS(find_root([](double x) { return x * x + 1; }, Bracket<double>{-1.0, 1.0}, 1e-12), BracketError);
  CHECK_THROWS_AS(find_root([](double x) { return x; }, Bracket<double>{1.0, -1.0}, 1e-12), PreconditionError);
  try {
    find_root([](double x) { return std::atan(x - 0.3); }, Bracket<double>{-50.0, 40.0}, 1e-300, 0.0, 2);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::isfinite(e.best_iterate()));
  }
}

TEST_CASE("find_root respects ftol") {
  int calls = 0;
  auto g = [&](double x) {
    ++calls;
    return x - 0.25;
  };
  const double x = find_root(g, Bracket<double>{0.0, 1.0}, 1e-300, 0.1);
  CHECK(std::abs(x - 0.25) <= 0.1);
}

TEST_CASE("max of z / cosh z agrees with the root of 1 = z tanh z") {
  const auto m = max_z_sech_z();
  const double z = find_root([](double t) { return 1 - t * std::tanh(t); }, Bracket<double>{0.5, 2.0}, 1e-15);
  CHECK(m.argmax == doctest::Approx(z).epsilon(1e-4));
  CHECK(m.value == doctest::Approx(z / std::cosh(z)).epsilon(1e-12));
}

TEST_CASE("maximize_scalar finds boundary maxima") {
  const auto m = maximize_scalar([](double x) { return x; }, Bracket<double>{0.0, 2.0}, 1e-10);
  CHECK(m.argmax == 2.0);
  CHECK(m.value == 2.0);
}

TEST_CASE("perron_eigenpair matches a dense eigensolver") {
  Gen gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = gen.integer(2, 30);
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) K(i, j) = gen.uniform(0.01, 1.0);
    const auto p = perron_eigenpair<double>(K, 1e-14);
    Eigen::EigenSolver<Eigen::MatrixXd> es(K);
    double dominant = 0;
    for (int i = 0; i < n; ++i) dominant = std::max(dominant, std::abs(es.eigenvalues()[i]));
    CHECK(p.value == doctest::Approx(dominant).epsilon(1e-13));
    CHECK((K * p.vector - p.value * p.vector).cwiseAbs().maxCoeff() < 1e-12 * p.value);
    CHECK(p.vector.minCoeff() > 0);
  }
  Eigen::MatrixXd Z = Eigen::MatrixXd::Ones(3, 3);
  Z(1, 2) = 0;
  CHECK_THROWS_AS(perron_eigenpair<double>(Z, 1e-12), PreconditionError);
}
