#include <doctest.h>

#include <cmath>
#include <numbers>

#include "initprop/activations.hpp"
#include "initprop/error.hpp"
#include "initprop/quadrature.hpp"

using namespace initprop;

namespace {

// Dense trapezoid of f(x) φ(x) on [-10, 10] with step 1e-4. Independent of the
// Gauss rules under test.
template <class F>
double trapezoid_normal(F f) {
  const double lo = -10.0, hi = 10.0, h = 1e-4;
  const int n = static_cast<int>(std::lround((hi - lo) / h));
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double x = lo + h * k;
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    sum += w * f(x) * std::exp(-0.5 * x * x);
  }
  return sum * h / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("Gauss-Hermite normal rule integrates Gaussian moments exactly") {
  for (int n : {1, 2, 5, 20, 128, 200}) {
    const auto rule = gauss_hermite_normal(n);
    REQUIRE(rule.size() == static_cast<std::size_t>(n));
    double w = 0.0, m2 = 0.0, m4 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double z = rule.nodes[i];
      w += rule.weights[i];
      m1 += rule.weights[i] * z;
      m2 += rule.weights[i] * z * z;
      m4 += rule.weights[i] * z * z * z * z;
    }
    CAPTURE(n);
    CHECK(w == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(m1) < 1e-13);
    if (n >= 2) CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    if (n >= 3) CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
    for (std::size_t i = 1; i < rule.size(); ++i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
  }
}

TEST_CASE("Gauss-Legendre rule is exact for low-degree polynomials") {
  for (int n : {1, 3, 10, 128}) {
    const auto rule = gauss_legendre(n);
    double w = 0.0, x2 = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      w += rule.weights[i];
      x2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
    }
    CAPTURE(n);
    CHECK(w == doctest::Approx(2.0).epsilon(1e-13));
    if (n >= 2) CHECK(x2 == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  }
}

TEST_CASE("invalid node counts are rejected") {
  CHECK_THROWS_AS(gauss_hermite_normal(0), Error);
  CHECK_THROWS_AS(gauss_legendre(-3), Error);
}

TEST_CASE("identity: moments of u Z") {
  const NormalQuadrature q(128);
  const auto m = q.moments(builtin("identity"), 1.0);
  CHECK(std::abs(m.mean) < 1e-14);
  CHECK(m.variance == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("relu: rectified Gaussian moments to 1e-10") {
  const NormalQuadrature q(128);
  for (double u : {0.1, 1.0, std::sqrt(3.0), 5.0, 10.0}) {
    const auto m = q.moments(builtin("relu"), u);
    CAPTURE(u);
    CHECK(std::abs(m.mean - u / std::sqrt(2.0 * std::numbers::pi)) < 1e-10 * std::max(1.0, u));
    CHECK(std::abs(m.second_moment - u * u / 2.0) < 1e-10 * std::max(1.0, u * u));
  }
}

TEST_CASE("tanh variance matches the dense trapezoid oracle") {
  // Var tanh(Z) = 0.394294490397841174416... (30-digit quadrature, frozen).
  constexpr double kFrozen = 0.39429449039784117;
  const double oracle = trapezoid_normal([](double x) { return std::tanh(x) * std::tanh(x); });
  CHECK(std::abs(oracle - kFrozen) < 1e-12);

  const NormalQuadrature q(200);
  const auto m = q.moments(builtin("tanh"), 1.0);
  CHECK(std::abs(m.mean) < 1e-14);
  CHECK(std::abs(m.variance - oracle) < 1e-12);
}

TEST_CASE("default 128 nodes resolve tanh up to u = 10") {
  // Frozen high-precision values of E[tanh(uZ)²].
  const std::pair<double, double> cases[] = {{0.5, 0.17351614343237185},
                                             {2.0, 0.63526123425693992},
                                             {5.0, 0.84296175956254369},
                                             {10.0, 0.92053686343051667}};
  const NormalQuadrature q(128);
  for (const auto& [u, expected] : cases) {
    const double dense =
        trapezoid_normal([u = u](double x) { return std::tanh(u * x) * std::tanh(u * x); });
    const auto m = q.moments(builtin("tanh"), u);
    CAPTURE(u);
    CHECK(std::abs(dense - expected) < 1e-10);
    CHECK(std::abs(m.variance - expected) < 1e-6);
  }
}

TEST_CASE("sigmoid moments at u = 1") {
  // E sigmoid(Z) = 1/2 by symmetry; Var = 0.0433790358580929627... (frozen).
  const NormalQuadrature q(128);
  const auto m = q.moments(builtin("sigmoid"), 1.0);
  CHECK(m.mean == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(m.variance - 0.043379035858092963) < 1e-12);
}

TEST_CASE("u = 0 collapses to g(0)") {
  const NormalQuadrature q(64);
  const auto m = q.moments(builtin("sigmoid"), 0.0);
  CHECK(m.mean == 0.5);
  CHECK(m.variance == 0.0);
  CHECK_THROWS_AS(q.moments(builtin("tanh"), -1.0), Error);
}

TEST_CASE("non-finite activation values surface as numeric-domain errors") {
  const auto blowup = custom([](double x) { return std::exp(x * x * x); });
  const NormalQuadrature q(64);
  try {
    q.moments(blowup, 10.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::numeric_domain);
  }
}
