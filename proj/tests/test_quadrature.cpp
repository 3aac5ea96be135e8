#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "supcar/quadrature.hpp"

using namespace supcar;

TEST_CASE("smooth finite integrals hit closed forms") {
  auto r1 = quad::integrate([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(r1.converged);
  CHECK(r1.value == doctest::Approx(1.0 / 3.0).epsilon(1e-13));

  auto r2 = quad::integrate([](double x) { return std::sin(x); }, 0.0,
                            3.14159265358979323846);
  CHECK(r2.value == doctest::Approx(2.0).epsilon(1e-12));

  // kink at 0 forces subdivision
  auto r3 = quad::integrate([](double x) { return std::fabs(x); }, -1.0, 1.0);
  CHECK(r3.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("integrable endpoint singularities via dyadic shells") {
  auto r = quad::integrate_singular(
      [](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  CHECK(!r.diverged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));

  auto r2 = quad::integrate_singular(
      [](double x) { return std::pow(x, -0.8); }, 0.0, 1.0);
  CHECK(!r2.diverged);
  CHECK(r2.value == doctest::Approx(5.0).epsilon(1e-8));

  // singularity at the right endpoint
  auto r3 = quad::integrate_singular(
      [](double x) { return 1.0 / std::sqrt(1.0 - x); }, 1.0, 0.0);
  CHECK(r3.value == doctest::Approx(2.0).epsilon(1e-9));

  // log-singular, still integrable
  auto r4 = quad::integrate_singular([](double x) { return std::log(x); },
                                     0.0, 1.0);
  CHECK(r4.value == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("divergent singular integrals are flagged") {
  auto r = quad::integrate_singular([](double x) { return 1.0 / x; }, 0.0, 1.0);
  CHECK(r.diverged);
  auto r2 = quad::integrate_singular(
      [](double x) { return std::pow(x, -1.2); }, 0.0, 1.0);
  CHECK(r2.diverged);
}

TEST_CASE("geometric tail panels") {
  auto r = quad::integrate_tail([](double x) { return std::exp(-x); }, 0.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));

  auto r2 = quad::integrate_tail([](double x) { return 1.0 / (x * x); }, 1.0);
  CHECK(!r2.diverged);
  CHECK(r2.value == doctest::Approx(1.0).epsilon(1e-8));

  // damped oscillation: int_0^inf e^{-x} cos(3x) dx = 1/10
  auto r3 = quad::integrate_tail(
      [](double x) { return std::exp(-x) * std::cos(3.0 * x); }, 0.0);
  CHECK(r3.value == doctest::Approx(0.1).epsilon(1e-9));

  // standard normal density over (0, inf) = 1/2
  auto r4 = quad::integrate_tail(
      [](double x) {
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
      },
      0.0);
  CHECK(r4.value == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("divergent and slowly-convergent tails") {
  auto r = quad::integrate_tail([](double x) { return 1.0 / x; }, 1.0);
  CHECK(r.diverged);

  // x^{-1} (log x)^{-1/2}: partial sums ~ sqrt(log), divergent
  auto r2 = quad::integrate_tail(
      [](double x) { return 1.0 / (x * std::sqrt(std::log(x))); },
      2.718281828459045);
  CHECK(r2.diverged);

  // x^{-1} (log x)^{-3/2}: convergent (value 2), never flagged divergent
  auto r3 = quad::integrate_tail(
      [](double x) { return 1.0 / (x * std::pow(std::log(x), 1.5)); },
      2.718281828459045);
  CHECK(!r3.diverged);
  CHECK(r3.value == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("complex-valued integrands") {
  auto r = quad::integrate(
      [](double x) {
        return std::exp(std::complex<double>(0.0, 1.0) * x);
      },
      0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value.real() == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
  CHECK(r.value.imag() == doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-12));
}
