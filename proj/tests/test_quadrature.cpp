#include <doctest.h>

#include <cmath>

#include "slfv/quadrature.hpp"

using namespace slfv;

TEST_CASE("polynomials are integrated to near machine precision") {
  auto r = adaptive_simpson([](double x) { return x * x * x - 2 * x + 1; }, -1.0, 3.0, 1e-12);
  // exact: x^4/4 - x^2 + x over [-1,3] = 16
  CHECK(r.converged);
  CHECK(std::abs(r.value - 16.0) < 1e-10);
}

TEST_CASE("smooth transcendental integrand") {
  auto r = adaptive_simpson([](double x) { return std::exp(-x * x); }, 0.0, 6.0, 1e-12);
  const double half_sqrt_pi = 0.88622692545275801;  // sqrt(pi)/2
  CHECK(r.converged);
  CHECK(std::abs(r.value - half_sqrt_pi) < 1e-10);
}

TEST_CASE("kinked integrand still converges with interval splitting") {
  auto f = [](double x) { return x < 1.0 ? x : 2.0 - x; };
  auto left = adaptive_simpson(f, 0.0, 1.0, 1e-12);
  auto right = adaptive_simpson(f, 1.0, 2.0, 1e-12);
  CHECK(left.converged);
  CHECK(right.converged);
  CHECK(std::abs(left.value + right.value - 1.0) < 1e-10);
}

TEST_CASE("empty interval") {
  auto r = adaptive_simpson([](double x) { return x; }, 2.0, 2.0, 1e-12);
  CHECK(r.value == 0.0);
}
