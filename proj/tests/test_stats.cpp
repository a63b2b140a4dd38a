#include <doctest.h>

#include <cmath>
#include <vector>

#include "slfv/errors.hpp"
#include "slfv/rng.hpp"
#include "slfv/stats.hpp"

using namespace slfv;

TEST_CASE("wilson interval boundary and reference values") {
  const Interval zero = wilson_interval(0, 100, 0.95);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
  const Interval full = wilson_interval(100, 100, 0.95);
  CHECK(full.hi == 1.0);
  // closed-form Wilson value for (50, 100, 0.95)
  const Interval mid = wilson_interval(50, 100, 0.95);
  CHECK(mid.lo == doctest::Approx(0.403832).epsilon(1e-4));
  CHECK(mid.hi == doctest::Approx(0.596168).epsilon(1e-4));
  CHECK(mid.contains(0.5));
  CHECK_THROWS_AS(wilson_interval(5, 4, 0.95), ParamError);
}

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.9599639845).epsilon(1e-9));
  CHECK(normal_quantile(0.995) == doctest::Approx(2.5758293035).epsilon(1e-9));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
}

TEST_CASE("chi-square survival function") {
  CHECK(chi2_sf(3.0, 5.0) == doctest::Approx(0.6999858359).epsilon(1e-8));
  CHECK(chi2_sf(27.2, 9.0) == doctest::Approx(1.2960727169e-03).epsilon(1e-6));
}

TEST_CASE("kolmogorov survival function") {
  CHECK(kolmogorov_sf(1.5) == doctest::Approx(0.0222179626).epsilon(1e-8));
  CHECK(kolmogorov_sf(0.0) == 1.0);
}

TEST_CASE("ks statistic basics") {
  // constant sample against a continuous cdf concentrates mass at one point
  std::vector<double> constant(50, 0.3);
  const KsResult r = ks_test(constant, [](double x) { return x < 0 ? 0.0 : (x > 1 ? 1.0 : x); });
  CHECK(r.statistic >= 0.5);
  CHECK(r.statistic <= 1.0);
  CHECK_THROWS_AS(ks_test({}, [](double) { return 0.5; }), ParamError);
}

TEST_CASE("ks self-test: uniform samples against the uniform cdf") {
  RngStream rng(11, 0);
  int passes = 0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> xs;
    RngStream st = rng.child(rep);
    for (int i = 0; i < 10000; ++i) xs.push_back(st.uniform());
    const KsResult r = ks_test(xs, [](double x) { return x < 0 ? 0.0 : (x > 1 ? 1.0 : x); });
    if (r.p_value > 0.01) ++passes;
  }
  CHECK(passes >= 98);
}

TEST_CASE("two-sample ks separates shifted samples and accepts equal ones") {
  RngStream rng(12, 0);
  std::vector<double> a, b, c;
  for (int i = 0; i < 5000; ++i) {
    a.push_back(rng.normal());
    b.push_back(rng.normal());
    c.push_back(rng.normal() + 0.2);
  }
  CHECK(ks_test_two_sample(a, b).p_value > 0.01);
  CHECK(ks_test_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("chi-square gof accepts its own law and rejects a wrong one") {
  RngStream rng(13, 0);
  std::vector<double> obs(6, 0.0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) obs[rng.uniform_index(6)] += 1.0;
  std::vector<double> expected(6, n / 6.0);
  CHECK(chi2_gof(obs, expected).p_value > 0.01);
  std::vector<double> wrong = {n * 0.3, n * 0.14, n * 0.14, n * 0.14, n * 0.14, n * 0.14};
  CHECK(chi2_gof(obs, wrong).p_value < 1e-6);
}

TEST_CASE("moments and fits") {
  std::vector<double> xs = {1, 2, 3, 4, 5};
  std::vector<double> ys = {2.1, 3.9, 6.1, 8.0, 9.9};
  CHECK(mean(xs) == doctest::Approx(3.0));
  CHECK(variance(xs) == doctest::Approx(2.5));
  const LinearFit fit = linear_fit(xs, ys);
  CHECK(fit.slope == doctest::Approx(1.96).epsilon(0.01));
  CHECK(fit.r2 > 0.999);
  CHECK(correlation(xs, ys) > 0.999);
}
