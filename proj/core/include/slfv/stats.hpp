#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace slfv {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

/// Quantile of the standard normal distribution.
double normal_quantile(double p);
double normal_cdf(double x);

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level);

/// Survival function of the Kolmogorov distribution.
double kolmogorov_sf(double x);

/// Upper tail of the chi-squared distribution.
double chi2_sf(double x, double df);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov test against a cdf (asymptotic p-value).
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b);

struct Chi2Result {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Goodness-of-fit chi-square. `expected` are expected counts (same length as
/// `observed`); adjacent bins are pooled until each expected count is >= 5.
/// ddof is subtracted from the degrees of freedom.
Chi2Result chi2_gof(const std::vector<double>& observed, const std::vector<double>& expected,
                    int ddof = 0);

/// Two-sample chi-square on a shared binning.
Chi2Result chi2_two_sample(const std::vector<double>& a, const std::vector<double>& b);

double mean(std::span<const double> xs);
/// Unbiased sample variance.
double variance(std::span<const double> xs);
/// Pearson correlation of two equal-length samples.
double correlation(std::span<const double> xs, std::span<const double> ys);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace slfv
