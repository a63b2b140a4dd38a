#include "slfv/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "slfv/errors.hpp"

namespace slfv {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ParamError("normal_quantile: p must be in (0,1)");
  static const boost::math::normal dist;
  return boost::math::quantile(dist, p);
}

double normal_cdf(double x) {
  static const boost::math::normal dist;
  return boost::math::cdf(dist, x);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level) {
  if (trials == 0) throw ParamError("wilson_interval: trials must be positive");
  if (successes > trials) throw ParamError("wilson_interval: successes exceed trials");
  if (!(level > 0.0 && level < 1.0)) throw ParamError("wilson_interval: level must be in (0,1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double chi2_sf(double x, double df) {
  if (df <= 0) throw ParamError("chi2_sf: df must be positive");
  if (x <= 0) return 1.0;
  const boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

namespace {

// Stephens' small-sample adjustment for the asymptotic KS p-value.
double ks_p_value(double d, double effective_n) {
  const double rn = std::sqrt(effective_n);
  return kolmogorov_sf(d * (rn + 0.12 + 0.11 / rn));
}

}  // namespace

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ParamError("ks_test: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return {d, ks_p_value(d, n), sample.size()};
}

KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ParamError("ks_test_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double eff = na * nb / (na + nb);
  return {d, ks_p_value(d, eff), a.size() + b.size()};
}

namespace {

struct PooledBins {
  std::vector<double> observed;
  std::vector<double> expected;
};

// Pool adjacent bins until every expected count reaches 5.
PooledBins pool_bins(const std::vector<double>& obs, const std::vector<double>& exp) {
  PooledBins out;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    o_acc += obs[i];
    e_acc += exp[i];
    if (e_acc >= 5.0) {
      out.observed.push_back(o_acc);
      out.expected.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (!out.expected.empty()) {
      out.observed.back() += o_acc;
      out.expected.back() += e_acc;
    } else {
      out.observed.push_back(o_acc);
      out.expected.push_back(e_acc);
    }
  }
  return out;
}

}  // namespace

Chi2Result chi2_gof(const std::vector<double>& observed, const std::vector<double>& expected,
                    int ddof) {
  if (observed.size() != expected.size() || observed.empty())
    throw ParamError("chi2_gof: size mismatch or empty");
  const PooledBins bins = pool_bins(observed, expected);
  if (bins.expected.size() < 2) return {0.0, 0.0, 1.0};
  double stat = 0.0;
  for (std::size_t i = 0; i < bins.expected.size(); ++i) {
    const double diff = bins.observed[i] - bins.expected[i];
    stat += diff * diff / bins.expected[i];
  }
  const double df = static_cast<double>(bins.expected.size()) - 1.0 - ddof;
  if (df <= 0) return {stat, 0.0, 1.0};
  return {stat, df, chi2_sf(stat, df)};
}

Chi2Result chi2_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw ParamError("chi2_two_sample: size mismatch");
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i];
    nb += b[i];
  }
  if (na == 0 || nb == 0) throw ParamError("chi2_two_sample: empty sample");
  // expected counts under the pooled distribution; bins merged jointly so the
  // binning stays shared between the two samples
  std::vector<double> ea(a.size()), eb(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double pooled = (a[i] + b[i]) / (na + nb);
    ea[i] = pooled * na;
    eb[i] = pooled * nb;
  }
  std::vector<double> obs_a, obs_b, exp_a, exp_b;
  double oa = 0, ob = 0, xa = 0, xb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    oa += a[i];
    ob += b[i];
    xa += ea[i];
    xb += eb[i];
    if (xa >= 5.0 && xb >= 5.0) {
      obs_a.push_back(oa);
      obs_b.push_back(ob);
      exp_a.push_back(xa);
      exp_b.push_back(xb);
      oa = ob = xa = xb = 0;
    }
  }
  if ((xa > 0 || xb > 0) && !exp_a.empty()) {
    obs_a.back() += oa;
    obs_b.back() += ob;
    exp_a.back() += xa;
    exp_b.back() += xb;
  }
  if (exp_a.size() < 2) return {0.0, 0.0, 1.0};
  double stat = 0.0;
  for (std::size_t i = 0; i < exp_a.size(); ++i) {
    const double da = obs_a[i] - exp_a[i];
    const double db = obs_b[i] - exp_b[i];
    stat += da * da / exp_a[i] + db * db / exp_b[i];
  }
  const double df = static_cast<double>(exp_a.size()) - 1.0;
  return {stat, df, chi2_sf(stat, df)};
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw ParamError("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw ParamError("variance: need at least two samples");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw ParamError("correlation: bad sample sizes");
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParamError("linear_fit: bad sample sizes");
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace slfv
