#pragma once

#include <cmath>
#include <utility>

namespace slfv {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

namespace detail {

template <class F>
QuadratureResult simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb,
                                 double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || depth <= 0) {
    return {left + right + delta / 15.0, std::abs(delta) / 15.0, std::abs(delta) <= 15.0 * tol};
  }
  QuadratureResult l = simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
  QuadratureResult r = simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  return {l.value + r.value, l.error_estimate + r.error_estimate, l.converged && r.converged};
}

}  // namespace detail

/// Adaptive Simpson quadrature with an absolute tolerance.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, double abs_tol, int max_depth = 48) {
  if (a == b) return {0.0, 0.0, true};
  const double fa = f(a);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_recurse(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

}  // namespace slfv
