#include "slfv/model_params.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "slfv/errors.hpp"
#include "slfv/geometry.hpp"
#include "slfv/quadrature.hpp"

namespace slfv {

ModelParams ModelParams::create(int d, RadiusMeasure mu, double u, double n, double c) {
  if (d != 2 && d != 3) throw ParamError("ModelParams: d must be 2 or 3");
  if (!(u > 0.0 && u <= 1.0)) throw ParamError("ModelParams: impact u must be in (0,1]");
  if (!(n >= 1.0) || !std::isfinite(n)) throw ParamError("ModelParams: n must be >= 1");
  if (!(c > 0.0)) throw ParamError("ModelParams: excursion exponent c must be positive");

  ModelParams p;
  p.d_ = d;
  p.mu_ = std::move(mu);
  p.u_ = u;
  p.n_ = n;
  p.c_ = c;
  p.s_n_ = d == 2 ? std::log(n) / n : 1.0 / n;
  if (p.s_n_ >= 1.0) throw ParamError("ModelParams: selection probability s_n must be below 1");
  const double sqrt_n = std::sqrt(n);
  p.R_n_ = p.mu_.max_radius() / sqrt_n;
  const double log_n = std::log(n);
  p.gamma_n_ = log_n > 0.0 ? std::pow(log_n, -c) : std::numeric_limits<double>::infinity();
  p.lambda_ = u * unit_ball_volume(d) * p.mu_.moment(d);
  for (const auto& a : p.mu_.atoms()) p.scaled_radii_.push_back(a.radius / sqrt_n);
  p.sigma2_ = diffusion_constant(p);
  return p;
}

double jump_intensity_density(const ModelParams& p, double dist) {
  if (dist < 0) throw ParamError("jump_intensity_density: negative distance");
  const double n = p.n();
  const double scale = n * p.u() * std::pow(n, 0.5 * p.d());
  double density = 0.0;
  const auto& atoms = p.mu().atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double rho = p.scaled_radii()[i];
    if (dist >= 2.0 * rho) continue;
    density += atoms[i].weight * lens_volume(rho, dist, p.d()) / ball_volume(rho, p.d());
  }
  return scale * density;
}

double jump_intensity_density(const ModelParams& p, const Vec2& z) {
  return jump_intensity_density(p, norm(z));
}

double total_jump_rate(const ModelParams& p) { return p.n() * p.lambda(); }

namespace {

// Integrate f(s) * sphere_area(s) over [0, 2*rho_max], split at the lens kinks.
double radial_integral(const ModelParams& p, const std::function<double(double)>& f,
                       double abs_tol, const char* what) {
  const auto& radii = p.scaled_radii();
  std::vector<double> cuts{0.0};
  for (double rho : radii) cuts.push_back(2.0 * rho);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  double achieved = 0.0;
  bool ok = true;
  const double seg_tol = abs_tol / static_cast<double>(cuts.size());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    auto res = adaptive_simpson([&](double s) { return f(s) * sphere_area(s, p.d()); }, cuts[i],
                                cuts[i + 1], seg_tol);
    total += res.value;
    achieved += res.error_estimate;
    ok = ok && res.converged;
  }
  if (!ok) throw NumericalError(std::string(what) + ": quadrature did not converge", achieved);
  return total;
}

}  // namespace

double total_jump_rate_quadrature(const ModelParams& p, double abs_tol) {
  return radial_integral(
      p, [&](double s) { return jump_intensity_density(p, s); },
      abs_tol * std::max(1.0, total_jump_rate(p)), "total_jump_rate_quadrature");
}

double diffusion_constant(const ModelParams& p, double abs_tol) {
  const double val = radial_integral(
      p, [&](double s) { return s * s * jump_intensity_density(p, s); }, abs_tol,
      "diffusion_constant");
  return val / p.d();
}

double coalescence_rate_density(const ModelParams& p, double dist) {
  if (dist < 0) throw ParamError("coalescence_rate_density: negative distance");
  double s = 0.0;
  for (const auto& a : p.mu().atoms()) {
    if (dist >= 2.0 * a.radius) continue;
    s += a.weight * lens_volume(a.radius, dist, p.d());
  }
  return p.u() * p.u() * s;
}

double coalescence_rate_integral(const ModelParams& p, double abs_tol) {
  std::vector<double> cuts{0.0};
  for (const auto& a : p.mu().atoms()) cuts.push_back(2.0 * a.radius);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  double achieved = 0.0;
  bool ok = true;
  const double seg_tol = abs_tol / static_cast<double>(cuts.size());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    auto res = adaptive_simpson(
        [&](double s) { return coalescence_rate_density(p, s) * sphere_area(s, p.d()); }, cuts[i],
        cuts[i + 1], seg_tol);
    total += res.value;
    achieved += res.error_estimate;
    ok = ok && res.converged;
  }
  if (!ok) throw NumericalError("coalescence_rate_integral: quadrature did not converge", achieved);
  return total;
}

double neighbourhood_size(const ModelParams& p) {
  return 2.0 * p.d() * unit_ball_volume(p.d()) * p.sigma2() / coalescence_rate_integral(p);
}

double pair_coalescence_rate(const ModelParams& p, double dist) {
  if (dist < 0) throw ParamError("pair_coalescence_rate: negative distance");
  const double scale = p.n() * std::pow(p.n(), 0.5 * p.d()) * p.u() * p.u();
  double s = 0.0;
  const auto& atoms = p.mu().atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double rho = p.scaled_radii()[i];
    if (dist >= 2.0 * rho) continue;
    s += atoms[i].weight * lens_volume(rho, dist, p.d());
  }
  return scale * s;
}

}  // namespace slfv
