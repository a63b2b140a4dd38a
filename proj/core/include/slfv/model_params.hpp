#pragma once

#include <cmath>
#include <vector>

#include "slfv/radius_measure.hpp"
#include "slfv/vec.hpp"

namespace slfv {

/// Model parameters and the analytic quantities derived from them.
///
/// The simulation works directly in rescaled coordinates: time is sped up by n,
/// space shrunk by sqrt(n), so event radii are r/sqrt(n) and outputs compare
/// directly with the limiting objects. All derived rates below are in those
/// units.
class ModelParams {
 public:
  /// Validates and derives everything. Throws ParamError on bad input.
  static ModelParams create(int d, RadiusMeasure mu, double u, double n, double c = 4.0);

  int d() const { return d_; }
  const RadiusMeasure& mu() const { return mu_; }
  double u() const { return u_; }
  double n() const { return n_; }
  double c() const { return c_; }

  /// Selection probability per event: log(n)/n in d=2, 1/n in d>=3.
  double s_n() const { return s_n_; }
  /// Rescaled maximum event radius R/sqrt(n).
  double R_n() const { return R_n_; }
  /// Divergence threshold (log n)^{-c}; +inf at n=1.
  double gamma_n() const { return gamma_n_; }
  /// Per-unit-n jump rate: u * V_1 * \int r^d mu(dr).
  double lambda() const { return lambda_; }
  /// Diffusion constant of a single lineage; independent of n.
  double sigma2() const { return sigma2_; }

  bool selection_enabled() const { return s_n_ > 0.0; }

  /// The excursion analysis assumes the divergence threshold clears the
  /// excursion bands: gamma_n > 7 R_n. False at moderate n unless c is small.
  bool excursion_regime_ok() const { return gamma_n_ > 7.0 * R_n_; }

  /// Atom radii divided by sqrt(n), in measure order.
  const std::vector<double>& scaled_radii() const { return scaled_radii_; }

 private:
  ModelParams() : mu_({{1.0, 1.0}}) {}

  int d_ = 2;
  RadiusMeasure mu_;
  double u_ = 1.0;
  double n_ = 1.0;
  double c_ = 4.0;
  double s_n_ = 0.0;
  double R_n_ = 1.0;
  double gamma_n_ = 0.0;
  double lambda_ = 0.0;
  double sigma2_ = 0.0;
  std::vector<double> scaled_radii_;
};

/// Jump intensity density m_n at displacement magnitude `dist`; zero beyond
/// 2 R_n. The vector overload takes the displacement itself.
double jump_intensity_density(const ModelParams& p, double dist);
double jump_intensity_density(const ModelParams& p, const Vec2& z);

/// Total jump rate n * lambda (closed form).
double total_jump_rate(const ModelParams& p);

/// Quadrature mass of the jump intensity density; equals total_jump_rate up to
/// quadrature error. Exposed for cross-checks.
double total_jump_rate_quadrature(const ModelParams& p, double abs_tol = 1e-10);

/// Diffusion constant sigma^2 = (1/d) \int |z|^2 m_n(dz) by adaptive radial
/// quadrature. Throws NumericalError when the tolerance is not reached.
double diffusion_constant(const ModelParams& p, double abs_tol = 1e-10);

/// Pairwise coalescence rate density eta(x) = u^2 sum_r w_r V_r(0,|x|) of the
/// unscaled model, as a function of separation.
double coalescence_rate_density(const ModelParams& p, double dist);

/// \int eta(x) dx by quadrature.
double coalescence_rate_integral(const ModelParams& p, double abs_tol = 1e-10);

/// Neighbourhood size 2 d C_d sigma^2 / \int eta.
double neighbourhood_size(const ModelParams& p);

/// Coalescence rate of a lineage pair at separation `dist` in rescaled
/// simulation units (both covered and both marked).
double pair_coalescence_rate(const ModelParams& p, double dist);

}  // namespace slfv
