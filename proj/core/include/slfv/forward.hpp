#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "slfv/event.hpp"
#include "slfv/model_params.hpp"
#include "slfv/rng.hpp"
#include "slfv/stats.hpp"
#include "slfv/vec.hpp"

namespace slfv {

/// Allele-frequency field on a 2-D torus: w in [0,1] per cell, the proportion
/// of the disfavoured type at the cell center.
class AlleleField {
 public:
  /// L/h must be an integer number of cells.
  AlleleField(double L, double h);

  static AlleleField constant(double L, double h, double value);
  static AlleleField from_function(double L, double h,
                                   const std::function<double(Vec2)>& w0);

  double L() const { return L_; }
  double h() const { return h_; }
  int cells_per_side() const { return nx_; }
  double t() const { return t_; }
  void set_t(double t) { t_ = t; }

  double& cell(int i, int j) { return w_[static_cast<std::size_t>(j) * nx_ + i]; }
  double cell(int i, int j) const { return w_[static_cast<std::size_t>(j) * nx_ + i]; }

  /// Value at an arbitrary point: the containing cell's value.
  double value_at(const Vec2& x) const;

  Vec2 cell_center(int i, int j) const;

  double spatial_mean() const;
  const std::vector<double>& raw() const { return w_; }
  std::vector<double>& raw() { return w_; }

 private:
  double L_, h_;
  int nx_;
  std::vector<double> w_;
  double t_ = 0.0;
};

/// Apply one reproduction event to the field. Neutral: one parent sampled at
/// x + r z1, every cell center in the ball moves to (1-u) w + u 1{parent
/// carries the type}. Selective: two parents, the indicator requires both.
/// Balls wrap around the torus.
void apply_forward_event(AlleleField& field, const Event<2>& ev, double u, RngStream& rng);

struct ForwardOptions {
  std::vector<double> observe_at;
  bool fidelity_warning_ok = true;  // accept L <= 10 R_n with a warning flag
};

struct ForwardRun {
  AlleleField field;
  std::vector<AlleleField> snapshots;
  std::uint64_t events = 0;
  bool small_torus_warning = false;  // L below 10 R_n
};

/// Forward SLFVS on the torus to time T: events arrive at the full rescaled
/// intensity restricted to the torus and are applied in time order.
ForwardRun simulate_forward(AlleleField field0, double T, const ModelParams& p, RngStream& rng,
                            const ForwardOptions& opts = {});

struct DualityReport {
  double lhs = 0.0;  // E prod_j w_T(x_j), forward replicates
  double lhs_se = 0.0;
  double rhs = 0.0;  // E prod_j w_0(xi_T^j), dual replicates
  double rhs_se = 0.0;
  double z = 0.0;    // two-sample z statistic
  bool ci_overlap = false;
  std::uint64_t replicates = 0;
  bool small_torus_warning = false;
};

/// Moment-duality check: forward moments of w_T at the sample points against
/// dual moments of w_0 at the ancestor positions, both by Monte Carlo on the
/// same torus event law. Disagreement is a result, not an error.
DualityReport duality_check(const std::vector<Vec2>& points,
                            const std::function<double(Vec2)>& w0, double T,
                            std::uint64_t replicates, const ModelParams& p, double L, double h,
                            RngStream& rng, double level = 0.95);

}  // namespace slfv
