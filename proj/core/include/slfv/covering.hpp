#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slfv/errors.hpp"
#include "slfv/event.hpp"
#include "slfv/model_params.hpp"
#include "slfv/rng.hpp"
#include "slfv/vec.hpp"

namespace slfv {

/// Superposed proposal rate for k tracked lineages: k * n * lambda / u. An
/// upper bound on the rate of events covering at least one of them.
inline double covering_rate(std::size_t k, const ModelParams& p) {
  if (k == 0) throw ParamError("covering_rate: empty position set");
  return static_cast<double>(k) * p.n() * p.lambda() / p.u();
}

/// Exact sampler for the Poisson point process of reproduction events
/// restricted to events whose ball covers at least one tracked lineage.
///
/// Thinning construction: propose at the superposed per-lineage rate, pick a
/// lineage uniformly, draw the radius with the covering (r^d-weighted) law,
/// place the center uniformly in the ball around the lineage, then accept with
/// probability 1/#covered. Exact for any number of lineages; a proposal draws
/// marks only once accepted, so the stream use per event is fixed.
template <int D>
class CoveringEventSampler {
 public:
  explicit CoveringEventSampler(const ModelParams& p, Domain domain = {})
      : params_(&p), domain_(domain) {
    const auto& atoms = p.mu().atoms();
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      acc += atoms[i].weight * std::pow(atoms[i].radius, D);
      radius_cdf_.push_back(acc);
    }
    for (double& c : radius_cdf_) c /= acc;
    if (domain_.torus() && domain_.L <= 4.0 * p.R_n())
      throw ParamError("CoveringEventSampler: torus side must exceed 4 R_n");
  }

  const Domain& domain() const { return domain_; }

  /// First event after t0 covering at least one position. Appends the covered
  /// indices (ascending) to `hits`.
  Event<D> next(std::span<const Vec<D>> positions, double t0, RngStream& rng,
                std::vector<std::uint32_t>& hits, EventCounters* counters = nullptr) const {
    if (positions.empty()) throw ParamError("next_covering_event: empty position set");
    const ModelParams& p = *params_;
    const double rate = covering_rate(positions.size(), p);
    double t = t0;
    for (;;) {
      t += rng.exponential(rate);
      const std::size_t j = rng.uniform_index(positions.size());
      const double rho = sample_scaled_radius(rng);
      const Vec<D> center = domain_.template wrap<D>(rng.point_in_ball(positions[j], rho));
      hits.clear();
      const double rho2 = rho * rho;
      for (std::uint32_t i = 0; i < positions.size(); ++i) {
        if (domain_.dist2(center, positions[i]) <= rho2) hits.push_back(i);
      }
      if (hits.empty()) hits.push_back(static_cast<std::uint32_t>(j));  // fp edge at |z|=1
      if (counters) ++counters->proposals;
      if (hits.size() > 1 && rng.uniform() * static_cast<double>(hits.size()) >= 1.0) {
        if (counters) ++counters->rejected;
        continue;
      }
      if (counters) ++counters->accepted;
      Event<D> ev;
      ev.t = t;
      ev.x = center;
      ev.r = rho;
      ev.q = rng.uniform();
      const double v = rng.uniform();
      ev.selective = v < p.s_n();
      ev.z1 = rng.unit_ball<D>();
      ev.z2 = rng.unit_ball<D>();
      return ev;
    }
  }

 private:
  double sample_scaled_radius(RngStream& rng) const {
    const auto& radii = params_->scaled_radii();
    if (radii.size() == 1) return radii[0];
    const double x = rng.uniform();
    for (std::size_t i = 0; i < radius_cdf_.size(); ++i)
      if (x <= radius_cdf_[i]) return radii[i];
    return radii.back();
  }

  const ModelParams* params_;
  Domain domain_;
  std::vector<double> radius_cdf_;
};

}  // namespace slfv
