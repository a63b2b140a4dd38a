#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "slfv/model_params.hpp"
#include "slfv/rng.hpp"
#include "slfv/vec.hpp"

namespace slfv {

/// Single-lineage covering-event walk: proposals at rate n*lambda/u, marked
/// with probability u (first mark set), marked moves go to the first parent.
class SingleLineageWalk {
 public:
  SingleLineageWalk(const ModelParams& p, Vec2 pos, double t) : p_(&p), pos_(pos), t_(t) {
    rate_ = p.n() * p.lambda() / p.u();
    const auto& atoms = p.mu().atoms();
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      acc += atoms[i].weight * std::pow(atoms[i].radius, p.d());
      cdf_.push_back(acc);
    }
    for (double& c : cdf_) c /= acc;
  }

  struct Step {
    double t = 0.0;
    bool deadline_hit = false;
    bool moved = false;
    bool selective = false;  // valid when moved
    Vec2 center{};           // valid when moved
    double rho = 0.0;        // valid when moved
  };

  Step step(RngStream& rng, double deadline) {
    const double t_next = t_ + rng.exponential(rate_);
    Step s;
    if (t_next >= deadline) {
      t_ = deadline;
      s.t = deadline;
      s.deadline_hit = true;
      return s;
    }
    t_ = t_next;
    s.t = t_next;
    ++events_;
    const double rho = sample_radius(rng);
    const Vec2 center = rng.point_in_ball(pos_, rho);
    const double q = rng.uniform();
    if (q > p_->u()) return s;  // not marked
    const double v = rng.uniform();
    s.selective = v < p_->s_n();
    pos_ = center + rho * rng.unit_ball<2>();
    s.moved = true;
    s.center = center;
    s.rho = rho;
    return s;
  }

  const Vec2& position() const { return pos_; }
  double t() const { return t_; }
  std::uint64_t events() const { return events_; }

 private:
  double sample_radius(RngStream& rng) const {
    const auto& radii = p_->scaled_radii();
    if (radii.size() == 1) return radii[0];
    const double x = rng.uniform();
    for (std::size_t i = 0; i < cdf_.size(); ++i)
      if (x <= cdf_[i]) return radii[i];
    return radii.back();
  }

  const ModelParams* p_;
  Vec2 pos_;
  double t_;
  double rate_;
  std::vector<double> cdf_;
  std::uint64_t events_ = 0;
};

}  // namespace slfv
