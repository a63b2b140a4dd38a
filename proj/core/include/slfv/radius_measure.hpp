#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "slfv/errors.hpp"

namespace slfv {

struct RadiusAtom {
  double radius = 0.0;
  double weight = 0.0;
};

/// Finite discrete measure on (0, R]: a list of (radius, weight) atoms.
/// Atoms are kept sorted by radius; the largest atom defines R.
class RadiusMeasure {
 public:
  explicit RadiusMeasure(std::vector<RadiusAtom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ParamError("RadiusMeasure: needs at least one atom");
    for (const auto& a : atoms_) {
      if (!(a.radius > 0.0) || !std::isfinite(a.radius))
        throw ParamError("RadiusMeasure: radii must be positive and finite");
      if (!(a.weight > 0.0) || !std::isfinite(a.weight))
        throw ParamError("RadiusMeasure: weights must be positive and finite");
    }
    std::sort(atoms_.begin(), atoms_.end(),
              [](const RadiusAtom& a, const RadiusAtom& b) { return a.radius < b.radius; });
    for (std::size_t i = 1; i < atoms_.size(); ++i)
      if (atoms_[i].radius == atoms_[i - 1].radius)
        throw ParamError("RadiusMeasure: duplicate atom radius");
  }

  /// Single atom at `radius` with unit mass.
  static RadiusMeasure delta(double radius) { return RadiusMeasure({{radius, 1.0}}); }

  const std::vector<RadiusAtom>& atoms() const { return atoms_; }

  double max_radius() const { return atoms_.back().radius; }

  double total_mass() const {
    double s = 0;
    for (const auto& a : atoms_) s += a.weight;
    return s;
  }

  /// \int r^k mu(dr)
  double moment(int k) const {
    double s = 0;
    for (const auto& a : atoms_) s += a.weight * std::pow(a.radius, k);
    return s;
  }

 private:
  std::vector<RadiusAtom> atoms_;
};

}  // namespace slfv
