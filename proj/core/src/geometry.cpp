#include "slfv/geometry.hpp"

#include <cmath>

#include "slfv/errors.hpp"

namespace slfv {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double unit_ball_volume(int d) {
  switch (d) {
    case 2:
      return kPi;
    case 3:
      return 4.0 * kPi / 3.0;
    default:
      throw ParamError("unit_ball_volume: dimension must be 2 or 3");
  }
}

double ball_volume(double r, int d) {
  if (r < 0) throw ParamError("ball_volume: negative radius");
  return unit_ball_volume(d) * std::pow(r, d);
}

double sphere_area(double s, int d) {
  if (s < 0) throw ParamError("sphere_area: negative radius");
  switch (d) {
    case 2:
      return 2.0 * kPi * s;
    case 3:
      return 4.0 * kPi * s * s;
    default:
      throw ParamError("sphere_area: dimension must be 2 or 3");
  }
}

double lens_volume(double r, double rho, int d) {
  if (r <= 0) throw ParamError("lens_volume: radius must be positive");
  if (rho < 0) throw ParamError("lens_volume: separation must be nonnegative");
  if (rho >= 2.0 * r) return 0.0;
  switch (d) {
    case 2: {
      const double half = rho / (2.0 * r);
      return 2.0 * r * r * std::acos(half) - 0.5 * rho * std::sqrt(4.0 * r * r - rho * rho);
    }
    case 3: {
      const double h = 2.0 * r - rho;
      return kPi * h * h * (4.0 * r + rho) / 12.0;
    }
    default:
      throw ParamError("lens_volume: dimension must be 2 or 3");
  }
}

}  // namespace slfv
