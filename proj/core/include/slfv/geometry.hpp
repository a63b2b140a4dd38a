#pragma once

namespace slfv {

/// Volume of the unit ball in d dimensions (d in {2,3}).
double unit_ball_volume(int d);

/// Volume of a radius-r ball in d dimensions.
double ball_volume(double r, int d);

/// Surface measure of the radius-s sphere in d dimensions (2*pi*s or 4*pi*s^2).
double sphere_area(double s, int d);

/// Volume of the intersection of two radius-r balls whose centers are rho
/// apart. Circular-lens area in d=2, symmetric spherical lens in d=3.
/// Zero once rho >= 2r.
double lens_volume(double r, double rho, int d);

}  // namespace slfv
