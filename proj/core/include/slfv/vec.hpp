#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace slfv {

template <int D>
using Vec = std::array<double, D>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

template <int D>
inline Vec<D> operator+(const Vec<D>& a, const Vec<D>& b) {
  Vec<D> r;
  for (int i = 0; i < D; ++i) r[i] = a[i] + b[i];
  return r;
}

template <int D>
inline Vec<D> operator-(const Vec<D>& a, const Vec<D>& b) {
  Vec<D> r;
  for (int i = 0; i < D; ++i) r[i] = a[i] - b[i];
  return r;
}

template <int D>
inline Vec<D> operator*(double s, const Vec<D>& a) {
  Vec<D> r;
  for (int i = 0; i < D; ++i) r[i] = s * a[i];
  return r;
}

template <int D>
inline double norm2(const Vec<D>& a) {
  double s = 0;
  for (int i = 0; i < D; ++i) s += a[i] * a[i];
  return s;
}

template <int D>
inline double norm(const Vec<D>& a) {
  return std::sqrt(norm2(a));
}

/// Periodic simulation domain. L == 0 means the whole plane.
struct Domain {
  double L = 0.0;
  bool torus() const { return L > 0.0; }

  double wrap_coord(double x) const {
    if (!torus()) return x;
    x = std::fmod(x, L);
    if (x < 0) x += L;
    return x;
  }

  template <int D>
  Vec<D> wrap(Vec<D> p) const {
    if (!torus()) return p;
    for (int i = 0; i < D; ++i) p[i] = wrap_coord(p[i]);
    return p;
  }

  // shortest displacement component a-b on the torus
  double diff_coord(double a, double b) const {
    double d = a - b;
    if (!torus()) return d;
    if (d > 0.5 * L) d -= L;
    else if (d < -0.5 * L) d += L;
    return d;
  }

  template <int D>
  double dist2(const Vec<D>& a, const Vec<D>& b) const {
    double s = 0;
    for (int i = 0; i < D; ++i) {
      const double d = diff_coord(a[i], b[i]);
      s += d * d;
    }
    return s;
  }

  template <int D>
  double dist(const Vec<D>& a, const Vec<D>& b) const {
    return std::sqrt(dist2(a, b));
  }
};

}  // namespace slfv
