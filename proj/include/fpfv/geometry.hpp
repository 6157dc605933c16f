#pragma once

#include <algorithm>
#include <cmath>

namespace fpfv {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Signed area of triangle (a,b,c); positive for counter-clockwise order.
inline double tri_signed_area(Vec2 a, Vec2 b, Vec2 c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

inline double tri_diameter(Vec2 a, Vec2 b, Vec2 c) {
  return std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
}

/// Circumcenter of a nondegenerate triangle.
inline Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
  const double d = 2.0 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
  const double b2 = (b - a).norm2();
  const double c2 = (c - a).norm2();
  const double ux = (c.y - a.y) * b2 - (b.y - a.y) * c2;
  const double uy = (b.x - a.x) * c2 - (c.x - a.x) * b2;
  return {a.x + ux / d, a.y + uy / d};
}

}  // namespace fpfv
