#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace pspline {

/// Point (or displacement) in the plane. Used for both; geometry here is
/// small enough that a separate vector type would only add noise.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2() = default;
  Point2(double px, double py) : x(px), y(py) {}

  Point2& operator+=(const Point2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Point2& operator-=(const Point2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Point2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
};

inline Point2 operator+(Point2 a, const Point2& b) { return a += b; }
inline Point2 operator-(Point2 a, const Point2& b) { return a -= b; }
inline Point2 operator*(double s, Point2 p) { return p *= s; }
inline Point2 operator*(Point2 p, double s) { return p *= s; }
inline bool operator==(const Point2& a, const Point2& b) { return a.x == b.x && a.y == b.y; }

inline double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2& a) { return std::hypot(a.x, a.y); }
inline double dist(const Point2& a, const Point2& b) { return norm(a - b); }

inline bool is_finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Twice the signed area of triangle (a, b, c); positive for counterclockwise.
inline double signed_area2(const Point2& a, const Point2& b, const Point2& c) {
  return cross(b - a, c - a);
}

/// Barycentric coordinates of p with respect to triangle (a, b, c).
/// Valid for any p in the plane; coordinates may be negative outside.
inline std::array<double, 3> barycentric(const Point2& p, const Point2& a, const Point2& b,
                                         const Point2& c) {
  const double denom = signed_area2(a, b, c);
  if (denom == 0.0) throw std::invalid_argument("barycentric: degenerate triangle");
  return {signed_area2(p, b, c) / denom, signed_area2(a, p, c) / denom,
          signed_area2(a, b, p) / denom};
}

inline Point2 barycenter(const Point2& a, const Point2& b, const Point2& c) {
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

/// Incenter: side-length weighted combination of the corners, each weight
/// being the length of the opposite side.
inline Point2 incenter(const Point2& a, const Point2& b, const Point2& c) {
  const double la = dist(b, c);
  const double lb = dist(c, a);
  const double lc = dist(a, b);
  const double s = la + lb + lc;
  if (s == 0.0) throw std::invalid_argument("incenter: degenerate triangle");
  return {(la * a.x + lb * b.x + lc * c.x) / s, (la * a.y + lb * b.y + lc * c.y) / s};
}

}  // namespace pspline
