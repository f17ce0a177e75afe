#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "pspline/bezier.hpp"
#include "pspline/mesh.hpp"

namespace pspline::testing {

inline Triangulation unit_right_triangle() {
  return build_triangulation({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {{0, 1, 2}});
}

/// Unit square split by the diagonal from (1,0) to (0,1).
inline Triangulation square_two_triangles() {
  return build_triangulation({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}},
                             {{0, 1, 2}, {1, 3, 2}});
}

/// nx-by-ny grid of squares, each split into two triangles (three-directional
/// when unjittered). Interior vertices optionally jittered, seed-controlled.
inline Triangulation grid_mesh(int nx, int ny, double jitter = 0.0, unsigned seed = 0) {
  std::vector<Point2> verts;
  const double hx = 1.0 / nx, hy = 1.0 / ny;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      Point2 p{i * hx, j * hy};
      if (jitter > 0.0 && i > 0 && i < nx && j > 0 && j < ny) {
        p.x += u(rng) * hx;
        p.y += u(rng) * hy;
      }
      verts.push_back(p);
    }
  std::vector<std::array<int, 3>> tris;
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
      tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return build_triangulation(std::move(verts), std::move(tris));
}

inline Cubic random_cubic(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Cubic p;
  for (double& c : p.c) c = u(rng);
  return p;
}

inline Point2 random_point(std::mt19937& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng)};
}

/// Monomial-basis product of two linear polynomials (a0 + a1 x + a2 y).
inline std::array<double, 6> linear_times_linear(const std::array<double, 3>& a,
                                                 const std::array<double, 3>& b) {
  // Quadratic order: 1, x, y, x^2, xy, y^2.
  return {a[0] * b[0],
          a[0] * b[1] + a[1] * b[0],
          a[0] * b[2] + a[2] * b[0],
          a[1] * b[1],
          a[1] * b[2] + a[2] * b[1],
          a[2] * b[2]};
}

/// Cubic = quadratic * linear, in the monomial orders used above.
inline Cubic quadratic_times_linear(const std::array<double, 6>& q,
                                    const std::array<double, 3>& l) {
  Cubic p;
  p.c.fill(0.0);
  // 1, x, y, x2, xy, y2 each times 1, x, y.
  auto add = [&](int idx, double v) { p.c[idx] += v; };
  add(0, q[0] * l[0]);
  add(1, q[0] * l[1] + q[1] * l[0]);
  add(2, q[0] * l[2] + q[2] * l[0]);
  add(3, q[1] * l[1] + q[3] * l[0]);
  add(4, q[1] * l[2] + q[2] * l[1] + q[4] * l[0]);
  add(5, q[2] * l[2] + q[5] * l[0]);
  add(6, q[3] * l[1]);
  add(7, q[3] * l[2] + q[4] * l[1]);
  add(8, q[4] * l[2] + q[5] * l[1]);
  add(9, q[5] * l[2]);
  return p;
}

}  // namespace pspline::testing
