#include "pspline/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pspline {

namespace {

constexpr std::array<std::array<int, 3>, 10> kMulti = {{{3, 0, 0},
                                                        {2, 1, 0},
                                                        {2, 0, 1},
                                                        {1, 2, 0},
                                                        {1, 1, 1},
                                                        {1, 0, 2},
                                                        {0, 3, 0},
                                                        {0, 2, 1},
                                                        {0, 1, 2},
                                                        {0, 0, 3}}};

// One de Casteljau reduction of a degree-3 coefficient vector with the
// barycentric weights u. Degree-2 index order: 200,110,101,020,011,002.
std::array<double, 6> reduce3(const std::array<double, 10>& b, const std::array<double, 3>& u) {
  return {u[0] * b[0] + u[1] * b[1] + u[2] * b[2], u[0] * b[1] + u[1] * b[3] + u[2] * b[4],
          u[0] * b[2] + u[1] * b[4] + u[2] * b[5], u[0] * b[3] + u[1] * b[6] + u[2] * b[7],
          u[0] * b[4] + u[1] * b[7] + u[2] * b[8], u[0] * b[5] + u[1] * b[8] + u[2] * b[9]};
}

std::array<double, 3> reduce2(const std::array<double, 6>& b, const std::array<double, 3>& u) {
  return {u[0] * b[0] + u[1] * b[1] + u[2] * b[2], u[0] * b[1] + u[1] * b[3] + u[2] * b[4],
          u[0] * b[2] + u[1] * b[4] + u[2] * b[5]};
}

double reduce1(const std::array<double, 3>& b, const std::array<double, 3>& u) {
  return u[0] * b[0] + u[1] * b[1] + u[2] * b[2];
}

double blossom_impl(const std::array<Point2, 3>& tri, const std::array<double, 10>& coeffs,
                    const Point2& p1, const Point2& p2, const Point2& p3) {
  const auto u1 = barycentric(p1, tri[0], tri[1], tri[2]);
  const auto u2 = barycentric(p2, tri[0], tri[1], tri[2]);
  const auto u3 = barycentric(p3, tri[0], tri[1], tri[2]);
  return reduce1(reduce2(reduce3(coeffs, u1), u2), u3);
}

}  // namespace

double polarize(const Cubic& p, const Point2& a, const Point2& b, const Point2& d) {
  const double x1 = a.x, y1 = a.y, x2 = b.x, y2 = b.y, x3 = d.x, y3 = d.y;
  double v = p.c[0];
  v += p.c[1] * (x1 + x2 + x3) / 3.0;
  v += p.c[2] * (y1 + y2 + y3) / 3.0;
  v += p.c[3] * (x1 * x2 + x1 * x3 + x2 * x3) / 3.0;
  v += p.c[4] * (x1 * y2 + x1 * y3 + x2 * y1 + x2 * y3 + x3 * y1 + x3 * y2) / 6.0;
  v += p.c[5] * (y1 * y2 + y1 * y3 + y2 * y3) / 3.0;
  v += p.c[6] * x1 * x2 * x3;
  v += p.c[7] * (x1 * x2 * y3 + x1 * y2 * x3 + y1 * x2 * x3) / 3.0;
  v += p.c[8] * (x1 * y2 * y3 + y1 * x2 * y3 + y1 * y2 * x3) / 3.0;
  v += p.c[9] * y1 * y2 * y3;
  return v;
}

int CubicPatch::coeff_index(int a0, int a1, int a2) {
  for (int i = 0; i < 10; ++i)
    if (kMulti[i][0] == a0 && kMulti[i][1] == a1 && kMulti[i][2] == a2) return i;
  throw std::invalid_argument("coeff_index: not a weight-3 multi-index");
}

const std::array<std::array<int, 3>, 10>& CubicPatch::multi_indices() { return kMulti; }

double CubicPatch::blossom(const Point2& p1, const Point2& p2, const Point2& p3) const {
  return blossom_impl(tri, coeffs, p1, p2, p3);
}

std::array<double, 10> CubicPatch::blossom_weights(const std::array<Point2, 3>& tri,
                                                   const Point2& p1, const Point2& p2,
                                                   const Point2& p3) {
  std::array<double, 10> w{};
  std::array<double, 10> unit{};
  for (int i = 0; i < 10; ++i) {
    unit.fill(0.0);
    unit[i] = 1.0;
    w[i] = blossom_impl(tri, unit, p1, p2, p3);
  }
  return w;
}

double CubicPatch::deriv1(const Point2& p, const Point2& d) const {
  return 3.0 * (blossom(p, p, p + d) - blossom(p, p, p));
}

double CubicPatch::deriv2(const Point2& p, const Point2& d1, const Point2& d2) const {
  return 6.0 * (blossom(p, p + d1, p + d2) - blossom(p, p, p + d1) - blossom(p, p, p + d2) +
                blossom(p, p, p));
}

double CubicPatch::directional_derivative(const Point2& p, const Point2& d, int order) const {
  if (order == 1) return deriv1(p, d);
  if (order == 2) return deriv2(p, d, d);
  throw std::invalid_argument("directional_derivative: order must be 1 or 2");
}

CubicPatch CubicPatch::from_polynomial(const Cubic& p, const std::array<Point2, 3>& tri) {
  CubicPatch patch;
  patch.tri = tri;
  for (int i = 0; i < 10; ++i) {
    std::array<Point2, 3> args;
    int n = 0;
    for (int corner = 0; corner < 3; ++corner)
      for (int rep = 0; rep < kMulti[i][corner]; ++rep) args[n++] = tri[corner];
    patch.coeffs[i] = polarize(p, args[0], args[1], args[2]);
  }
  return patch;
}

SmoothnessReport check_smoothness(const CubicPatch& a, const CubicPatch& b, const Point2& e1,
                                  const Point2& e2, int order, double c0_tol, double scale_hint) {
  if (order < 0 || order > 2) throw std::invalid_argument("check_smoothness: order must be 0..2");
  const Point2 edge = e2 - e1;
  const double elen = norm(edge);
  if (elen == 0.0) throw std::invalid_argument("check_smoothness: zero-length edge");

  double scale = scale_hint;
  for (double c : a.coeffs) scale = std::max(scale, std::abs(c));
  for (double c : b.coeffs) scale = std::max(scale, std::abs(c));
  scale = std::max(scale, 1e-300);

  // Offline corner of a patch: the corner farthest from the edge line.
  auto offline_corner = [&](const CubicPatch& patch) {
    double best = -1.0;
    Point2 q;
    for (const Point2& corner : patch.tri) {
      const double h = std::abs(cross(corner - e1, edge)) / elen;
      if (h > best) {
        best = h;
        q = corner;
      }
    }
    if (best <= 1e-12 * elen)
      throw std::invalid_argument("check_smoothness: patch degenerate against edge");
    return q;
  };

  SmoothnessReport rep;
  rep.order = order;

  auto c0_residuals = [&]() {
    std::vector<double> r;
    r.push_back(std::abs(a.blossom(e1, e1, e1) - b.blossom(e1, e1, e1)));
    r.push_back(std::abs(a.blossom(e1, e1, e2) - b.blossom(e1, e1, e2)));
    r.push_back(std::abs(a.blossom(e1, e2, e2) - b.blossom(e1, e2, e2)));
    r.push_back(std::abs(a.blossom(e2, e2, e2) - b.blossom(e2, e2, e2)));
    return r;
  };

  if (order == 0) {
    rep.residuals = c0_residuals();
  } else {
    const auto c0 = c0_residuals();
    const double c0_max = *std::max_element(c0.begin(), c0.end());
    if (c0_max > c0_tol * scale)
      throw std::invalid_argument("check_smoothness: patches do not share the edge (C0 fails)");
    if (order == 1) {
      const Point2 q = offline_corner(a);
      rep.residuals = {std::abs(a.blossom(e1, e1, q) - b.blossom(e1, e1, q)),
                       std::abs(a.blossom(e1, e2, q) - b.blossom(e1, e2, q)),
                       std::abs(a.blossom(e2, e2, q) - b.blossom(e2, e2, q))};
    } else {
      const Point2 q1 = offline_corner(a);
      const Point2 q2 = offline_corner(b);
      rep.residuals = {std::abs(a.blossom(e1, q1, q2) - b.blossom(e1, q1, q2)),
                       std::abs(a.blossom(e2, q1, q2) - b.blossom(e2, q1, q2))};
    }
  }
  rep.max_residual = *std::max_element(rep.residuals.begin(), rep.residuals.end());
  return rep;
}

}  // namespace pspline
