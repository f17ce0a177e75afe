#pragma once

#include <array>
#include <vector>

#include "pspline/geometry.hpp"

namespace pspline {

/// Bivariate polynomial of total degree <= 3 in monomial form. Coefficient
/// order: 1, x, y, x^2, xy, y^2, x^3, x^2y, xy^2, y^3.
struct Cubic {
  std::array<double, 10> c{};

  double operator()(const Point2& p) const {
    const double x = p.x, y = p.y;
    return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y +
           c[6] * x * x * x + c[7] * x * x * y + c[8] * x * y * y + c[9] * y * y * y;
  }
};

/// Polar form of a cubic, evaluated directly from the monomial coefficients
/// by symmetrizing each monomial over the three arguments. Serves as the
/// reference route against which the de Casteljau blossom is checked.
double polarize(const Cubic& p, const Point2& a, const Point2& b, const Point2& d);

/// Cubic Bernstein-Bezier patch over a triangle. Coefficients are indexed by
/// multi-indices of weight 3 in the fixed order
///   300, 210, 201, 120, 111, 102, 030, 021, 012, 003
/// so files holding coefficient dumps are stable.
struct CubicPatch {
  std::array<Point2, 3> tri;
  std::array<double, 10> coeffs{};

  /// Position of a multi-index in the coefficient array.
  static int coeff_index(int a0, int a1, int a2);
  static const std::array<std::array<int, 3>, 10>& multi_indices();

  /// Value of the polynomial at p. The polynomial extends outside the
  /// triangle; barycentric coordinates simply go negative.
  double eval(const Point2& p) const { return blossom(p, p, p); }

  /// Polar form: symmetric, affine in each argument, diagonal equal to the
  /// polynomial. Three de Casteljau sweeps, one per argument.
  double blossom(const Point2& p1, const Point2& p2, const Point2& p3) const;

  /// Weight of each coefficient in blossom(p1, p2, p3); the blossom is the
  /// dot product of this row with the coefficient vector.
  static std::array<double, 10> blossom_weights(const std::array<Point2, 3>& tri,
                                                const Point2& p1, const Point2& p2,
                                                const Point2& p3);

  /// First directional derivative along d (a displacement, not a point).
  double deriv1(const Point2& p, const Point2& d) const;
  /// Second directional derivative along d1 then d2.
  double deriv2(const Point2& p, const Point2& d1, const Point2& d2) const;
  /// Derivative of order 1 or 2 along a single direction.
  double directional_derivative(const Point2& p, const Point2& d, int order) const;

  std::array<double, 2> gradient(const Point2& p) const {
    return {deriv1(p, {1.0, 0.0}), deriv1(p, {0.0, 1.0})};
  }
  /// Hessian entries (dxx, dxy, dyy).
  std::array<double, 3> hessian(const Point2& p) const {
    return {deriv2(p, {1.0, 0.0}, {1.0, 0.0}), deriv2(p, {1.0, 0.0}, {0.0, 1.0}),
            deriv2(p, {0.0, 1.0}, {0.0, 1.0})};
  }

  /// Patch representing the polynomial on the given triangle; coefficients
  /// are the polar form taken at corner triples.
  static CubicPatch from_polynomial(const Cubic& p, const std::array<Point2, 3>& tri);
};

/// Residuals of the blossom equalities characterizing C^r contact of two
/// patches across an edge. order 0: the four coefficients along the edge;
/// order 1: three equalities with one argument off the edge; order 2: two
/// equalities with two arguments off the edge.
struct SmoothnessReport {
  int order = 0;
  std::vector<double> residuals;
  double max_residual = 0.0;
};

/// Check C^order contact of a and b across the (shared) edge from e1 to e2.
/// For order >= 1 the C^0 residual must already be below c0_tol times the
/// coefficient scale, otherwise the patches do not actually meet along the
/// edge and the higher-order conditions are meaningless. scale_hint widens
/// the gate for patches that are tiny pieces of a larger spline (pass its
/// overall coefficient scale).
SmoothnessReport check_smoothness(const CubicPatch& a, const CubicPatch& b, const Point2& e1,
                                  const Point2& e2, int order, double c0_tol = 1e-10,
                                  double scale_hint = 0.0);

}  // namespace pspline
