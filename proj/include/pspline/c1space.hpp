#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pspline/bezier.hpp"
#include "pspline/mesh.hpp"
#include "pspline/parallel.hpp"

namespace pspline {

/// Triangle attached to a base vertex, enclosing the vertex itself and the
/// one-third points toward every incident split point and edge split point.
struct VertexTriangleQ {
  std::array<Point2, 3> q;
};

/// Enclosing triangles for all base vertices: equilateral, centered at the
/// centroid of the mandated points, circumradius 1.3 times the farthest
/// mandated point, one corner along +x. Deterministic and translation
/// equivariant.
std::vector<VertexTriangleQ> choose_vertex_triangles(const PSRefinement& ps);

/// Dual functional of the C1 space: a blossom value of the spline restricted
/// to a designated micro-triangle.
struct DualFunctionalC1 {
  enum class Kind { Vertex, Triangle, BoundaryEdge };
  Kind kind = Kind::Vertex;
  int vertex = -1, r = -1;  // Vertex: blossom at (v, v, v + 3(q_r - v))
  int macro = -1, slot = -1; // Triangle: blossom at (v_a, v_b, c_m) on micro (a,b,c)
  int edge = -1, orient = 0; // BoundaryEdge: blossom at (v_a, v_b, v_ab); orient 0 means a < b
};

/// Piecewise cubic over a Powell-Sabin refinement, one patch per
/// micro-triangle (slot s of macro m lives at index 6 m + s).
class SplineFunction {
 public:
  SplineFunction(std::shared_ptr<const PSRefinement> ps, std::vector<CubicPatch> patches)
      : ps_(std::move(ps)), patches_(std::move(patches)) {}

  const PSRefinement& refinement() const { return *ps_; }
  std::shared_ptr<const PSRefinement> refinement_ptr() const { return ps_; }
  const std::vector<CubicPatch>& patches() const { return patches_; }
  const CubicPatch& patch(int macro, int slot) const { return patches_[6 * macro + slot]; }

  /// Containing (macro, slot); first hit wins on ties. Throws if p is
  /// outside the domain beyond tolerance.
  std::pair<int, int> locate(const Point2& p) const;
  double eval(const Point2& p) const;
  std::array<double, 2> gradient(const Point2& p) const;

  double max_abs_coeff() const;

 private:
  std::shared_ptr<const PSRefinement> ps_;
  std::vector<CubicPatch> patches_;
};

/// Smoothness residuals of a spline over every interior edge of the
/// refinement, plus the agreement of second derivatives at the split points
/// when order 2 is requested.
struct GlobalSmoothnessReport {
  int order = 0;
  std::vector<PSEdge> edges;
  std::vector<SmoothnessReport> reports;
  /// Order 2 only: per macro-triangle, the maximal deviation of the six
  /// patch Hessians at the split point.
  std::vector<double> split_point_residuals;
  double max_residual = 0.0;
  /// Max over MacroCross and spoke families separately.
  double max_cross_macro = 0.0;
  double max_spoke = 0.0;
};

GlobalSmoothnessReport verify_global_smoothness(const SplineFunction& s, int order);

/// The C1 cubic spline space over a Powell-Sabin refinement, addressed
/// through its dual basis. Functional order: vertex block (vertex index,
/// then r), micro-triangle block (macro index, then slot), boundary
/// half-edge block (edges ascending, orientation (a,b) then (b,a)).
class C1Space {
 public:
  explicit C1Space(std::shared_ptr<const PSRefinement> ps);

  const PSRefinement& refinement() const { return *ps_; }
  std::shared_ptr<const PSRefinement> refinement_ptr() const { return ps_; }
  const std::vector<VertexTriangleQ>& vertex_triangles() const { return qtris_; }

  std::size_t dim() const { return dim_; }
  DualFunctionalC1 functional(std::size_t idx) const;
  std::size_t vertex_index(int v, int r) const { return 3 * static_cast<std::size_t>(v) + r; }
  std::size_t triangle_index(int macro, int slot) const {
    return vertex_block_ + 6 * static_cast<std::size_t>(macro) + slot;
  }
  std::size_t boundary_edge_index(int edge, int orient) const;

  /// Apply one dual functional to a spline on the same refinement.
  double apply_dual(const SplineFunction& s, std::size_t idx) const;
  double apply_dual(const SplineFunction& s, const DualFunctionalC1& f) const;

  /// All dual coefficients of a spline. The spline must be C1 within
  /// tolerance for the vertex functionals to be meaningful; verify checks
  /// this and throws when violated.
  std::vector<double> analyze(const SplineFunction& s, bool verify = true) const;

  /// Spline with the given dual coefficients (Kronecker data reproduced by
  /// construction, verified against the local solver residual).
  SplineFunction synthesize(std::span<const double> coeffs) const;

  /// Basis function b: synthesize of the b-th unit coefficient vector,
  /// solved only over its support.
  SplineFunction basis_function(std::size_t b) const;

  /// Macro-triangles on which a spline with the given coefficients can be
  /// nonzero.
  std::vector<int> support_macros(std::span<const double> coeffs) const;
  std::vector<int> support_macros_of_basis(std::size_t b) const;

  /// Point reproduced by the functional when applied to linear polynomials.
  Point2 greville_point(std::size_t idx) const;

  /// The three blossom arguments defining functional idx.
  std::array<Point2, 3> functional_points(std::size_t idx) const;

  /// Solve one macro-triangle from its 21 local functional values:
  /// 9 vertex values (sorted corners, r ascending), 6 own micro values
  /// (slot order), then per macro edge in slot-pair order ({i,j}, {j,k},
  /// {k,i}) the two edge blossom values at (v_a, v_b, v_ab) oriented as the
  /// adjacent slots. Returns the six patches.
  std::array<CubicPatch, 6> local_dual_to_bb(int macro, const std::array<double, 21>& values) const;

  double condition_estimate(int macro) const;
  double max_condition_estimate() const;

  /// Fold the coefficients of a full dual vector into the 21 local values
  /// of one macro-triangle.
  std::array<double, 21> local_values(int macro, std::span<const double> coeffs) const;

 private:
  struct MacroSolver;

  std::shared_ptr<const PSRefinement> ps_;
  std::vector<VertexTriangleQ> qtris_;
  std::size_t vertex_block_ = 0, triangle_block_ = 0, dim_ = 0;
  std::vector<int> boundary_edge_rank_; // per edge, rank among boundary edges or -1
  std::vector<int> boundary_edges_;     // boundary edge ids ascending
  std::vector<int> vertex_macro_;       // per vertex, first incident macro-triangle
  std::vector<std::shared_ptr<MacroSolver>> solvers_;

  void build_solver(int macro);
};

double max_identity_deviation(const std::vector<std::vector<double>>& m);

/// Duality matrix [beta_a(B_b)] of a space; the identity when basis and
/// functionals are consistent. Works for any space exposing dim(),
/// basis_function() and apply_dual(); columns are built in parallel.
template <class Space>
std::vector<std::vector<double>> duality_matrix(const Space& space) {
  const std::size_t n = space.dim();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  parallel_for(n, [&](std::size_t b) {
    const auto fn = space.basis_function(b);
    for (std::size_t a = 0; a < n; ++a) out[a][b] = space.apply_dual(fn, a);
  });
  return out;
}

}  // namespace pspline
