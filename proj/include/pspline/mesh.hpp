#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pspline/geometry.hpp"

namespace pspline {

/// Conforming triangulation of a polygonal domain. Edges are derived from
/// the triangles and stored as sorted index pairs in lexicographic order.
struct Triangulation {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;

  std::vector<std::array<int, 2>> edges;     // sorted pairs (i < j), lexicographic
  std::vector<std::array<int, 2>> edge_tris; // attached triangles, ascending; [t, -1] on boundary
  std::vector<bool> boundary;                // per edge
  double scale = 1.0;                        // max bounding-box extent

  int edge_index(int i, int j) const;        // -1 if absent
  std::size_t boundary_edge_count() const;
  std::array<int, 3> triangle_edge_ids(int t) const; // edges {a,b},{b,c},{c,a} of triangle t
};

/// Validate vertices/triangles and derive edges and boundary flags. Throws
/// std::invalid_argument on degenerate triangles, duplicate vertices or
/// triangles, out-of-range indices, or non-conforming incidences (an edge
/// with more than two triangles, or a vertex lying inside another edge).
Triangulation build_triangulation(std::vector<Point2> vertices,
                                  std::vector<std::array<int, 3>> triangles);

/// Split every triangle into four by its edge midpoints, `levels` times.
Triangulation uniform_refine(const Triangulation& tri, int levels);

enum class SplitStrategy { Incenter, Barycenter };

/// Interior split point of one triangle. The explicit variant validates
/// strict interiority.
Point2 split_point(const Point2& a, const Point2& b, const Point2& c, SplitStrategy strategy);
Point2 split_point_explicit(const Point2& a, const Point2& b, const Point2& c, const Point2& p);

struct RefineOptions {
  SplitStrategy strategy = SplitStrategy::Incenter;
  /// Explicit split points per triangle (overrides the strategy where set).
  std::vector<std::optional<Point2>> triangle_overrides;
  /// Explicit edge split points; interior ones must lie on the segment
  /// between the two adjacent split points.
  std::vector<std::pair<std::array<int, 2>, Point2>> edge_overrides;
  /// Treat every triangle as non-symmetric regardless of geometry.
  bool force_asymmetric = false;
  /// Per-triangle cap on the symmetric classification: a triangle may only
  /// be flagged where the mask is true. Lets a stored refinement reproduce
  /// a forced classification exactly.
  std::optional<std::vector<bool>> symmetric_mask;
  /// Normalized collinearity tolerance for symmetry detection.
  double collinearity_tol = 1e-10;
};

/// Powell-Sabin 6-split of a triangulation together with every geometric
/// weight consumed by the spline spaces. Immutable after construction.
///
/// Micro-triangle bookkeeping: each macro-triangle with sorted corners
/// i < j < k owns six micro-triangles, stored in slots 0..5 labeled
///   (i,j,k), (j,i,k), (j,k,i), (k,j,i), (k,i,j), (i,k,j)
/// where label (a,b,c) names the triangle [v_a, v_ab, v_abc] spanned by the
/// corner a, the split point of edge {a,b}, and the interior split point.
struct PSRefinement {
  Triangulation base;

  std::vector<Point2> split_points;      // per macro-triangle, strictly interior
  std::vector<Point2> edge_split_points; // per base edge, strictly inside the edge
  std::vector<double> edge_lambda;       // v_ab = (1-lambda) v_a + lambda v_b, a < b
  /// For interior edges: v_ab = (1-mu) c_first + mu c_second where first and
  /// second are the attached triangles in ascending index order. NaN on
  /// boundary edges.
  std::vector<double> edge_mu;

  std::vector<bool> symmetric;           // per macro-triangle
  /// Raw collinearity residuals |cross(v_c - c_m, v_ab - c_m)| per macro,
  /// one per corner (in sorted corner order c = i, j, k pairing the corner
  /// with its opposite edge).
  std::vector<std::array<double, 3>> collinearity_residuals;

  /// Affine weights attached to one (edge, attached-triangle) pair.
  struct EdgeSide {
    bool nu_defined = false;
    double nu = 0.0;    // v_c = (1-nu) c_own + nu * (c_other | v_ab)
    double omega = 0.0; // convex weight of the recombination; 0 unless symmetric
    Point2 w;           // w-point: v_c if the triangle is symmetric, else c_own
  };
  /// Indexed per edge; element s corresponds to edge_tris[e][s].
  std::vector<std::array<EdgeSide, 2>> edge_sides;

  std::vector<std::string> warnings;

  // -- micro-triangle helpers -------------------------------------------
  std::array<int, 3> sorted_corners(int m) const;
  /// Vertex labels (a, b, c) of slot s in macro m.
  std::array<int, 3> micro_label(int m, int slot) const;
  /// Slot whose label starts with (a, b).
  int micro_slot(int m, int a, int b) const;
  /// Geometric corners [v_a, v_ab, c_m] of a micro-triangle.
  std::array<Point2, 3> micro_points(int m, int slot) const;
  /// First slot in cycle order touching base vertex v.
  int corner_slot(int m, int v) const;

  int side_of(int edge, int macro) const; // 0 or 1 in edge_sides/edge_tris
  int other_macro(int edge, int macro) const; // -1 on boundary

  std::size_t ps_vertex_count() const;
  std::size_t ps_triangle_count() const { return 6 * base.triangles.size(); }
  std::size_t ps_boundary_edge_count() const { return 2 * base.boundary_edge_count(); }
};

PSRefinement refine_powell_sabin(const Triangulation& tri, const RefineOptions& opts = {});

/// Classification of one macro-triangle's refinement symmetry: the three
/// corner / opposite-edge-split collinearity tests.
struct SymmetryReport {
  std::vector<bool> symmetric;
  std::vector<std::array<double, 3>> residuals;            // raw cross products
  std::vector<std::array<double, 3>> normalized_residuals; // residual / length product
};

/// Recompute the symmetry classification from the refinement geometry.
SymmetryReport detect_symmetric(const PSRefinement& ps, double tol = 1e-10);

/// Affine coefficient expressing the corner opposite the edge on the line
/// through the split points: v_c = (1-nu) c_own + nu c_other for interior
/// edges, v_c = (1-nu) c_own + nu v_ab on the boundary. Defined only when
/// the triangle is symmetrically refined.
double compute_nu(const PSRefinement& ps, int edge, int macro);

/// w-points and convex weights of the recombination across an edge:
/// c_own = (1-omega) w_own + omega w_other (interior) and
/// c_own = (1-omega) w_own + omega v_ab (boundary), with w = v_c for a
/// symmetric triangle and w = c_own otherwise (making omega zero).
std::array<PSRefinement::EdgeSide, 2> compute_w_omega(const PSRefinement& ps, int edge);

/// Interior edge of the refined mesh, as a pair of adjacent micro-triangles.
struct PSEdge {
  enum class Family {
    CornerSpoke, // [v_a, c_m], between two micros of one macro
    SplitSpoke,  // [v_ab, c_m], between two micros of one macro
    MacroCross   // [v_a, v_ab], between micros of two macros sharing edge ab
  };
  Family family;
  int macro_a = -1, slot_a = -1;
  int macro_b = -1, slot_b = -1;
  int base_edge = -1; // for SplitSpoke / MacroCross
  Point2 p1, p2;
};

/// All interior edges of the refinement, macro spokes first then the
/// cross-macro pairs, in deterministic order.
std::vector<PSEdge> interior_ps_edges(const PSRefinement& ps);

}  // namespace pspline
