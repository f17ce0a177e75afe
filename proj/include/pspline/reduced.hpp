#pragma once

#include <memory>

#include "pspline/c1space.hpp"

namespace pspline {

/// Dual functional of the reduced space.
struct ReducedFunctional {
  enum class Kind {
    Vertex,       // as in the C1 space
    SymTriangle,  // blossom at (v_i, v_j, v_k), symmetric macro-triangles only
    EdgeTriangle, // blossom at (v_a, v_b, c_m), non-symmetric triangle at an edge
    BoundaryEdge  // blossom at (v_a, v_b, v_ab), unordered boundary edge
  };
  Kind kind = Kind::Vertex;
  int vertex = -1, r = -1;
  int macro = -1;
  int edge = -1;
};

/// Sparse map from reduced coefficients to C1 coefficients. Column b holds
/// the C1 coefficients of the b-th reduced basis function:
///   vertex columns are unit vectors;
///   an edge column carries (1 - omega_own) on the two micro functionals of
///   its triangle facing the edge and omega_other on the neighbor pair;
///   a boundary-edge column carries 1 on the two boundary functionals plus
///   omega on the attached micro pair;
///   a symmetric-triangle column is the sum of its three edge columns.
struct RecombinationMap {
  std::size_t rows = 0, cols = 0;
  std::vector<std::vector<std::pair<int, double>>> columns;

  std::vector<double> apply(std::span<const double> reduced) const;
  std::vector<double> column(std::size_t b) const;
};

/// Counts behind the space reduction.
struct DimensionReport {
  std::size_t vertices = 0, edges = 0, boundary_edges = 0, triangles = 0, symmetric_triangles = 0;
  std::size_t full_dim = 0;
  std::size_t reduced_dim = 0;
  double ratio = 0.0;
};

DimensionReport dimension_report(const PSRefinement& ps);

/// Span of the recombined basis: C2 smooth inside symmetrically refined
/// macro-triangles, C2 across the split spokes and at the split point
/// everywhere, C1 globally. Functional order: vertex block, symmetric
/// triangles by macro index, (edge, non-symmetric triangle) pairs by edge
/// then macro index, boundary edges ascending.
class ReducedSpace {
 public:
  explicit ReducedSpace(std::shared_ptr<const C1Space> c1);

  const C1Space& c1() const { return *c1_; }
  const PSRefinement& refinement() const { return c1_->refinement(); }
  const RecombinationMap& recombination() const { return map_; }

  std::size_t dim() const { return map_.cols; }
  ReducedFunctional functional(std::size_t idx) const { return functionals_[idx]; }
  std::size_t index_of_sym_triangle(int macro) const;
  std::size_t index_of_edge_triangle(int edge, int macro) const;
  std::size_t index_of_boundary_edge(int edge) const;

  /// Blossom value of the functional. In verify mode the identity partners
  /// (the other micro-triangles that must agree when the spline lies in the
  /// reduced space) are evaluated as well and a deviation beyond tolerance
  /// throws.
  double apply_dual(const SplineFunction& s, std::size_t idx, bool verify = false) const;

  std::vector<double> analyze(const SplineFunction& s, bool verify = false) const;
  SplineFunction synthesize(std::span<const double> coeffs) const;
  SplineFunction basis_function(std::size_t b) const;
  std::vector<int> support_macros_of_basis(std::size_t b) const;

  Point2 greville_point(std::size_t idx) const;

  /// The three blossom arguments defining functional idx.
  std::array<Point2, 3> functional_points(std::size_t idx) const;

  /// The plain recombined edge function of (edge, attached macro), whether
  /// or not it belongs to the basis. Diagnostics use it to show the C2
  /// defect that keeps it out of the basis when the macro is symmetric.
  SplineFunction plain_edge_function(int edge, int macro) const;

 private:
  std::shared_ptr<const C1Space> c1_;
  RecombinationMap map_;
  std::vector<ReducedFunctional> functionals_;
  std::vector<int> sym_index_;  // macro -> reduced index or -1

  std::vector<std::pair<int, double>> edge_pair_column(int edge, int macro) const;
  std::vector<std::pair<int, double>> boundary_edge_column(int edge) const;
};

/// Super-smoothness survey over every reduced basis function, grouped by the
/// edge families whose behavior the reduction pins down, plus the blossom
/// pair showing that an edge function of a symmetric triangle is not C2
/// across the corner spokes (expected values 1 and 0).
struct SupersmoothnessReport {
  double max_c1 = 0.0;                // order-1 residual, all edges
  double max_split_spoke = 0.0;       // C2 across [v_ab, c] edges
  double max_split_point = 0.0;       // C2 defect at the split points
  double max_sym_corner_spoke = 0.0;  // C2 across [v_a, c] inside symmetric macros
  double max_nonsym_corner_spoke = 0.0; // observed only, no requirement
  struct Control {
    int edge = -1, macro = -1;
    double inner = 0.0, outer = 0.0;  // expected 1 and 0
  };
  std::vector<Control> negative_controls;
};

SupersmoothnessReport verify_supersmoothness(const ReducedSpace& space);

}  // namespace pspline
