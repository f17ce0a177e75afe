#include "pspline/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "pspline/parallel.hpp"

namespace pspline {

namespace {

constexpr double kWeightIdentityGate = 1e-9; // abort threshold for Lemma identities
constexpr double kPartnerTol = 1e-8;

int opposite_corner(const Triangulation& tri, int e, int m) {
  for (int v : tri.triangles[m])
    if (v != tri.edges[e][0] && v != tri.edges[e][1]) return v;
  throw std::logic_error("opposite_corner: edge not part of triangle");
}

}  // namespace

std::vector<double> RecombinationMap::apply(std::span<const double> reduced) const {
  if (reduced.size() != cols) throw std::invalid_argument("recombination: size mismatch");
  std::vector<double> full(rows, 0.0);
  for (std::size_t b = 0; b < cols; ++b) {
    if (reduced[b] == 0.0) continue;
    for (const auto& [row, val] : columns[b]) full[row] += val * reduced[b];
  }
  return full;
}

std::vector<double> RecombinationMap::column(std::size_t b) const {
  std::vector<double> full(rows, 0.0);
  for (const auto& [row, val] : columns[b]) full[row] += val;
  return full;
}

DimensionReport dimension_report(const PSRefinement& ps) {
  DimensionReport rep;
  rep.vertices = ps.base.vertices.size();
  rep.edges = ps.base.edges.size();
  rep.boundary_edges = ps.base.boundary_edge_count();
  rep.triangles = ps.base.triangles.size();
  rep.symmetric_triangles =
      static_cast<std::size_t>(std::count(ps.symmetric.begin(), ps.symmetric.end(), true));
  rep.full_dim = 3 * rep.vertices + 4 * rep.edges;
  rep.reduced_dim = 3 * rep.vertices + rep.symmetric_triangles +
                    3 * (rep.triangles - rep.symmetric_triangles) + rep.boundary_edges;
  rep.ratio = static_cast<double>(rep.full_dim) / static_cast<double>(rep.reduced_dim);
  return rep;
}

std::vector<std::pair<int, double>> ReducedSpace::edge_pair_column(int edge, int macro) const {
  const auto& ps = c1_->refinement();
  const auto& tri = ps.base;
  const int a = tri.edges[edge][0], b = tri.edges[edge][1];
  const int c = opposite_corner(tri, edge, macro);
  const double omega_own = ps.edge_sides[edge][ps.side_of(edge, macro)].omega;

  std::vector<std::pair<int, double>> col;
  col.emplace_back(static_cast<int>(c1_->triangle_index(macro, ps.micro_slot(macro, a, b))),
                   1.0 - omega_own);
  col.emplace_back(static_cast<int>(c1_->triangle_index(macro, ps.micro_slot(macro, b, a))),
                   1.0 - omega_own);
  const int other = ps.other_macro(edge, macro);
  if (other >= 0) {
    const double omega_other = ps.edge_sides[edge][ps.side_of(edge, other)].omega;
    if (omega_other != 0.0) {
      col.emplace_back(static_cast<int>(c1_->triangle_index(other, ps.micro_slot(other, a, b))),
                       omega_other);
      col.emplace_back(static_cast<int>(c1_->triangle_index(other, ps.micro_slot(other, b, a))),
                       omega_other);
    }
  }
  return col;
}

std::vector<std::pair<int, double>> ReducedSpace::boundary_edge_column(int edge) const {
  const auto& ps = c1_->refinement();
  const auto& tri = ps.base;
  const int macro = tri.edge_tris[edge][0];
  const int a = tri.edges[edge][0], b = tri.edges[edge][1];
  const double omega = ps.edge_sides[edge][0].omega;

  std::vector<std::pair<int, double>> col;
  col.emplace_back(static_cast<int>(c1_->boundary_edge_index(edge, 0)), 1.0);
  col.emplace_back(static_cast<int>(c1_->boundary_edge_index(edge, 1)), 1.0);
  if (omega != 0.0) {
    col.emplace_back(static_cast<int>(c1_->triangle_index(macro, ps.micro_slot(macro, a, b))),
                     omega);
    col.emplace_back(static_cast<int>(c1_->triangle_index(macro, ps.micro_slot(macro, b, a))),
                     omega);
  }
  return col;
}

ReducedSpace::ReducedSpace(std::shared_ptr<const C1Space> c1) : c1_(std::move(c1)) {
  const auto& ps = c1_->refinement();
  const auto& tri = ps.base;

  // The recombination silently loses duality if the weight identities do not
  // hold, so reject inconsistent inputs up front.
  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    for (int s = 0; s < 2; ++s) {
      const int m = tri.edge_tris[e][s];
      if (m < 0 || !ps.symmetric[m]) continue;
      const auto& side = ps.edge_sides[e][s];
      double resid;
      if (tri.boundary[e]) {
        resid = std::abs((1.0 - side.nu) * (1.0 - side.omega) - 1.0);
      } else {
        const auto& other = ps.edge_sides[e][1 - s];
        resid = std::abs((1.0 - side.nu) * (1.0 - side.omega) + side.nu * other.omega - 1.0);
      }
      if (resid > kWeightIdentityGate)
        throw std::runtime_error("reduced space: weight identity residual " +
                                 std::to_string(resid) + " on edge " + std::to_string(e) +
                                 "; refinement weights are inconsistent");
    }
  }

  map_.rows = c1_->dim();
  sym_index_.assign(tri.triangles.size(), -1);

  for (std::size_t v = 0; v < tri.vertices.size(); ++v)
    for (int r = 0; r < 3; ++r) {
      ReducedFunctional f;
      f.kind = ReducedFunctional::Kind::Vertex;
      f.vertex = static_cast<int>(v);
      f.r = r;
      functionals_.push_back(f);
      map_.columns.push_back({{static_cast<int>(c1_->vertex_index(static_cast<int>(v), r)), 1.0}});
    }

  for (std::size_t m = 0; m < tri.triangles.size(); ++m) {
    if (!ps.symmetric[m]) continue;
    ReducedFunctional f;
    f.kind = ReducedFunctional::Kind::SymTriangle;
    f.macro = static_cast<int>(m);
    sym_index_[m] = static_cast<int>(functionals_.size());
    functionals_.push_back(f);
    std::vector<std::pair<int, double>> col;
    for (int e : tri.triangle_edge_ids(static_cast<int>(m))) {
      const auto part = edge_pair_column(e, static_cast<int>(m));
      col.insert(col.end(), part.begin(), part.end());
    }
    map_.columns.push_back(std::move(col));
  }

  for (std::size_t e = 0; e < tri.edges.size(); ++e)
    for (int s = 0; s < 2; ++s) {
      const int m = tri.edge_tris[e][s];
      if (m < 0 || ps.symmetric[m]) continue;
      ReducedFunctional f;
      f.kind = ReducedFunctional::Kind::EdgeTriangle;
      f.edge = static_cast<int>(e);
      f.macro = m;
      functionals_.push_back(f);
      map_.columns.push_back(edge_pair_column(static_cast<int>(e), m));
    }

  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    if (!tri.boundary[e]) continue;
    ReducedFunctional f;
    f.kind = ReducedFunctional::Kind::BoundaryEdge;
    f.edge = static_cast<int>(e);
    functionals_.push_back(f);
    map_.columns.push_back(boundary_edge_column(static_cast<int>(e)));
  }

  map_.cols = map_.columns.size();
  if (map_.cols != dimension_report(ps).reduced_dim)
    throw std::logic_error("reduced space: dimension bookkeeping mismatch");
}

std::size_t ReducedSpace::index_of_sym_triangle(int macro) const {
  if (sym_index_[macro] < 0)
    throw std::invalid_argument("index_of_sym_triangle: triangle not symmetric");
  return static_cast<std::size_t>(sym_index_[macro]);
}

std::size_t ReducedSpace::index_of_edge_triangle(int edge, int macro) const {
  for (std::size_t i = 0; i < functionals_.size(); ++i)
    if (functionals_[i].kind == ReducedFunctional::Kind::EdgeTriangle &&
        functionals_[i].edge == edge && functionals_[i].macro == macro)
      return i;
  throw std::invalid_argument("index_of_edge_triangle: no such functional");
}

std::size_t ReducedSpace::index_of_boundary_edge(int edge) const {
  for (std::size_t i = 0; i < functionals_.size(); ++i)
    if (functionals_[i].kind == ReducedFunctional::Kind::BoundaryEdge &&
        functionals_[i].edge == edge)
      return i;
  throw std::invalid_argument("index_of_boundary_edge: no such functional");
}

double ReducedSpace::apply_dual(const SplineFunction& s, std::size_t idx, bool verify) const {
  const auto& f = functionals_[idx];
  const auto& ps = c1_->refinement();
  const auto& tri = ps.base;

  auto check_partner = [&](double value, double partner) {
    if (std::abs(value - partner) > kPartnerTol * std::max(1.0, std::abs(value)))
      throw std::runtime_error(
          "apply_dual: identity partners disagree; spline is not in the reduced space");
  };

  switch (f.kind) {
    case ReducedFunctional::Kind::Vertex:
      return c1_->apply_dual(s, c1_->vertex_index(f.vertex, f.r));
    case ReducedFunctional::Kind::SymTriangle: {
      const auto corners = ps.sorted_corners(f.macro);
      const Point2 vi = tri.vertices[corners[0]], vj = tri.vertices[corners[1]],
                   vk = tri.vertices[corners[2]];
      const double value = s.patch(f.macro, 0).blossom(vi, vj, vk);
      if (verify)
        for (int slot = 1; slot < 6; ++slot)
          check_partner(value, s.patch(f.macro, slot).blossom(vi, vj, vk));
      return value;
    }
    case ReducedFunctional::Kind::EdgeTriangle: {
      const int a = tri.edges[f.edge][0], b = tri.edges[f.edge][1];
      const Point2 va = tri.vertices[a], vb = tri.vertices[b];
      const Point2 cm = ps.split_points[f.macro];
      const double value = s.patch(f.macro, ps.micro_slot(f.macro, a, b)).blossom(va, vb, cm);
      if (verify)
        check_partner(value, s.patch(f.macro, ps.micro_slot(f.macro, b, a)).blossom(va, vb, cm));
      return value;
    }
    case ReducedFunctional::Kind::BoundaryEdge: {
      const double value = c1_->apply_dual(s, c1_->boundary_edge_index(f.edge, 0));
      if (verify)
        check_partner(value, c1_->apply_dual(s, c1_->boundary_edge_index(f.edge, 1)));
      return value;
    }
  }
  throw std::logic_error("apply_dual: unknown reduced functional kind");
}

std::vector<double> ReducedSpace::analyze(const SplineFunction& s, bool verify) const {
  std::vector<double> out(dim());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = apply_dual(s, i, verify);
  return out;
}

SplineFunction ReducedSpace::synthesize(std::span<const double> coeffs) const {
  return c1_->synthesize(map_.apply(coeffs));
}

SplineFunction ReducedSpace::basis_function(std::size_t b) const {
  if (b >= dim()) throw std::invalid_argument("basis_function: index out of range");
  return c1_->synthesize(map_.column(b));
}

std::vector<int> ReducedSpace::support_macros_of_basis(std::size_t b) const {
  return c1_->support_macros(map_.column(b));
}

Point2 ReducedSpace::greville_point(std::size_t idx) const {
  const auto& f = functionals_[idx];
  const auto& ps = c1_->refinement();
  const auto& tri = ps.base;
  switch (f.kind) {
    case ReducedFunctional::Kind::Vertex:
      return c1_->greville_point(c1_->vertex_index(f.vertex, f.r));
    case ReducedFunctional::Kind::SymTriangle: {
      const auto corners = ps.sorted_corners(f.macro);
      return (1.0 / 3.0) * (tri.vertices[corners[0]] + tri.vertices[corners[1]] +
                            tri.vertices[corners[2]]);
    }
    case ReducedFunctional::Kind::EdgeTriangle: {
      const auto& ed = tri.edges[f.edge];
      return (1.0 / 3.0) *
             (tri.vertices[ed[0]] + tri.vertices[ed[1]] + ps.split_points[f.macro]);
    }
    case ReducedFunctional::Kind::BoundaryEdge: {
      const auto& ed = tri.edges[f.edge];
      return (1.0 / 3.0) *
             (tri.vertices[ed[0]] + tri.vertices[ed[1]] + ps.edge_split_points[f.edge]);
    }
  }
  throw std::logic_error("greville_point: unknown reduced functional kind");
}

SplineFunction ReducedSpace::plain_edge_function(int edge, int macro) const {
  std::vector<double> col(c1_->dim(), 0.0);
  for (const auto& [row, val] : edge_pair_column(edge, macro)) col[row] += val;
  return c1_->synthesize(col);
}

std::array<Point2, 3> ReducedSpace::functional_points(std::size_t idx) const {
  const auto& f = functionals_[idx];
  const auto& ps = c1_->refinement();
  const auto& tri = ps.base;
  switch (f.kind) {
    case ReducedFunctional::Kind::Vertex:
      return c1_->functional_points(c1_->vertex_index(f.vertex, f.r));
    case ReducedFunctional::Kind::SymTriangle: {
      const auto corners = ps.sorted_corners(f.macro);
      return {tri.vertices[corners[0]], tri.vertices[corners[1]], tri.vertices[corners[2]]};
    }
    case ReducedFunctional::Kind::EdgeTriangle: {
      const auto& ed = tri.edges[f.edge];
      return {tri.vertices[ed[0]], tri.vertices[ed[1]], ps.split_points[f.macro]};
    }
    case ReducedFunctional::Kind::BoundaryEdge: {
      const auto& ed = tri.edges[f.edge];
      return {tri.vertices[ed[0]], tri.vertices[ed[1]], ps.edge_split_points[f.edge]};
    }
  }
  throw std::logic_error("functional_points: unknown reduced functional kind");
}

SupersmoothnessReport verify_supersmoothness(const ReducedSpace& space) {
  const auto& ps = space.refinement();
  const auto& tri = ps.base;
  SupersmoothnessReport rep;
  std::mutex mtx;

  parallel_for(space.dim(), [&](std::size_t b) {
    const auto fn = space.basis_function(b);
    const auto c1rep = verify_global_smoothness(fn, 1);
    const auto c2rep = verify_global_smoothness(fn, 2);
    double c1 = c1rep.max_residual;
    double split_spoke = 0.0, sym_corner = 0.0, nonsym_corner = 0.0, split_pt = 0.0;
    for (std::size_t i = 0; i < c2rep.edges.size(); ++i) {
      const auto& e = c2rep.edges[i];
      const double r = c2rep.reports[i].max_residual;
      if (e.family == PSEdge::Family::SplitSpoke)
        split_spoke = std::max(split_spoke, r);
      else if (e.family == PSEdge::Family::CornerSpoke) {
        if (ps.symmetric[e.macro_a])
          sym_corner = std::max(sym_corner, r);
        else
          nonsym_corner = std::max(nonsym_corner, r);
      }
    }
    for (double r : c2rep.split_point_residuals) split_pt = std::max(split_pt, r);
    std::lock_guard<std::mutex> lock(mtx);
    rep.max_c1 = std::max(rep.max_c1, c1);
    rep.max_split_spoke = std::max(rep.max_split_spoke, split_spoke);
    rep.max_split_point = std::max(rep.max_split_point, split_pt);
    rep.max_sym_corner_spoke = std::max(rep.max_sym_corner_spoke, sym_corner);
    rep.max_nonsym_corner_spoke = std::max(rep.max_nonsym_corner_spoke, nonsym_corner);
  });

  // Negative control: the plain edge function of a symmetric triangle keeps
  // the blossom pair (1, 0) at (v_a, v_b, v_c) on the micros left and right
  // of the corner spoke, so it is not C2 there and must not join the basis.
  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    for (int s = 0; s < 2; ++s) {
      const int m = tri.edge_tris[e][s];
      if (m < 0 || !ps.symmetric[m]) continue;
      const int a = tri.edges[e][0], bb = tri.edges[e][1];
      const int c = opposite_corner(tri, static_cast<int>(e), m);
      const auto fn = space.plain_edge_function(static_cast<int>(e), m);
      const Point2 va = tri.vertices[a], vb = tri.vertices[bb], vc = tri.vertices[c];
      SupersmoothnessReport::Control ctl;
      ctl.edge = static_cast<int>(e);
      ctl.macro = m;
      ctl.inner = fn.patch(m, ps.micro_slot(m, a, bb)).blossom(va, vb, vc);
      ctl.outer = fn.patch(m, ps.micro_slot(m, a, c)).blossom(va, vb, vc);
      rep.negative_controls.push_back(ctl);
    }
  }
  return rep;
}

}  // namespace pspline
