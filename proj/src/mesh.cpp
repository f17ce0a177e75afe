#include "pspline/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace pspline {

namespace {

constexpr double kDegenerateAreaTol = 1e-14;   // times scale^2
constexpr double kDuplicateVertexTol = 1e-12;  // times scale
constexpr double kOnSegmentTol = 1e-12;        // times scale
constexpr double kReconstructTol = 1e-9;       // override validation, times scale

std::array<int, 3> sorted_triple(std::array<int, 3> t) {
  std::sort(t.begin(), t.end());
  return t;
}

double bbox_extent(const std::vector<Point2>& pts) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = xmax;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return std::max({xmax - xmin, ymax - ymin, 0.0});
}

}  // namespace

int Triangulation::edge_index(int i, int j) const {
  const std::array<int, 2> key = {std::min(i, j), std::max(i, j)};
  auto it = std::lower_bound(edges.begin(), edges.end(), key);
  if (it == edges.end() || *it != key) return -1;
  return static_cast<int>(it - edges.begin());
}

std::size_t Triangulation::boundary_edge_count() const {
  return static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), true));
}

std::array<int, 3> Triangulation::triangle_edge_ids(int t) const {
  const auto& tr = triangles[t];
  return {edge_index(tr[0], tr[1]), edge_index(tr[1], tr[2]), edge_index(tr[2], tr[0])};
}

Triangulation build_triangulation(std::vector<Point2> vertices,
                                  std::vector<std::array<int, 3>> triangles) {
  if (triangles.empty()) throw std::invalid_argument("triangulation: needs at least one triangle");
  const int nv = static_cast<int>(vertices.size());
  for (const auto& p : vertices)
    if (!is_finite(p)) throw std::invalid_argument("triangulation: non-finite vertex");

  Triangulation tri;
  tri.scale = std::max(bbox_extent(vertices), std::numeric_limits<double>::min());

  for (std::size_t a = 0; a < vertices.size(); ++a)
    for (std::size_t b = a + 1; b < vertices.size(); ++b)
      if (dist(vertices[a], vertices[b]) <= kDuplicateVertexTol * tri.scale)
        throw std::invalid_argument("triangulation: duplicate vertices " + std::to_string(a) +
                                    " and " + std::to_string(b));

  std::set<std::array<int, 3>> seen;
  for (const auto& t : triangles) {
    for (int v : t)
      if (v < 0 || v >= nv) throw std::invalid_argument("triangulation: vertex index out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw std::invalid_argument("triangulation: repeated vertex in triangle");
    if (!seen.insert(sorted_triple(t)).second)
      throw std::invalid_argument("triangulation: duplicate triangle");
    const double area2 = std::abs(signed_area2(vertices[t[0]], vertices[t[1]], vertices[t[2]]));
    if (area2 <= 2.0 * kDegenerateAreaTol * tri.scale * tri.scale)
      throw std::invalid_argument("triangulation: degenerate triangle");
  }

  std::map<std::array<int, 2>, std::vector<int>> edge_map;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tr = triangles[t];
    for (int e = 0; e < 3; ++e) {
      const int a = tr[e], b = tr[(e + 1) % 3];
      edge_map[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(t));
    }
  }

  std::vector<bool> vertex_used(vertices.size(), false);
  for (const auto& [key, tris] : edge_map) {
    if (tris.size() > 2)
      throw std::invalid_argument("triangulation: non-conforming edge shared by >2 triangles");
    vertex_used[key[0]] = vertex_used[key[1]] = true;
    tri.edges.push_back(key);
    tri.edge_tris.push_back({tris[0], tris.size() == 2 ? tris[1] : -1});
    tri.boundary.push_back(tris.size() == 1);
  }
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (!vertex_used[v])
      throw std::invalid_argument("triangulation: unused vertex " + std::to_string(v));

  // A vertex strictly inside another edge means a T-junction (partial edge
  // overlap), which the edge hashing above cannot see.
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    for (const auto& e : tri.edges) {
      if (static_cast<int>(v) == e[0] || static_cast<int>(v) == e[1]) continue;
      const Point2 a = vertices[e[0]], b = vertices[e[1]], p = vertices[v];
      const Point2 d = b - a;
      const double len2 = dot(d, d);
      const double t = dot(p - a, d) / len2;
      if (t <= 0.0 || t >= 1.0) continue;
      const double h = std::abs(cross(p - a, d)) / std::sqrt(len2);
      if (h <= kOnSegmentTol * tri.scale)
        throw std::invalid_argument("triangulation: vertex " + std::to_string(v) +
                                    " lies inside an edge (non-conforming)");
    }
  }

  tri.vertices = std::move(vertices);
  tri.triangles = std::move(triangles);
  return tri;
}

Triangulation uniform_refine(const Triangulation& tri, int levels) {
  if (levels < 0) throw std::invalid_argument("uniform_refine: negative level count");
  Triangulation cur = tri;
  for (int l = 0; l < levels; ++l) {
    std::vector<Point2> verts = cur.vertices;
    std::vector<int> midpoint(cur.edges.size());
    for (std::size_t e = 0; e < cur.edges.size(); ++e) {
      const Point2 a = cur.vertices[cur.edges[e][0]], b = cur.vertices[cur.edges[e][1]];
      midpoint[e] = static_cast<int>(verts.size());
      verts.push_back(0.5 * (a + b));
    }
    std::vector<std::array<int, 3>> tris;
    tris.reserve(4 * cur.triangles.size());
    for (std::size_t t = 0; t < cur.triangles.size(); ++t) {
      const auto& tr = cur.triangles[t];
      const int mab = midpoint[cur.edge_index(tr[0], tr[1])];
      const int mbc = midpoint[cur.edge_index(tr[1], tr[2])];
      const int mca = midpoint[cur.edge_index(tr[2], tr[0])];
      tris.push_back({tr[0], mab, mca});
      tris.push_back({tr[1], mbc, mab});
      tris.push_back({tr[2], mca, mbc});
      tris.push_back({mab, mbc, mca});
    }
    cur = build_triangulation(std::move(verts), std::move(tris));
  }
  return cur;
}

Point2 split_point(const Point2& a, const Point2& b, const Point2& c, SplitStrategy strategy) {
  switch (strategy) {
    case SplitStrategy::Incenter: return incenter(a, b, c);
    case SplitStrategy::Barycenter: return barycenter(a, b, c);
  }
  throw std::invalid_argument("split_point: unknown strategy");
}

Point2 split_point_explicit(const Point2& a, const Point2& b, const Point2& c, const Point2& p) {
  const auto bc = barycentric(p, a, b, c);
  const double margin = 1e-12;
  if (bc[0] <= margin || bc[1] <= margin || bc[2] <= margin)
    throw std::invalid_argument("split point override not strictly inside triangle");
  return p;
}

std::array<int, 3> PSRefinement::sorted_corners(int m) const {
  return sorted_triple(base.triangles[m]);
}

std::array<int, 3> PSRefinement::micro_label(int m, int slot) const {
  const auto [i, j, k] = sorted_corners(m);
  switch (slot) {
    case 0: return {i, j, k};
    case 1: return {j, i, k};
    case 2: return {j, k, i};
    case 3: return {k, j, i};
    case 4: return {k, i, j};
    case 5: return {i, k, j};
  }
  throw std::invalid_argument("micro_label: slot out of range");
}

int PSRefinement::micro_slot(int m, int a, int b) const {
  for (int s = 0; s < 6; ++s) {
    const auto lab = micro_label(m, s);
    if (lab[0] == a && lab[1] == b) return s;
  }
  throw std::invalid_argument("micro_slot: (a,b) not an oriented edge of this macro-triangle");
}

std::array<Point2, 3> PSRefinement::micro_points(int m, int slot) const {
  const auto lab = micro_label(m, slot);
  const int e = base.edge_index(lab[0], lab[1]);
  return {base.vertices[lab[0]], edge_split_points[e], split_points[m]};
}

int PSRefinement::corner_slot(int m, int v) const {
  for (int s = 0; s < 6; ++s)
    if (micro_label(m, s)[0] == v) return s;
  throw std::invalid_argument("corner_slot: vertex not a corner of this macro-triangle");
}

int PSRefinement::side_of(int edge, int macro) const {
  if (base.edge_tris[edge][0] == macro) return 0;
  if (base.edge_tris[edge][1] == macro) return 1;
  throw std::invalid_argument("side_of: triangle not attached to edge");
}

int PSRefinement::other_macro(int edge, int macro) const {
  const auto& at = base.edge_tris[edge];
  return at[0] == macro ? at[1] : at[0];
}

std::size_t PSRefinement::ps_vertex_count() const {
  return base.vertices.size() + base.triangles.size() + base.edges.size();
}

namespace {

// Opposite corner of triangle m relative to edge e.
int opposite_corner(const Triangulation& tri, int e, int m) {
  const auto& t = tri.triangles[m];
  const auto& ed = tri.edges[e];
  for (int v : t)
    if (v != ed[0] && v != ed[1]) return v;
  throw std::logic_error("opposite_corner: edge not part of triangle");
}

void classify_symmetry(PSRefinement& ps, double tol, bool force_asymmetric,
                       const std::optional<std::vector<bool>>& mask) {
  const auto& tri = ps.base;
  ps.symmetric.assign(tri.triangles.size(), false);
  ps.collinearity_residuals.assign(tri.triangles.size(), {0.0, 0.0, 0.0});
  for (std::size_t m = 0; m < tri.triangles.size(); ++m) {
    const auto corners = ps.sorted_corners(static_cast<int>(m));
    const Point2 c = ps.split_points[m];
    bool all = true;
    double worst_norm = 0.0;
    for (int ci = 0; ci < 3; ++ci) {
      const int vc = corners[ci];
      const int a = corners[(ci + 1) % 3], b = corners[(ci + 2) % 3];
      const Point2 vab = ps.edge_split_points[tri.edge_index(a, b)];
      const double raw = std::abs(cross(tri.vertices[vc] - c, vab - c));
      const double lens = dist(tri.vertices[vc], c) * dist(vab, c);
      ps.collinearity_residuals[m][ci] = raw;
      const double normd = raw / std::max(lens, std::numeric_limits<double>::min());
      worst_norm = std::max(worst_norm, normd);
      if (normd > tol) all = false;
    }
    if (all && worst_norm > 0.1 * tol)
      ps.warnings.push_back("triangle " + std::to_string(m) +
                            ": collinearity residual within 10x of tolerance, flagged symmetric");
    if (!all && worst_norm <= 10.0 * tol)
      ps.warnings.push_back("triangle " + std::to_string(m) +
                            ": near-symmetric refinement excluded from the symmetric set");
    bool allowed = !force_asymmetric;
    if (mask && !(*mask)[m]) allowed = false;
    ps.symmetric[m] = all && allowed;
  }
}

void compute_edge_weights(PSRefinement& ps) {
  const auto& tri = ps.base;
  ps.edge_sides.assign(tri.edges.size(), {});
  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    const auto sides = compute_w_omega(ps, static_cast<int>(e));
    ps.edge_sides[e] = sides;
    for (int s = 0; s < 2; ++s) {
      const int m = tri.edge_tris[e][s];
      if (m < 0) continue;
      if (ps.symmetric[m]) {
        ps.edge_sides[e][s].nu = compute_nu(ps, static_cast<int>(e), m);
        ps.edge_sides[e][s].nu_defined = true;
      }
    }
  }
}

}  // namespace

PSRefinement refine_powell_sabin(const Triangulation& tri, const RefineOptions& opts) {
  PSRefinement ps;
  ps.base = tri;

  if (!opts.triangle_overrides.empty() && opts.triangle_overrides.size() != tri.triangles.size())
    throw std::invalid_argument("refine: triangle override count mismatch");

  ps.split_points.resize(tri.triangles.size());
  for (std::size_t m = 0; m < tri.triangles.size(); ++m) {
    const auto& t = tri.triangles[m];
    const Point2 a = tri.vertices[t[0]], b = tri.vertices[t[1]], c = tri.vertices[t[2]];
    if (m < opts.triangle_overrides.size() && opts.triangle_overrides[m])
      ps.split_points[m] = split_point_explicit(a, b, c, *opts.triangle_overrides[m]);
    else
      ps.split_points[m] = split_point(a, b, c, opts.strategy);
  }

  std::vector<std::optional<Point2>> edge_override(tri.edges.size());
  for (const auto& [key, p] : opts.edge_overrides) {
    const int e = tri.edge_index(key[0], key[1]);
    if (e < 0) throw std::invalid_argument("refine: edge override names a missing edge");
    edge_override[e] = p;
  }

  ps.edge_split_points.resize(tri.edges.size());
  ps.edge_lambda.resize(tri.edges.size());
  ps.edge_mu.assign(tri.edges.size(), std::numeric_limits<double>::quiet_NaN());

  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    const Point2 va = tri.vertices[tri.edges[e][0]], vb = tri.vertices[tri.edges[e][1]];
    const Point2 dir = vb - va;
    const double len2 = dot(dir, dir);

    if (tri.boundary[e]) {
      Point2 p = edge_override[e] ? *edge_override[e] : 0.5 * (va + vb);
      const double lambda = dot(p - va, dir) / len2;
      const double off = std::abs(cross(p - va, dir)) / std::sqrt(len2);
      if (off > kReconstructTol * tri.scale || lambda <= 0.0 || lambda >= 1.0)
        throw std::invalid_argument("refine: boundary split point not strictly inside its edge");
      ps.edge_split_points[e] = p;
      ps.edge_lambda[e] = lambda;
    } else {
      const Point2 c0 = ps.split_points[tri.edge_tris[e][0]];
      const Point2 c1 = ps.split_points[tri.edge_tris[e][1]];
      Point2 p;
      double mu;
      if (edge_override[e]) {
        p = *edge_override[e];
        const Point2 seg = c1 - c0;
        mu = dot(p - c0, seg) / dot(seg, seg);
        if (dist(p, c0 + mu * seg) > kReconstructTol * tri.scale)
          throw std::invalid_argument("refine: edge override off the split-point segment");
      } else {
        // Intersection of [c0, c1] with the line through the edge.
        const double s0 = cross(va - c0, dir);
        const double s1 = cross(va - c1, dir);
        if (s0 == s1)
          throw std::invalid_argument("refine: split-point segment parallel to edge");
        mu = s0 / (s0 - s1);
        p = c0 + mu * (c1 - c0);
      }
      const double lambda = dot(p - va, dir) / len2;
      if (mu <= 0.0 || mu >= 1.0 || lambda <= 0.0 || lambda >= 1.0)
        throw std::invalid_argument(
            "refine: split-point segment does not cross the open edge between triangles " +
            std::to_string(tri.edge_tris[e][0]) + " and " + std::to_string(tri.edge_tris[e][1]));
      ps.edge_split_points[e] = p;
      ps.edge_lambda[e] = lambda;
      ps.edge_mu[e] = mu;
    }
  }

  if (opts.symmetric_mask && opts.symmetric_mask->size() != tri.triangles.size())
    throw std::invalid_argument("refine: symmetric mask size mismatch");
  classify_symmetry(ps, opts.collinearity_tol, opts.force_asymmetric, opts.symmetric_mask);
  compute_edge_weights(ps);
  return ps;
}

SymmetryReport detect_symmetric(const PSRefinement& ps, double tol) {
  SymmetryReport rep;
  const auto& tri = ps.base;
  rep.symmetric.resize(tri.triangles.size());
  rep.residuals.resize(tri.triangles.size());
  rep.normalized_residuals.resize(tri.triangles.size());
  for (std::size_t m = 0; m < tri.triangles.size(); ++m) {
    const auto corners = ps.sorted_corners(static_cast<int>(m));
    const Point2 c = ps.split_points[m];
    bool all = true;
    for (int ci = 0; ci < 3; ++ci) {
      const int vc = corners[ci];
      const int a = corners[(ci + 1) % 3], b = corners[(ci + 2) % 3];
      const Point2 vab = ps.edge_split_points[tri.edge_index(a, b)];
      const double raw = std::abs(cross(tri.vertices[vc] - c, vab - c));
      const double lens = dist(tri.vertices[vc], c) * dist(vab, c);
      rep.residuals[m][ci] = raw;
      rep.normalized_residuals[m][ci] = raw / std::max(lens, std::numeric_limits<double>::min());
      if (rep.normalized_residuals[m][ci] > tol) all = false;
    }
    rep.symmetric[m] = all;
  }
  return rep;
}

double compute_nu(const PSRefinement& ps, int edge, int macro) {
  const auto& tri = ps.base;
  if (!ps.symmetric[macro])
    throw std::invalid_argument("compute_nu: triangle is not symmetrically refined");
  const int c = opposite_corner(tri, edge, macro);
  const Point2 vc = tri.vertices[c];
  const Point2 own = ps.split_points[macro];
  const int other = ps.other_macro(edge, macro);
  const Point2 target = other >= 0 ? ps.split_points[other] : ps.edge_split_points[edge];
  const Point2 d = target - own;
  const double len2 = dot(d, d);
  if (len2 <= 0.0) throw std::invalid_argument("compute_nu: degenerate direction");
  const double nu = dot(vc - own, d) / len2;
  const double resid = dist(vc, own + nu * d);
  if (resid > 1e-9 * tri.scale)
    throw std::invalid_argument("compute_nu: corner not on the split-point line");
  return nu;
}

std::array<PSRefinement::EdgeSide, 2> compute_w_omega(const PSRefinement& ps, int edge) {
  const auto& tri = ps.base;
  std::array<PSRefinement::EdgeSide, 2> sides;

  auto w_point = [&](int m) {
    return ps.symmetric[m] ? tri.vertices[opposite_corner(tri, edge, m)] : ps.split_points[m];
  };

  auto solve_omega = [&](const Point2& target, const Point2& w_own, const Point2& w_other) {
    // target = (1-omega) w_own + omega w_other
    if (w_own == target) return 0.0;
    const Point2 d = w_other - w_own;
    const double len2 = dot(d, d);
    if (len2 <= 0.0) throw std::invalid_argument("compute_w_omega: coincident w-points");
    double omega = dot(target - w_own, d) / len2;
    if (dist(target, w_own + omega * d) > 1e-9 * tri.scale)
      throw std::invalid_argument("compute_w_omega: w-point equation inconsistent");
    if (omega < -1e-9 || omega > 1.0 + 1e-9)
      throw std::invalid_argument("compute_w_omega: weight not convex");
    return std::clamp(omega, 0.0, 1.0);
  };

  if (tri.boundary[edge]) {
    const int m = tri.edge_tris[edge][0];
    sides[0].w = w_point(m);
    sides[0].omega = solve_omega(ps.split_points[m], sides[0].w, ps.edge_split_points[edge]);
  } else {
    const int m0 = tri.edge_tris[edge][0], m1 = tri.edge_tris[edge][1];
    sides[0].w = w_point(m0);
    sides[1].w = w_point(m1);
    sides[0].omega = solve_omega(ps.split_points[m0], sides[0].w, sides[1].w);
    sides[1].omega = solve_omega(ps.split_points[m1], sides[1].w, sides[0].w);
  }
  return sides;
}

std::vector<PSEdge> interior_ps_edges(const PSRefinement& ps) {
  const auto& tri = ps.base;
  std::vector<PSEdge> out;
  // Spokes inside each macro-triangle: consecutive slots share an edge.
  for (std::size_t m = 0; m < tri.triangles.size(); ++m) {
    const Point2 c = ps.split_points[m];
    for (int s = 0; s < 6; ++s) {
      const int s2 = (s + 1) % 6;
      const auto la = ps.micro_label(static_cast<int>(m), s);
      const auto lb = ps.micro_label(static_cast<int>(m), s2);
      PSEdge e;
      e.macro_a = static_cast<int>(m);
      e.slot_a = s;
      e.macro_b = static_cast<int>(m);
      e.slot_b = s2;
      e.p2 = c;
      if (la[0] == lb[0]) {
        // Same corner, different edges: spoke [v_a, c].
        e.family = PSEdge::Family::CornerSpoke;
        e.p1 = tri.vertices[la[0]];
      } else {
        // Same edge split point: spoke [v_ab, c].
        e.family = PSEdge::Family::SplitSpoke;
        e.base_edge = tri.edge_index(la[0], la[1]);
        e.p1 = ps.edge_split_points[e.base_edge];
      }
      out.push_back(e);
    }
  }
  // Pairs across interior base edges.
  for (std::size_t be = 0; be < tri.edges.size(); ++be) {
    if (tri.boundary[be]) continue;
    const int m0 = tri.edge_tris[be][0], m1 = tri.edge_tris[be][1];
    const auto& ed = tri.edges[be];
    for (int end = 0; end < 2; ++end) {
      const int a = ed[end], b = ed[1 - end];
      PSEdge e;
      e.family = PSEdge::Family::MacroCross;
      e.macro_a = m0;
      e.slot_a = ps.micro_slot(m0, a, b);
      e.macro_b = m1;
      e.slot_b = ps.micro_slot(m1, a, b);
      e.base_edge = static_cast<int>(be);
      e.p1 = tri.vertices[a];
      e.p2 = ps.edge_split_points[be];
      out.push_back(e);
    }
  }
  return out;
}

}  // namespace pspline
