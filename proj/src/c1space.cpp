#include "pspline/c1space.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pspline/parallel.hpp"

namespace pspline {

namespace {

constexpr double kLocalResidualTol = 1e-10;
constexpr double kConditionLimit = 1e12;
constexpr double kLocateBaryTol = 1e-10;

}  // namespace

std::vector<VertexTriangleQ> choose_vertex_triangles(const PSRefinement& ps) {
  const auto& tri = ps.base;
  std::vector<std::vector<Point2>> mandated(tri.vertices.size());
  for (std::size_t v = 0; v < tri.vertices.size(); ++v) mandated[v].push_back(tri.vertices[v]);
  for (std::size_t m = 0; m < tri.triangles.size(); ++m)
    for (int v : tri.triangles[m])
      mandated[v].push_back((2.0 / 3.0) * tri.vertices[v] + (1.0 / 3.0) * ps.split_points[m]);
  for (std::size_t e = 0; e < tri.edges.size(); ++e)
    for (int v : tri.edges[e])
      mandated[v].push_back((2.0 / 3.0) * tri.vertices[v] + (1.0 / 3.0) * ps.edge_split_points[e]);

  std::vector<VertexTriangleQ> out(tri.vertices.size());
  for (std::size_t v = 0; v < tri.vertices.size(); ++v) {
    Point2 c{0.0, 0.0};
    for (const auto& p : mandated[v]) c += p;
    c *= 1.0 / static_cast<double>(mandated[v].size());
    double radius = 0.0;
    for (const auto& p : mandated[v]) radius = std::max(radius, dist(c, p));
    // The inscribed circle of an equilateral triangle has half its
    // circumradius, so containment needs the factor two.
    radius = 2.0 * 1.3 * std::max(radius, 1e-3 * tri.scale);
    // Equilateral, one corner along +x from the centroid.
    VertexTriangleQ q;
    for (int r = 0; r < 3; ++r) {
      const double angle = 2.0 * M_PI * r / 3.0;
      q.q[r] = c + Point2{radius * std::cos(angle), radius * std::sin(angle)};
    }
    out[v] = q;
  }
  return out;
}

// ---------------------------------------------------------------------------
// SplineFunction

std::pair<int, int> SplineFunction::locate(const Point2& p) const {
  const auto& tri = ps_->base;
  int best_macro = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < tri.triangles.size(); ++m) {
    const auto& t = tri.triangles[m];
    const auto bc = barycentric(p, tri.vertices[t[0]], tri.vertices[t[1]], tri.vertices[t[2]]);
    const double mn = std::min({bc[0], bc[1], bc[2]});
    if (mn >= -kLocateBaryTol) {
      best_macro = static_cast<int>(m);
      break;
    }
    if (mn > best_min) {
      best_min = mn;
      best_macro = static_cast<int>(m);
    }
  }
  if (best_macro < 0) throw std::invalid_argument("locate: empty refinement");
  {
    const auto& t = tri.triangles[best_macro];
    const auto bc = barycentric(p, tri.vertices[t[0]], tri.vertices[t[1]], tri.vertices[t[2]]);
    if (std::min({bc[0], bc[1], bc[2]}) < -1e-8)
      throw std::invalid_argument("locate: point outside the domain");
  }
  int best_slot = 0;
  double best_slot_min = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < 6; ++s) {
    const auto pts = ps_->micro_points(best_macro, s);
    const auto bc = barycentric(p, pts[0], pts[1], pts[2]);
    const double mn = std::min({bc[0], bc[1], bc[2]});
    if (mn >= -kLocateBaryTol) return {best_macro, s};
    if (mn > best_slot_min) {
      best_slot_min = mn;
      best_slot = s;
    }
  }
  return {best_macro, best_slot};
}

double SplineFunction::eval(const Point2& p) const {
  const auto [m, s] = locate(p);
  return patch(m, s).eval(p);
}

std::array<double, 2> SplineFunction::gradient(const Point2& p) const {
  const auto [m, s] = locate(p);
  return patch(m, s).gradient(p);
}

double SplineFunction::max_abs_coeff() const {
  double v = 0.0;
  for (const auto& patch : patches_)
    for (double c : patch.coeffs) v = std::max(v, std::abs(c));
  return v;
}

// ---------------------------------------------------------------------------
// Local solver

struct C1Space::MacroSolver {
  Eigen::MatrixXd a;                 // row-equilibrated constraint matrix
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  std::array<double, 21> rhs_scale;  // row scale of the functional rows
  int n_smooth = 0;
  double cond = 0.0;
};

namespace {

// Shared spoke between consecutive slots s and s+1 of one macro: the two
// shared corners plus the off-line corner of the first patch.
struct Spoke {
  Point2 p, q, off;
};

Spoke spoke_between(const PSRefinement& ps, int m, int s) {
  const auto la = ps.micro_label(m, s);
  const auto lb = ps.micro_label(m, (s + 1) % 6);
  const auto pts = ps.micro_points(m, s);
  Spoke sp;
  sp.q = pts[2];  // split point, shared by all six
  if (la[0] == lb[0]) {
    sp.p = pts[0];   // shared corner
    sp.off = pts[1]; // this patch's edge split point
  } else {
    sp.p = pts[1];   // shared edge split point
    sp.off = pts[0];
  }
  return sp;
}

}  // namespace

C1Space::C1Space(std::shared_ptr<const PSRefinement> ps) : ps_(std::move(ps)) {
  const auto& tri = ps_->base;
  qtris_ = choose_vertex_triangles(*ps_);
  vertex_block_ = 3 * tri.vertices.size();
  triangle_block_ = 6 * tri.triangles.size();
  boundary_edge_rank_.assign(tri.edges.size(), -1);
  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    if (!tri.boundary[e]) continue;
    boundary_edge_rank_[e] = static_cast<int>(boundary_edges_.size());
    boundary_edges_.push_back(static_cast<int>(e));
  }
  vertex_macro_.assign(tri.vertices.size(), -1);
  for (std::size_t m = 0; m < tri.triangles.size(); ++m)
    for (int v : tri.triangles[m])
      if (vertex_macro_[v] < 0) vertex_macro_[v] = static_cast<int>(m);
  dim_ = vertex_block_ + triangle_block_ + 2 * boundary_edges_.size();

  solvers_.resize(tri.triangles.size());
  parallel_for(tri.triangles.size(), [&](std::size_t m) { build_solver(static_cast<int>(m)); });
}

void C1Space::build_solver(int macro) {
  constexpr int rows_total = 6 * 7 + 21;  // 4 C0 + 3 C1 per spoke, then the functionals
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows_total, 60);

  std::array<std::array<Point2, 3>, 6> micro_tris;
  for (int s = 0; s < 6; ++s) micro_tris[s] = ps_->micro_points(macro, s);

  int row = 0;
  auto put = [&](int slot, const std::array<double, 10>& w, double sign) {
    for (int t = 0; t < 10; ++t) a(row, 10 * slot + t) += sign * w[t];
  };
  auto smoothness_row = [&](int sa, int sb, const Point2& x, const Point2& y, const Point2& z) {
    put(sa, CubicPatch::blossom_weights(micro_tris[sa], x, y, z), 1.0);
    put(sb, CubicPatch::blossom_weights(micro_tris[sb], x, y, z), -1.0);
    ++row;
  };

  for (int s = 0; s < 6; ++s) {
    const Spoke sp = spoke_between(*ps_, macro, s);
    const int s2 = (s + 1) % 6;
    smoothness_row(s, s2, sp.p, sp.p, sp.p);
    smoothness_row(s, s2, sp.p, sp.p, sp.q);
    smoothness_row(s, s2, sp.p, sp.q, sp.q);
    smoothness_row(s, s2, sp.q, sp.q, sp.q);
    smoothness_row(s, s2, sp.p, sp.p, sp.off);
    smoothness_row(s, s2, sp.p, sp.q, sp.off);
    smoothness_row(s, s2, sp.q, sp.q, sp.off);
  }
  const int n_smooth = row;

  const auto corners = ps_->sorted_corners(macro);
  const auto& tri = ps_->base;
  for (int ci = 0; ci < 3; ++ci) {
    const int v = corners[ci];
    const Point2 pv = tri.vertices[v];
    const int slot = ps_->corner_slot(macro, v);
    for (int r = 0; r < 3; ++r) {
      const Point2 probe = pv + 3.0 * (qtris_[v].q[r] - pv);
      put(slot, CubicPatch::blossom_weights(micro_tris[slot], pv, pv, probe), 1.0);
      ++row;
    }
  }
  for (int s = 0; s < 6; ++s) {
    const auto lab = ps_->micro_label(macro, s);
    put(s,
        CubicPatch::blossom_weights(micro_tris[s], tri.vertices[lab[0]], tri.vertices[lab[1]],
                                    ps_->split_points[macro]),
        1.0);
    ++row;
  }
  for (int pair = 0; pair < 3; ++pair) {
    for (int o = 0; o < 2; ++o) {
      const int s = 2 * pair + o;
      const auto lab = ps_->micro_label(macro, s);
      const Point2 vab = ps_->edge_split_points[tri.edge_index(lab[0], lab[1])];
      put(s,
          CubicPatch::blossom_weights(micro_tris[s], tri.vertices[lab[0]], tri.vertices[lab[1]],
                                      vab),
          1.0);
      ++row;
    }
  }

  auto solver = std::make_shared<MacroSolver>();
  solver->n_smooth = n_smooth;
  for (int r = 0; r < rows_total; ++r) {
    const double s = a.row(r).cwiseAbs().maxCoeff();
    const double inv = s > 0.0 ? 1.0 / s : 1.0;
    a.row(r) *= inv;
    if (r >= n_smooth) solver->rhs_scale[r - n_smooth] = inv;
  }
  solver->a = a;
  solver->qr.compute(a);
  const auto& rdiag = solver->qr.matrixR().diagonal();
  const double rmax = std::abs(rdiag(0));
  const double rmin = std::abs(rdiag(rdiag.size() - 1));
  solver->cond = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  if (!(solver->cond < kConditionLimit))
    throw std::runtime_error("local spline system ill-conditioned (estimate " +
                             std::to_string(solver->cond) + ") on triangle " +
                             std::to_string(macro));
  solvers_[macro] = std::move(solver);
}

double C1Space::condition_estimate(int macro) const { return solvers_[macro]->cond; }

double C1Space::max_condition_estimate() const {
  double c = 0.0;
  for (const auto& s : solvers_) c = std::max(c, s->cond);
  return c;
}

std::size_t C1Space::boundary_edge_index(int edge, int orient) const {
  const int rank = boundary_edge_rank_[edge];
  if (rank < 0) throw std::invalid_argument("boundary_edge_index: edge is interior");
  return vertex_block_ + triangle_block_ + 2 * static_cast<std::size_t>(rank) + orient;
}

DualFunctionalC1 C1Space::functional(std::size_t idx) const {
  DualFunctionalC1 f;
  if (idx < vertex_block_) {
    f.kind = DualFunctionalC1::Kind::Vertex;
    f.vertex = static_cast<int>(idx / 3);
    f.r = static_cast<int>(idx % 3);
    return f;
  }
  idx -= vertex_block_;
  if (idx < triangle_block_) {
    f.kind = DualFunctionalC1::Kind::Triangle;
    f.macro = static_cast<int>(idx / 6);
    f.slot = static_cast<int>(idx % 6);
    return f;
  }
  idx -= triangle_block_;
  if (idx >= 2 * boundary_edges_.size())
    throw std::invalid_argument("functional: index out of range");
  f.kind = DualFunctionalC1::Kind::BoundaryEdge;
  f.edge = boundary_edges_[idx / 2];
  f.orient = static_cast<int>(idx % 2);
  return f;
}

double C1Space::apply_dual(const SplineFunction& s, std::size_t idx) const {
  return apply_dual(s, functional(idx));
}

double C1Space::apply_dual(const SplineFunction& s, const DualFunctionalC1& f) const {
  if (s.refinement_ptr().get() != ps_.get())
    throw std::invalid_argument("apply_dual: spline built on a different refinement");
  const auto& tri = ps_->base;
  switch (f.kind) {
    case DualFunctionalC1::Kind::Vertex: {
      // Any micro-triangle with this corner works for a C1 spline; the
      // first incident macro keeps the choice deterministic.
      const int m = vertex_macro_[f.vertex];
      const int slot = ps_->corner_slot(m, f.vertex);
      const Point2 pv = tri.vertices[f.vertex];
      const Point2 probe = pv + 3.0 * (qtris_[f.vertex].q[f.r] - pv);
      return s.patch(m, slot).blossom(pv, pv, probe);
    }
    case DualFunctionalC1::Kind::Triangle: {
      const auto lab = ps_->micro_label(f.macro, f.slot);
      return s.patch(f.macro, f.slot)
          .blossom(tri.vertices[lab[0]], tri.vertices[lab[1]], ps_->split_points[f.macro]);
    }
    case DualFunctionalC1::Kind::BoundaryEdge: {
      const auto& ed = tri.edges[f.edge];
      const int a = f.orient == 0 ? ed[0] : ed[1];
      const int b = f.orient == 0 ? ed[1] : ed[0];
      const int m = tri.edge_tris[f.edge][0];
      const int slot = ps_->micro_slot(m, a, b);
      return s.patch(m, slot).blossom(tri.vertices[a], tri.vertices[b],
                                      ps_->edge_split_points[f.edge]);
    }
  }
  throw std::logic_error("apply_dual: unknown functional kind");
}

std::array<double, 21> C1Space::local_values(int macro, std::span<const double> coeffs) const {
  if (coeffs.size() != dim_) throw std::invalid_argument("local_values: coefficient size mismatch");
  const auto& tri = ps_->base;
  std::array<double, 21> vals{};
  const auto corners = ps_->sorted_corners(macro);
  for (int ci = 0; ci < 3; ++ci)
    for (int r = 0; r < 3; ++r) vals[3 * ci + r] = coeffs[vertex_index(corners[ci], r)];
  for (int s = 0; s < 6; ++s) vals[9 + s] = coeffs[triangle_index(macro, s)];
  for (int pair = 0; pair < 3; ++pair) {
    const int s0 = 2 * pair;
    const auto lab = ps_->micro_label(macro, s0);
    const int e = tri.edge_index(lab[0], lab[1]);
    for (int o = 0; o < 2; ++o) {
      const int slot = s0 + o;
      const auto slab = ps_->micro_label(macro, slot);
      double v;
      if (tri.boundary[e]) {
        const int orient = slab[0] == tri.edges[e][0] ? 0 : 1;
        v = coeffs[boundary_edge_index(e, orient)];
      } else {
        // Edge blossom value folded from the two micro values facing the
        // edge: v_ab = (1-mu_own) c_own + mu_own c_other.
        const int other = ps_->other_macro(e, macro);
        const double mu = tri.edge_tris[e][0] == macro ? ps_->edge_mu[e] : 1.0 - ps_->edge_mu[e];
        const int oslot = ps_->micro_slot(other, slab[0], slab[1]);
        v = (1.0 - mu) * coeffs[triangle_index(macro, slot)] +
            mu * coeffs[triangle_index(other, oslot)];
      }
      vals[15 + 2 * pair + o] = v;
    }
  }
  return vals;
}

std::array<CubicPatch, 6> C1Space::local_dual_to_bb(int macro,
                                                    const std::array<double, 21>& values) const {
  const auto& solver = *solvers_[macro];
  Eigen::VectorXd b = Eigen::VectorXd::Zero(solver.a.rows());
  double scale = 1.0;
  for (int l = 0; l < 21; ++l) {
    b(solver.n_smooth + l) = values[l] * solver.rhs_scale[l];
    scale = std::max(scale, std::abs(values[l]));
  }
  const Eigen::VectorXd x = solver.qr.solve(b);
  const double resid = (solver.a * x - b).cwiseAbs().maxCoeff();
  if (resid > kLocalResidualTol * scale)
    throw std::runtime_error("local solve residual " + std::to_string(resid) +
                             " exceeds tolerance on triangle " + std::to_string(macro));
  std::array<CubicPatch, 6> out;
  for (int s = 0; s < 6; ++s) {
    out[s].tri = ps_->micro_points(macro, s);
    for (int t = 0; t < 10; ++t) out[s].coeffs[t] = x(10 * s + t);
  }
  return out;
}

std::vector<int> C1Space::support_macros(std::span<const double> coeffs) const {
  std::vector<int> macros;
  for (std::size_t m = 0; m < ps_->base.triangles.size(); ++m) {
    const auto vals = local_values(static_cast<int>(m), coeffs);
    for (double v : vals)
      if (v != 0.0) {
        macros.push_back(static_cast<int>(m));
        break;
      }
  }
  return macros;
}

std::vector<int> C1Space::support_macros_of_basis(std::size_t b) const {
  std::vector<double> unit(dim_, 0.0);
  unit[b] = 1.0;
  return support_macros(unit);
}

SplineFunction C1Space::synthesize(std::span<const double> coeffs) const {
  if (coeffs.size() != dim_) throw std::invalid_argument("synthesize: coefficient size mismatch");
  const std::size_t nt = ps_->base.triangles.size();
  std::vector<CubicPatch> patches(6 * nt);
  parallel_for(nt, [&](std::size_t m) {
    const auto vals = local_values(static_cast<int>(m), coeffs);
    bool active = false;
    for (double v : vals) active = active || v != 0.0;
    if (active) {
      const auto local = local_dual_to_bb(static_cast<int>(m), vals);
      for (int s = 0; s < 6; ++s) patches[6 * m + s] = local[s];
    } else {
      for (int s = 0; s < 6; ++s) patches[6 * m + s].tri = ps_->micro_points(static_cast<int>(m), s);
    }
  });
  return SplineFunction(ps_, std::move(patches));
}

SplineFunction C1Space::basis_function(std::size_t b) const {
  if (b >= dim_) throw std::invalid_argument("basis_function: index out of range");
  std::vector<double> unit(dim_, 0.0);
  unit[b] = 1.0;
  return synthesize(unit);
}

std::vector<double> C1Space::analyze(const SplineFunction& s, bool verify) const {
  if (verify) {
    const auto rep = verify_global_smoothness(s, 1);
    const double scale = std::max(1.0, s.max_abs_coeff());
    if (rep.max_residual > 1e-8 * scale)
      throw std::invalid_argument("analyze: spline is not C1 within tolerance (residual " +
                                  std::to_string(rep.max_residual) + ")");
  }
  std::vector<double> coeffs(dim_);
  for (std::size_t i = 0; i < dim_; ++i) coeffs[i] = apply_dual(s, i);
  return coeffs;
}

std::array<Point2, 3> C1Space::functional_points(std::size_t idx) const {
  const auto f = functional(idx);
  const auto& tri = ps_->base;
  switch (f.kind) {
    case DualFunctionalC1::Kind::Vertex: {
      const Point2 v = tri.vertices[f.vertex];
      return {v, v, v + 3.0 * (qtris_[f.vertex].q[f.r] - v)};
    }
    case DualFunctionalC1::Kind::Triangle: {
      const auto lab = ps_->micro_label(f.macro, f.slot);
      return {tri.vertices[lab[0]], tri.vertices[lab[1]], ps_->split_points[f.macro]};
    }
    case DualFunctionalC1::Kind::BoundaryEdge: {
      const auto& ed = tri.edges[f.edge];
      const int a = f.orient == 0 ? ed[0] : ed[1];
      const int b = f.orient == 0 ? ed[1] : ed[0];
      return {tri.vertices[a], tri.vertices[b], ps_->edge_split_points[f.edge]};
    }
  }
  throw std::logic_error("functional_points: unknown functional kind");
}

Point2 C1Space::greville_point(std::size_t idx) const {
  const auto f = functional(idx);
  const auto& tri = ps_->base;
  switch (f.kind) {
    case DualFunctionalC1::Kind::Vertex: return qtris_[f.vertex].q[f.r];
    case DualFunctionalC1::Kind::Triangle: {
      const auto lab = ps_->micro_label(f.macro, f.slot);
      return (1.0 / 3.0) *
             (tri.vertices[lab[0]] + tri.vertices[lab[1]] + ps_->split_points[f.macro]);
    }
    case DualFunctionalC1::Kind::BoundaryEdge: {
      const auto& ed = tri.edges[f.edge];
      return (1.0 / 3.0) *
             (tri.vertices[ed[0]] + tri.vertices[ed[1]] + ps_->edge_split_points[f.edge]);
    }
  }
  throw std::logic_error("greville_point: unknown functional kind");
}

// ---------------------------------------------------------------------------

GlobalSmoothnessReport verify_global_smoothness(const SplineFunction& s, int order) {
  const auto& ps = s.refinement();
  GlobalSmoothnessReport rep;
  rep.order = order;
  rep.edges = interior_ps_edges(ps);
  rep.reports.resize(rep.edges.size());
  const double scale_hint = s.max_abs_coeff();
  for (std::size_t i = 0; i < rep.edges.size(); ++i) {
    const auto& e = rep.edges[i];
    rep.reports[i] = check_smoothness(s.patch(e.macro_a, e.slot_a), s.patch(e.macro_b, e.slot_b),
                                      e.p1, e.p2, order, 1e-10, scale_hint);
    rep.max_residual = std::max(rep.max_residual, rep.reports[i].max_residual);
    if (e.family == PSEdge::Family::MacroCross)
      rep.max_cross_macro = std::max(rep.max_cross_macro, rep.reports[i].max_residual);
    else
      rep.max_spoke = std::max(rep.max_spoke, rep.reports[i].max_residual);
  }
  if (order >= 2) {
    // Agreement of the six second-order Taylor expansions at the split
    // point, rescaled by diam^2/6 to the coefficient scale of the blossom
    // residuals.
    const auto& tri = ps.base;
    rep.split_point_residuals.resize(tri.triangles.size());
    for (std::size_t m = 0; m < tri.triangles.size(); ++m) {
      const Point2 c = ps.split_points[m];
      const auto& t = tri.triangles[m];
      double diam = 0.0;
      for (int e = 0; e < 3; ++e)
        diam = std::max(diam, dist(tri.vertices[t[e]], tri.vertices[t[(e + 1) % 3]]));
      const auto h0 = s.patch(static_cast<int>(m), 0).hessian(c);
      double worst = 0.0;
      for (int slot = 1; slot < 6; ++slot) {
        const auto h = s.patch(static_cast<int>(m), slot).hessian(c);
        for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(h[k] - h0[k]));
      }
      rep.split_point_residuals[m] = worst * diam * diam / 6.0;
      rep.max_residual = std::max(rep.max_residual, rep.split_point_residuals[m]);
    }
  }
  return rep;
}

double max_identity_deviation(const std::vector<std::vector<double>>& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j)
      worst = std::max(worst, std::abs(m[i][j] - (i == j ? 1.0 : 0.0)));
  return worst;
}

}  // namespace pspline
