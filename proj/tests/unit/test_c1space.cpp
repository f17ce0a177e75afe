#include "pspline/c1space.hpp"

#include "pspline/fit.hpp"

#include <doctest.h>

#include <memory>
#include <random>

#include "test_helpers.hpp"

using namespace pspline;
using namespace pspline::testing;

namespace {

std::shared_ptr<const PSRefinement> refine_shared(const Triangulation& tri, RefineOptions opts = {}) {
  return std::make_shared<PSRefinement>(refine_powell_sabin(tri, opts));
}

RefineOptions barycenter_opts() {
  RefineOptions o;
  o.strategy = SplitStrategy::Barycenter;
  return o;
}

}  // namespace

TEST_CASE("vertex triangles contain the mandated points") {
  SUBCASE("single symmetric triangle, explicit points") {
    const auto ps = refine_shared(unit_right_triangle(), barycenter_opts());
    const auto qs = choose_vertex_triangles(*ps);
    // Mandated for vertex (0,0): itself, a third toward the split point and
    // toward the two incident edge split points.
    const std::vector<Point2> mandated = {
        {0.0, 0.0}, {1.0 / 9.0, 1.0 / 9.0}, {1.0 / 6.0, 0.0}, {0.0, 1.0 / 6.0}};
    for (const auto& p : mandated) {
      const auto bc = barycentric(p, qs[0].q[0], qs[0].q[1], qs[0].q[2]);
      CHECK(std::min({bc[0], bc[1], bc[2]}) >= -1e-12);
    }
  }
  SUBCASE("containment on a jittered mesh") {
    const auto tri = grid_mesh(5, 5, 0.25, 31);
    const auto ps = refine_shared(tri);
    const auto qs = choose_vertex_triangles(*ps);
    for (std::size_t v = 0; v < tri.vertices.size(); ++v) {
      std::vector<Point2> pts = {tri.vertices[v]};
      for (std::size_t m = 0; m < tri.triangles.size(); ++m)
        for (int w : tri.triangles[m])
          if (w == static_cast<int>(v))
            pts.push_back((2.0 / 3.0) * tri.vertices[v] + (1.0 / 3.0) * ps->split_points[m]);
      for (std::size_t e = 0; e < tri.edges.size(); ++e)
        for (int w : tri.edges[e])
          if (w == static_cast<int>(v))
            pts.push_back((2.0 / 3.0) * tri.vertices[v] + (1.0 / 3.0) * ps->edge_split_points[e]);
      for (const auto& p : pts) {
        const auto bc = barycentric(p, qs[v].q[0], qs[v].q[1], qs[v].q[2]);
        CHECK(std::min({bc[0], bc[1], bc[2]}) >= -1e-12);
      }
    }
  }
  SUBCASE("translation equivariance") {
    const auto base = grid_mesh(2, 2, 0.2, 8);
    const auto q0 = choose_vertex_triangles(*refine_shared(base));
    std::vector<Point2> moved;
    for (const auto& p : base.vertices) moved.push_back(p + Point2{3.25, -1.5});
    const auto q1 = choose_vertex_triangles(*refine_shared(build_triangulation(moved, base.triangles)));
    for (std::size_t v = 0; v < q0.size(); ++v)
      for (int r = 0; r < 3; ++r)
        CHECK(dist(q1[v].q[r], q0[v].q[r] + Point2{3.25, -1.5}) <= 1e-12);
  }
}

TEST_CASE("space dimension bookkeeping") {
  const auto ps = refine_shared(square_two_triangles(), barycenter_opts());
  C1Space space(ps);
  CHECK(space.dim() == 3 * 4 + 4 * 5);  // 3|V| + 4|E|
  CHECK(space.dim() == 3 * 4 + 6 * 2 + 2 * 4);
}

TEST_CASE("synthesis of the all-ones coefficient vector is the constant one") {
  const auto ps = refine_shared(square_two_triangles(), barycenter_opts());
  C1Space space(ps);
  const std::vector<double> ones(space.dim(), 1.0);
  const auto s = space.synthesize(ones);
  for (const auto& patch : s.patches())
    for (double c : patch.coeffs) CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("local solve reproduces a cubic against the from_polynomial oracle") {
  std::mt19937 rng(37);
  const auto ps = refine_shared(unit_right_triangle(), barycenter_opts());
  C1Space space(ps);
  const auto p = random_cubic(rng);
  const auto coeffs = project_cubic(space, p);
  const auto s = space.synthesize(coeffs);
  for (int slot = 0; slot < 6; ++slot) {
    const auto oracle = CubicPatch::from_polynomial(p, ps->micro_points(0, slot));
    for (int t = 0; t < 10; ++t)
      CHECK(std::abs(s.patch(0, slot).coeffs[t] - oracle.coeffs[t]) <= 1e-10);
  }
}

TEST_CASE("indicator inputs round-trip through the local solver") {
  const auto ps = refine_shared(unit_right_triangle(), barycenter_opts());
  C1Space space(ps);
  for (std::size_t a = 0; a < space.dim(); ++a) {
    std::array<double, 21> vals{};
    std::vector<double> unit(space.dim(), 0.0);
    unit[a] = 1.0;
    vals = space.local_values(0, unit);
    const auto patches = space.local_dual_to_bb(0, vals);
    SplineFunction s(ps, {patches.begin(), patches.end()});
    const auto back = space.local_values(0, space.analyze(s, false));
    for (int l = 0; l < 21; ++l) CHECK(std::abs(back[l] - vals[l]) <= 1e-10);
  }
}

TEST_CASE("apply_dual on simple splines") {
  const auto ps = refine_shared(square_two_triangles(), barycenter_opts());
  C1Space space(ps);
  const auto& tri = ps->base;

  std::vector<double> ones(space.dim(), 1.0);
  const auto constant = space.synthesize(ones);
  for (std::size_t i = 0; i < space.dim(); ++i)
    CHECK(space.apply_dual(constant, i) == doctest::Approx(1.0).epsilon(1e-11));

  Cubic x;
  x.c.fill(0.0);
  x.c[1] = 1.0;
  const auto sx = space.synthesize(project_cubic(space, x));
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const auto f = space.functional(i);
    if (f.kind != DualFunctionalC1::Kind::Triangle) continue;
    const auto lab = ps->micro_label(f.macro, f.slot);
    const double expect =
        (tri.vertices[lab[0]].x + tri.vertices[lab[1]].x + ps->split_points[f.macro].x) / 3.0;
    CHECK(space.apply_dual(sx, i) == doctest::Approx(expect).epsilon(1e-11));
  }

  std::mt19937 rng(41);
  const auto p = random_cubic(rng);
  const auto sp = space.synthesize(project_cubic(space, p));
  for (int v = 0; v < 4; ++v)
    for (int r = 0; r < 3; ++r) {
      // beta_v applied to a cubic equals P(v) + directional derivative
      // toward the q point.
      const Point2 pv = tri.vertices[v];
      const Point2 q = space.vertex_triangles()[v].q[r];
      const auto patch = CubicPatch::from_polynomial(p, {{pv, q, pv + Point2{0.0, 1.0}}});
      const double expect = p(pv) + patch.deriv1(pv, q - pv);
      CHECK(space.apply_dual(sp, space.vertex_index(v, r)) ==
            doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("analyze is a left inverse of synthesize") {
  const auto ps = refine_shared(square_two_triangles(), barycenter_opts());
  C1Space space(ps);
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(space.dim());
  for (double& v : c) v = u(rng);
  const auto s = space.synthesize(c);
  const auto back = space.analyze(s);
  for (std::size_t i = 0; i < space.dim(); ++i) CHECK(std::abs(back[i] - c[i]) <= 1e-9);
}

TEST_CASE("analyze of x^3 returns its polarization values") {
  const auto ps = refine_shared(unit_right_triangle(), barycenter_opts());
  C1Space space(ps);
  Cubic x3;
  x3.c.fill(0.0);
  x3.c[6] = 1.0;
  const auto expected = project_cubic(space, x3);
  const auto s = space.synthesize(expected);
  const auto got = space.analyze(s);
  for (std::size_t i = 0; i < space.dim(); ++i)
    CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-9));
}

TEST_CASE("cubic reproduction for all ten monomials") {
  const auto ps = refine_shared(square_two_triangles(), barycenter_opts());
  C1Space space(ps);
  std::mt19937 rng(47);
  for (int mono = 0; mono < 10; ++mono) {
    Cubic p;
    p.c.fill(0.0);
    p.c[mono] = 1.0;
    const auto s = space.synthesize(project_cubic(space, p));
    for (int trial = 0; trial < 50; ++trial) {
      const Point2 x = {std::uniform_real_distribution<double>(0.0, 1.0)(rng),
                        std::uniform_real_distribution<double>(0.0, 1.0)(rng)};
      CHECK(std::abs(s.eval(x) - p(x)) <= 1e-10);
    }
  }
}

TEST_CASE("synthesized splines are globally C1") {
  const auto tri = grid_mesh(3, 2, 0.15, 53);
  const auto ps = refine_shared(tri);
  C1Space space(ps);
  std::mt19937 rng(59);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(space.dim());
  for (double& v : c) v = u(rng);
  const auto s = space.synthesize(c);
  const auto rep = verify_global_smoothness(s, 1);
  CHECK(rep.max_residual <= 1e-10 * std::max(1.0, s.max_abs_coeff()));
}

TEST_CASE("basis functions: support, duality, partition of unity") {
  const auto ps = refine_shared(square_two_triangles(), barycenter_opts());
  C1Space space(ps);
  const auto& tri = ps->base;

  SUBCASE("vertex basis functions vanish outside the vertex star") {
    for (int v = 0; v < 4; ++v) {
      const auto b = space.basis_function(space.vertex_index(v, 1));
      for (std::size_t m = 0; m < tri.triangles.size(); ++m) {
        const auto& t = tri.triangles[m];
        const bool incident = t[0] == v || t[1] == v || t[2] == v;
        double mx = 0.0;
        for (int s = 0; s < 6; ++s)
          for (double cc : b.patch(static_cast<int>(m), s).coeffs)
            mx = std::max(mx, std::abs(cc));
        if (!incident) CHECK(mx == 0.0);
      }
    }
  }

  SUBCASE("micro-triangle basis functions extend only across their base edge") {
    const auto supp = space.support_macros_of_basis(space.triangle_index(0, 0));
    // Micro (1,2,0) of macro 0 borders the interior edge {1,2}; its basis
    // function spills into macro 1 and nowhere else.
    CHECK(space.support_macros_of_basis(space.triangle_index(0, 2)) == std::vector<int>{0, 1});
  }

  SUBCASE("duality matrix is the identity") {
    const auto m = duality_matrix(space);
    CHECK(max_identity_deviation(m) <= 1e-9);
  }

  SUBCASE("partition of unity and nonnegativity at sample points") {
    std::mt19937 rng(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SplineFunction> basis;
    for (std::size_t b = 0; b < space.dim(); ++b) basis.push_back(space.basis_function(b));
    for (int trial = 0; trial < 100; ++trial) {
      const Point2 p{u(rng), u(rng)};
      double sum = 0.0;
      for (const auto& b : basis) {
        const double v = b.eval(p);
        sum += v;
        CHECK(v >= -1e-12);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("greville points reproduce the identity map") {
  const auto ps = refine_shared(square_two_triangles(), barycenter_opts());
  C1Space space(ps);
  std::vector<SplineFunction> basis;
  for (std::size_t b = 0; b < space.dim(); ++b) basis.push_back(space.basis_function(b));
  std::mt19937 rng(67);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Point2 p{u(rng), u(rng)};
    Point2 acc{0.0, 0.0};
    for (std::size_t b = 0; b < space.dim(); ++b)
      acc += basis[b].eval(p) * space.greville_point(b);
    CHECK(dist(acc, p) <= 1e-10);
  }
}

TEST_CASE("micro-triangle basis functions have a C2 defect across their split spoke") {
  const auto ps = refine_shared(square_two_triangles(), barycenter_opts());
  C1Space space(ps);
  const auto b = space.basis_function(space.triangle_index(0, 0));
  const auto rep = verify_global_smoothness(b, 2);
  double split_spoke_max = 0.0;
  for (std::size_t i = 0; i < rep.edges.size(); ++i)
    if (rep.edges[i].family == PSEdge::Family::SplitSpoke && rep.edges[i].macro_a == 0)
      split_spoke_max = std::max(split_spoke_max, rep.reports[i].max_residual);
  CHECK(split_spoke_max > 1e-3);
}

TEST_CASE("point location and evaluation consistency") {
  const auto ps = refine_shared(square_two_triangles(), barycenter_opts());
  C1Space space(ps);
  std::mt19937 rng(71);
  const auto p = random_cubic(rng);
  const auto s = space.synthesize(project_cubic(space, p));

  SUBCASE("points on micro edges evaluate consistently from either side") {
    for (int m = 0; m < 2; ++m)
      for (int slot = 0; slot < 6; ++slot) {
        const auto pts = ps->micro_points(m, slot);
        const Point2 mid = 0.5 * (pts[0] + pts[2]);
        CHECK(std::abs(s.eval(mid) - s.patch(m, slot).eval(mid)) <= 1e-11);
      }
  }
  SUBCASE("matches per-patch evaluation at random interior points") {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      const Point2 x{u(rng), u(rng)};
      CHECK(std::abs(s.eval(x) - p(x)) <= 1e-10);
    }
  }
  SUBCASE("points far outside are rejected") {
    CHECK_THROWS_AS(s.eval({5.0, 5.0}), std::invalid_argument);
  }
}

TEST_CASE("a spline synthesized from one cubic is C2 everywhere") {
  const auto ps = refine_shared(square_two_triangles(), barycenter_opts());
  C1Space space(ps);
  std::mt19937 rng(103);
  const auto p = random_cubic(rng);
  const auto s = space.synthesize(project_cubic(space, p));
  const auto rep = verify_global_smoothness(s, 2);
  CHECK(rep.max_residual <= 1e-10 * std::max(1.0, s.max_abs_coeff()));
}

TEST_CASE("analyze rejects splines that are not C1") {
  const auto ps = refine_shared(unit_right_triangle(), barycenter_opts());
  C1Space space(ps);
  // Independent random patches per micro-triangle: smooth nowhere.
  std::mt19937 rng(101);
  std::vector<CubicPatch> patches;
  for (int slot = 0; slot < 6; ++slot) {
    auto patch = CubicPatch::from_polynomial(random_cubic(rng), ps->micro_points(0, slot));
    patches.push_back(patch);
  }
  const SplineFunction bad(ps, std::move(patches));
  CHECK_THROWS_AS(space.analyze(bad), std::invalid_argument);
}

TEST_CASE("apply_dual rejects splines from another refinement") {
  const auto ps1 = refine_shared(unit_right_triangle(), barycenter_opts());
  const auto ps2 = refine_shared(unit_right_triangle(), barycenter_opts());
  C1Space s1(ps1), s2(ps2);
  const auto fn = s1.basis_function(0);
  CHECK_THROWS_AS(s2.apply_dual(fn, 0), std::invalid_argument);
}

TEST_CASE("duality on a twenty-triangle jittered incenter mesh") {
  const auto tri = grid_mesh(5, 2, 0.2, 73);
  REQUIRE(tri.triangles.size() == 20);
  const auto ps = refine_shared(tri);
  C1Space space(ps);
  const auto m = duality_matrix(space);
  CHECK(m.size() == space.dim());
  CHECK(max_identity_deviation(m) <= 1e-9);
}
