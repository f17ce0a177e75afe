#include "pspline/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "pspline/parallel.hpp"

namespace pspline {

namespace {

// Radon 7-point rule, exact to degree 5. Barycentric point plus weight.
struct QuadNode {
  double b0, b1, b2, w;
};

const std::array<QuadNode, 7>& quad_rule() {
  static const std::array<QuadNode, 7> rule = [] {
    const double s15 = std::sqrt(15.0);
    const double a = (6.0 - s15) / 21.0, wa = (155.0 - s15) / 1200.0;
    const double b = (6.0 + s15) / 21.0, wb = (155.0 + s15) / 1200.0;
    return std::array<QuadNode, 7>{{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0},
                                    {a, a, 1.0 - 2.0 * a, wa},
                                    {a, 1.0 - 2.0 * a, a, wa},
                                    {1.0 - 2.0 * a, a, a, wa},
                                    {b, b, 1.0 - 2.0 * b, wb},
                                    {b, 1.0 - 2.0 * b, b, wb},
                                    {1.0 - 2.0 * b, b, b, wb}}};
  }();
  return rule;
}

template <class Space>
std::vector<double> project_cubic_impl(const Space& space, const Cubic& p) {
  std::vector<double> c(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const auto pts = space.functional_points(i);
    c[i] = polarize(p, pts[0], pts[1], pts[2]);
  }
  return c;
}

int locate_macro(const Triangulation& tri, const Point2& p) {
  for (std::size_t m = 0; m < tri.triangles.size(); ++m) {
    const auto& t = tri.triangles[m];
    const auto bc = barycentric(p, tri.vertices[t[0]], tri.vertices[t[1]], tri.vertices[t[2]]);
    if (std::min({bc[0], bc[1], bc[2]}) >= -1e-10) return static_cast<int>(m);
  }
  return -1;
}

template <class Space>
FitResult least_squares_impl(const Space& space, const std::vector<Point2>& points,
                             const std::vector<double>& values, double ridge) {
  if (points.size() != values.size())
    throw std::invalid_argument("least_squares_fit: points/values size mismatch");
  const std::size_t n = points.size();
  const std::size_t d = space.dim();
  if (n < d)
    throw std::invalid_argument("least_squares_fit: fewer samples (" + std::to_string(n) +
                                ") than degrees of freedom (" + std::to_string(d) + ")");
  const auto& tri = space.refinement().base;

  // Locate every sample once; reject points outside the domain.
  std::vector<std::vector<int>> macro_samples(tri.triangles.size());
  for (std::size_t i = 0; i < n; ++i) {
    const int m = locate_macro(tri, points[i]);
    if (m < 0)
      throw std::invalid_argument("least_squares_fit: sample " + std::to_string(i) +
                                  " lies outside the domain");
    macro_samples[m].push_back(static_cast<int>(i));
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, d);
  parallel_for(d, [&](std::size_t b) {
    const auto fn = space.basis_function(b);
    for (const int m : space.support_macros_of_basis(b))
      for (const int i : macro_samples[m]) {
        // The sample is inside macro m; find its micro-triangle directly.
        const auto [mm, slot] = fn.locate(points[i]);
        a(i, b) = fn.patch(mm, slot).eval(points[i]);
      }
  });

  FitReport report;
  report.dimension = d;
  report.samples = n;
  report.ridge = ridge;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const std::size_t rank = static_cast<std::size_t>(qr.rank());
  report.rank = rank;
  {
    const auto& rdiag = qr.matrixR().diagonal();
    const double rmax = std::abs(rdiag(0));
    const double rmin = std::abs(rdiag(static_cast<Eigen::Index>(d) - 1));
    report.condition_estimate = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  }

  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = values[i];

  Eigen::VectorXd x;
  if (rank < d && ridge == 0.0) {
    report.ridge = 1e-12 * a.cwiseAbs().maxCoeff();
    report.warnings.push_back("design matrix rank deficient (rank " + std::to_string(rank) +
                              " of " + std::to_string(d) + "); default ridge engaged");
  }
  if (report.ridge > 0.0) {
    report.ridge_engaged = true;
    Eigen::MatrixXd aug(n + d, d);
    aug.topRows(n) = a;
    aug.bottomRows(d) =
        std::sqrt(report.ridge) * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                            static_cast<Eigen::Index>(d));
    Eigen::VectorXd rhs_aug = Eigen::VectorXd::Zero(n + d);
    rhs_aug.head(n) = rhs;
    x = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(aug).solve(rhs_aug);
  } else {
    x = qr.solve(rhs);
  }

  const Eigen::VectorXd resid = a * x - rhs;
  report.residual_l2 = resid.norm();
  report.residual_rms = resid.norm() / std::sqrt(static_cast<double>(n));
  report.residual_max = resid.cwiseAbs().maxCoeff();

  FitResult result;
  result.report = std::move(report);
  result.coefficients.assign(x.data(), x.data() + x.size());
  return result;
}

}  // namespace

std::vector<double> project_cubic(const C1Space& space, const Cubic& p) {
  return project_cubic_impl(space, p);
}

std::vector<double> project_cubic(const ReducedSpace& space, const Cubic& p) {
  return project_cubic_impl(space, p);
}

FitResult least_squares_fit(const C1Space& space, const std::vector<Point2>& points,
                            const std::vector<double>& values, double ridge) {
  return least_squares_impl(space, points, values, ridge);
}

FitResult least_squares_fit(const ReducedSpace& space, const std::vector<Point2>& points,
                            const std::vector<double>& values, double ridge) {
  return least_squares_impl(space, points, values, ridge);
}

double l2_error(const SplineFunction& s, const std::function<double(const Point2&)>& f) {
  const auto& ps = s.refinement();
  double acc = 0.0;
  for (std::size_t m = 0; m < ps.base.triangles.size(); ++m) {
    for (int slot = 0; slot < 6; ++slot) {
      const auto pts = ps.micro_points(static_cast<int>(m), slot);
      const double area = 0.5 * std::abs(signed_area2(pts[0], pts[1], pts[2]));
      const auto& patch = s.patch(static_cast<int>(m), slot);
      for (const auto& node : quad_rule()) {
        const Point2 x = node.b0 * pts[0] + node.b1 * pts[1] + node.b2 * pts[2];
        const double dv = patch.eval(x) - f(x);
        acc += area * node.w * dv * dv;
      }
    }
  }
  return std::sqrt(acc);
}

double linf_error(const SplineFunction& s, const std::function<double(const Point2&)>& f,
                  int per_edge) {
  const auto& ps = s.refinement();
  double worst = 0.0;
  for (std::size_t m = 0; m < ps.base.triangles.size(); ++m)
    for (int slot = 0; slot < 6; ++slot) {
      const auto pts = ps.micro_points(static_cast<int>(m), slot);
      const auto& patch = s.patch(static_cast<int>(m), slot);
      for (int i = 0; i <= per_edge; ++i)
        for (int j = 0; j <= per_edge - i; ++j) {
          const double b0 = static_cast<double>(i) / per_edge;
          const double b1 = static_cast<double>(j) / per_edge;
          const Point2 x = b0 * pts[0] + b1 * pts[1] + (1.0 - b0 - b1) * pts[2];
          worst = std::max(worst, std::abs(patch.eval(x) - f(x)));
        }
    }
  return worst;
}

double integrate(const PSRefinement& ps, const std::function<double(const Point2&)>& f) {
  double acc = 0.0;
  for (std::size_t m = 0; m < ps.base.triangles.size(); ++m)
    for (int slot = 0; slot < 6; ++slot) {
      const auto pts = ps.micro_points(static_cast<int>(m), slot);
      const double area = 0.5 * std::abs(signed_area2(pts[0], pts[1], pts[2]));
      for (const auto& node : quad_rule())
        acc += area * node.w * f(node.b0 * pts[0] + node.b1 * pts[1] + node.b2 * pts[2]);
    }
  return acc;
}

std::vector<Point2> jittered_grid_samples(const Triangulation& tri, std::size_t target,
                                          unsigned seed) {
  double xmin = tri.vertices[0].x, xmax = xmin, ymin = tri.vertices[0].y, ymax = ymin;
  for (const auto& p : tri.vertices) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.35, 0.35);
  std::vector<Point2> out;
  int nside = std::max<int>(2, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(target)))));
  for (int attempt = 0; attempt < 16 && out.size() < target; ++attempt) {
    out.clear();
    for (int i = 0; i < nside; ++i)
      for (int j = 0; j < nside; ++j) {
        const double fx = (i + 0.5 + jitter(rng)) / nside;
        const double fy = (j + 0.5 + jitter(rng)) / nside;
        const Point2 p{xmin + fx * (xmax - xmin), ymin + fy * (ymax - ymin)};
        if (locate_macro(tri, p) >= 0) out.push_back(p);
      }
    if (out.size() < target) nside = nside * 4 / 3 + 1;
  }
  if (out.size() < target)
    throw std::runtime_error("jittered_grid_samples: could not reach the requested count");
  return out;
}

ConvergenceReport convergence_study(const std::function<double(const Point2&)>& f,
                                    const Triangulation& base, int levels, SpaceKind kind,
                                    SplitStrategy strategy, unsigned seed, double oversample) {
  if (levels < 2) throw std::invalid_argument("convergence_study: need at least two levels");
  ConvergenceReport rep;
  for (int level = 1; level <= levels; ++level) {
    const auto tri = uniform_refine(base, level);
    RefineOptions opts;
    opts.strategy = strategy;
    auto ps = std::make_shared<PSRefinement>(refine_powell_sabin(tri, opts));
    auto c1 = std::make_shared<C1Space>(ps);

    LevelStats stats;
    stats.level = level;
    for (const auto& e : tri.edges)
      stats.h = std::max(stats.h, dist(tri.vertices[e[0]], tri.vertices[e[1]]));

    std::vector<double> coeffs;
    std::size_t dofs = 0;
    if (kind == SpaceKind::Reduced) {
      ReducedSpace space(c1);
      dofs = space.dim();
      const auto samples =
          jittered_grid_samples(tri, static_cast<std::size_t>(oversample * dofs), seed + level);
      std::vector<double> values(samples.size());
      std::transform(samples.begin(), samples.end(), values.begin(),
                     [&](const Point2& p) { return f(p); });
      const auto fit = least_squares_fit(space, samples, values);
      stats.samples = samples.size();
      const auto s = space.synthesize(fit.coefficients);
      stats.linf = linf_error(s, f);
      stats.l2 = l2_error(s, f);
    } else {
      dofs = c1->dim();
      const auto samples =
          jittered_grid_samples(tri, static_cast<std::size_t>(oversample * dofs), seed + level);
      std::vector<double> values(samples.size());
      std::transform(samples.begin(), samples.end(), values.begin(),
                     [&](const Point2& p) { return f(p); });
      const auto fit = least_squares_fit(*c1, samples, values);
      stats.samples = samples.size();
      const auto s = c1->synthesize(fit.coefficients);
      stats.linf = linf_error(s, f);
      stats.l2 = l2_error(s, f);
    }
    stats.dofs = dofs;
    rep.levels.push_back(stats);
  }
  for (std::size_t k = 1; k < rep.levels.size(); ++k)
    rep.observed_orders.push_back(std::log2(rep.levels[k - 1].l2 / rep.levels[k].l2));
  return rep;
}

}  // namespace pspline
