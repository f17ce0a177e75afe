#pragma once

#include <functional>
#include <string>

#include "pspline/reduced.hpp"

namespace pspline {

/// Exact projection of a cubic polynomial: the dual coefficients are polar
/// form values of the polynomial, and the synthesized spline reproduces it.
std::vector<double> project_cubic(const C1Space& space, const Cubic& p);
std::vector<double> project_cubic(const ReducedSpace& space, const Cubic& p);

struct FitReport {
  std::size_t dimension = 0;
  std::size_t samples = 0;
  double residual_l2 = 0.0;
  double residual_rms = 0.0;
  double residual_max = 0.0;
  double condition_estimate = 0.0;
  std::size_t rank = 0;
  double ridge = 0.0;
  bool ridge_engaged = false;
  std::vector<std::string> warnings;
};

struct FitResult {
  std::vector<double> coefficients;
  FitReport report;
};

/// Discrete least squares on sampled values, solved by column-pivoted QR of
/// the collocation matrix (never the normal equations). Needs at least as
/// many samples as degrees of freedom. A rank-deficient matrix engages the
/// ridge (given or a tiny default) with a warning.
FitResult least_squares_fit(const C1Space& space, const std::vector<Point2>& points,
                            const std::vector<double>& values, double ridge = 0.0);
FitResult least_squares_fit(const ReducedSpace& space, const std::vector<Point2>& points,
                            const std::vector<double>& values, double ridge = 0.0);

/// L2 distance between a spline and a reference function by a 7-point
/// degree-5 rule per micro-triangle.
double l2_error(const SplineFunction& s, const std::function<double(const Point2&)>& f);
/// Max deviation over a dense barycentric grid on every micro-triangle.
double linf_error(const SplineFunction& s, const std::function<double(const Point2&)>& f,
                  int per_edge = 6);
/// Integral of a function over the refined mesh with the same rule.
double integrate(const PSRefinement& ps, const std::function<double(const Point2&)>& f);

/// Jittered tensor grid over the mesh bounding box, keeping the points that
/// land inside the triangulation. Deterministic for a fixed seed.
std::vector<Point2> jittered_grid_samples(const Triangulation& tri, std::size_t target,
                                          unsigned seed);

enum class SpaceKind { C1, Reduced };

struct LevelStats {
  int level = 0;
  double h = 0.0;
  std::size_t dofs = 0;
  std::size_t samples = 0;
  double linf = 0.0;
  double l2 = 0.0;
};

struct ConvergenceReport {
  std::vector<LevelStats> levels;
  std::vector<double> observed_orders;  // log2 of consecutive L2 ratios
};

/// Least-squares approximation of f over `levels` uniform refinements of the
/// base mesh; level k uses the k-times refined triangulation.
ConvergenceReport convergence_study(const std::function<double(const Point2&)>& f,
                                    const Triangulation& base, int levels, SpaceKind kind,
                                    SplitStrategy strategy = SplitStrategy::Barycenter,
                                    unsigned seed = 1, double oversample = 3.0);

}  // namespace pspline
