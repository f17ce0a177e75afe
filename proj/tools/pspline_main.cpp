#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include "pspline/io.hpp"

using nlohmann::json;
using namespace pspline;

namespace {

struct CommonOptions {
  std::string mesh;
  std::string out;
  std::string space = "c1";
  std::string split = "incenter";
  double tol = 1e-10;
  int threads = 0;
  unsigned seed = 1;
  bool force_asymmetric = false;
};

SplitStrategy parse_split(const std::string& s) {
  if (s == "incenter") return SplitStrategy::Incenter;
  if (s == "barycenter") return SplitStrategy::Barycenter;
  throw CLI::ValidationError("--split", "must be incenter or barycenter");
}

RefineOptions refine_options(const CommonOptions& c) {
  RefineOptions opts;
  opts.strategy = parse_split(c.split);
  opts.collinearity_tol = c.tol;
  opts.force_asymmetric = c.force_asymmetric;
  return opts;
}

std::shared_ptr<const PSRefinement> load_ps(const CommonOptions& c) {
  return std::make_shared<PSRefinement>(load_refinement_json(c.mesh, refine_options(c)));
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

void apply_threads(int threads) {
  if (threads > 0 && !std::getenv("PSPLINE_THREADS"))
    setenv("PSPLINE_THREADS", std::to_string(threads).c_str(), 0);
}

json refinement_summary(const PSRefinement& ps) {
  const auto dims = dimension_report(ps);
  json j;
  j["vertices"] = dims.vertices;
  j["triangles"] = dims.triangles;
  j["edges"] = dims.edges;
  j["boundary_edges"] = dims.boundary_edges;
  j["symmetric_triangles"] = dims.symmetric_triangles;
  j["ps_vertices"] = ps.ps_vertex_count();
  j["ps_triangles"] = ps.ps_triangle_count();
  j["warnings"] = ps.warnings;
  return j;
}

int cmd_refine(const CommonOptions& c) {
  const auto ps = load_ps(c);
  save_refinement_json(*ps, c.out.empty() ? "ps.json" : c.out);
  std::cout << refinement_summary(*ps).dump(2) << '\n';
  return 0;
}

int cmd_basis(const CommonOptions& c, bool report) {
  const auto ps = load_ps(c);
  auto c1 = std::make_shared<C1Space>(ps);
  const auto dims = dimension_report(*ps);
  json j;
  j["space"] = c.space;
  j["c1_dimension"] = dims.full_dim;
  j["reduced_dimension"] = dims.reduced_dim;
  j["dimension_ratio"] = dims.ratio;
  j["symmetric_triangles"] = dims.symmetric_triangles;
  j["max_local_condition"] = c1->max_condition_estimate();
  double duality = 0.0;
  if (c.space == "reduced") {
    ReducedSpace space(c1);
    j["dimension"] = space.dim();
    duality = max_identity_deviation(duality_matrix(space));
  } else {
    j["dimension"] = c1->dim();
    duality = max_identity_deviation(duality_matrix(*c1));
  }
  j["duality_max_deviation"] = duality;
  j["duality_ok"] = duality < 1e-9;
  if (report) {
    double lemma = 0.0;
    for (std::size_t e = 0; e < ps->base.edges.size(); ++e)
      for (int s = 0; s < 2; ++s) {
        const int m = ps->base.edge_tris[e][s];
        if (m < 0 || !ps->symmetric[m]) continue;
        const auto& side = ps->edge_sides[e][s];
        const double r =
            ps->base.boundary[e]
                ? std::abs((1 - side.nu) * (1 - side.omega) - 1.0)
                : std::abs((1 - side.nu) * (1 - side.omega) +
                           side.nu * ps->edge_sides[e][1 - s].omega - 1.0);
        lemma = std::max(lemma, r);
      }
    j["weight_identity_max_residual"] = lemma;
  }
  std::ofstream file;
  open_out(c.out, file) << j.dump(2) << '\n';
  return 0;
}

int cmd_check(const CommonOptions& c, int order) {
  const auto ps = load_ps(c);
  auto c1 = std::make_shared<C1Space>(ps);
  const auto edges = interior_ps_edges(*ps);
  std::vector<double> edge_max(edges.size(), 0.0);
  std::vector<double> split_max(ps->base.triangles.size(), 0.0);

  auto absorb = [&](const SplineFunction& fn) {
    const auto rep = verify_global_smoothness(fn, order);
    for (std::size_t i = 0; i < edges.size(); ++i)
      edge_max[i] = std::max(edge_max[i], rep.reports[i].max_residual);
    for (std::size_t m = 0; m < rep.split_point_residuals.size(); ++m)
      split_max[m] = std::max(split_max[m], rep.split_point_residuals[m]);
  };
  if (c.space == "reduced") {
    ReducedSpace space(c1);
    for (std::size_t b = 0; b < space.dim(); ++b) absorb(space.basis_function(b));
  } else {
    for (std::size_t b = 0; b < c1->dim(); ++b) absorb(c1->basis_function(b));
  }

  static const char* family_names[] = {"corner_spoke", "split_spoke", "macro_cross"};
  std::ofstream file;
  auto& out = open_out(c.out, file);
  out << "edge_id,family,macro_a,macro_b,order,max_residual\n";
  for (std::size_t i = 0; i < edges.size(); ++i)
    out << i << ',' << family_names[static_cast<int>(edges[i].family)] << ',' << edges[i].macro_a
        << ',' << edges[i].macro_b << ',' << order << ',' << edge_max[i] << '\n';
  if (order >= 2)
    for (std::size_t m = 0; m < split_max.size(); ++m)
      out << edges.size() + m << ",split_point," << m << ',' << m << ',' << order << ','
          << split_max[m] << '\n';
  return 0;
}

int cmd_fit(const CommonOptions& c, const std::string& samples_path, double ridge,
            const std::string& report_path, bool with_patches) {
  const auto ps = load_ps(c);
  auto c1 = std::make_shared<C1Space>(ps);
  std::vector<Point2> points;
  std::vector<double> values;
  load_samples_csv(samples_path, points, values);

  FitResult fit;
  std::unique_ptr<SplineFunction> spline;
  if (c.space == "reduced") {
    ReducedSpace space(c1);
    fit = least_squares_fit(space, points, values, ridge);
    spline = std::make_unique<SplineFunction>(space.synthesize(fit.coefficients));
  } else {
    fit = least_squares_fit(*c1, points, values, ridge);
    spline = std::make_unique<SplineFunction>(c1->synthesize(fit.coefficients));
  }
  save_spline_json(c.space, *ps, fit.coefficients, c.out.empty() ? "spline.json" : c.out,
                   with_patches ? spline.get() : nullptr);

  json j;
  j["space"] = c.space;
  j["dimension"] = fit.report.dimension;
  j["samples"] = fit.report.samples;
  j["residual_l2"] = fit.report.residual_l2;
  j["residual_rms"] = fit.report.residual_rms;
  j["residual_max"] = fit.report.residual_max;
  j["condition_estimate"] = fit.report.condition_estimate;
  j["rank"] = fit.report.rank;
  j["ridge"] = fit.report.ridge;
  j["ridge_engaged"] = fit.report.ridge_engaged;
  j["warnings"] = fit.report.warnings;
  std::ofstream file;
  open_out(report_path, file) << j.dump(2) << '\n';
  return 0;
}

int cmd_eval(const std::string& spline_path, int grid, const std::string& out_path) {
  const auto f = load_spline_json(spline_path);
  auto ps = std::make_shared<PSRefinement>(f.refinement);
  auto c1 = std::make_shared<C1Space>(ps);
  std::unique_ptr<SplineFunction> s;
  if (f.space == "reduced") {
    ReducedSpace space(c1);
    s = std::make_unique<SplineFunction>(space.synthesize(f.coefficients));
  } else {
    s = std::make_unique<SplineFunction>(c1->synthesize(f.coefficients));
  }
  double xmin = ps->base.vertices[0].x, xmax = xmin, ymin = ps->base.vertices[0].y, ymax = ymin;
  for (const auto& p : ps->base.vertices) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  std::ofstream file;
  auto& out = open_out(out_path, file);
  out << "x,y,value\n";
  out.precision(17);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const Point2 p{xmin + (i + 0.5) * (xmax - xmin) / grid,
                     ymin + (j + 0.5) * (ymax - ymin) / grid};
      try {
        const double v = s->eval(p);
        out << p.x << ',' << p.y << ',' << v << '\n';
      } catch (const std::invalid_argument&) {
        // outside the domain; skip
      }
    }
  return 0;
}

int cmd_convergence(const CommonOptions& c, int levels, const std::string& fn_name) {
  const auto tri = load_mesh_json(c.mesh);
  std::function<double(const Point2&)> f;
  if (fn_name == "sinpi")
    f = [](const Point2& p) { return std::sin(M_PI * p.x) * std::sin(M_PI * p.y); };
  else if (fn_name == "cubic")
    f = [](const Point2& p) { return p.x * p.x * p.y - 2.0 * p.y * p.y * p.y + p.x; };
  else
    throw std::runtime_error("unknown --fn '" + fn_name + "' (available: sinpi, cubic)");
  const auto kind = c.space == "reduced" ? SpaceKind::Reduced : SpaceKind::C1;
  const auto rep = convergence_study(f, tri, levels, kind, parse_split(c.split), c.seed);
  std::ofstream file;
  auto& out = open_out(c.out, file);
  out << "level,h,dofs,samples,linf,l2,observed_order\n";
  for (std::size_t k = 0; k < rep.levels.size(); ++k) {
    const auto& l = rep.levels[k];
    out << l.level << ',' << l.h << ',' << l.dofs << ',' << l.samples << ',' << l.linf << ','
        << l.l2 << ',';
    if (k > 0) out << rep.observed_orders[k - 1];
    out << '\n';
  }
  return 0;
}

int cmd_export(const std::string& spline_path, const std::string& out_path) {
  const auto f = load_spline_json(spline_path);
  auto ps = std::make_shared<PSRefinement>(f.refinement);
  auto c1 = std::make_shared<C1Space>(ps);
  std::unique_ptr<SplineFunction> s;
  if (f.space == "reduced") {
    ReducedSpace space(c1);
    s = std::make_unique<SplineFunction>(space.synthesize(f.coefficients));
  } else {
    s = std::make_unique<SplineFunction>(c1->synthesize(f.coefficients));
  }
  json j;
  j["space"] = f.space;
  j["micro"] = json::array();
  j["triangles"] = json::array();
  j["coefficients"] = json::array();
  for (std::size_t m = 0; m < ps->base.triangles.size(); ++m)
    for (int slot = 0; slot < 6; ++slot) {
      j["micro"].push_back({m, slot});
      const auto pts = ps->micro_points(static_cast<int>(m), slot);
      j["triangles"].push_back(
          {{pts[0].x, pts[0].y}, {pts[1].x, pts[1].y}, {pts[2].x, pts[2].y}});
      json row = json::array();
      for (double cc : s->patch(static_cast<int>(m), slot).coeffs) row.push_back(cc);
      j["coefficients"].push_back(row);
    }
  std::ofstream file;
  open_out(out_path, file) << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cubic Powell-Sabin spline spaces: refinement, bases, verification, fitting"};
  app.require_subcommand(1);

  CommonOptions c;
  int order = 1;
  int levels = 3;
  int grid = 64;
  double ridge = 0.0;
  bool report = false;
  bool with_patches = false;
  std::string samples_path, report_path, spline_path, fn_name = "sinpi";

  auto add_common = [&](CLI::App* cmd, bool needs_mesh = true) {
    if (needs_mesh) cmd->add_option("--mesh", c.mesh, "mesh.json or ps.json")->required();
    cmd->add_option("--out", c.out, "output path (default: stdout or command default)");
    cmd->add_option("--tol", c.tol, "collinearity tolerance");
    cmd->add_option("--threads", c.threads, "worker threads (PSPLINE_THREADS overrides)");
    cmd->add_option("--seed", c.seed, "random seed");
  };
  auto add_space = [&](CLI::App* cmd) {
    cmd->add_option("--space", c.space, "c1 or reduced")
        ->check(CLI::IsMember({"c1", "reduced"}));
    cmd->add_option("--split", c.split, "incenter or barycenter")
        ->check(CLI::IsMember({"incenter", "barycenter"}));
  };

  auto* refine = app.add_subcommand("refine", "Powell-Sabin refinement of a mesh");
  add_common(refine);
  refine->add_option("--split", c.split, "incenter or barycenter")
      ->check(CLI::IsMember({"incenter", "barycenter"}));
  refine->add_flag("--force-asymmetric", c.force_asymmetric,
                   "classify every triangle as non-symmetric");

  auto* basis = app.add_subcommand("basis", "space dimensions and duality residuals");
  add_common(basis);
  add_space(basis);
  basis->add_flag("--report", report, "include weight identity residuals");

  auto* check = app.add_subcommand("check", "smoothness residuals of the basis, per edge");
  add_common(check);
  add_space(check);
  check->add_option("--order", order, "smoothness order (1 or 2)")->check(CLI::Range(1, 2));

  auto* fit = app.add_subcommand("fit", "least-squares fit of sampled values");
  add_common(fit);
  add_space(fit);
  fit->add_option("--samples", samples_path, "CSV with x,y,value rows")->required();
  fit->add_option("--ridge", ridge, "ridge weight for rank-deficient systems");
  fit->add_option("--report", report_path, "fit report path (default: stdout)");
  fit->add_flag("--patches", with_patches, "embed the Bernstein net in the spline file");

  auto* eval = app.add_subcommand("eval", "sample a stored spline on a grid");
  eval->add_option("--spline", spline_path, "spline.json")->required();
  eval->add_option("--grid", grid, "grid resolution per axis");
  eval->add_option("--out", c.out, "CSV output (default: stdout)");

  auto* conv = app.add_subcommand("convergence", "uniform refinement convergence study");
  add_common(conv);
  add_space(conv);
  conv->add_option("--levels", levels, "number of refinement levels")->check(CLI::Range(2, 8));
  conv->add_option("--fn", fn_name, "target function (sinpi, cubic)");

  auto* exp = app.add_subcommand("export", "dump the Bernstein net of a stored spline");
  exp->add_option("--spline", spline_path, "spline.json")->required();
  exp->add_option("--out", c.out, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
    apply_threads(c.threads);
    if (refine->parsed()) return cmd_refine(c);
    if (basis->parsed()) return cmd_basis(c, report);
    if (check->parsed()) return cmd_check(c, order);
    if (fit->parsed()) return cmd_fit(c, samples_path, ridge, report_path, with_patches);
    if (eval->parsed()) return cmd_eval(spline_path, grid, c.out);
    if (conv->parsed()) return cmd_convergence(c, levels, fn_name);
    if (exp->parsed()) return cmd_export(spline_path, c.out);
    return 1;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << json{{"error", {{"message", e.what()}, {"kind", "usage"}}}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"message", e.what()}, {"kind", "runtime"}}}}.dump() << '\n';
    return 1;
  }
}
