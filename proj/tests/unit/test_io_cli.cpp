#include "pspline/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_helpers.hpp"

using namespace pspline;
using namespace pspline::testing;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "pspline_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

#ifdef PSPLINE_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(PSPLINE_CLI_PATH) + " " + args;
  return std::system(cmd.c_str());
}
#endif

}  // namespace

TEST_CASE("thread count resolution honors the environment override") {
  unsetenv("PSPLINE_THREADS");
  CHECK(resolve_threads(3) == 3);
  setenv("PSPLINE_THREADS", "2", 1);
  CHECK(resolve_threads(3) == 2);
  CHECK(resolve_threads() == 2);
  unsetenv("PSPLINE_THREADS");
  CHECK(resolve_threads() >= 1);
}

TEST_CASE("mesh json round trip") {
  const auto dir = temp_dir();
  const auto tri = grid_mesh(2, 2, 0.2, 3);
  save_mesh_json(tri, (dir / "mesh.json").string());
  const auto back = load_mesh_json((dir / "mesh.json").string());
  REQUIRE(back.vertices.size() == tri.vertices.size());
  for (std::size_t i = 0; i < tri.vertices.size(); ++i) {
    CHECK(back.vertices[i].x == tri.vertices[i].x);
    CHECK(back.vertices[i].y == tri.vertices[i].y);
  }
  CHECK(back.triangles == tri.triangles);
}

TEST_CASE("refinement json reproduces the refinement bit for bit") {
  const auto dir = temp_dir();
  const auto ps = refine_powell_sabin(grid_mesh(3, 2, 0.15, 7));
  const auto path = (dir / "ps.json").string();
  save_refinement_json(ps, path);
  CHECK(is_refinement_json(path));
  const auto back = load_refinement_json(path);
  for (std::size_t m = 0; m < ps.split_points.size(); ++m) {
    CHECK(back.split_points[m].x == ps.split_points[m].x);
    CHECK(back.split_points[m].y == ps.split_points[m].y);
  }
  for (std::size_t e = 0; e < ps.edge_split_points.size(); ++e) {
    CHECK(back.edge_split_points[e].x == ps.edge_split_points[e].x);
    CHECK(back.edge_split_points[e].y == ps.edge_split_points[e].y);
  }
  CHECK(back.symmetric == ps.symmetric);

  // A second save is byte-identical (stable export).
  const auto path2 = (dir / "ps2.json").string();
  save_refinement_json(back, path2);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("forced asymmetric classification survives the round trip") {
  const auto dir = temp_dir();
  RefineOptions opts;
  opts.strategy = SplitStrategy::Barycenter;
  opts.force_asymmetric = true;
  const auto ps = refine_powell_sabin(square_two_triangles(), opts);
  const auto path = (dir / "ps_forced.json").string();
  save_refinement_json(ps, path);
  const auto back = load_refinement_json(path);
  CHECK(back.symmetric == ps.symmetric);
  for (const auto& sides : back.edge_sides)
    for (const auto& s : sides) CHECK(s.omega == 0.0);
}

TEST_CASE("spline json round trip") {
  const auto dir = temp_dir();
  RefineOptions opts;
  opts.strategy = SplitStrategy::Barycenter;
  auto ps = std::make_shared<PSRefinement>(refine_powell_sabin(square_two_triangles(), opts));
  auto c1 = std::make_shared<C1Space>(ps);
  ReducedSpace space(c1);
  Cubic p;
  p.c.fill(0.0);
  p.c[7] = 1.0;
  const auto coeffs = project_cubic(space, p);
  const auto path = (dir / "spline.json").string();
  save_spline_json("reduced", *ps, coeffs, path);
  const auto file = load_spline_json(path);
  CHECK(file.space == "reduced");
  CHECK(file.coefficients == coeffs);
  auto ps2 = std::make_shared<PSRefinement>(file.refinement);
  ReducedSpace space2(std::make_shared<C1Space>(ps2));
  const auto s = space2.synthesize(file.coefficients);
  CHECK(std::abs(s.eval({0.3, 0.4}) - p({0.3, 0.4})) <= 1e-10);
}

TEST_CASE("samples csv accepts headers and rejects junk") {
  const auto dir = temp_dir();
  {
    std::ofstream out(dir / "ok.csv");
    out << "x,y,value\n0.1,0.2,3.5\n0.4,0.5,-1.0\n";
  }
  std::vector<Point2> pts;
  std::vector<double> vals;
  load_samples_csv((dir / "ok.csv").string(), pts, vals);
  REQUIRE(pts.size() == 2);
  CHECK(vals[1] == -1.0);
  {
    std::ofstream out(dir / "bad.csv");
    out << "0.1,0.2,3.5\nnot,a,row\n";
  }
  CHECK_THROWS(load_samples_csv((dir / "bad.csv").string(), pts, vals));
}

#ifdef PSPLINE_CLI_PATH

TEST_CASE("cli end to end") {
  const auto dir = temp_dir();
  const auto mesh_path = dir / "cli_mesh.json";
  save_mesh_json(square_two_triangles(), mesh_path.string());

  SUBCASE("refine emits symmetric flags and identical re-export") {
    const auto ps_path = dir / "cli_ps.json";
    REQUIRE(run_cli("refine --mesh " + mesh_path.string() + " --split barycenter --out " +
                    ps_path.string() + " > /dev/null") == 0);
    CHECK(slurp(ps_path).find("\"symmetric\": [\n    true,\n    true\n  ]") != std::string::npos);
    const auto ps2_path = dir / "cli_ps2.json";
    REQUIRE(run_cli("refine --mesh " + ps_path.string() + " --out " + ps2_path.string() +
                    " > /dev/null") == 0);
    CHECK(slurp(ps_path) == slurp(ps2_path));
  }

  SUBCASE("basis reports the reduced dimension and healthy duality") {
    const auto out = dir / "basis.json";
    REQUIRE(run_cli("basis --mesh " + mesh_path.string() +
                    " --split barycenter --space reduced --report --out " + out.string()) == 0);
    const auto text = slurp(out);
    CHECK(text.find("\"dimension\": 18") != std::string::npos);
    CHECK(text.find("\"duality_ok\": true") != std::string::npos);
  }

  SUBCASE("fit, eval and export chain") {
    const auto samples = dir / "samples.csv";
    {
      std::ofstream out(samples);
      out << "x,y,value\n";
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) {
          const double x = (i + 0.5) / 12.0, y = (j + 0.5) / 12.0;
          out << x << ',' << y << ',' << (x * x * y + 2.0 * x) << '\n';
        }
    }
    const auto spline = dir / "cli_spline.json";
    const auto report = dir / "cli_report.json";
    REQUIRE(run_cli("fit --mesh " + mesh_path.string() +
                    " --split barycenter --space reduced --samples " + samples.string() +
                    " --out " + spline.string() + " --report " + report.string()) == 0);
    CHECK(slurp(report).find("\"ridge_engaged\": false") != std::string::npos);

    const auto grid_csv = dir / "grid.csv";
    REQUIRE(run_cli("eval --spline " + spline.string() + " --grid 6 --out " +
                    grid_csv.string()) == 0);
    const auto text = slurp(grid_csv);
    CHECK(text.find("x,y,value") == 0);
    // 6x6 grid inside the unit square plus header.
    CHECK(std::count(text.begin(), text.end(), '\n') == 37);

    const auto bb = dir / "bb.json";
    REQUIRE(run_cli("export --spline " + spline.string() + " --out " + bb.string()) == 0);
    CHECK(slurp(bb).find("\"coefficients\"") != std::string::npos);

    const auto spline2 = dir / "cli_spline_patches.json";
    REQUIRE(run_cli("fit --mesh " + mesh_path.string() +
                    " --split barycenter --space reduced --samples " + samples.string() +
                    " --patches --out " + spline2.string() + " > /dev/null") == 0);
    CHECK(slurp(spline2).find("\"patches\"") != std::string::npos);
  }

  SUBCASE("check emits per-edge rows") {
    const auto out = dir / "check.csv";
    REQUIRE(run_cli("check --mesh " + mesh_path.string() +
                    " --split barycenter --space reduced --order 2 --out " + out.string()) == 0);
    const auto text = slurp(out);
    CHECK(text.find("edge_id,family,macro_a,macro_b,order,max_residual") == 0);
    CHECK(text.find("split_point") != std::string::npos);
  }

  SUBCASE("unknown flags and missing files fail with json errors") {
    CHECK(run_cli("refine --mesh " + mesh_path.string() + " --nope 2> /dev/null") != 0);
    const auto err_path = dir / "err.txt";
    CHECK(run_cli("refine --mesh /nonexistent.json 2> " + err_path.string()) != 0);
    CHECK(slurp(err_path).find("\"error\"") != std::string::npos);
  }
}

#endif
