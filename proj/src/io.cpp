#include "pspline/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pspline {

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

json mesh_to_json(const Triangulation& tri) {
  json j;
  j["vertices"] = json::array();
  for (const auto& p : tri.vertices) j["vertices"].push_back({p.x, p.y});
  j["triangles"] = json::array();
  for (const auto& t : tri.triangles) j["triangles"].push_back({t[0], t[1], t[2]});
  return j;
}

Triangulation mesh_from_json(const json& j) {
  std::vector<Point2> vertices;
  for (const auto& v : j.at("vertices")) vertices.push_back({v.at(0), v.at(1)});
  std::vector<std::array<int, 3>> triangles;
  for (const auto& t : j.at("triangles"))
    triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
  return build_triangulation(std::move(vertices), std::move(triangles));
}

json refinement_to_json(const PSRefinement& ps) {
  json j = mesh_to_json(ps.base);
  j["split_points"] = json::array();
  for (const auto& p : ps.split_points) j["split_points"].push_back({p.x, p.y});
  j["edge_splits"] = json::array();
  for (std::size_t e = 0; e < ps.base.edges.size(); ++e) {
    const auto& p = ps.edge_split_points[e];
    j["edge_splits"].push_back(
        {{"edge", {ps.base.edges[e][0], ps.base.edges[e][1]}}, {"point", {p.x, p.y}}});
  }
  j["symmetric"] = json::array();
  for (bool s : ps.symmetric) j["symmetric"].push_back(s);
  return j;
}

PSRefinement refinement_from_json(const json& j, RefineOptions opts) {
  const Triangulation tri = mesh_from_json(j);
  if (!j.contains("split_points")) return refine_powell_sabin(tri, opts);

  opts.triangle_overrides.clear();
  for (const auto& p : j.at("split_points"))
    opts.triangle_overrides.push_back(Point2{p.at(0), p.at(1)});
  opts.edge_overrides.clear();
  for (const auto& es : j.at("edge_splits")) {
    const auto& e = es.at("edge");
    const auto& p = es.at("point");
    opts.edge_overrides.push_back(
        {{e.at(0).get<int>(), e.at(1).get<int>()}, Point2{p.at(0), p.at(1)}});
  }
  if (j.contains("symmetric")) {
    std::vector<bool> mask;
    for (const auto& s : j.at("symmetric")) mask.push_back(s.get<bool>());
    opts.symmetric_mask = std::move(mask);
  }
  PSRefinement ps = refine_powell_sabin(tri, opts);
  if (j.contains("symmetric"))
    for (std::size_t m = 0; m < ps.symmetric.size(); ++m)
      if (j.at("symmetric").at(m).get<bool>() && !ps.symmetric[m])
        throw std::runtime_error("refinement file marks triangle " + std::to_string(m) +
                                 " symmetric but its geometry is not");
  return ps;
}

}  // namespace

Triangulation load_mesh_json(const std::string& path) { return mesh_from_json(read_json_file(path)); }

void save_mesh_json(const Triangulation& tri, const std::string& path) {
  write_json_file(mesh_to_json(tri), path);
}

bool is_refinement_json(const std::string& path) {
  return read_json_file(path).contains("split_points");
}

PSRefinement load_refinement_json(const std::string& path, RefineOptions opts) {
  return refinement_from_json(read_json_file(path), std::move(opts));
}

void save_refinement_json(const PSRefinement& ps, const std::string& path) {
  write_json_file(refinement_to_json(ps), path);
}

SplineFile load_spline_json(const std::string& path) {
  const json j = read_json_file(path);
  SplineFile f;
  f.space = j.at("space").get<std::string>();
  if (f.space != "c1" && f.space != "reduced")
    throw std::runtime_error("spline file: unknown space '" + f.space + "'");
  f.refinement = refinement_from_json(j.at("mesh"), {});
  f.coefficients = j.at("coefficients").get<std::vector<double>>();
  return f;
}

void save_spline_json(const std::string& space, const PSRefinement& ps,
                      const std::vector<double>& coefficients, const std::string& path,
                      const SplineFunction* patches) {
  json j;
  j["space"] = space;
  j["mesh"] = refinement_to_json(ps);
  j["coefficients"] = coefficients;
  if (patches) {
    json dump = json::array();
    for (const auto& patch : patches->patches()) {
      json row = json::array();
      for (double c : patch.coeffs) row.push_back(c);
      dump.push_back(row);
    }
    j["patches"] = dump;
  }
  write_json_file(j, path);
}

void load_samples_csv(const std::string& path, std::vector<Point2>& points,
                      std::vector<double>& values) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  points.clear();
  values.clear();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string fx, fy, fv;
    if (!std::getline(ss, fx, ',') || !std::getline(ss, fy, ',') || !std::getline(ss, fv))
      throw std::runtime_error("samples csv: expected 'x,y,value' rows");
    try {
      const double x = std::stod(fx), y = std::stod(fy), v = std::stod(fv);
      points.push_back({x, y});
      values.push_back(v);
    } catch (const std::exception&) {
      if (points.empty()) continue;  // header line
      throw std::runtime_error("samples csv: bad numeric row '" + line + "'");
    }
  }
  if (points.empty()) throw std::runtime_error("samples csv: no samples in " + path);
}

}  // namespace pspline
