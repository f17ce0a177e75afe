#pragma once

#include <iosfwd>
#include <string>

#include "pspline/fit.hpp"

namespace pspline {

/// mesh.json: {"vertices": [[x,y],...], "triangles": [[i,j,k],...]} with
/// 0-based indices.
Triangulation load_mesh_json(const std::string& path);
void save_mesh_json(const Triangulation& tri, const std::string& path);

/// ps.json adds "split_points", "edge_splits" ([{"edge":[i,j],"point":[x,y]}])
/// and "symmetric" to the mesh fields. Loading a ps.json reconstructs the
/// identical refinement (coordinates bit for bit) by treating the stored
/// points as explicit overrides; loading a plain mesh.json refines with the
/// given options.
PSRefinement load_refinement_json(const std::string& path, RefineOptions opts = {});
void save_refinement_json(const PSRefinement& ps, const std::string& path);

bool is_refinement_json(const std::string& path);

/// spline.json: {"space": "c1"|"reduced", "mesh": <ps.json object>,
/// "coefficients": [...]} plus an optional "patches" dump (per
/// micro-triangle, ten coefficients in the fixed multi-index order).
struct SplineFile {
  std::string space;  // "c1" or "reduced"
  PSRefinement refinement;
  std::vector<double> coefficients;
};

SplineFile load_spline_json(const std::string& path);
void save_spline_json(const std::string& space, const PSRefinement& ps,
                      const std::vector<double>& coefficients, const std::string& path,
                      const SplineFunction* patches = nullptr);

/// Sample CSV: one "x,y,value" row per sample, optional header line.
void load_samples_csv(const std::string& path, std::vector<Point2>& points,
                      std::vector<double>& values);

}  // namespace pspline
