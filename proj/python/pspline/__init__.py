"""C1 cubic Powell-Sabin spline spaces with a super-smooth reduced basis."""

from ._core import (
    C1Space,
    PSRefinement,
    ReducedSpace,
    Spline,
    Triangulation,
    __version__,
    convergence_study,
    least_squares_fit,
    load_mesh_json,
    load_refinement_json,
    refine_powell_sabin,
    save_mesh_json,
    save_refinement_json,
)

__all__ = [
    "C1Space",
    "PSRefinement",
    "ReducedSpace",
    "Spline",
    "Triangulation",
    "__version__",
    "convergence_study",
    "least_squares_fit",
    "load_mesh_json",
    "load_refinement_json",
    "refine_powell_sabin",
    "save_mesh_json",
    "save_refinement_json",
]
