"""Exact representations, classification, and moves for combinatorial manifolds."""

from .complexes import (
    EPS_GEOM,
    LOWER,
    UPPER,
    Triangulation,
    arc,
    circle,
    from_text,
    genus2_triangulation,
    glue_along_boundary,
    point_set,
    remove_faces,
    sphere_triangulation,
    surface_from_faces,
    to_text,
    torus_triangulation,
)
from .kets import Bounded1Ket, BoundedSurfaceKet, disk_with_handles
from .invariants import (
    Closed0Class,
    Closed1Class,
    ClosedSurfaceClass,
    HomologyFingerprint,
    classify_0d,
    classify_curves,
    classify_surface,
    curve_profile,
    euler_characteristic,
    homology_ranks,
    iso_key,
    smith_normal_form,
    surface_code,
)
from .moves import (
    FLIP_2_2,
    MERGE_2_1,
    MOVE_1_3,
    MOVE_3_1,
    SUBDIVIDE_1_2,
    PachnerMove,
    apply_pachner,
    barycentric_len2,
    flip_edge,
    insert_vertex,
    merge_vertex,
    moves_for,
    remove_vertex,
    subdivide_edge,
)

__all__ = [
    "EPS_GEOM",
    "LOWER",
    "UPPER",
    "Bounded1Ket",
    "BoundedSurfaceKet",
    "disk_with_handles",
    "Triangulation",
    "arc",
    "circle",
    "from_text",
    "genus2_triangulation",
    "glue_along_boundary",
    "point_set",
    "remove_faces",
    "sphere_triangulation",
    "surface_from_faces",
    "to_text",
    "torus_triangulation",
    "Closed0Class",
    "Closed1Class",
    "ClosedSurfaceClass",
    "HomologyFingerprint",
    "classify_0d",
    "classify_curves",
    "classify_surface",
    "curve_profile",
    "euler_characteristic",
    "homology_ranks",
    "iso_key",
    "smith_normal_form",
    "surface_code",
    "FLIP_2_2",
    "MERGE_2_1",
    "MOVE_1_3",
    "MOVE_3_1",
    "SUBDIVIDE_1_2",
    "PachnerMove",
    "apply_pachner",
    "barycentric_len2",
    "flip_edge",
    "insert_vertex",
    "merge_vertex",
    "moves_for",
    "remove_vertex",
    "subdivide_edge",
]
