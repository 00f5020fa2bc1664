"""Tubes with one constant principal curvature in the 3D space forms.

Build elliptic, hyperbolic and parabolic tubes from a generating curve and
normal frame, then check numerically that one principal curvature is the
constant 1/r, that the constant-curvature lines are geodesics, and that the
generating curve can be recovered from the surface.
"""

from .ambient import ADS3, ADS3_TILDE, DS3, E3, H3, L3, S3, SPACE_FORMS, NullCone, SpaceForm, inner, norm2
from .curves import ExprCurve, FramedCurve, ParabolicData, SplineCurve, parabolic_from_transport, transport_normal_frame
from .geometry import (
    CurvatureReport,
    Grid,
    analyze,
    constant_pc_verify,
    fundamental_forms,
    geodesic_foliation_check,
    polar_check,
    principal_curvatures,
    reconstruct_generating_curve,
    unit_normal,
)
from .scene import build_scene, load_scene, packaged_scenes
from .tubes import (
    TABLE,
    SurfacePatch,
    TubeKind,
    classify_tube,
    critical_constant,
    elliptic_tube,
    hyperbolic_tube,
    parabolic_tube,
    polar_surface,
    table_row,
    tube_distance,
)
from .verify import verify_patch

__all__ = [
    "ADS3",
    "ADS3_TILDE",
    "DS3",
    "E3",
    "H3",
    "L3",
    "S3",
    "SPACE_FORMS",
    "NullCone",
    "SpaceForm",
    "inner",
    "norm2",
    "ExprCurve",
    "FramedCurve",
    "ParabolicData",
    "SplineCurve",
    "parabolic_from_transport",
    "transport_normal_frame",
    "CurvatureReport",
    "Grid",
    "analyze",
    "constant_pc_verify",
    "fundamental_forms",
    "geodesic_foliation_check",
    "polar_check",
    "principal_curvatures",
    "reconstruct_generating_curve",
    "unit_normal",
    "build_scene",
    "load_scene",
    "packaged_scenes",
    "TABLE",
    "SurfacePatch",
    "TubeKind",
    "classify_tube",
    "critical_constant",
    "elliptic_tube",
    "hyperbolic_tube",
    "parabolic_tube",
    "polar_surface",
    "table_row",
    "tube_distance",
    "verify_patch",
]
