"""Differential geometry of the intersection curve of four hypersurfaces in R^5."""

from .curve import FrenetApparatus, IntersectionPoint, analyze
from .darboux import all_geodesics, surface_geodesics
from .errors import (
    DegenerateFrenet,
    GeometryError,
    InputError,
    NewtonDivergence,
    NonTransversal,
    NotRegular,
    PointMismatch,
    R5CurveError,
)
from .linalg import quad_product
from .scene import Scene, load_fixture, load_scene
from .surface import Hypersurface
from .tracer import TraceConfig, fd_curvature_oracle, trace, trace_around

__version__ = "0.1.0"

__all__ = [
    "DegenerateFrenet",
    "FrenetApparatus",
    "GeometryError",
    "Hypersurface",
    "InputError",
    "IntersectionPoint",
    "NewtonDivergence",
    "NonTransversal",
    "NotRegular",
    "PointMismatch",
    "R5CurveError",
    "Scene",
    "TraceConfig",
    "all_geodesics",
    "analyze",
    "fd_curvature_oracle",
    "load_fixture",
    "load_scene",
    "quad_product",
    "surface_geodesics",
    "trace",
    "trace_around",
]
