"""georadii: radius functions of geodesic geometry on rotationally symmetric surfaces.

The package computes conjugate, focal, injectivity and convexity-related
radii on surfaces with metric dr^2 + phi(r)^2 dtheta^2 by integrating the
geodesic flow together with scalar Jacobi fields, and ships a set of
verification suites that exercise the classical comparison inequalities
between these radii on a family of model surfaces.
"""

from __future__ import annotations

from ._accel import HAS_NUMBA
from .profiles import (
    ConfigError,
    Point,
    Profile,
    SurfaceMetric,
    build_cone_profile,
    build_gulliver_profile,
    build_hyperbolic_profile,
    build_paraboloid_profile,
    build_plane_profile,
    build_profile,
    build_sphere_profile,
    gauss_curvature,
    load_profile_config,
)

__version__ = "0.1.0"

__all__ = [
    "HAS_NUMBA",
    "ConfigError",
    "Point",
    "Profile",
    "SurfaceMetric",
    "__version__",
    "build_cone_profile",
    "build_gulliver_profile",
    "build_hyperbolic_profile",
    "build_paraboloid_profile",
    "build_plane_profile",
    "build_profile",
    "build_sphere_profile",
    "gauss_curvature",
    "load_profile_config",
]
