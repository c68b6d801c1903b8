"""Shared fixtures: one profile of each family, built once per session."""

from __future__ import annotations

import pytest

from georadii import (
    build_cone_profile,
    build_gulliver_profile,
    build_hyperbolic_profile,
    build_paraboloid_profile,
    build_plane_profile,
    build_sphere_profile,
)


@pytest.fixture(scope="session")
def sphere():
    return build_sphere_profile()


@pytest.fixture(scope="session")
def plane():
    return build_plane_profile()


@pytest.fixture(scope="session")
def hyperbolic():
    return build_hyperbolic_profile()


@pytest.fixture(scope="session")
def paraboloid():
    return build_paraboloid_profile()


@pytest.fixture(scope="session")
def cone005():
    return build_cone_profile(0.05)


@pytest.fixture(scope="session")
def cone030():
    return build_cone_profile(0.30)


@pytest.fixture(scope="session")
def gulliver():
    return build_gulliver_profile(r_max=22.0)
