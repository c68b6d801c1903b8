"""Profile construction, evaluation, and configuration handling."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from georadii import (
    ConfigError,
    Point,
    SurfaceMetric,
    build_cone_profile,
    build_profile,
    build_sphere_profile,
    gauss_curvature,
    load_profile_config,
)
from georadii.oracles import paraboloid_phi_oracle


def test_sphere_phi_matches_sine(sphere):
    for r in (0.2, 0.9, 1.5707963, 2.4, 3.0):
        assert sphere.phi(r) == pytest.approx(math.sin(r), abs=1e-14)
        assert sphere.phi_prime(r) == pytest.approx(math.cos(r), abs=1e-14)
        assert sphere.phi_second(r) == pytest.approx(-math.sin(r), abs=1e-14)
    assert sphere.smooth_pole


def test_plane_phi_is_linear(plane):
    rs = np.linspace(0.1, 19.0, 23)
    assert np.allclose(plane.phi(rs), rs, atol=1e-15)
    assert np.allclose(plane.phi_prime(rs), 1.0, atol=1e-15)
    assert np.allclose(plane.phi_second(rs), 0.0, atol=1e-15)


def test_hyperbolic_phi_is_sinh(hyperbolic):
    for r in (0.3, 1.0, 2.7, 8.0):
        assert hyperbolic.phi(r) == pytest.approx(math.sinh(r), rel=1e-14)
        assert hyperbolic.phi_prime(r) == pytest.approx(math.cosh(r), rel=1e-14)


def test_constant_curvatures(sphere, plane, hyperbolic):
    rs = np.linspace(0.05, 2.9, 17)
    assert np.allclose(gauss_curvature(sphere, rs), 1.0, atol=1e-12)
    assert np.allclose(gauss_curvature(plane, rs), 0.0, atol=1e-12)
    assert np.allclose(gauss_curvature(hyperbolic, rs), -1.0, atol=1e-12)


def test_paraboloid_phi_against_independent_inversion(paraboloid):
    # the kernel inverts the arclength map with Newton; the oracle uses
    # plain bisection -- two routes to the same meridian
    for r in (0.1, 0.7, 1.9, 4.2, 9.5):
        phi, dphi, d2phi = paraboloid_phi_oracle(r)
        assert paraboloid.phi(r) == pytest.approx(phi, rel=1e-10)
        assert paraboloid.phi_prime(r) == pytest.approx(dphi, rel=1e-10)
        assert paraboloid.phi_second(r) == pytest.approx(d2phi, rel=1e-8)
    assert gauss_curvature(paraboloid, 1e-6) == pytest.approx(1.0, abs=1e-4)


def test_cone_outer_branch_is_exact(cone005):
    b = (1.0 - 0.05) / 2.0
    for r in (0.011, 0.5, 2.0, 10.0, 19.5):
        assert cone005.phi(r) == pytest.approx(b * r, rel=1e-14)
        assert cone005.phi_prime(r) == pytest.approx(b, abs=1e-14)
    # flat outside the cap
    rs = np.linspace(0.02, 19.0, 31)
    assert np.allclose(gauss_curvature(cone005, rs), 0.0, atol=1e-10)


def test_cone_cap_joins_continuously(cone005):
    r_cap = cone005.config["params"]["r_cap"]
    eps = 1e-9
    below = cone005.phi(r_cap - eps)
    above = cone005.phi(r_cap + eps)
    assert above == pytest.approx(below, rel=1e-6)
    dbelow = cone005.phi_prime(r_cap - eps)
    dabove = cone005.phi_prime(r_cap + eps)
    assert dabove == pytest.approx(dbelow, abs=1e-5)
    # smooth pole: phi ~ r near the apex
    assert cone005.phi(1e-7) == pytest.approx(1e-7, rel=1e-3)


def test_cone_rejects_wide_delta():
    with pytest.raises(ConfigError):
        build_cone_profile(0.5)
    with pytest.raises(ConfigError):
        build_cone_profile(0.05, r_cap=5.0)


def test_gulliver_glue_is_c1_and_tabulated(gulliver):
    table = gulliver.glue_table()
    assert table is not None and table.shape[1] == 4
    r_lo, r_hi = table[0, 0], table[-1, 0]
    # finite-difference phi' against tabulated phi' inside the glue band
    h = 1e-6
    for r in np.linspace(r_lo + 0.01, r_hi - 0.01, 9):
        fd = (gulliver.phi(r + h) - gulliver.phi(r - h)) / (2.0 * h)
        assert gulliver.phi_prime(r) == pytest.approx(fd, rel=2e-7, abs=2e-8)
    # curvature is +1 before the glue and (asymptotically) negative after
    assert gauss_curvature(gulliver, 0.5 * r_lo) == pytest.approx(1.0, abs=1e-9)
    assert gauss_curvature(gulliver, min(r_hi + 2.0, gulliver.r_max - 1.0)) < 0.0


def test_gulliver_phi_positive_and_increasing(gulliver):
    rs = np.linspace(1e-4, gulliver.r_max - 1e-6, 4001)
    phi = gulliver.phi(rs)
    assert np.all(phi > 0.0)
    assert np.all(np.diff(phi) > 0.0)


def test_build_profile_dispatch():
    prof = build_profile({"kind": "cone", "params": {"delta": 0.1}, "r_max": 12.0})
    assert prof.config["kind"] == "cone"
    assert prof.r_max == 12.0
    assert prof.phi(2.0) == pytest.approx(2.0 * 0.45, rel=1e-14)
    with pytest.raises(ConfigError):
        build_profile({"kind": "torus"})
    with pytest.raises(ConfigError):
        build_profile({"params": {}})
    with pytest.raises(ConfigError):
        build_profile({"kind": "sphere", "params": {"bogus": 1.0}})


def test_load_profile_config(tmp_path):
    path = tmp_path / "prof.json"
    path.write_text(json.dumps({"kind": "hyperbolic", "r_max": 15.0}))
    prof = load_profile_config(str(path))
    assert prof.name == "hyperbolic"
    assert prof.r_max == 15.0

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_profile_config(str(bad))
    with pytest.raises(ConfigError):
        load_profile_config(str(tmp_path / "missing.json"))


def test_config_error_is_value_error():
    # the CLI distinguishes configuration faults (exit 2) from numerical
    # faults (exit 3); the subclass relationship makes the except order matter
    assert issubclass(ConfigError, ValueError)


def test_surface_metric_wrapper(sphere):
    metric = SurfaceMetric(sphere)
    assert metric.dim == 2
    assert metric.name == "sphere"
    p = metric.point(1.0, 0.5)
    assert p == Point(1.0, 0.5)
    with pytest.raises(ValueError):
        metric.point(sphere.r_max + 1.0)


def test_sphere_r_max_validation():
    with pytest.raises(ValueError):
        build_sphere_profile(r_max=4.0)
