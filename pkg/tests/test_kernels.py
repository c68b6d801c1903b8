"""Compiled-kernel behavior and compiled-versus-fallback agreement."""

from __future__ import annotations

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from georadii import kernels as K
from georadii._accel import HAS_NUMBA

# One canonical workload exercising every branch kind and both Jacobi
# fields; reused verbatim by the fallback subprocess below.
CANON = """
import json
import numpy as np
from georadii.profiles import (build_sphere_profile, build_cone_profile,
                               build_gulliver_profile, build_paraboloid_profile)
from georadii.odes import shoot_geodesic

out = {}
for name, prof, r0, psi in (
        ("sphere", build_sphere_profile(), 0.9, 0.7),
        ("cone", build_cone_profile(0.05), 1.4, 2.1),
        ("gulliver", build_gulliver_profile(r_max=22.0), 0.6, 1.2),
        ("paraboloid", build_paraboloid_profile(), 1.1, 0.4)):
    path = shoot_geodesic(prof, r0, 0.0, psi, 5.0, sample_ds=0.5,
                          second_jacobi=True)
    ev = path.events
    out[name] = {
        "end": [float(x) for x in path.end_state],
        "events": [float(ev[i]) for i in range(len(ev))],
        "samples": [[float(x) for x in row] for row in path.samples[:4]],
    }
print(json.dumps(out))
"""


def _run_canon(env_extra):
    env = dict(os.environ)
    env.update(env_extra)
    res = subprocess.run([sys.executable, "-c", CANON], capture_output=True,
                         text=True, env=env, timeout=600)
    assert res.returncode == 0, res.stderr
    return json.loads(res.stdout.strip().splitlines()[-1])


@pytest.mark.skipif(not HAS_NUMBA, reason="numba not active in this session")
def test_fallback_matches_compiled_path():
    # identical source runs through numba and through plain Python; any
    # drift between the two is a real divergence, not reordering noise
    compiled = _run_canon({})
    fallback = _run_canon({"GEORADII_NO_NUMBA": "1"})
    assert compiled.keys() == fallback.keys()
    for name in compiled:
        for field in ("end", "events"):
            a = np.array(compiled[name][field])
            b = np.array(fallback[name][field])
            ok = np.isclose(a, b, rtol=1e-12, atol=1e-12) | (
                np.isnan(a) & np.isnan(b))
            assert ok.all(), (name, field, a[~ok], b[~ok])
        a = np.array(compiled[name]["samples"])
        b = np.array(fallback[name]["samples"])
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12), name


def test_accel_env_flag_disables_numba():
    res = subprocess.run(
        [sys.executable, "-c",
         "from georadii._accel import HAS_NUMBA; print(HAS_NUMBA)"],
        capture_output=True, text=True,
        env={**os.environ, "GEORADII_NO_NUMBA": "1"}, timeout=120)
    assert res.stdout.strip() == "False"


def test_event_row_layout_constants():
    assert K.EV_N == 26
    # exit codes are distinct
    codes = {K.EXIT_TMAX, K.EXIT_RMAX, K.EXIT_POLE, K.EXIT_SAMPLES,
             K.EXIT_STALL, K.EXIT_STOP_CONJ, K.EXIT_STOP_CUT}
    assert len(codes) == 7


def test_integrator_conserves_invariants(sphere):
    from georadii.odes import shoot_geodesic

    path = shoot_geodesic(sphere, 1.1, 0.0, 0.8, 12.0, sample_ds=0.0)
    ev = path.events
    assert ev[K.EV_DRIFT_UNIT] < 1e-9
    assert ev[K.EV_DRIFT_CLAIR] < 1e-9
    assert ev[K.EV_EXIT] == K.EXIT_TMAX
    assert ev[K.EV_T_END] == pytest.approx(12.0, abs=1e-12)


def test_clairaut_constant_on_samples(cone005):
    from georadii.odes import shoot_geodesic

    r0, psi = 1.4, 1.1
    path = shoot_geodesic(cone005, r0, 0.0, psi, 8.0, sample_ds=0.1)
    c0 = cone005.phi(r0) * math.sin(psi)
    phi = cone005.phi(path.r)
    theta_dot = path.samples[:, K.SMP_THDOT]
    clairaut = phi * phi * theta_dot
    assert np.max(np.abs(clairaut - c0)) < 1e-9


def test_profile_eval_vectorized_consistency(gulliver):
    rs = np.linspace(0.01, gulliver.r_max - 0.01, 57)
    vec = gulliver.phi(rs)
    scalars = np.array([gulliver.phi(float(r)) for r in rs])
    assert np.array_equal(vec, scalars)
