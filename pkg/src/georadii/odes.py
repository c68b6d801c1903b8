"""Geodesic and Jacobi-field integration wrappers over the compiled kernels.

These provide ergonomic, typed access to single geodesics and direction fans:
unit-speed geodesics gamma(t) from a base point, the scalar Jacobi field
J'' + K J = 0 with J(0) = 0, J'(0) = 1 along them, event times (first
conjugate / focal / extended-focal events, opposite-meridian crossings),
and dense path samples suitable for seeding two-point boundary solvers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels as _k
from .profiles import Point, Profile

__all__ = [
    "GeodesicPath",
    "comparison_solution",
    "fan_events",
    "geodesic_state_at",
    "shoot_geodesic",
]

_EXIT_NAMES = {
    _k.EXIT_TMAX: "t_max",
    _k.EXIT_RMAX: "r_max",
    _k.EXIT_POLE: "pole",
    _k.EXIT_SAMPLES: "sample_overflow",
    _k.EXIT_STALL: "stall",
    _k.EXIT_STOP_CONJ: "stopped_at_conjugate",
    _k.EXIT_STOP_CUT: "stopped_at_cut_candidate",
}

_STOP_MODES = {"none": _k.STOP_NONE, "conjugate": _k.STOP_CONJ, "cut": _k.STOP_CUT}


def _opt(x: float) -> float | None:
    return None if math.isnan(x) else float(x)


@dataclass(frozen=True)
class GeodesicPath:
    """One integrated geodesic: event summary plus optional dense samples.

    Samples columns: t, r, theta, r_dot, theta_dot, J, J_prime, chart_flag.
    theta is tracked continuously (no wrapping), including across pole
    transits, so theta - theta0 is the accumulated angular advance.
    """

    profile: Profile
    r0: float
    theta0: float
    psi: float
    events: np.ndarray
    samples: np.ndarray

    # -- event accessors ---------------------------------------------------
    @property
    def t_end(self) -> float:
        return float(self.events[_k.EV_T_END])

    @property
    def exit_reason(self) -> str:
        return _EXIT_NAMES[int(self.events[_k.EV_EXIT])]

    @property
    def conjugate_time(self) -> float | None:
        return _opt(self.events[_k.EV_T_CONJ])

    @property
    def conjugate_extrapolated(self) -> bool:
        return self.events[_k.EV_CONJ_EXTRAP] == 1.0

    @property
    def focal_time(self) -> float | None:
        return _opt(self.events[_k.EV_T_FOC])

    @property
    def focal_is_crossing(self) -> bool | None:
        """True if J' crosses zero transversally, False for a degenerate touch."""
        if math.isnan(self.events[_k.EV_T_FOC]):
            return None
        return self.events[_k.EV_FOC_KIND] > 0.0

    @property
    def extended_focal_time(self) -> float | None:
        """First time J' becomes genuinely negative (touches do not count)."""
        return _opt(self.events[_k.EV_T_FOCE])

    @property
    def opposite_meridian_time(self) -> float | None:
        """First time |theta - theta0| reaches pi."""
        return _opt(self.events[_k.EV_T_DTHPI])

    @property
    def end_state(self) -> tuple[float, float, float, float]:
        e = self.events
        return (float(e[_k.EV_R_END]), float(e[_k.EV_TH_END]),
                float(e[_k.EV_RDOT_END]), float(e[_k.EV_THDOT_END]))

    @property
    def jacobi_end(self) -> tuple[float, float]:
        return float(self.events[_k.EV_J_END]), float(self.events[_k.EV_JP_END])

    @property
    def unit_speed_drift(self) -> float:
        return float(self.events[_k.EV_DRIFT_UNIT])

    @property
    def clairaut_drift(self) -> float:
        return float(self.events[_k.EV_DRIFT_CLAIR])

    # -- sample accessors ----------------------------------------------------
    @property
    def t(self) -> np.ndarray:
        return self.samples[:, _k.SMP_T]

    @property
    def r(self) -> np.ndarray:
        return self.samples[:, _k.SMP_R]

    @property
    def theta(self) -> np.ndarray:
        return self.samples[:, _k.SMP_TH]

    @property
    def jacobi(self) -> np.ndarray:
        return self.samples[:, _k.SMP_J]

    @property
    def jacobi_prime(self) -> np.ndarray:
        return self.samples[:, _k.SMP_JP]

    def to_csv(self, path: str) -> None:
        """Write samples as CSV with a header row."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "r", "theta", "r_dot", "theta_dot",
                        "J", "J_prime", "chart"])
            for row in self.samples:
                w.writerow([repr(float(x)) for x in row])


def shoot_geodesic(profile: Profile, r0: float, theta0: float, psi: float,
                   t_max: float, *, rtol: float = 1e-9, atol: float = 1e-12,
                   second_jacobi: bool = False, sample_ds: float = 0.03,
                   stop: str = "none") -> GeodesicPath:
    """Integrate one unit-speed geodesic with its Jacobi field.

    psi is the launch angle against the outward radial direction; from the
    pole itself (r0 = 0) the launch meridian is theta0 + psi. Set
    sample_ds = 0 to skip path storage. stop is one of "none", "conjugate",
    "cut" ("cut" truncates at the earlier of the first conjugate event and
    the first opposite-meridian crossing).
    """
    if stop not in _STOP_MODES:
        raise ValueError(f"stop must be one of {sorted(_STOP_MODES)}")
    if not 0.0 <= r0 <= profile.r_max:
        raise ValueError(f"r0={r0} outside [0, {profile.r_max}]")
    if t_max <= 0.0:
        raise ValueError("t_max must be positive")
    events = np.zeros(_k.EV_N)
    if sample_ds > 0.0:
        n_max = int(t_max / sample_ds) + 16
    else:
        n_max = 1
    samples = np.zeros((n_max, _k.SMP_N))
    n = _k.integrate_geodesic(
        *profile.pack, 1 if profile.smooth_pole else 0, profile.r_max,
        float(r0), float(theta0), float(psi), float(t_max),
        float(rtol), float(atol), 1 if second_jacobi else 0,
        _STOP_MODES[stop], float(sample_ds), events, samples)
    return GeodesicPath(profile=profile, r0=float(r0), theta0=float(theta0),
                        psi=float(psi), events=events, samples=samples[:n])


def geodesic_state_at(profile: Profile, r0: float, theta0: float, psi: float,
                      t: float, *, rtol: float = 1e-9, atol: float = 1e-12):
    """End state (r, theta, r_dot, theta_dot, J, J') of the geodesic at time t."""
    path = shoot_geodesic(profile, r0, theta0, psi, t, rtol=rtol, atol=atol,
                          sample_ds=0.0)
    r, th, rd, thd = path.end_state
    J, Jp = path.jacobi_end
    return r, th, rd, thd, J, Jp


def fan_events(profile: Profile, r0: float, theta0: float, psis: np.ndarray,
               t_max: float, *, rtol: float = 1e-9, atol: float = 1e-12,
               stop: str = "none", sample_ds: float = 0.0,
               second_jacobi: bool = False):
    """Integrate a fan of geodesics; returns (events, samples, counts).

    events has shape (n, EV_N); samples has shape (n, m, 8) and is only
    populated when sample_ds > 0 (m is sized from t_max / sample_ds).
    """
    if stop not in _STOP_MODES:
        raise ValueError(f"stop must be one of {sorted(_STOP_MODES)}")
    psis = np.ascontiguousarray(psis, dtype=np.float64)
    n = psis.shape[0]
    events = np.zeros((n, _k.EV_N))
    m = int(t_max / sample_ds) + 16 if sample_ds > 0.0 else 1
    samples = np.zeros((n, m, _k.SMP_N))
    counts = np.zeros(n, dtype=np.int64)
    _k.integrate_fan(*profile.pack, 1 if profile.smooth_pole else 0,
                     profile.r_max, float(r0), float(theta0), psis,
                     float(t_max), float(rtol), float(atol),
                     1 if second_jacobi else 0, _STOP_MODES[stop],
                     float(sample_ds), events, samples, counts)
    return events, samples, counts


def comparison_solution(t1: float, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solution of u'' + k(t) u = 0, u(0)=0, u'(0)=1 for the step curvature
    k = +1 on [0, t1], k = -1 beyond.

    This is the comparison barrier for metrics whose curvature is at most +1
    out to arclength t1 and at most -1 beyond: u = sin t, then
    u = sin(t1) cosh(t - t1) + cos(t1) sinh(t - t1). When t1 < pi/2 the
    barrier stays positive and eventually increases, which is the mechanism
    ruling out conjugate points for profiles with a small spherical cap.
    """
    ts = np.asarray(ts, dtype=np.float64)
    u = np.where(ts <= t1, np.sin(ts),
                 math.sin(t1) * np.cosh(ts - t1) + math.cos(t1) * np.sinh(ts - t1))
    up = np.where(ts <= t1, np.cos(ts),
                  math.sin(t1) * np.sinh(ts - t1) + math.cos(t1) * np.cosh(ts - t1))
    return u, up
