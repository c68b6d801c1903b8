"""Radius functions of a rotationally symmetric surface at a base point.

Conventions:

* conjugate radius  — infimum over unit directions of the first zero of the
  scalar Jacobi field J (J(0)=0, J'(0)=1) along the geodesic.
* focal radius      — infimum over directions of the first zero of J'.
* extended focal radius — infimum over directions of the first time J'
  becomes genuinely negative; a root where J' touches zero and recovers
  counts for the focal radius but not here.
* injectivity radius — min(conjugate radius, half the shortest geodesic
  loop), computed in :mod:`georadii.cutlocus`.

Every radius is either a float or :class:`Beyond`, a first-class sentinel
meaning "no event within the integration horizon". Beyond is deliberately
not a number: comparisons against it must be explicit, which keeps
"nothing seen up to the horizon" from masquerading as "infinite".

Direction scans combine a uniform fan with log-spaced probes hugging the
radial directions: profiles that focus geodesics through a small high-
curvature cap (a smoothed cone, say) produce conjugate points only within
a milliradian-scale window around the inward radial direction, which a
uniform fan at any reasonable resolution would miss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as _k
from .odes import fan_events, shoot_geodesic
from .profiles import Point, Profile

__all__ = [
    "Beyond",
    "DirectionalScan",
    "RadiusEstimate",
    "RadiusReport",
    "as_inf",
    "ball_focal_radius",
    "conjugate_radius",
    "extended_focal_radius",
    "focal_radius",
    "is_beyond",
    "json_radius",
    "radius_report",
    "scan_directions",
]

DEFAULT_HORIZON = 20.0
DEFAULT_NDIRS = 256


@dataclass(frozen=True)
class Beyond:
    """No event occurred within the stated integration horizon."""

    horizon: float

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"Beyond(horizon={self.horizon})"


def is_beyond(x) -> bool:
    return isinstance(x, Beyond)


def as_inf(x) -> float:
    """Collapse a radius value to a float, mapping Beyond to +inf.

    Only for use in comparisons that are conservative under that mapping;
    results derived from a Beyond must be reported as horizon-limited.
    """
    return math.inf if isinstance(x, Beyond) else float(x)


def json_radius(x) -> dict:
    """JSON form of a radius value: {"value": float|null, "beyond_horizon": ...}."""
    if isinstance(x, Beyond):
        return {"value": None, "beyond_horizon": x.horizon}
    return {"value": float(x), "beyond_horizon": None}


def _probe_psis() -> np.ndarray:
    """Launch angles hugging both radial directions, log-spaced."""
    offs = np.logspace(-7.0, -1.1, 16)
    return np.concatenate(([0.0], offs, math.pi - offs[::-1], [math.pi]))


@dataclass(frozen=True)
class DirectionalScan:
    """Events of a fan of geodesics from one base point."""

    profile: Profile
    r0: float
    theta0: float
    horizon: float
    psis: np.ndarray
    events: np.ndarray

    def _times(self, col: int) -> np.ndarray:
        t = self.events[:, col].copy()
        t[np.isnan(t)] = np.inf
        return t

    @property
    def conjugate_times(self) -> np.ndarray:
        return self._times(_k.EV_T_CONJ)

    @property
    def focal_times(self) -> np.ndarray:
        return self._times(_k.EV_T_FOC)

    @property
    def extended_focal_times(self) -> np.ndarray:
        return self._times(_k.EV_T_FOCE)

    @property
    def opposite_meridian_times(self) -> np.ndarray:
        return self._times(_k.EV_T_DTHPI)

    @property
    def max_unit_drift(self) -> float:
        return float(np.max(self.events[:, _k.EV_DRIFT_UNIT]))

    @property
    def max_clairaut_drift(self) -> float:
        return float(np.max(self.events[:, _k.EV_DRIFT_CLAIR]))


def scan_directions(profile: Profile, point: Point, *, n_dirs: int = DEFAULT_NDIRS,
                    horizon: float = DEFAULT_HORIZON, probes: bool = True,
                    stop: str = "none", rtol: float = 1e-9,
                    atol: float = 1e-12) -> DirectionalScan:
    """Integrate a fan over launch angles [0, pi] and collect events.

    By rotational symmetry (and the mirror symmetry psi -> -psi) the interval
    [0, pi] covers all directions for radius purposes. Probes add log-spaced
    angles next to psi = 0 and psi = pi; keep them on unless the scan is
    specifically about uniformly distributed directions.
    """
    base = (np.arange(n_dirs) + 0.5) * math.pi / n_dirs
    if probes:
        psis = np.unique(np.concatenate([base, _probe_psis()]))
    else:
        psis = base
    events, _, _ = fan_events(profile, point.r, point.theta, psis, horizon,
                              stop=stop, rtol=rtol, atol=atol)
    return DirectionalScan(profile=profile, r0=point.r, theta0=point.theta,
                           horizon=horizon, psis=psis, events=events)


@dataclass(frozen=True)
class RadiusEstimate:
    """A directional infimum: its value, minimizing direction, and flags."""

    value: object            # float | Beyond
    psi: float | None = None
    flags: tuple = ()

    @property
    def is_beyond(self) -> bool:
        return isinstance(self.value, Beyond)


_EVENT_COLS = {
    "conjugate": _k.EV_T_CONJ,
    "focal": _k.EV_T_FOC,
    "extended_focal": _k.EV_T_FOCE,
}


def _event_time_single(profile: Profile, point: Point, psi: float, horizon: float,
                       which: str, rtol: float, atol: float) -> float:
    stop = "conjugate" if which == "conjugate" else "none"
    path = shoot_geodesic(profile, point.r, point.theta, psi, horizon,
                          rtol=rtol, atol=atol, sample_ds=0.0, stop=stop)
    t = path.events[_EVENT_COLS[which]]
    return math.inf if math.isnan(t) else float(t)


def _golden_refine(f, a: float, b: float, fa_mid: float, iters: int = 32):
    """Golden-section minimization of f on [a, b]; returns (x_best, f_best).

    Robust to +inf values (directions without the event); never returns a
    value above the best evaluation seen.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    best_x, best_f = (x1, f1) if f1 <= f2 else (x2, f2)
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        if f1 < best_f:
            best_x, best_f = x1, f1
        if f2 < best_f:
            best_x, best_f = x2, f2
    if fa_mid < best_f:
        return None, fa_mid
    return best_x, best_f


def _min_event(profile: Profile, point: Point, which: str, *, n_dirs: int,
               horizon: float, scan: DirectionalScan | None, refine: bool,
               rtol: float, atol: float) -> RadiusEstimate:
    if scan is None:
        scan = scan_directions(profile, point, n_dirs=n_dirs, horizon=horizon,
                               rtol=rtol, atol=atol)
    times = scan._times(_EVENT_COLS[which])
    i = int(np.argmin(times))
    if not np.isfinite(times[i]):
        return RadiusEstimate(value=Beyond(scan.horizon))
    flags = []
    if which == "conjugate" and scan.events[i, _k.EV_CONJ_EXTRAP] == 1.0:
        flags.append("extrapolated")
    if which == "focal" and scan.events[i, _k.EV_FOC_KIND] < 0.0:
        flags.append("touch")
    psi_best, t_best = float(scan.psis[i]), float(times[i])
    if refine:
        lo = float(scan.psis[i - 1]) if i > 0 else float(scan.psis[i])
        hi = float(scan.psis[i + 1]) if i + 1 < len(scan.psis) else float(scan.psis[i])
        if hi > lo:
            def f(psi):
                return _event_time_single(profile, point, psi, scan.horizon,
                                          which, rtol, atol)
            x, fx = _golden_refine(f, lo, hi, t_best)
            if fx < t_best:
                psi_best, t_best = (x if x is not None else psi_best), fx
    return RadiusEstimate(value=t_best, psi=psi_best, flags=tuple(flags))


def conjugate_radius(profile: Profile, point: Point, *, n_dirs: int = DEFAULT_NDIRS,
                     horizon: float = DEFAULT_HORIZON,
                     scan: DirectionalScan | None = None, refine: bool = True,
                     rtol: float = 1e-9, atol: float = 1e-12) -> RadiusEstimate:
    """Distance to the first conjugate point, over all directions."""
    return _min_event(profile, point, "conjugate", n_dirs=n_dirs, horizon=horizon,
                      scan=scan, refine=refine, rtol=rtol, atol=atol)


def focal_radius(profile: Profile, point: Point, *, n_dirs: int = DEFAULT_NDIRS,
                 horizon: float = DEFAULT_HORIZON,
                 scan: DirectionalScan | None = None, refine: bool = True,
                 rtol: float = 1e-9, atol: float = 1e-12) -> RadiusEstimate:
    """Distance to the first focal event (first zero of J') over directions."""
    return _min_event(profile, point, "focal", n_dirs=n_dirs, horizon=horizon,
                      scan=scan, refine=refine, rtol=rtol, atol=atol)


def extended_focal_radius(profile: Profile, point: Point, *,
                          n_dirs: int = DEFAULT_NDIRS,
                          horizon: float = DEFAULT_HORIZON,
                          scan: DirectionalScan | None = None,
                          refine: bool = True, rtol: float = 1e-9,
                          atol: float = 1e-12) -> RadiusEstimate:
    """Distance to the first genuine sign change of J' (touches excluded)."""
    return _min_event(profile, point, "extended_focal", n_dirs=n_dirs,
                      horizon=horizon, scan=scan, refine=refine, rtol=rtol,
                      atol=atol)


def ball_focal_radius(profile: Profile, point: Point, ball_radius: float, *,
                      n_grid: int = 17, n_dirs: int = 96,
                      horizon: float = DEFAULT_HORIZON,
                      which: str = "focal") -> RadiusEstimate:
    """Infimum of the (extended) focal radius over the closed metric ball.

    The focal radius of a point depends only on its radial coordinate, and a
    closed ball of radius s around (r0, theta) covers exactly the radial
    interval [r0 - s, r0 + s] clipped to the domain, so the infimum reduces
    to a one-dimensional scan in the base radius.
    """
    lo = max(0.0, point.r - ball_radius)
    hi = min(profile.r_max, point.r + ball_radius)
    best = RadiusEstimate(value=Beyond(horizon))
    for r in np.linspace(lo, hi, n_grid):
        est = _min_event(profile, Point(float(r), point.theta), which,
                         n_dirs=n_dirs, horizon=horizon, scan=None,
                         refine=False, rtol=1e-9, atol=1e-12)
        if as_inf(est.value) < as_inf(best.value):
            best = est
    return best


# ---------------------------------------------------------------------------
# Aggregate report
# ---------------------------------------------------------------------------


@dataclass
class RadiusReport:
    """Every radius function of one base point, JSON-serializable."""

    profile_name: str
    config: dict
    r0: float
    theta0: float
    horizon: float
    n_dirs: int
    conjugate: RadiusEstimate
    focal: RadiusEstimate
    extended_focal: RadiusEstimate
    loop_length: object            # float | Beyond
    injectivity: object            # float | Beyond
    injectivity_route: str
    injectivity_crosscheck: float | None
    cut_decay: object              # float | Beyond
    convexity_ct: object           # float | Beyond
    totally_conjugate: object      # float | Beyond
    max_unit_drift: float
    max_clairaut_drift: float
    flags: tuple = ()

    def to_json_dict(self) -> dict:
        def est(e: RadiusEstimate) -> dict:
            d = json_radius(e.value)
            d["psi"] = e.psi
            d["flags"] = list(e.flags)
            return d

        return {
            "profile": self.profile_name,
            "config": self.config,
            "point": {"r": self.r0, "theta": self.theta0},
            "horizon": self.horizon,
            "n_dirs": self.n_dirs,
            "conjugate_radius": est(self.conjugate),
            "focal_radius": est(self.focal),
            "extended_focal_radius": est(self.extended_focal),
            "loop_length": json_radius(self.loop_length),
            "injectivity_radius": json_radius(self.injectivity),
            "injectivity_route": self.injectivity_route,
            "injectivity_crosscheck": self.injectivity_crosscheck,
            "cut_decay_radius": json_radius(self.cut_decay),
            "convexity_ct_radius": json_radius(self.convexity_ct),
            "totally_conjugate_radius": json_radius(self.totally_conjugate),
            "diagnostics": {
                "max_unit_speed_drift": self.max_unit_drift,
                "max_clairaut_drift": self.max_clairaut_drift,
            },
            "flags": list(self.flags),
        }


def radius_report(profile: Profile, point: Point, *, n_dirs: int = DEFAULT_NDIRS,
                  horizon: float = DEFAULT_HORIZON, with_cut: bool = True,
                  with_totally_conjugate: bool = False) -> RadiusReport:
    """Compute every radius function at one point.

    with_cut enables the cut-locus quantities (loop, injectivity, cut-decay,
    convexity); with_totally_conjugate additionally enumerates minimal
    geodesics at near-conjugate cut points, which costs a few extra distance
    solves.
    """
    from . import cutlocus as _cl  # local import: cutlocus depends on this module

    scan = scan_directions(profile, point, n_dirs=n_dirs, horizon=horizon)
    conj = conjugate_radius(profile, point, scan=scan)
    foc = focal_radius(profile, point, scan=scan)
    foce = extended_focal_radius(profile, point, scan=scan)

    flags: list[str] = []
    if with_cut:
        cut = _cl.cut_analysis(profile, point, horizon=horizon, n_dirs=n_dirs,
                               conjugate=conj,
                               with_totally_conjugate=with_totally_conjugate)
        loop, inj, route, crosscheck = (cut.loop_length, cut.injectivity,
                                        cut.injectivity_route,
                                        cut.injectivity_crosscheck)
        rc_val, conjt = cut.cut_decay, cut.totally_conjugate
        flags.extend(cut.flags)
    else:
        loop = Beyond(horizon)
        inj = conj.value
        route = "conjugate_only"
        crosscheck = None
        rc_val = Beyond(horizon)
        conjt = Beyond(horizon)

    conv_ct = foce.value if as_inf(foce.value) <= as_inf(rc_val) else rc_val
    if is_beyond(conv_ct):
        conv_ct = Beyond(horizon)

    return RadiusReport(
        profile_name=profile.name,
        config=profile.config,
        r0=point.r,
        theta0=point.theta,
        horizon=horizon,
        n_dirs=n_dirs,
        conjugate=conj,
        focal=foc,
        extended_focal=foce,
        loop_length=loop,
        injectivity=inj,
        injectivity_route=route,
        injectivity_crosscheck=crosscheck,
        cut_decay=rc_val,
        convexity_ct=conv_ct,
        totally_conjugate=conjt,
        max_unit_drift=scan.max_unit_drift,
        max_clairaut_drift=scan.max_clairaut_drift,
        flags=tuple(flags),
    )
