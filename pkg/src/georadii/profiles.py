"""Warp profiles for rotationally symmetric surface metrics dr^2 + phi(r)^2 dtheta^2.

A profile is a piecewise-analytic warp function phi on [0, r_max] with branch
kinds understood by the compiled kernels:

* ``sin``        phi = sin r                      (round sphere, K = +1)
* ``linear``     phi = slope * r                  (flat plane / flat cone, K = 0)
* ``sinh``       phi = sinh(r - shift)            (hyperbolic plane, K = -1)
* ``glue``       dense Hermite table driven by an analytic curvature bump
* ``cone cap``   closed-form smooth cap joining a flat cone to a smooth pole
* ``paraboloid`` arclength-parametrized meridian of z = (x^2 + y^2)/2

A smooth pole means phi(0) = 0, phi'(0) = 1, phi''(0) = 0, so the metric
extends smoothly across r = 0 and the integrator may switch to a Cartesian
pole chart there.

Curvature convention: K(r) = -phi''(r) / phi(r), with the one-sided limit
-phi'''(0+) at a smooth pole.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import kernels

__all__ = [
    "ConfigError",
    "Point",
    "Profile",
    "SurfaceMetric",
    "build_cone_profile",
    "build_gulliver_profile",
    "build_hyperbolic_profile",
    "build_paraboloid_profile",
    "build_plane_profile",
    "build_profile",
    "build_sphere_profile",
    "gauss_curvature",
    "load_profile_config",
    "write_glue_csv",
]

DEFAULT_R_MAX = 20.0
SPHERE_R_MAX = math.pi - 1e-9


class ConfigError(ValueError):
    """Raised for malformed profile configuration (maps to CLI exit code 2)."""


@dataclass(frozen=True)
class Point:
    """A point in warped polar coordinates."""

    r: float
    theta: float


@dataclass(frozen=True)
class Profile:
    """Piecewise warp function with a kernel-ready array encoding."""

    name: str
    r_max: float
    smooth_pole: bool
    breaks: np.ndarray
    kinds: np.ndarray
    params: np.ndarray
    tab_meta: np.ndarray
    tab_phi: np.ndarray
    tab_dphi: np.ndarray
    config: dict = field(repr=False)

    @property
    def pack(self) -> tuple:
        """Argument tuple consumed by the compiled kernels."""
        return (self.breaks, self.kinds, self.params, self.tab_meta,
                self.tab_phi, self.tab_dphi)

    def _eval(self, r) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rs = np.atleast_1d(np.asarray(r, dtype=np.float64))
        out = np.empty((3, rs.size), dtype=np.float64)
        kernels.eval_profile_arrays(*self.pack, rs.ravel(), out)
        return out[0], out[1], out[2]

    def phi(self, r):
        """Warp value phi(r); scalar in, scalar out."""
        v = self._eval(r)[0]
        return float(v[0]) if np.isscalar(r) else v

    def phi_prime(self, r):
        """First derivative phi'(r)."""
        v = self._eval(r)[1]
        return float(v[0]) if np.isscalar(r) else v

    def phi_second(self, r):
        """Second derivative phi''(r)."""
        v = self._eval(r)[2]
        return float(v[0]) if np.isscalar(r) else v

    def glue_table(self) -> np.ndarray | None:
        """Dense (r, phi, phi_prime, K) table over the glue interval, if any."""
        n = int(self.tab_meta[2])
        if n == 0:
            return None
        r = self.tab_meta[0] + self.tab_meta[1] * np.arange(n)
        K = gauss_curvature(self, r)
        return np.column_stack([r, self.tab_phi, self.tab_dphi, K])


@dataclass(frozen=True)
class SurfaceMetric:
    """Rotationally symmetric surface metric dr^2 + phi(r)^2 dtheta^2."""

    profile: Profile
    dim: int = 2

    @property
    def name(self) -> str:
        return self.profile.name

    @property
    def r_max(self) -> float:
        return self.profile.r_max

    def point(self, r: float, theta: float = 0.0) -> Point:
        if not 0.0 <= r <= self.profile.r_max:
            raise ValueError(f"r={r} outside [0, {self.profile.r_max}]")
        return Point(float(r), float(theta))


def gauss_curvature(profile: Profile, r):
    """Gauss curvature K(r) = -phi''/phi, one-sided limit at a smooth pole."""
    rs = np.atleast_1d(np.asarray(r, dtype=np.float64))
    safe = np.where(rs < 1e-7, 1e-7, rs)
    phi, _, d2 = profile._eval(safe)
    K = -d2 / phi
    return float(K[0]) if np.isscalar(r) else K


# ---------------------------------------------------------------------------
# Construction helpers
# ---------------------------------------------------------------------------


def _make(name: str, r_max: float, smooth_pole: bool, branches, config: dict,
          tab_meta=None, tab_phi=None, tab_dphi=None) -> Profile:
    """Assemble the kernel array encoding from (end, kind, params) branch rows."""
    breaks = np.zeros(len(branches) + 1, dtype=np.float64)
    kinds = np.zeros(len(branches), dtype=np.int64)
    params = np.zeros((len(branches), 4), dtype=np.float64)
    for i, (end, kind, pars) in enumerate(branches):
        breaks[i + 1] = end
        kinds[i] = kind
        params[i, : len(pars)] = pars
    if abs(breaks[-1] - r_max) > 1e-12:
        raise ValueError("last branch must end at r_max")
    return Profile(
        name=name,
        r_max=float(r_max),
        smooth_pole=bool(smooth_pole),
        breaks=breaks,
        kinds=kinds,
        params=params,
        tab_meta=np.zeros(3) if tab_meta is None else np.asarray(tab_meta, dtype=np.float64),
        tab_phi=np.zeros(0) if tab_phi is None else np.asarray(tab_phi, dtype=np.float64),
        tab_dphi=np.zeros(0) if tab_dphi is None else np.asarray(tab_dphi, dtype=np.float64),
        config=config,
    )


def build_sphere_profile(r_max: float = SPHERE_R_MAX) -> Profile:
    """Unit round sphere, phi = sin r on [0, r_max], r_max just short of pi."""
    if not 0.0 < r_max < math.pi:
        raise ValueError("sphere r_max must lie in (0, pi)")
    cfg = {"kind": "sphere", "params": {}, "r_max": r_max}
    return _make("sphere", r_max, True, [(r_max, kernels.BR_SIN, ())], cfg)


def build_plane_profile(r_max: float = DEFAULT_R_MAX) -> Profile:
    """Flat plane, phi = r."""
    cfg = {"kind": "plane", "params": {}, "r_max": r_max}
    return _make("plane", r_max, True, [(r_max, kernels.BR_LINEAR, (1.0,))], cfg)


def build_hyperbolic_profile(r_max: float = DEFAULT_R_MAX) -> Profile:
    """Hyperbolic plane of curvature -1, phi = sinh r."""
    cfg = {"kind": "hyperbolic", "params": {}, "r_max": r_max}
    return _make("hyperbolic", r_max, True, [(r_max, kernels.BR_SINH, (0.0,))], cfg)


def build_paraboloid_profile(r_max: float = DEFAULT_R_MAX) -> Profile:
    """Paraboloid z = (x^2 + y^2)/2 parametrized by meridian arclength.

    With rho the distance from the axis, arclength r(rho) =
    (rho*sqrt(1+rho^2) + asinh(rho))/2 has a closed form; the kernel inverts
    it by Newton iteration, giving phi = rho(r), phi' = 1/sqrt(1+rho^2),
    phi'' = -rho/(1+rho^2)^2 exactly.
    """
    cfg = {"kind": "paraboloid", "params": {}, "r_max": r_max}
    return _make("paraboloid", r_max, True, [(r_max, kernels.BR_PARABOLOID, ())], cfg)


def build_cone_profile(delta: float = 0.05, r_cap: float = 0.01,
                       r_max: float = DEFAULT_R_MAX) -> Profile:
    """Flat cone phi = r(1-delta)/2 for r >= r_cap with a smooth-pole cap.

    The cap keeps the outer branch exact (so distances, loops and injectivity
    radii of points with r >> r_cap match the ideal cone formulas) and joins
    it C^2 at r_cap: phi' = 1 + (b-1)*s(r/r_cap) with
    s(u) = (1 - cos(pi u))/2 + sin^2(pi u), whose integral over [0,1] is 1,
    forcing phi(r_cap) = b*r_cap exactly. phi' necessarily dips below the cone
    slope b inside the cap (no monotone cap can meet the exact outer branch),
    which keeps phi positive as long as b > 1/3, i.e. delta < 1/3.
    """
    if not 0.0 < delta < 1.0 / 3.0:
        raise ConfigError(f"cone delta must lie in (0, 1/3), got {delta}")
    if not 0.0 < r_cap < min(1.0, r_max / 10.0):
        raise ConfigError(f"cone r_cap must lie in (0, {min(1.0, r_max / 10.0)})")
    b = (1.0 - delta) / 2.0
    cfg = {"kind": "cone", "params": {"delta": delta, "r_cap": r_cap}, "r_max": r_max}
    return _make("cone", r_max, True,
                 [(r_cap, kernels.BR_CONECAP, (b, r_cap)),
                  (r_max, kernels.BR_LINEAR, (b,))], cfg)


# --- sphere-to-hyperbolic glue ---------------------------------------------


def _glue_curvature(r, m, a, s1, s2):
    x1 = (r - m) / s1
    x2 = (r - m) / s2
    sech2 = 1.0 / np.cosh(x2) ** 2
    return -np.tanh(x1) - a * sech2


def _integrate_glue(r_lo, r_hi, phi0, dphi0, m, a, s1, s2, t_eval=None):
    """Integrate phi'' = -K(r) phi across the glue with tight tolerances."""
    from scipy.integrate import solve_ivp

    def rhs(r, y):
        K = _glue_curvature(r, m, a, s1, s2)
        return [y[1], -K * y[0]]

    sol = solve_ivp(rhs, (r_lo, r_hi), [phi0, dphi0], method="DOP853",
                    rtol=1e-12, atol=1e-14, t_eval=t_eval, dense_output=False)
    if not sol.success:  # pragma: no cover - tight tolerances on a smooth ODE
        raise RuntimeError(f"glue integration failed: {sol.message}")
    return sol


def build_gulliver_profile(r1: float = 0.7985, epsilon: float = 0.0085,
                           r_max: float = DEFAULT_R_MAX) -> Profile:
    """Spherical cap glued to a hyperbolic funnel without conjugate points.

    phi = sin r on [0, r1-eps], phi = sinh(r - r2) on [r1+eps, r_max] with
    r2 = r1 - asinh(sin r1) so the two branches cross at r1. On the glue
    interval the curvature follows K(r) = -tanh((r-m)/s1) - a*sech^2((r-m)/s2)
    and (m, a) are tuned by a damped Newton iteration so that integrating
    phi'' = -K phi from the sin branch meets the sinh branch in value and
    slope. K equals +1 and -1 at the joints to within ~1e-9 and dips below
    -1 in between; the dip is what lets the energy phi'^2 + K phi^2 return
    to the value the sinh branch requires.

    The cap radius r1 - eps must exceed pi/4 so that the spherical region
    contains geodesic arcs of length pi/2; choices with r1 + eps <= 0.85 keep
    the downstream comparison argument valid.
    """
    if not (math.pi / 4.0 < r1 < 0.8):
        raise ConfigError(f"gulliver r1 must lie in (pi/4, 0.8), got {r1}")
    if not (r1 - epsilon > math.pi / 4.0):
        raise ConfigError(
            f"gulliver requires r1 - epsilon > pi/4 = {math.pi / 4.0:.6f}, "
            f"got {r1 - epsilon:.6f}")
    if not (r1 + epsilon <= 0.85):
        raise ConfigError(f"gulliver requires r1 + epsilon <= 0.85, got {r1 + epsilon}")

    r2 = r1 - math.asinh(math.sin(r1))
    r_lo, r_hi = r1 - epsilon, r1 + epsilon
    phi0, dphi0 = math.sin(r_lo), math.cos(r_lo)
    target = np.array([math.sinh(r_hi - r2), math.cosh(r_hi - r2)])
    s1, s2 = epsilon / 10.0, epsilon / 14.0

    def residual(m, a):
        sol = _integrate_glue(r_lo, r_hi, phi0, dphi0, m, a, s1, s2)
        return np.array([sol.y[0, -1], sol.y[1, -1]]) - target

    # damped Newton on (m, a) with finite-difference Jacobian
    m, a = r1, 0.8 / (2.0 * s2)
    res = residual(m, a)
    for _ in range(60):
        if np.max(np.abs(res)) < 1e-10:
            break
        dm, da = 1e-7, 1e-5 * max(1.0, a)
        Jm = (residual(m + dm, a) - res) / dm
        Ja = (residual(m, a + da) - res) / da
        step = np.linalg.solve(np.column_stack([Jm, Ja]), -res)
        lam = 1.0
        while lam > 1e-4:
            m_new = min(max(m + lam * step[0], r_lo + 6.0 * s1), r_hi - 6.0 * s1)
            a_new = min(max(a + lam * step[1], 0.0), 1e5)
            res_new = residual(m_new, a_new)
            if np.linalg.norm(res_new) < np.linalg.norm(res):
                m, a, res = m_new, a_new, res_new
                break
            lam *= 0.5
        else:  # pragma: no cover - the map is smooth and well-conditioned
            raise RuntimeError("glue parameter search stalled")
    else:  # pragma: no cover
        raise RuntimeError(f"glue parameter search did not converge: |res|={res}")

    # dense Hermite table at step <= 1e-4
    n = int(math.ceil((r_hi - r_lo) / 1e-4)) + 1
    t_eval = np.linspace(r_lo, r_hi, n)
    sol = _integrate_glue(r_lo, r_hi, phi0, dphi0, m, a, s1, s2, t_eval=t_eval)

    cfg = {"kind": "gulliver", "params": {"r1": r1, "epsilon": epsilon}, "r_max": r_max}
    return _make(
        "gulliver", r_max, True,
        [(r_lo, kernels.BR_SIN, ()),
         (r_hi, kernels.BR_GLUE, (m, a, s1, s2)),
         (r_max, kernels.BR_SINH, (r2,))],
        cfg,
        tab_meta=[r_lo, (r_hi - r_lo) / (n - 1), float(n)],
        tab_phi=sol.y[0],
        tab_dphi=sol.y[1],
    )


# ---------------------------------------------------------------------------
# Configuration plumbing
# ---------------------------------------------------------------------------

_BUILDERS = {
    "sphere": (build_sphere_profile, ()),
    "plane": (build_plane_profile, ()),
    "hyperbolic": (build_hyperbolic_profile, ()),
    "paraboloid": (build_paraboloid_profile, ()),
    "cone": (build_cone_profile, ("delta", "r_cap")),
    "gulliver": (build_gulliver_profile, ("r1", "epsilon")),
}


def build_profile(config: dict) -> Profile:
    """Build a profile from a config dict {"kind", "params", "r_max"}."""
    if not isinstance(config, dict):
        raise ConfigError(f"config must be an object, got {type(config).__name__}")
    kind = config.get("kind")
    if kind not in _BUILDERS:
        raise ConfigError(
            f"config.kind: expected one of {sorted(_BUILDERS)}, got {kind!r}")
    builder, allowed = _BUILDERS[kind]
    params = config.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("config.params: expected an object")
    kwargs: dict[str, Any] = {}
    for key, value in params.items():
        if key not in allowed:
            raise ConfigError(f"config.params.{key}: not a parameter of kind {kind!r}")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"config.params.{key}: expected a number, got {value!r}")
        kwargs[key] = float(value)
    if "r_max" in config and config["r_max"] is not None:
        r_max = config["r_max"]
        if not isinstance(r_max, (int, float)) or isinstance(r_max, bool):
            raise ConfigError(f"config.r_max: expected a number, got {r_max!r}")
        kwargs["r_max"] = float(r_max)
    extra = set(config) - {"kind", "params", "r_max"}
    if extra:
        raise ConfigError(f"config.{sorted(extra)[0]}: unknown field")
    try:
        return builder(**kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_profile_config(path: str) -> Profile:
    """Load a profile from a JSON config file with cited line diagnostics."""
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path} is not valid JSON (line {exc.lineno}, col {exc.colno}): "
            f"{exc.msg}") from exc
    return build_profile(config)


def write_glue_csv(profile: Profile, path: str) -> None:
    """Write the dense glue table as CSV columns r, phi, phi_prime, K."""
    import csv

    table = profile.glue_table()
    if table is None:
        raise ValueError(f"profile {profile.name!r} has no glue table")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["r", "phi", "phi_prime", "K"])
        for row in table:
            writer.writerow([repr(float(x)) for x in row])
