"""Independent reference routes for validating the shooting engine.

Everything in this module reaches the same quantities the integration
machinery computes, but by a different road: spherical and hyperbolic
trigonometry, flat-sector development of the cone, a piecewise
closed-form comparison ODE, and Dijkstra shortest paths over a dense
metric lattice. Nothing here calls the geodesic integrator, so
agreement between the two routes is evidence, not tautology.

Conventions match the rest of the package: rotationally symmetric
metric dr^2 + phi^2(r) dtheta^2, points given by (r, theta), distances
in arclength units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .profiles import Point, Profile

__all__ = [
    "LatticeOracle",
    "cone_cut_decay_oracle",
    "cone_cut_distance",
    "cone_cut_time",
    "cone_distance",
    "cone_injectivity",
    "cone_loop",
    "focal_comparison",
    "hyperbolic_distance",
    "paraboloid_phi_oracle",
    "plane_distance",
    "sphere_distance",
    "sphere_values",
]


def _wrap(a):
    """Wrap angle(s) to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2.0 * np.pi)


# ---------------------------------------------------------------------------
# Constant-curvature closed forms
# ---------------------------------------------------------------------------


def sphere_distance(r1: float, th1: float, r2: float, th2: float) -> float:
    """Great-circle distance on the unit sphere; r is the colatitude."""
    c = (math.cos(r1) * math.cos(r2)
         + math.sin(r1) * math.sin(r2) * math.cos(th2 - th1))
    return math.acos(min(1.0, max(-1.0, c)))


def sphere_values() -> dict:
    """All radius quantities of a unit-sphere point, by classical geometry.

    Every geodesic is a great circle: the first Jacobi zero is at pi, the
    derivative zero at pi/2, the shortest loop is a full great circle, the
    cut locus is the antipode. For the cut-decay radius: the cut locus of x
    is {-x}, so d(p, Cut(x)) = pi - d(p, x), whose minimum over the closed
    ball of radius s is pi - s; that stays >= s exactly while s <= pi/2.
    """
    return {
        "conjugate": math.pi,
        "focal": math.pi / 2.0,
        "extended_focal": math.pi / 2.0,
        "loop": 2.0 * math.pi,
        "injectivity": math.pi,
        "cut_decay": math.pi / 2.0,
        "convexity_ct": math.pi / 2.0,
        "totally_conjugate": math.pi,
    }


def plane_distance(r1: float, th1: float, r2: float, th2: float) -> float:
    """Euclidean law of cosines in polar coordinates."""
    d2 = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * math.cos(th2 - th1)
    return math.sqrt(max(d2, 0.0))


def hyperbolic_distance(r1: float, th1: float, r2: float, th2: float) -> float:
    """Hyperbolic law of cosines (curvature -1, phi = sinh r)."""
    c = (math.cosh(r1) * math.cosh(r2)
         - math.sinh(r1) * math.sinh(r2) * math.cos(th2 - th1))
    return math.acosh(max(1.0, c))


# ---------------------------------------------------------------------------
# Flat cone: development onto a plane sector
# ---------------------------------------------------------------------------
#
# The cone dr^2 + b^2 r^2 dtheta^2 (b = (1-delta)/2) cut along a meridian
# develops isometrically onto the plane sector of opening 2*pi*b: a point
# (r, theta) maps to polar (r, b*theta). Geodesics are straight chords of
# the development; connections that would need a turning angle beyond pi
# do not exist and the infimum path runs through the apex.


def _beta(delta: float) -> float:
    return (1.0 - delta) / 2.0


def cone_distance(delta: float, r1: float, th1: float, r2: float,
                  th2: float) -> tuple[float, float]:
    """Distance on the ideal flat cone, plus the path's apex clearance.

    Returns (distance, clearance) where clearance is the closest approach
    of the minimizing path to the apex. The smoothed-cap profile matches
    the ideal cone only away from the cap, so callers should discard pairs
    whose clearance is within a few cap radii.
    """
    b = _beta(delta)
    dth = th2 - th1
    best = r1 + r2          # the through-apex path is always available
    clearance = 0.0
    # candidate developments: unwind the angular separation by whole turns
    k_max = int(math.ceil(math.pi / (2.0 * math.pi * b))) + 1
    for k in range(-k_max, k_max + 1):
        ang = abs(b * (dth + 2.0 * math.pi * k))
        if ang >= math.pi:
            continue
        d2 = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * math.cos(ang)
        d = math.sqrt(max(d2, 0.0))
        if d < best:
            best = d
            # distance from the apex (origin) to the chord segment: the
            # perpendicular foot if it lands inside the segment, else the
            # nearer endpoint
            if d > 1e-15:
                if r1 < r2 * math.cos(ang) or r2 < r1 * math.cos(ang):
                    clearance = min(r1, r2)
                else:
                    clearance = r1 * r2 * math.sin(ang) / d
            else:
                clearance = r1
    return best, clearance


def cone_cut_time(delta: float, r0: float, psi: float) -> float:
    """Cut time along launch direction psi (from the outward radial).

    In the development the geodesic is the straight ray from (r0, 0) with
    direction angle psi; the cut locus of the base point is the pair of
    sector boundary rays at development angle +-pi*b. The crossing is at
    t = r0 sin(pi b)/sin(psi - pi b), defined for psi in (pi b, pi];
    shallower launches never reach the opposite meridian (returns inf).
    """
    b = _beta(delta)
    gap = abs(psi) - math.pi * b
    if gap <= 0.0 or abs(psi) > math.pi:
        return math.inf
    return r0 * math.sin(math.pi * b) / math.sin(abs(psi) - math.pi * b)


def cone_injectivity(delta: float, r0: float) -> float:
    """min over psi of the cut time: r0 sin(pi b) = r0 cos(delta pi / 2)."""
    return r0 * math.sin(math.pi * _beta(delta))


def cone_loop(delta: float, r0: float) -> float:
    """Shortest geodesic loop: both mirror halves of the nearest cut meet."""
    return 2.0 * cone_injectivity(delta, r0)


def cone_cut_distance(delta: float, r0: float, x_r, x_th, *,
                      n_rho: int = 1537, rho_max: float | None = None):
    """d(p, Cut(x)) on the ideal cone, p = (r0, 0), vectorized over x.

    Cut(x) is the opposite meridian {theta = x_th + pi}; the distance from
    p to it is minimized over the radius rho of the candidate cut point.
    A dense rho grid plus one parabolic refinement gives ~1e-6 accuracy
    (the minimand is smooth in rho away from degenerate apex paths).
    """
    x_r = np.atleast_1d(np.asarray(x_r, dtype=float))
    x_th = np.atleast_1d(np.asarray(x_th, dtype=float))
    b = _beta(delta)
    if rho_max is None:
        rho_max = 3.0 * (r0 + float(np.max(x_r)))
    rho = np.linspace(1e-9, rho_max, n_rho)

    out = np.empty(x_r.shape)
    for i in range(len(x_r)):
        th_cut = x_th[i] + math.pi
        # distance from p to (rho, th_cut), vectorized over rho, taking the
        # best development (same winding logic as cone_distance)
        best = np.full(rho.shape, r0 + rho)  # through-apex fallback
        k_max = int(math.ceil(math.pi / (2.0 * math.pi * b))) + 1
        for k in range(-k_max, k_max + 1):
            ang = abs(b * (th_cut + 2.0 * math.pi * k))
            if ang >= math.pi:
                continue
            d = np.sqrt(np.maximum(
                r0 * r0 + rho * rho - 2.0 * r0 * rho * math.cos(ang), 0.0))
            best = np.minimum(best, d)
        j = int(np.argmin(best))
        if 0 < j < len(rho) - 1:
            # parabolic refinement through the three bracketing samples
            y0, y1, y2 = best[j - 1], best[j], best[j + 1]
            denom = y0 - 2.0 * y1 + y2
            if denom > 1e-30:
                out[i] = y1 - 0.125 * (y0 - y2) ** 2 / denom
            else:
                out[i] = y1
        else:
            out[i] = best[j]
    return out if out.shape != (1,) else float(out[0])


def cone_cut_decay_oracle(delta: float, r0: float, *, n_alpha: int = 97,
                          n_t: int = 49, tol: float = 2e-5) -> float:
    """Cut-decay radius of p = (r0, 0) on the ideal cone, by its definition.

    Bisect on s: the ball B_s(p) is admissible iff every x in it keeps its
    cut locus at distance >= s from p. Points x are swept on a polar grid
    around p (geodesic polar coordinates = straight rays of the development),
    exploiting the mirror symmetry (bearings in [0, pi] suffice).
    """
    b = _beta(delta)
    lo, hi = 0.0, cone_injectivity(delta, r0)  # p itself forces s <= inj(p)

    alphas = np.linspace(0.0, math.pi, n_alpha)
    ca, sa = np.cos(alphas), np.sin(alphas)

    def admissible(s: float) -> bool:
        ts = np.linspace(0.0, s, n_t)
        for t in ts:
            # develop the polar circle of radius t around p
            x = r0 + t * ca
            y = t * sa
            x_r = np.hypot(x, y)
            x_th = np.arctan2(y, x) / b   # intrinsic theta of the grid point
            m = cone_cut_distance(delta, r0, x_r, x_th)
            if np.min(m) < s - 1e-12:
                return False
        return True

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Paraboloid meridian, inverted independently
# ---------------------------------------------------------------------------


def paraboloid_phi_oracle(r: float) -> tuple[float, float, float]:
    """(phi, phi', phi'') for the paraboloid z = (x^2+y^2)/2 at arclength r.

    phi equals the cylinder radius rho at meridian arclength r, where
    r(rho) = (rho*sqrt(1+rho^2) + asinh(rho))/2. The kernel inverts this
    with a Newton iteration; here the inverse is found by plain bisection
    so the two routes share only the forward formula.
    """
    if r <= 0.0:
        return 0.0, 1.0, 0.0

    def forward(rho: float) -> float:
        return 0.5 * (rho * math.sqrt(1.0 + rho * rho) + math.asinh(rho))

    lo, hi = 0.0, max(2.0, 2.0 * r)
    while forward(hi) < r:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if forward(mid) < r:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, hi):
            break
    rho = 0.5 * (lo + hi)
    s = math.sqrt(1.0 + rho * rho)
    return rho, 1.0 / s, -rho / (s ** 4)


# ---------------------------------------------------------------------------
# Piecewise comparison solution for the no-conjugate-points argument
# ---------------------------------------------------------------------------


def focal_comparison(t1: float, t):
    """Solution of u'' + f u = 0, f = 1 on [0, t1] and -1 after, u(0)=0, u'(0)=1.

    Closed form: u = sin t up to t1, then
    u = sin(t1) cosh(t - t1) + cos(t1) sinh(t - t1). Returns (u, u').
    A geodesic leaving a region of curvature <= 1 after arclength t1 and
    staying in curvature <= -1... <= 0 territory has |J|'/|J| >= u'/u while
    u stays positive, so positivity of u (and eventually of u') rules out
    focal and conjugate points along it.
    """
    t = np.asarray(t, dtype=float)
    u_in = np.sin(t)
    du_in = np.cos(t)
    s, c = math.sin(t1), math.cos(t1)
    u_out = s * np.cosh(t - t1) + c * np.sinh(t - t1)
    du_out = s * np.sinh(t - t1) + c * np.cosh(t - t1)
    u = np.where(t <= t1, u_in, u_out)
    du = np.where(t <= t1, du_in, du_out)
    if u.shape == ():
        return float(u), float(du)
    return u, du


# ---------------------------------------------------------------------------
# Lattice shortest-path oracle
# ---------------------------------------------------------------------------

# Graph distances overestimate true distances by at most 1/cos(w) - 1 where
# w is the largest half-angle between adjacent edge directions in physical
# space (a path realizes an in-between heading by zig-zagging).  A fixed
# index stencil leaves wide wedges wherever phi*htheta drifts away from hr,
# so edges are instead chosen per ring to realize a fixed menu of physical
# slopes (angular speed over radial speed).  The menu below keeps every
# wedge under ~9 degrees half-angle across rings, about a 1.2% ceiling.
_SLOPE_TARGETS = (0.15, 0.225, 0.34, 0.5, 0.75, 1.1, 1.65, 2.5, 3.7, 5.5, 8.0)


@dataclass
class LatticeOracle:
    """Dijkstra distances over a dense (r, theta) lattice of the metric.

    Nodes sit at grid intersections; where the profile closes up (phi -> 0)
    a single hub node represents the pole, keeping through-pole paths
    representable. Query points should be taken from `node_point` so they
    coincide with lattice nodes (no snap error enters the comparison).
    """

    profile: Profile
    r_grid: np.ndarray
    n_theta: int
    graph: object
    has_pole_hub: bool
    has_far_hub: bool
    _n_ring_nodes: int = field(init=False)

    def __post_init__(self):
        self._n_ring_nodes = len(self.r_grid) * self.n_theta

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, profile: Profile, *, r_span: float, n_r: int = 300,
              n_theta: int | None = None, far_hub: bool = False,
              r_start: float | None = None) -> "LatticeOracle":
        from scipy.sparse import csr_matrix

        hr = r_span / (n_r + 1)
        probe = np.linspace(r_span / 512.0, r_span - 1e-9, 512)
        phi_max = max(profile.phi(float(r)) for r in probe)
        if n_theta is None:
            # aim the aspect ratio phi*htheta/hr near 0.45 so the slope
            # menu lands on small integer moves; when the column cap binds,
            # widen the rows instead (the wedge bound does not depend on
            # resolution, only on the realized direction set)
            n_theta = int(min(2600, max(256, math.ceil(
                2.0 * math.pi * phi_max / (0.45 * hr)))))
            if 2.0 * math.pi * phi_max / (n_theta * hr) > 0.5:
                n_r = max(120, int(math.ceil(
                    r_span * 0.45 * n_theta / (2.0 * math.pi * phi_max))))
                hr = r_span / (n_r + 1)
        htheta = 2.0 * math.pi / n_theta
        r0 = hr if r_start is None else r_start
        r_grid = r0 + hr * np.arange(n_r)
        phis = np.array([profile.phi(float(r)) for r in r_grid])

        n_ring = n_r * n_theta
        rows, cols, wts = [], [], []
        j_all = np.arange(n_theta)
        dj_cap = max(2, min(int(0.6 / htheta), n_theta // 3))
        for i in range(n_r):
            a_i = float(phis[i]) * htheta / hr
            moves = {(0, 1)}
            if i + 1 < n_r:
                moves.add((1, 0))
            for t in _SLOPE_TARGETS:
                best = None
                for di in (1, 2, 3):
                    if i + di >= n_r or a_i <= 0.0:
                        break
                    dj = int(round(t * di / a_i))
                    if dj < 1 or dj > dj_cap:
                        continue
                    err = abs(math.log((a_i * dj / di) / t))
                    if best is None or err < best[0]:
                        best = (err, di, dj)
                if best is not None:
                    moves.add((best[1], best[2]))
                    moves.add((best[1], -best[2]))
            for di, dj in moves:
                src = i * n_theta + j_all
                dst = (i + di) * n_theta + (j_all + dj) % n_theta
                if di == 0:
                    w = float(phis[i]) * htheta * abs(dj)
                else:
                    r_mid = float(r_grid[i]) + 0.5 * di * hr
                    phi_mid = float(np.interp(r_mid, r_grid, phis))
                    w = math.hypot(di * hr, phi_mid * dj * htheta)
                rows.append(src)
                cols.append(dst)
                wts.append(np.full(n_theta, w))

        n_nodes = n_ring
        has_pole_hub = bool(profile.smooth_pole)
        if has_pole_hub:
            hub = n_nodes
            n_nodes += 1
            ring0 = np.arange(n_theta)
            rows.append(np.full(n_theta, hub))
            cols.append(ring0)
            wts.append(np.full(n_theta, r_grid[0]))
        has_far_hub = far_hub
        if far_hub:
            fhub = n_nodes
            n_nodes += 1
            ring_last = (n_r - 1) * n_theta + np.arange(n_theta)
            rows.append(np.full(n_theta, fhub))
            cols.append(ring_last)
            wts.append(np.full(n_theta, r_span - r_grid[-1]))

        rows = np.concatenate(rows).astype(np.int32)
        cols = np.concatenate(cols).astype(np.int32)
        wts = np.concatenate(wts)
        graph = csr_matrix(
            (np.concatenate([wts, wts]),
             (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
            shape=(n_nodes, n_nodes))
        return cls(profile=profile, r_grid=r_grid, n_theta=n_theta,
                   graph=graph, has_pole_hub=has_pole_hub,
                   has_far_hub=has_far_hub)

    # -- queries -----------------------------------------------------------

    def node_point(self, i_r: int, j_theta: int) -> Point:
        """The exact metric coordinates of lattice node (i_r, j_theta)."""
        return Point(float(self.r_grid[i_r]),
                     float(2.0 * math.pi * j_theta / self.n_theta))

    def node_index(self, i_r: int, j_theta: int) -> int:
        return i_r * self.n_theta + j_theta % self.n_theta

    def random_node_points(self, n: int, rng: np.random.Generator, *,
                           i_lo: int = 0, i_hi: int | None = None):
        """n lattice points with uniformly random grid indices."""
        i_hi = len(self.r_grid) if i_hi is None else i_hi
        ii = rng.integers(i_lo, i_hi, size=n)
        jj = rng.integers(0, self.n_theta, size=n)
        return [(self.node_point(i, j), self.node_index(i, j))
                for i, j in zip(ii, jj)]

    def distances(self, source_indices, target_indices) -> np.ndarray:
        """Graph distances, shape (len(sources), len(targets))."""
        from scipy.sparse.csgraph import dijkstra

        src = np.asarray(source_indices, dtype=np.int64)
        mat = dijkstra(self.graph, directed=False, indices=src)
        return mat[:, np.asarray(target_indices, dtype=np.int64)]
