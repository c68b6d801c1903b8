"""Cut-locus quantities: distances, loops, injectivity, cut decay.

Cut candidates along a direction come from two event types recorded by the
integrator:

* the first conjugate point (J = 0), and
* the first crossing of the opposite meridian (|theta - theta0| = pi),
  where the mirror-image geodesic arrives at the same point with the same
  length, so minimality ends at or before that time.

For the profile families in this package (monotone or single-bump
curvature, or empty cut loci) the earlier of the two *is* the cut time;
spot checks against closed forms and a metric-space oracle keep that
assumption honest in the test suite.

Point-to-point distances are computed by shooting: seed launch angles and
arc lengths from a sampled fan of geodesics, then polish each seed with a
2x2 Newton iteration whose Jacobian is analytic (the transverse column is
the Jacobi field). The same machinery, aimed back at the base point,
finds geodesic loops; aimed at candidate cut points, it enumerates the
minimal geodesics needed for the totally-conjugate scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as _k
from .odes import fan_events, shoot_geodesic
from .profiles import Point, Profile
from .radii import Beyond, RadiusEstimate, as_inf, is_beyond

__all__ = [
    "CutAnalysis",
    "CutSample",
    "DistanceFan",
    "DistanceResult",
    "GeodesicLeg",
    "cut_analysis",
    "cut_decay_radius",
    "cut_locus_samples",
    "cut_time",
    "distance",
    "injectivity_radius",
    "shortest_loop",
    "totally_conjugate_radius",
]


def _wrap(a):
    """Wrap angle(s) to (-pi, pi]."""
    return math.pi - np.mod(math.pi - np.asarray(a, dtype=float), 2.0 * math.pi)


# ---------------------------------------------------------------------------
# Sampled fan: seed source and fast approximate distance field
# ---------------------------------------------------------------------------


@dataclass
class DistanceFan:
    """A fan of sampled geodesics from one base point.

    Serves two purposes: seeding Newton distance solves, and a fast
    second-order-accurate approximation of d(base, query) for bulk scans.
    """

    profile: Profile
    r0: float
    theta0: float
    horizon: float
    psis: np.ndarray
    events: np.ndarray
    samples: np.ndarray
    counts: np.ndarray
    ds: float
    # flattened sample columns (valid entries only), built lazily
    _flat: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, profile: Profile, point: Point, *, n_dirs: int = 512,
              horizon: float = 20.0, ds: float = 0.08,
              rtol: float = 1e-9, atol: float = 1e-12) -> "DistanceFan":
        interior = (np.arange(1, n_dirs) * math.pi / n_dirs)
        psis = np.concatenate(([0.0], interior, [math.pi]))
        events, samples, counts = fan_events(
            profile, point.r, point.theta, psis, horizon,
            stop="none", sample_ds=ds, rtol=rtol, atol=atol)
        return cls(profile=profile, r0=point.r, theta0=point.theta,
                   horizon=horizon, psis=psis, events=events,
                   samples=samples, counts=counts, ds=ds)

    def _flatten(self) -> dict:
        if self._flat:
            return self._flat
        n, m, _ = self.samples.shape
        idx = np.arange(m)[None, :] < self.counts[:, None]
        cols = {}
        names = {"t": _k.SMP_T, "r": _k.SMP_R, "th": _k.SMP_TH,
                 "rd": _k.SMP_RDOT, "td": _k.SMP_THDOT,
                 "J": _k.SMP_J, "Jp": _k.SMP_JP}
        for name, col in names.items():
            cols[name] = self.samples[:, :, col][idx]
        cols["psi"] = np.repeat(self.psis, self.counts.astype(int))
        cols["phi"] = self.profile.phi(cols["r"])
        # an r-sorted copy supports windowed nearest-sample queries
        order = np.argsort(cols["r"], kind="stable")
        cols["sorted"] = {name: cols[name][order]
                          for name in ("t", "r", "th", "rd", "td", "J", "Jp", "phi")}
        self._flat.update(cols)
        return self._flat

    def field_distance(self, r_q, theta_q):
        """Approximate d(base, (r_q, theta_q)) from the sampled fan.

        Second-order accurate in the offset from the nearest sample: the
        longitudinal component shifts the arc length directly, the
        transverse component enters through the geodesic-circle curvature
        J'/J. Vectorized over query arrays; returns +inf where no sample
        lies within the trust offset (query outside fan coverage).
        """
        f = self._flatten()["sorted"]
        r_arr = np.atleast_1d(np.asarray(r_q, dtype=float))
        th_arr = np.atleast_1d(np.asarray(theta_q, dtype=float))
        out = np.full(r_arr.shape, np.inf)
        rs = f["r"]
        for i in range(len(r_arr)):
            lo = np.searchsorted(rs, r_arr[i] - 0.08)
            hi = np.searchsorted(rs, r_arr[i] + 0.08)
            if hi <= lo:
                continue
            sl = slice(lo, hi)
            t, r, th = f["t"][sl], f["r"][sl], f["th"][sl]
            rd, td, phi = f["rd"][sl], f["td"][sl], f["phi"][sl]
            J, Jp = f["J"][sl], f["Jp"][sl]
            dr = r_arr[i] - r
            best = np.inf
            # the fan covers swept angles of one sign; the mirror fan is the
            # reflection theta -> 2*theta0 - theta, an isometry fixing the base
            for refl in (False, True):
                tq = (2.0 * self.theta0 - th_arr[i]) if refl else th_arr[i]
                dth = _wrap(tq - th)
                off2 = dr * dr + (phi * dth) ** 2
                trust = off2 <= 0.075 ** 2
                if not np.any(trust):
                    continue
                u = dr * rd + phi * phi * dth * td
                v = -phi * td * dr + phi * rd * dth
                base = np.hypot(np.maximum(t + u, 1e-12), v)
                with np.errstate(divide="ignore", invalid="ignore"):
                    k = np.where(np.abs(J) > 1e-3, Jp / J, 0.0)
                k = np.clip(k, -50.0, 50.0)
                corr = 0.5 * v * v * (k - 1.0 / np.maximum(t, 1e-9))
                corr = np.clip(corr, -0.5 * np.abs(v), 0.5 * np.abs(v))
                d = np.where(trust, base + corr, np.inf)
                best = min(best, float(d.min()))
            out[i] = best
        return out if out.shape != (1,) else float(out[0])

    def seed_candidates(self, r_q: float, dtheta_q: float, *, n_best: int = 60,
                        t_floor: float = 0.0,
                        require_return: bool = False) -> list:
        """(psi, t) seeds whose sampled point lies near the target.

        dtheta_q is the target's swept angle relative to the base meridian;
        matching is modulo 2*pi so multi-winding connections seed too.

        require_return keeps only seeds that have genuinely left and come
        back (arc length well above the proxy offset). Loop searches need
        this: without it the ring of samples just past t_floor -- all
        trivially near the base point -- crowds out real return passes.
        """
        f = self._flatten()
        phi_q = max(self.profile.phi(max(r_q, 1e-6)), 1e-6)
        dr = f["r"] - r_q
        dth = _wrap((f["th"] - self.theta0) - dtheta_q)
        scale = min(phi_q, float(np.median(f["phi"])))
        d2 = dr * dr + (scale * dth) ** 2
        ok = f["t"] >= t_floor
        if require_return:
            ok &= f["t"] >= 4.0 * np.sqrt(d2) + 0.2
        d2 = np.where(ok, d2, np.inf)
        # local minima along each ray: compare with neighbours in the flat
        # arrays (rays are contiguous and t-sorted)
        left = np.empty_like(d2)
        right = np.empty_like(d2)
        left[0], right[-1] = np.inf, np.inf
        left[1:] = d2[:-1]
        right[:-1] = d2[1:]
        starts = np.cumsum(np.concatenate(([0], self.counts.astype(int))))[:-1]
        ends = starts + self.counts.astype(int) - 1
        valid_starts = starts[self.counts.astype(int) > 0]
        valid_ends = ends[self.counts.astype(int) > 0]
        left[valid_starts] = np.inf
        right[valid_ends[valid_ends < len(d2)]] = np.inf
        is_min = (d2 <= left) & (d2 <= right) & np.isfinite(d2)
        cand = np.nonzero(is_min)[0]
        if len(cand) == 0:
            return []
        order = cand[np.argsort(d2[cand])]
        # Arc-length-bucketed selection: a focusing pass can put dozens of
        # rays within a hair of the target at essentially one arc length,
        # and a pure proximity ranking would let that single cluster crowd
        # every other connection -- in particular a slightly worse-aligned
        # shortest leg -- out of the list entirely.
        width = max(4.0 * self.ds, 1e-3)
        kept: list[int] = []
        per_bucket: dict[int, int] = {}
        for i in order:
            b = int(f["t"][i] / width)
            c = per_bucket.get(b, 0)
            if c >= 8:
                continue
            per_bucket[b] = c + 1
            kept.append(i)
            if len(kept) >= n_best:
                break
        return [(float(f["psi"][i]), float(f["t"][i])) for i in kept]


# ---------------------------------------------------------------------------
# Newton distance solves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeodesicLeg:
    """One geodesic from the base point to the target."""

    psi: float
    length: float
    r_end: float
    theta_end: float
    j_end: float
    jp_end: float
    residual: float
    multiplicity: int = 1


@dataclass(frozen=True)
class DistanceResult:
    value: float
    legs: tuple
    flags: tuple = ()


def _endpoint(profile: Profile, r0: float, th0: float, psi: float, t: float):
    """State and Jacobi data of the geodesic at arc length exactly t."""
    ev = np.empty(_k.EV_N)
    smp = np.empty((1, 1))
    _k.integrate_geodesic(profile.breaks, profile.kinds, profile.params,
                          profile.tab_meta, profile.tab_phi, profile.tab_dphi,
                          profile.smooth_pole, profile.r_max,
                          r0, th0, psi, t, 1e-10, 1e-13,
                          False, _k.STOP_NONE, 0.0, ev, smp)
    return ev


def _newton_leg(profile: Profile, r0: float, th0: float, r_q: float,
                dth_q: float, psi0: float, t0: float,
                horizon: float) -> GeodesicLeg | None:
    """Polish one (psi, t) seed to a geodesic hitting the target."""
    phi_scale = max(profile.phi(max(r_q, 1e-6)), 1e-6)

    def _miss(ev):
        fr = ev[_k.EV_R_END] - r_q
        fth = float(_wrap((ev[_k.EV_TH_END] - th0) - dth_q))
        return math.hypot(fr, phi_scale * fth), fr, fth

    psi, t = float(psi0), float(t0)
    ev = _endpoint(profile, r0, th0, psi, t)
    if ev[_k.EV_EXIT] not in (_k.EXIT_TMAX, _k.EXIT_RMAX):
        return None
    err, fr, fth = _miss(ev)
    best = (err, psi, t, ev)
    for _ in range(30):
        if err < 1e-11 * (1.0 + t):
            break
        r_e = ev[_k.EV_R_END]
        rd, td = ev[_k.EV_RDOT_END], ev[_k.EV_THDOT_END]
        J = ev[_k.EV_J_END]
        phi_e = max(profile.phi(max(r_e, 1e-9)), 1e-12)
        A = np.array([[rd, -J * phi_e * td],
                      [td, J * rd / phi_e]])
        F = np.array([fr, fth])
        try:
            if abs(np.linalg.det(A)) < 1e-13 * (1.0 + abs(J)):
                step, *_ = np.linalg.lstsq(A + 1e-9 * np.eye(2), -F, rcond=None)
            else:
                step = np.linalg.solve(A, -F)
        except np.linalg.LinAlgError:
            return None
        dt = float(np.clip(step[0], -0.5, 0.5))
        dpsi = float(np.clip(step[1], -0.3, 0.3))
        # backtracking: near pole-grazing corridors the endpoint map is
        # stiff in psi and full steps oscillate across the solution
        accepted = False
        for _bt in range(8):
            t_new = min(max(t + dt, 1e-6), horizon)
            psi_new = psi + dpsi
            ev2 = _endpoint(profile, r0, th0, psi_new, t_new)
            if ev2[_k.EV_EXIT] in (_k.EXIT_TMAX, _k.EXIT_RMAX):
                err2, fr2, fth2 = _miss(ev2)
                if err2 < err:
                    psi, t, ev = psi_new, t_new, ev2
                    err, fr, fth = err2, fr2, fth2
                    accepted = True
                    break
            dt *= 0.5
            dpsi *= 0.5
        if not accepted:
            break
        if err < best[0]:
            best = (err, psi, t, ev)
    err, psi, t, ev = best
    if err > 1e-8 * (1.0 + t):
        return None
    return GeodesicLeg(psi=psi, length=t, r_end=ev[_k.EV_R_END],
                       theta_end=ev[_k.EV_TH_END], j_end=ev[_k.EV_J_END],
                       jp_end=ev[_k.EV_JP_END], residual=err)


def _cluster_legs(legs: list, mirror_fold: bool) -> list:
    """Merge Newton solutions that are the same geodesic.

    When the target sits on the base meridian (swept angle 0 or pi) the
    reflection isometry pairs each non-meridional leg with a mirror twin;
    those fold to one entry with multiplicity 2.
    """
    out: list[GeodesicLeg] = []
    for leg in sorted(legs, key=lambda g: g.length):
        psi = leg.psi
        mult = 1
        if mirror_fold:
            folded = abs(float(_wrap(psi)))
            if 1e-9 < folded < math.pi - 1e-9:
                mult = 2
            psi = folded
        dup = False
        for kept in out:
            if abs(kept.length - leg.length) < 1e-7 and abs(kept.psi - psi) < 1e-5:
                dup = True
                break
        if not dup:
            out.append(GeodesicLeg(psi=psi, length=leg.length, r_end=leg.r_end,
                                   theta_end=leg.theta_end, j_end=leg.j_end,
                                   jp_end=leg.jp_end, residual=leg.residual,
                                   multiplicity=mult))
    return out


def distance(profile: Profile, p: Point, q: Point, *,
             fan: DistanceFan | None = None, horizon: float = 20.0,
             all_geodesics: bool = False) -> DistanceResult:
    """Geodesic distance from p to q by multi-seed shooting.

    Every locally minimizing connection found is polished; the distance is
    the shortest. With all_geodesics the full list of connections (shortest
    first) is returned, mirror multiplicities folded for targets on the
    base meridian.
    """
    if q.r < 1e-9 or p.r < 1e-9:
        # one endpoint at the pole: the meridian through the other endpoint
        # is the unique radial connection
        d = max(p.r, q.r)
        leg = GeodesicLeg(psi=math.pi if p.r > 0 else 0.0, length=d,
                          r_end=q.r, theta_end=q.theta, j_end=float("nan"),
                          jp_end=float("nan"), residual=0.0)
        return DistanceResult(value=d, legs=(leg,), flags=("pole_endpoint",))
    if fan is None:
        fan = DistanceFan.build(profile, p, horizon=horizon)
    dth = float(_wrap(q.theta - p.theta))
    mirror_fold = abs(dth) < 1e-12 or abs(abs(dth) - math.pi) < 1e-12
    dth_q = abs(dth)  # reflection symmetry: solve in the upper half
    seeds = fan.seed_candidates(q.r, dth_q)
    legs = []
    if not all_geodesics:
        # shortest connection only: polish seeds in ascending arc order and
        # stop once no remaining seed can undercut the best converged leg
        # (seed arcs sit within one sample spacing plus the field trust
        # radius of their leg's true length)
        best_t = math.inf
        for psi0, t0 in sorted(seeds, key=lambda s: s[1]):
            if t0 > best_t + 0.25:
                break
            leg = _newton_leg(profile, p.r, p.theta, q.r, dth_q, psi0, t0,
                              fan.horizon)
            if leg is not None:
                legs.append(leg)
                best_t = min(best_t, leg.length)
    else:
        for psi0, t0 in seeds:
            leg = _newton_leg(profile, p.r, p.theta, q.r, dth_q, psi0, t0,
                              fan.horizon)
            if leg is not None:
                legs.append(leg)
    legs = _cluster_legs(legs, mirror_fold)
    if not legs:
        # fall back to the sampled field (target may sit beyond seed reach)
        approx = fan.field_distance(q.r, q.theta)
        return DistanceResult(value=float(approx), legs=(),
                              flags=("no_converged_leg",))
    if not all_geodesics:
        legs = legs[:1]
    return DistanceResult(value=legs[0].length, legs=tuple(legs))


# ---------------------------------------------------------------------------
# Loops and injectivity
# ---------------------------------------------------------------------------


def shortest_loop(profile: Profile, point: Point, *,
                  fan: DistanceFan | None = None, horizon: float = 20.0,
                  t_floor: float = 0.25) -> RadiusEstimate:
    """Length of the shortest geodesic loop based at the point.

    A loop is a geodesic that leaves and returns to the point (the two end
    tangents need not match). Found as a self-distance solve with the
    trivial t = 0 solution excluded.
    """
    if fan is None:
        fan = DistanceFan.build(profile, point, horizon=horizon)
    seeds = fan.seed_candidates(point.r, 0.0, t_floor=t_floor,
                                require_return=True)
    legs = []
    for psi0, t0 in seeds:
        leg = _newton_leg(profile, point.r, point.theta, point.r, 0.0,
                          psi0, t0, fan.horizon)
        if leg is not None and leg.length > t_floor:
            legs.append(leg)
    legs = _cluster_legs(legs, mirror_fold=True)
    if not legs:
        return RadiusEstimate(value=Beyond(fan.horizon))
    return RadiusEstimate(value=legs[0].length, psi=legs[0].psi)


def _cut_fan(profile: Profile, point: Point, *, n_dirs: int, horizon: float,
             probes: bool = True):
    from .radii import _probe_psis
    base = (np.arange(n_dirs) + 0.5) * math.pi / n_dirs
    psis = np.unique(np.concatenate([base, _probe_psis()])) if probes else base
    events, _, _ = fan_events(profile, point.r, point.theta, psis, horizon,
                              stop="cut")
    return psis, events


@dataclass(frozen=True)
class CutSample:
    """One candidate cut point seen along a launch direction."""

    psi: float
    t_cut: float
    kind: str            # "conjugate", "opposite_meridian", or a non-cut exit
    r: float
    theta: float
    j_at_cut: float


def cut_locus_samples(profile: Profile, point: Point, *, n_dirs: int = 256,
                      horizon: float = 20.0,
                      include_beyond: bool = False) -> list:
    """Candidate cut points over a fan of directions (empty if none).

    With ``include_beyond`` every direction produces a row; directions
    without a cut candidate report an infinite cut time, the state at which
    integration stopped, and the stop reason as the kind ("beyond" for the
    horizon, "chart_edge" for the chart boundary).
    """
    psis, events = _cut_fan(profile, point, n_dirs=n_dirs, horizon=horizon)
    out = []
    for i in range(len(psis)):
        exit_code = events[i, _k.EV_EXIT]
        t_cut = float(events[i, _k.EV_T_END])
        if exit_code == _k.EXIT_STOP_CONJ:
            kind = "conjugate"
        elif exit_code == _k.EXIT_STOP_CUT:
            kind = "opposite_meridian"
        elif include_beyond:
            kind = "chart_edge" if exit_code == _k.EXIT_RMAX else "beyond"
            t_cut = math.inf
        else:
            continue
        out.append(CutSample(psi=float(psis[i]), t_cut=t_cut,
                             kind=kind, r=float(events[i, _k.EV_R_END]),
                             theta=float(events[i, _k.EV_TH_END]),
                             j_at_cut=float(events[i, _k.EV_J_END])))
    return out


def cut_time(profile: Profile, point: Point, psi: float, *,
             horizon: float = 20.0, verify: str | bool = "auto",
             fan: DistanceFan | None = None):
    """Cut time along one direction: first conjugate point or opposite-
    meridian crossing, whichever comes first; Beyond if neither occurs.

    verify=True (or "auto" for single calls like this one) confirms that
    the geodesic is still minimizing just before the candidate time via an
    independent distance solve.
    """
    path = shoot_geodesic(profile, point.r, point.theta, psi, horizon,
                          sample_ds=0.0, stop="cut")
    exit_code = path.events[_k.EV_EXIT]
    if exit_code == _k.EXIT_STOP_CONJ:
        kind = "conjugate"
    elif exit_code == _k.EXIT_STOP_CUT:
        kind = "opposite_meridian"
    else:
        return Beyond(horizon), None
    t_c = float(path.events[_k.EV_T_END])
    sample = CutSample(psi=float(psi), t_cut=t_c, kind=kind,
                       r=float(path.events[_k.EV_R_END]),
                       theta=float(path.events[_k.EV_TH_END]),
                       j_at_cut=float(path.events[_k.EV_J_END]))
    do_verify = verify is True or verify == "auto"
    if do_verify:
        delta = min(0.05, 0.1 * t_c)
        probe = _endpoint(profile, point.r, point.theta, psi, t_c - delta)
        q = Point(float(probe[_k.EV_R_END]), float(probe[_k.EV_TH_END]))
        res = distance(profile, point, q, fan=fan, horizon=horizon)
        if res.legs and abs(res.value - (t_c - delta)) > 1e-5 * (1.0 + t_c):
            # a shorter connection exists before the candidate: the real cut
            # is earlier than both event candidates (not expected for the
            # supported profile families; surface it loudly)
            raise RuntimeError(
                f"cut candidate at t={t_c} not minimal at t-delta: "
                f"d={res.value} vs {t_c - delta}")
    return t_c, sample


def injectivity_radius(profile: Profile, point: Point, *,
                       conjugate_value=None, loop_value=None,
                       fan: DistanceFan | None = None, n_dirs: int = 256,
                       horizon: float = 20.0):
    """Injectivity radius: min(conjugate radius, half shortest loop).

    Also returns an independent cross-check: the infimum of per-direction
    cut times over a fan (the distance from the point to its cut locus).
    Returns (value, route, crosscheck, flags).
    """
    from .radii import conjugate_radius
    flags: list[str] = []
    if conjugate_value is None:
        conjugate_value = conjugate_radius(profile, point, n_dirs=n_dirs,
                                           horizon=horizon).value
    if loop_value is None:
        loop_value = shortest_loop(profile, point, fan=fan,
                                   horizon=horizon).value
    half_loop = Beyond(horizon) if is_beyond(loop_value) else 0.5 * loop_value
    if as_inf(half_loop) <= as_inf(conjugate_value):
        value, route = half_loop, "half_loop"
    else:
        value, route = conjugate_value, "conjugate"
    if is_beyond(value):
        value, route = Beyond(horizon), "none"

    # cross-check: inf of cut-time candidates over directions
    psis, events = _cut_fan(profile, point, n_dirs=n_dirs, horizon=horizon)
    stopped = np.isin(events[:, _k.EV_EXIT], (_k.EXIT_STOP_CONJ, _k.EXIT_STOP_CUT))
    # Drop ill-conditioned opposite-meridian candidates: the crossing time
    # resolves only to (theta error)/|theta_dot at arrival|, and a slow
    # approach to the opposite meridian fires the event early.  Dropping a
    # direction is safe for the infimum because cut time is continuous in
    # the launch direction and the fan is dense.
    is_dthpi = events[:, _k.EV_EXIT] == _k.EXIT_STOP_CUT
    thd = np.abs(events[:, _k.EV_THDOT_END])
    t_end = events[:, _k.EV_T_END]
    t_res = 1e-9 * (1.0 + np.abs(t_end)) / np.maximum(thd, 1e-300)
    stopped &= ~(is_dthpi & (t_res > 2e-5))
    crosscheck = None
    if np.any(stopped):
        times = np.where(stopped, events[:, _k.EV_T_END], np.inf)
        i = int(np.argmin(times))
        t_best, psi_best = float(times[i]), float(psis[i])
        lo = float(psis[i - 1]) if i > 0 else psi_best
        hi = float(psis[i + 1]) if i + 1 < len(psis) else psi_best
        if hi > lo:
            from .radii import _golden_refine

            def f(psi):
                t, _ = cut_time(profile, point, psi, horizon=horizon,
                                verify=False)
                return as_inf(t)

            _, fx = _golden_refine(f, lo, hi, t_best)
            t_best = min(t_best, fx)
        crosscheck = t_best
    else:
        flags.append("no_cut_candidates")
    if crosscheck is not None and not is_beyond(value):
        if abs(crosscheck - value) > 1e-3 * (1.0 + value):
            flags.append("inj_crosscheck_mismatch")
    return value, route, crosscheck, flags


# ---------------------------------------------------------------------------
# Cut-decay radius
# ---------------------------------------------------------------------------


def _cut_points_of(profile: Profile, x_r: float, x_th: float, *,
                   n_dirs: int, horizon: float):
    """Candidate cut points of the point (x_r, x_th), both mirror sides."""
    psis, events = _cut_fan(profile, Point(x_r, x_th), n_dirs=n_dirs,
                            horizon=horizon, probes=True)
    stopped = np.isin(events[:, _k.EV_EXIT], (_k.EXIT_STOP_CONJ, _k.EXIT_STOP_CUT))
    if not np.any(stopped):
        return np.empty(0), np.empty(0)
    r_y = events[stopped, _k.EV_R_END]
    th_y = events[stopped, _k.EV_TH_END]
    # reflection across x's meridian is an isometry fixing x, so the cut
    # locus is mirror symmetric; the fan only covered one side
    r_all = np.concatenate([r_y, r_y])
    th_all = np.concatenate([th_y, 2.0 * x_th - th_y])
    # cluster near-duplicates (many directions often stop at the same cut
    # point) to keep downstream distance queries cheap
    key = np.round(np.stack([r_all, np.cos(th_all), np.sin(th_all)]) / 2e-3)
    _, keep = np.unique(key, axis=1, return_index=True)
    return r_all[keep], th_all[keep]


def _x_at(profile: Profile, point: Point, psi_b: float, t: float):
    """Position of the ball grid point at arc t along bearing psi_b."""
    if t <= 0.0:
        return point.r, point.theta
    ev = _endpoint(profile, point.r, point.theta, psi_b, t)
    # the integrator may overshoot the chart edge by an ulp
    r_end = min(max(float(ev[_k.EV_R_END]), 0.0), profile.r_max)
    return r_end, float(ev[_k.EV_TH_END])


def _m_exact(profile: Profile, point: Point, fan: DistanceFan, x_r: float,
             x_th: float, *, cutfan_dirs: int = 48, horizon: float = 20.0,
             n_candidates: int = 3, giters: int = 14):
    """d(base, Cut(x)) with Newton-polished distances and a direction
    refinement around the best discrete cut candidates of x."""
    x = Point(x_r, x_th)
    psis, events = _cut_fan(profile, x, n_dirs=cutfan_dirs, horizon=horizon)
    stopped = np.isin(events[:, _k.EV_EXIT],
                      (_k.EXIT_STOP_CONJ, _k.EXIT_STOP_CUT))
    if not np.any(stopped):
        return math.inf
    idx = np.nonzero(stopped)[0]
    best = math.inf
    # rank candidates by the fast field estimate, mirror sides included
    ranked = []
    for i in idx:
        r_y, th_y = events[i, _k.EV_R_END], events[i, _k.EV_TH_END]
        for side in (1.0, -1.0):
            ty = x_th + side * (th_y - x_th)
            ranked.append((fan.field_distance(r_y, ty), float(psis[i]), side))
    ranked.sort()
    seen = set()
    for _, psi_c, side in ranked:
        if len(seen) >= n_candidates:
            break
        key = (round(psi_c, 2), side)
        if key in seen:
            continue
        seen.add(key)
        warm = {"leg": None}

        def d_of_psi(psi):
            t_c, smp = cut_time(profile, x, psi, horizon=horizon, verify=False)
            if smp is None:
                return math.inf
            ty = x_th + side * (smp.theta - x_th)
            dth_q = abs(float(_wrap(ty - point.theta)))
            # warm start: the minimal connection moves continuously within
            # the golden bracket, so polish from the previous solution
            if warm["leg"] is not None:
                prev = warm["leg"]
                leg = _newton_leg(profile, point.r, point.theta, smp.r,
                                  dth_q, prev.psi, prev.length, horizon)
                if leg is not None:
                    warm["leg"] = leg
                    return leg.length
            res = distance(profile, point, Point(smp.r, ty), fan=fan,
                           horizon=horizon)
            if res.legs:
                warm["leg"] = res.legs[0]
                return res.value
            return math.inf

        d0 = d_of_psi(psi_c)
        j = int(np.searchsorted(psis, psi_c))
        lo = float(psis[max(j - 1, 0)])
        hi = float(psis[min(j + 1, len(psis) - 1)])
        from .radii import _golden_refine
        if hi > lo:
            _, dmin = _golden_refine(d_of_psi, lo, hi, d0, iters=giters)
        else:
            dmin = d0
        best = min(best, dmin)
    return best


def cut_decay_radius(profile: Profile, point: Point, *,
                     fan: DistanceFan | None = None, inj_value=None,
                     horizon: float = 20.0, n_bearings: int = 7,
                     n_levels: int = 40, cutfan_dirs: int = 48,
                     refine: bool = True):
    """Largest s such that every x in the closed ball of radius s has its
    cut locus at distance >= s from the base point.

    m(x) = d(base, Cut(x)) is sampled on a geodesic polar grid over the
    ball (it genuinely depends on both polar coordinates of x), with the
    approximate fan field supplying d(base, .). The grid solve is then
    polished by exact Newton distances at the binding configuration. The
    supremum never exceeds m(base) = injectivity radius, which bounds the
    grid.
    """
    flags: list[str] = []
    if fan is None:
        fan = DistanceFan.build(profile, point, horizon=horizon)
    if inj_value is None:
        inj_value, _, _, _ = injectivity_radius(profile, point, fan=fan,
                                                horizon=horizon)
    s_max = min(as_inf(inj_value), horizon)

    # quick probe: if no point of the ball shows any cut candidate, the
    # condition holds vacuously out to the horizon
    probe_rs = np.clip(np.linspace(max(0.0, point.r - s_max),
                                   min(profile.r_max, point.r + s_max), 5),
                       0.0, profile.r_max - 1e-9)
    any_cut = False
    for r_x in probe_rs:
        ry, _ = _cut_points_of(profile, float(r_x), point.theta,
                               n_dirs=16, horizon=horizon)
        if len(ry):
            any_cut = True
            break
    if not any_cut:
        return Beyond(horizon), ["no_cut_in_ball"]

    bearings = np.linspace(0.0, math.pi, n_bearings)
    ds_lvl = s_max / n_levels
    ts = np.linspace(ds_lvl, s_max, n_levels)
    m_grid = np.full((n_bearings, n_levels), np.inf)
    n_nocut = 0
    for b, psi_b in enumerate(bearings):
        # integrate a hair past s_max so roundoff cannot drop the last sample
        evs, smps, cnts = fan_events(profile, point.r, point.theta,
                                     np.array([psi_b]), s_max + 0.25 * ds_lvl,
                                     stop="none", sample_ds=ds_lvl)
        cnt = int(cnts[0])
        for k in range(n_levels):
            # sample index k+1 sits at arc length (k+1)*ds_lvl
            if k + 1 >= cnt:
                break
            x_r = float(smps[0, k + 1, _k.SMP_R])
            x_th = float(smps[0, k + 1, _k.SMP_TH])
            ry, thy = _cut_points_of(profile, x_r, x_th,
                                     n_dirs=cutfan_dirs, horizon=horizon)
            if len(ry) == 0:
                n_nocut += 1
                continue
            d = fan.field_distance(ry, thy)
            m_grid[b, k] = float(np.min(d))

    m0 = as_inf(inj_value)  # m(base) = distance from base to its own cut locus
    if not np.any(np.isfinite(m_grid)):
        return Beyond(horizon), ["no_cut_in_ball"]
    if n_nocut:
        flags.append("m_grid_horizon_limited")

    t_knots = np.concatenate(([0.0], ts))
    s_fine = np.linspace(0.0, s_max, 4001)

    def solve(curves: dict):
        """curves: bearing index -> (knots, values); returns (s*, i_bad, g)."""
        g = np.full_like(s_fine, m0)
        for b in range(n_bearings):
            kn, vals = curves[b]
            finite = np.isfinite(vals)
            if finite.sum() < 2:
                continue
            interp = np.interp(s_fine, kn[finite], vals[finite])
            # m at any x with d(base, x) <= s bounds g(s): running minimum
            g = np.minimum(g, np.minimum.accumulate(interp))
        ok = g >= s_fine - 1e-12
        if ok.all():
            return None, None, g
        i_bad = int(np.argmin(ok))
        if i_bad == 0:
            return 0.0, 0, g
        s0, s1 = s_fine[i_bad - 1], s_fine[i_bad]
        h0, h1 = g[i_bad - 1] - s0, g[i_bad] - s1
        s_star = s0 if h0 <= h1 else s0 + (s1 - s0) * h0 / (h0 - h1)
        return float(s_star), i_bad, g

    curves = {b: (t_knots, np.concatenate(([m0], m_grid[b])))
              for b in range(n_bearings)}
    s_star, i_bad, g = solve(curves)
    if s_star is None:
        # condition holds out to the grid edge s_max
        if is_beyond(inj_value):
            return Beyond(horizon), flags
        return float(s_max), flags + ["saturated_at_injectivity"]
    if s_star == 0.0:
        return 0.0, flags + ["fails_at_origin"]

    if refine:
        # every bearing whose coarse minimum sits within a field-error band
        # of the crossing value gets its binding stretch re-evaluated with
        # exact Newton distances (ties are common under symmetry)
        band = 4e-3 * (1.0 + s_star)
        mins = {}
        for b in range(n_bearings):
            kn, vals = curves[b]
            finite = np.isfinite(vals)
            if finite.sum() < 2:
                continue
            interp = np.interp(s_fine[: i_bad + 1], kn[finite], vals[finite])
            j = int(np.argmin(interp))
            mins[b] = (float(interp[j]), float(s_fine[j]))
        g_cross = float(g[i_bad - 1]) if i_bad > 0 else float(g[0])
        to_refine = sorted((b for b, (v, _) in mins.items()
                            if v <= g_cross + band),
                           key=lambda b: mins[b][0])
        changed = False
        for rank, b in enumerate(to_refine):
            t_bind = mins[b][1]
            offs = (np.array([-1.0, -0.5, 0.0, 0.5, 1.0]) if rank == 0
                    else np.array([-1.0, 0.0, 1.0]))
            nc = 3 if rank == 0 else 2
            ts_ref = np.unique(np.clip(t_bind + ds_lvl * offs, 0.0, s_max))
            vals_ref = np.empty(len(ts_ref))
            for i, t_x in enumerate(ts_ref):
                x_r, x_th = _x_at(profile, point, float(bearings[b]), float(t_x))
                vals_ref[i] = _m_exact(profile, point, fan, x_r, x_th,
                                       cutfan_dirs=cutfan_dirs,
                                       horizon=horizon, n_candidates=nc)
            if not np.any(np.isfinite(vals_ref)):
                continue
            kn, vals = curves[b]
            keep = (kn < ts_ref[0] - 1e-12) | (kn > ts_ref[-1] + 1e-12)
            kn_new = np.concatenate([kn[keep], ts_ref])
            vals_new = np.concatenate([vals[keep], vals_ref])
            order = np.argsort(kn_new)
            curves[b] = (kn_new[order], vals_new[order])
            changed = True
        if changed:
            s_ref, _, _ = solve(curves)
            if s_ref is None:
                s_star = float(s_max)
                flags.append("saturated_at_injectivity")
            elif s_ref > 0.0:
                s_star = s_ref
            flags.append("refined")

        # The bearing grid can still miss the binding direction by up to
        # half its spacing, and m genuinely varies with bearing away from
        # constant curvature.  Slide the bearing continuously around every
        # near-binding grid bearing and, if a lower dip appears between
        # grid bearings, re-solve the crossing along that bearing.
        s_cur = float(s_star)
        from .radii import _golden_refine as _golden

        def m_at(alpha: float, t_eval: float) -> float:
            x_r, x_th = _x_at(profile, point, float(alpha), float(t_eval))
            return _m_exact(profile, point, fan, x_r, x_th,
                            cutfan_dirs=cutfan_dirs, horizon=horizon)

        def alpha_min(lo_a: float, hi_a: float, t_eval: float):
            """Minimize bearing -> m over [lo_a, hi_a] at fixed arc t_eval."""
            probes = np.linspace(lo_a, hi_a, 5)
            vals = [m_at(a, t_eval) for a in probes]
            k0 = int(np.argmin(vals))
            if not math.isfinite(vals[k0]):
                return float(probes[k0]), math.inf
            if max(vals) - min(vals) < 1e-7:
                # bearing-independent here (constant-curvature balls)
                return float(probes[k0]), float(vals[k0])
            lo2 = float(probes[max(k0 - 1, 0)])
            hi2 = float(probes[min(k0 + 1, 4)])
            a_b, f_b = _golden(lambda a: m_at(a, t_eval), lo2, hi2,
                               vals[k0], iters=12)
            if a_b is not None and f_b < vals[k0]:
                return float(a_b), float(f_b)
            return float(probes[k0]), float(vals[k0])

        qb = {}
        for b in range(n_bearings):
            kn, vals = curves[b]
            finite = np.isfinite(vals)
            if finite.sum() < 2:
                continue
            sj = s_fine[s_fine <= s_cur + 1e-12]
            interp = np.interp(sj, kn[finite], vals[finite])
            j = int(np.argmin(interp))
            qb[b] = (float(interp[j]), float(sj[j]))
        if qb:
            q0 = min(v for v, _ in qb.values())
            close = sorted((b for b, (v, _) in qb.items()
                            if v <= q0 + 0.06 * (1.0 + s_cur)),
                           key=lambda b: qb[b][0])[:4]
            best_m, best_a, best_t = math.inf, None, None
            for b in close:
                lo_a = float(bearings[max(b - 1, 0)])
                hi_a = float(bearings[min(b + 1, n_bearings - 1)])
                a_c, f_c = alpha_min(lo_a, hi_a, qb[b][1])
                if f_c < best_m:
                    best_m, best_a, best_t = f_c, a_c, qb[b][1]
            if best_a is not None and best_m < q0 - 1e-6:
                spacing = float(s_fine[1] - s_fine[0])
                interior = best_t < s_cur - (1e-3 + 2.0 * spacing)
                s1 = math.inf
                if interior:
                    # interior dip: the ball minimum is locally flat in s,
                    # so the crossing lands on the dip value itself
                    t_lo = max(best_t - ds_lvl, 1e-6)
                    t_hi = min(best_t + ds_lvl, s_cur)
                    _, q_t = _golden(lambda tq: m_at(best_a, tq),
                                     t_lo, t_hi, best_m, iters=10)
                    s1 = min(best_m, float(q_t))
                    if best_t > s1 + 1e-3:
                        # the dip sits outside its own ball, so it cannot
                        # be what binds: fall through to the boundary solve
                        interior = False
                if not interior:
                    # the binding point rides the ball boundary: Newton on
                    # m(s) - s = 0 along the optimal bearing, with the
                    # slope measured by central difference
                    h = 0.01
                    t_hi, t_lo = best_t + h, max(best_t - h, 1e-6)
                    kappa = (m_at(best_a, t_hi) - m_at(best_a, t_lo)) \
                        / (t_hi - t_lo)
                    denom = 1.0 - min(kappa, 0.5)
                    s1 = best_t + (best_m - best_t) / denom
                    for _ in range(3):
                        s1 = min(max(s1, 1e-6), s_cur)
                        q1 = m_at(best_a, s1)
                        if not math.isfinite(q1) or abs(q1 - s1) < 2e-6:
                            break
                        s1 += (q1 - s1) / denom
                if math.isfinite(s1) and 0.0 < s1 < s_cur:
                    s_star = float(s1)
                    if "saturated_at_injectivity" in flags:
                        flags.remove("saturated_at_injectivity")
                    flags.append("bearing_continuum")
    return float(s_star), flags


# ---------------------------------------------------------------------------
# Totally conjugate cut points
# ---------------------------------------------------------------------------


def totally_conjugate_radius(profile: Profile, point: Point, *,
                             fan: DistanceFan | None = None,
                             n_dirs: int = 256, horizon: float = 20.0,
                             j_tol: float = 1e-5, max_points: int = 8):
    """Distance to the nearest cut point that is conjugate along *every*
    minimal geodesic reaching it (best effort).

    Cut samples with a small arrival Jacobi field nominate candidate
    points.  A geodesic reaching a cut point of the base point minimally
    has that point as its own cut point, so the fan samples landing at the
    candidate enumerate the minimal connections; the candidate qualifies
    when every one of them arrives with a vanishing Jacobi field.  Newton
    distance solves are useless exactly at conjugate targets (the arrival
    map is singular there), which is why the enumeration works off the fan
    alone; ``fan`` is accepted for call-site convenience but unused.
    """
    samples = cut_locus_samples(profile, point, n_dirs=n_dirs, horizon=horizon)
    finite = [s for s in samples if math.isfinite(s.t_cut)]
    near = [s for s in finite if abs(s.j_at_cut) < j_tol]
    if not near:
        return Beyond(horizon), []
    near.sort(key=lambda s: s.t_cut)
    clusters: list[CutSample] = []
    for s in near:
        if any(abs(s.r - c.r) < 1e-4 and abs(float(_wrap(s.theta - c.theta))) < 1e-4
               for c in clusters):
            continue
        clusters.append(s)
        if len(clusters) >= max_points:
            break
    flagged = []
    for c in clusters:
        members = [s for s in finite
                   if s.t_cut <= c.t_cut + 1e-6
                   and abs(s.r - c.r) < 1e-4
                   and abs(float(_wrap(s.theta - c.theta))) < 1e-4]
        if members and all(abs(s.j_at_cut) < j_tol for s in members):
            flagged.append((c.t_cut, c))
    if not flagged:
        return Beyond(horizon), []
    flagged.sort(key=lambda x: x[0])
    return flagged[0][0], [c for _, c in flagged]


# ---------------------------------------------------------------------------
# Orchestrator used by radius reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CutAnalysis:
    loop_length: object
    injectivity: object
    injectivity_route: str
    injectivity_crosscheck: float | None
    cut_decay: object
    totally_conjugate: object
    flags: tuple


def cut_analysis(profile: Profile, point: Point, *, horizon: float = 20.0,
                 n_dirs: int = 256, conjugate: RadiusEstimate | None = None,
                 with_totally_conjugate: bool = False) -> CutAnalysis:
    """All cut-locus quantities of one base point."""
    from .radii import conjugate_radius
    if conjugate is None:
        conjugate = conjugate_radius(profile, point, n_dirs=n_dirs,
                                     horizon=horizon)
    fan = DistanceFan.build(profile, point, horizon=horizon)
    loop = shortest_loop(profile, point, fan=fan, horizon=horizon)
    inj, route, crosscheck, flags = injectivity_radius(
        profile, point, conjugate_value=conjugate.value, loop_value=loop.value,
        fan=fan, n_dirs=n_dirs, horizon=horizon)
    rc, rc_flags = cut_decay_radius(profile, point, fan=fan, inj_value=inj,
                                    horizon=horizon)
    flags = list(flags) + list(rc_flags)
    if with_totally_conjugate:
        conjt, _ = totally_conjugate_radius(profile, point, fan=fan,
                                            n_dirs=n_dirs, horizon=horizon)
    else:
        conjt = Beyond(horizon)
        flags.append("totally_conjugate_skipped")
    return CutAnalysis(loop_length=loop.value, injectivity=inj,
                       injectivity_route=route,
                       injectivity_crosscheck=crosscheck, cut_decay=rc,
                       totally_conjugate=conjt, flags=tuple(flags))
