"""Compiled kernels: warp evaluation and geodesic/Jacobi integration.

The integrator is a Dormand–Prince 5(4) embedded Runge–Kutta pair with the
standard fourth-order continuous extension (Hairer, Nørsett & Wanner,
*Solving Ordinary Differential Equations I*), PI-free step control, and
event localization by bisection on the dense output.

State layout (8 components):

* polar mode:  ``(r, theta, r_dot, theta_dot, J, J', J2, J2')``
* chart mode:  ``(u, v, u_dot, v_dot, J, J', J2, J2')``

where ``J`` solves the scalar Jacobi equation ``J'' + K(r(t)) J = 0`` with
``J(0) = 0, J'(0) = 1`` along the unit-speed geodesic, and ``J2`` is the
complementary solution with ``J2(0) = 1, J2'(0) = 0`` (so the Wronskian
``J J2' - J' J2`` stays at ``-1``).

Near a smooth pole the polar geodesic equations are singular, so the
integrator switches to a Cartesian chart ``u = r cos(theta), v = r sin(theta)``
below ``CHART_IN`` and back above ``CHART_OUT``; the chart equations use the
exact warp (no series truncation) in a cancellation-safe arrangement.

Everything here is plain array code: profiles are passed as the arrays from
``Profile.pack`` and results land in caller-allocated buffers, which keeps
the functions compilable by numba and trivially testable in pure Python
(set ``GEORADII_NO_NUMBA=1``).
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import maybe_njit, prange

# --- branch kinds -----------------------------------------------------------

BR_SIN = 0          # phi = sin r
BR_LINEAR = 1       # phi = slope * r                params: (slope,)
BR_SINH = 2         # phi = sinh(r - shift)          params: (shift,)
BR_GLUE = 3         # Hermite table + analytic K     params: (m, a, s1, s2)
BR_CONECAP = 4      # smooth cone cap                params: (b, r_cap)
BR_PARABOLOID = 5   # arclength paraboloid meridian

# --- event slots -------------------------------------------------------------

EV_T_END = 0        # time integration actually ended
EV_EXIT = 1         # exit code, see EXIT_*
EV_T_CONJ = 2       # first zero of J (nan if none seen)
EV_CONJ_EXTRAP = 3  # 1.0 if EV_T_CONJ was linearly extrapolated at truncation
EV_T_FOC = 4        # first zero of J'
EV_FOC_KIND = 5     # +1 transversal crossing, -1 degenerate touch
EV_FOC_J2ND = 6     # J'' = -K J at the focal root
EV_T_FOCE = 7       # first time J' becomes genuinely negative
EV_T_DTHPI = 8      # first time |theta - theta0| reaches pi
EV_J_AT_DTHPI = 9   # J at that event
EV_R_END = 10
EV_TH_END = 11
EV_RDOT_END = 12
EV_THDOT_END = 13
EV_J_END = 14
EV_JP_END = 15
EV_J2_END = 16
EV_J2P_END = 17
EV_DRIFT_UNIT = 18  # max |speed^2 - 1| at accepted steps
EV_DRIFT_CLAIR = 19 # max |phi^2 theta_dot - c0| at accepted steps
EV_NSTEPS = 20
EV_R_MIN = 21       # minimum r seen along the path
EV_MIN_JP = 22      # minimum of J' over dense scan nodes
EV_T_MIN_JP = 23    # time of that minimum
EV_MAX_ABS_J = 24
EV_NREJECT = 25
EV_N = 26

# --- exit codes --------------------------------------------------------------

EXIT_TMAX = 0       # ran to requested t_max
EXIT_RMAX = 1       # left the radial domain at r_max
EXIT_POLE = 2       # hit the pole of a profile without a smooth pole
EXIT_SAMPLES = 3    # sample buffer overflow
EXIT_STALL = 4      # step size underflow / step budget exhausted
EXIT_STOP_CONJ = 5  # truncated at first conjugate event (stop_mode >= 1)
EXIT_STOP_CUT = 6   # truncated at first cut candidate (stop_mode == 2)

# --- stop modes --------------------------------------------------------------

STOP_NONE = 0
STOP_CONJ = 1       # stop at the first zero of J
STOP_CUT = 2        # stop at min(first zero of J, first |dtheta| = pi)

# --- sample columns ----------------------------------------------------------

SMP_T = 0
SMP_R = 1
SMP_TH = 2
SMP_RDOT = 3
SMP_THDOT = 4
SMP_J = 5
SMP_JP = 6
SMP_CHART = 7
SMP_N = 8

# --- tuning constants ---------------------------------------------------------

CHART_IN = 0.05     # polar -> chart below this radius (smooth poles only)
CHART_OUT = 0.06    # chart -> polar above this radius
H_MAX_POLAR = 0.05
H_MAX_CHART = 0.01
EPS_NEG = 1e-9      # |J'| excursions shallower than this do not count as negativity
_MAX_STEPS = 400000

# Dormand–Prince 5(4) coefficients.
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_A71, _A73, _A74, _A75, _A76 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                                -2187.0 / 6784.0, 11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)
_D1 = -12715105075.0 / 11282082432.0
_D3 = 87487479700.0 / 32700410799.0
_D4 = -10690763975.0 / 1880347072.0
_D5 = 701980252875.0 / 199316789632.0
_D6 = -1453857185.0 / 822651844.0
_D7 = 69997945.0 / 29380423.0


# ---------------------------------------------------------------------------
# Warp evaluation
# ---------------------------------------------------------------------------


@maybe_njit
def _glue_K(r, m, a, s1, s2):
    x2 = (r - m) / s2
    sech = 1.0 / math.cosh(x2)
    return -math.tanh((r - m) / s1) - a * sech * sech


@maybe_njit
def _eval_phi(breaks, kinds, params, tab_meta, tab_phi, tab_dphi, r):
    """Evaluate (phi, phi', phi'') at radius r (branches extend at the ends)."""
    nb = kinds.shape[0]
    i = 0
    while i < nb - 1 and r >= breaks[i + 1]:
        i += 1
    kind = kinds[i]
    if kind == BR_SIN:
        return math.sin(r), math.cos(r), -math.sin(r)
    elif kind == BR_LINEAR:
        a = params[i, 0]
        return a * r, a, 0.0
    elif kind == BR_SINH:
        x = r - params[i, 0]
        return math.sinh(x), math.cosh(x), math.sinh(x)
    elif kind == BR_GLUE:
        m, amp, s1, s2 = params[i, 0], params[i, 1], params[i, 2], params[i, 3]
        t0, dt = tab_meta[0], tab_meta[1]
        n = int(tab_meta[2])
        j = int((r - t0) / dt)
        if j < 0:
            j = 0
        elif j > n - 2:
            j = n - 2
        rl = t0 + j * dt
        tau = (r - rl) / dt
        p0, p1 = tab_phi[j], tab_phi[j + 1]
        d0, d1 = tab_dphi[j] * dt, tab_dphi[j + 1] * dt
        s0 = -_glue_K(rl, m, amp, s1, s2) * p0 * dt * dt
        s1b = -_glue_K(rl + dt, m, amp, s1, s2) * p1 * dt * dt
        t2 = tau * tau
        t3 = t2 * tau
        t4 = t3 * tau
        t5 = t4 * tau
        h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5
        h1 = tau - 6.0 * t3 + 8.0 * t4 - 3.0 * t5
        h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5)
        h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5
        h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5
        h5 = 0.5 * (t3 - 2.0 * t4 + t5)
        phi = p0 * h0 + d0 * h1 + s0 * h2 + p1 * h3 + d1 * h4 + s1b * h5
        g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4
        g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4
        g2 = 0.5 * (2.0 * tau - 9.0 * t2 + 12.0 * t3 - 5.0 * t4)
        g3 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4
        g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4
        g5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4)
        dphi = (p0 * g0 + d0 * g1 + s0 * g2 + p1 * g3 + d1 * g4 + s1b * g5) / dt
        d2 = -_glue_K(r, m, amp, s1, s2) * phi
        return phi, dphi, d2
    elif kind == BR_CONECAP:
        b, rc = params[i, 0], params[i, 1]
        u = r / rc
        pu = math.pi * u
        sp, cp = math.sin(pu), math.cos(pu)
        s2p = 2.0 * sp * cp
        s = 0.5 * (1.0 - cp) + sp * sp
        S = u - sp / (2.0 * math.pi) - s2p / (4.0 * math.pi)
        phi = r + (b - 1.0) * rc * S
        dphi = 1.0 + (b - 1.0) * s
        d2 = ((b - 1.0) / rc) * (0.5 * math.pi * sp + math.pi * s2p)
        return phi, dphi, d2
    else:  # BR_PARABOLOID
        rho = r if -1.0 < r < 1.0 else math.copysign(math.sqrt(2.0 * abs(r)), r)
        root = math.sqrt(1.0 + rho * rho)
        for _ in range(60):
            g = 0.5 * (rho * root + math.asinh(rho)) - r
            step = g / root
            rho -= step
            root = math.sqrt(1.0 + rho * rho)
            if abs(step) <= 1e-16 * (1.0 + abs(rho)):
                break
        q = 1.0 + rho * rho
        return rho, 1.0 / root, -rho / (q * q)


@maybe_njit
def eval_profile_arrays(breaks, kinds, params, tab_meta, tab_phi, tab_dphi, rs, out):
    """Batched warp evaluation: out[0] = phi, out[1] = phi', out[2] = phi''."""
    for i in range(rs.shape[0]):
        p, d, d2 = _eval_phi(breaks, kinds, params, tab_meta, tab_phi, tab_dphi, rs[i])
        out[0, i] = p
        out[1, i] = d
        out[2, i] = d2


@maybe_njit
def _curv(breaks, kinds, params, tab_meta, tab_phi, tab_dphi, r):
    rr = r if abs(r) > 1e-7 else 1e-7
    phi, _, d2 = _eval_phi(breaks, kinds, params, tab_meta, tab_phi, tab_dphi, rr)
    if abs(phi) < 1e-300:
        return 0.0
    return -d2 / phi


# ---------------------------------------------------------------------------
# Equations of motion
# ---------------------------------------------------------------------------


@maybe_njit
def _rhs(mode, breaks, kinds, params, tab_meta, tab_phi, tab_dphi, y, dy, want_j2):
    if mode == 0:
        r = y[0]
        phi, dphi, d2 = _eval_phi(breaks, kinds, params, tab_meta, tab_phi, tab_dphi, r)
        if abs(phi) < 1e-300:
            phi = 1e-300
        K = -d2 / phi
        vr = y[2]
        vth = y[3]
        dy[0] = vr
        dy[1] = vth
        dy[2] = phi * dphi * vth * vth
        dy[3] = -2.0 * (dphi / phi) * vr * vth
    else:
        u, v, du, dv = y[0], y[1], y[2], y[3]
        r2 = u * u + v * v
        r = math.sqrt(r2)
        if r2 < 1e-240:
            # passing numerically through the pole: locally straight
            dy[0] = du
            dy[1] = dv
            dy[2] = 0.0
            dy[3] = 0.0
            K = _curv(breaks, kinds, params, tab_meta, tab_phi, tab_dphi, 1e-7)
        else:
            phi, dphi, d2 = _eval_phi(breaks, kinds, params, tab_meta, tab_phi,
                                      tab_dphi, r)
            if abs(phi) < 1e-300:
                phi = 1e-300
            K = -d2 / phi
            S = u * du + v * dv
            T = u * dv - v * du
            r4 = r2 * r2
            c1 = T * T * (phi * dphi - r) / (r4 * r)
            c2 = 2.0 * S * T * (phi - r * dphi) / (r4 * phi)
            dy[0] = du
            dy[1] = dv
            dy[2] = c1 * u - c2 * v
            dy[3] = c1 * v + c2 * u
    dy[4] = y[5]
    dy[5] = -K * y[4]
    if want_j2 != 0:
        dy[6] = y[7]
        dy[7] = -K * y[6]
    else:
        dy[6] = 0.0
        dy[7] = 0.0


# ---------------------------------------------------------------------------
# Dense output helpers
# ---------------------------------------------------------------------------


@maybe_njit
def _dense1(rc, tau, idx):
    """Dense-output value of state component idx at fraction tau of the step."""
    return rc[0, idx] + tau * (rc[1, idx] + (1.0 - tau) * (
        rc[2, idx] + tau * (rc[3, idx] + (1.0 - tau) * rc[4, idx])))


@maybe_njit
def _dense_all(rc, tau, out):
    for i in range(8):
        out[i] = _dense1(rc, tau, i)


@maybe_njit
def _dense_radius(rc, tau, mode):
    if mode == 0:
        return _dense1(rc, tau, 0)
    u = _dense1(rc, tau, 0)
    v = _dense1(rc, tau, 1)
    return math.sqrt(u * u + v * v)


@maybe_njit
def _bisect_comp(rc, lo, hi, idx, target):
    """Root of dense component idx minus target on [lo, hi] (sign change assumed)."""
    flo = _dense1(rc, lo, idx) - target
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        fm = _dense1(rc, mid, idx) - target
        if (fm > 0.0) == (flo > 0.0):
            lo = mid
            flo = fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@maybe_njit
def _bisect_radius(rc, lo, hi, mode, target):
    flo = _dense_radius(rc, lo, mode) - target
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        fm = _dense_radius(rc, mid, mode) - target
        if (fm > 0.0) == (flo > 0.0):
            lo = mid
            flo = fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@maybe_njit
def _sweep(u0, v0, u1, v1):
    """Signed angle swept from (u0,v0) to (u1,v1), principal value in (-pi, pi]."""
    return math.atan2(u0 * v1 - v0 * u1, u0 * u1 + v0 * v1)


@maybe_njit
def _dense_absdth(rc, tau, mode, th_step0, th_ref):
    """|theta(tau) - th_ref| using continuous theta within the current step."""
    if mode == 0:
        return abs(_dense1(rc, tau, 1) - th_ref)
    u0 = rc[0, 0]
    v0 = rc[0, 1]
    u1 = _dense1(rc, tau, 0)
    v1 = _dense1(rc, tau, 1)
    return abs(th_step0 + _sweep(u0, v0, u1, v1) - th_ref)


@maybe_njit
def _bisect_dthpi(rc, lo, hi, mode, th_step0, th_ref):
    flo = _dense_absdth(rc, lo, mode, th_step0, th_ref) - math.pi
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        fm = _dense_absdth(rc, mid, mode, th_step0, th_ref) - math.pi
        if (fm > 0.0) == (flo > 0.0):
            lo = mid
            flo = fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Main integrator
# ---------------------------------------------------------------------------


@maybe_njit
def integrate_geodesic(breaks, kinds, params, tab_meta, tab_phi, tab_dphi,
                       smooth_pole, r_max, r0, th0, psi, t_max,
                       rtol, atol, want_j2, stop_mode, sample_ds,
                       out_events, out_samples):
    """Integrate one unit-speed geodesic with its Jacobi fields and events.

    The geodesic starts at (r0, th0) making angle psi with the outward radial
    direction (psi = 0 radial outward, psi = pi/2 tangent to the parallel).
    When r0 is at the pole itself, the launch direction is th0 + psi.
    Events and terminal data are written into out_events (length EV_N);
    path samples at spacing sample_ds (if > 0) go to out_samples. Returns
    the number of samples written.
    """
    for i in range(EV_N):
        out_events[i] = np.nan
    out_events[EV_DRIFT_UNIT] = 0.0
    out_events[EV_DRIFT_CLAIR] = 0.0
    out_events[EV_NSTEPS] = 0.0
    out_events[EV_NREJECT] = 0.0
    out_events[EV_MIN_JP] = 1.0
    out_events[EV_T_MIN_JP] = 0.0
    out_events[EV_MAX_ABS_J] = 0.0
    out_events[EV_CONJ_EXTRAP] = 0.0

    y = np.zeros(8)
    dy = np.zeros(8)
    ytmp = np.zeros(8)
    yend = np.zeros(8)
    ysmp = np.zeros(8)
    k = np.zeros((7, 8))
    rc = np.zeros((5, 8))

    # --- initial conditions ---------------------------------------------
    mode = 0
    th_cont = th0
    if r0 < 1e-12:
        if smooth_pole == 0:
            out_events[EV_EXIT] = EXIT_POLE
            out_events[EV_T_END] = 0.0
            return 0
        mode = 1
        alpha = th0 + psi
        th_cont = alpha
        y[2] = math.cos(alpha)
        y[3] = math.sin(alpha)
        c0 = 0.0
    else:
        phi0, _, _ = _eval_phi(breaks, kinds, params, tab_meta, tab_phi, tab_dphi, r0)
        vr = math.cos(psi)
        vth = math.sin(psi) / phi0
        c0 = phi0 * phi0 * vth
        if smooth_pole != 0 and r0 < CHART_IN:
            mode = 1
            ct, st = math.cos(th0), math.sin(th0)
            y[0] = r0 * ct
            y[1] = r0 * st
            y[2] = vr * ct - r0 * vth * st
            y[3] = vr * st + r0 * vth * ct
        else:
            y[0] = r0
            y[1] = th0
            y[2] = vr
            y[3] = vth
    y[4] = 0.0
    y[5] = 1.0
    if want_j2 != 0:
        y[6] = 1.0
        y[7] = 0.0
    th_ref = th_cont

    sgn_c = 0.0
    if c0 > 0.0:
        sgn_c = 1.0
    elif c0 < 0.0:
        sgn_c = -1.0

    # The opposite-meridian event only marks a cut candidate when the
    # mirror-image geodesic is a *different* geodesic. A (numerically)
    # meridional geodesic is its own mirror image, and its swept angle
    # jumps by pi at a pole transit, which would fire the event spuriously.
    # Near-meridional geodesics are disabled too: their swept angle creeps
    # toward pi with rate c/phi^2, so the crossing time resolves no better
    # than (theta error)/(c/phi^2), useless below |c| ~ 1e-4.
    track_dthpi = abs(c0) > 1e-4

    t = 0.0
    h = 1e-3
    n_s = 0
    max_s = out_samples.shape[0]
    next_s = 0.0
    if sample_ds > 0.0:
        # emit the initial sample
        if max_s > 0:
            if mode == 0:
                out_samples[0, SMP_T] = 0.0
                out_samples[0, SMP_R] = y[0]
                out_samples[0, SMP_TH] = th_cont
                out_samples[0, SMP_RDOT] = y[2]
                out_samples[0, SMP_THDOT] = y[3]
                out_samples[0, SMP_J] = y[4]
                out_samples[0, SMP_JP] = y[5]
                out_samples[0, SMP_CHART] = 0.0
            else:
                rr = math.sqrt(y[0] * y[0] + y[1] * y[1])
                out_samples[0, SMP_T] = 0.0
                out_samples[0, SMP_R] = rr
                out_samples[0, SMP_TH] = th_cont
                if rr > 1e-13:
                    out_samples[0, SMP_RDOT] = (y[0] * y[2] + y[1] * y[3]) / rr
                    out_samples[0, SMP_THDOT] = (y[0] * y[3] - y[1] * y[2]) / (rr * rr)
                else:
                    out_samples[0, SMP_RDOT] = 1.0
                    out_samples[0, SMP_THDOT] = 0.0
                out_samples[0, SMP_J] = y[4]
                out_samples[0, SMP_JP] = y[5]
                out_samples[0, SMP_CHART] = 1.0
            n_s = 1
        next_s = sample_ds

    r_min_seen = r0
    exit_code = -1
    nacc = 0
    nrej = 0
    have_k1 = False
    t_end_final = 0.0

    while t < t_max:
        if nacc + nrej > _MAX_STEPS:
            exit_code = EXIT_STALL
            for i in range(8):
                yend[i] = y[i]
            t_end_final = t
            break
        hm = H_MAX_CHART if mode == 1 else H_MAX_POLAR
        if h > hm:
            h = hm
        # keep RK stages away from the coordinate singularity in polar mode
        if mode == 0 and y[2] < 0.0:
            floor_r = 0.015 if smooth_pole != 0 else 5e-7
            margin = y[0] - floor_r
            if margin < -0.5 * floor_r:
                margin = 0.5 * floor_r
            hcap = margin / (-y[2])
            if hcap < 1e-8:
                hcap = 1e-8
            if h > hcap:
                h = hcap
        if t + h > t_max:
            h = t_max - t
        if h < 1e-13:
            exit_code = EXIT_STALL
            for i in range(8):
                yend[i] = y[i]
            t_end_final = t
            break

        # --- RK stages -----------------------------------------------
        if not have_k1:
            _rhs(mode, breaks, kinds, params, tab_meta, tab_phi, tab_dphi,
                 y, dy, want_j2)
            for i in range(8):
                k[0, i] = dy[i]
        for i in range(8):
            ytmp[i] = y[i] + h * _A21 * k[0, i]
        _rhs(mode, breaks, kinds, params, tab_meta, tab_phi, tab_dphi, ytmp, dy, want_j2)
        for i in range(8):
            k[1, i] = dy[i]
        for i in range(8):
            ytmp[i] = y[i] + h * (_A31 * k[0, i] + _A32 * k[1, i])
        _rhs(mode, breaks, kinds, params, tab_meta, tab_phi, tab_dphi, ytmp, dy, want_j2)
        for i in range(8):
            k[2, i] = dy[i]
        for i in range(8):
            ytmp[i] = y[i] + h * (_A41 * k[0, i] + _A42 * k[1, i] + _A43 * k[2, i])
        _rhs(mode, breaks, kinds, params, tab_meta, tab_phi, tab_dphi, ytmp, dy, want_j2)
        for i in range(8):
            k[3, i] = dy[i]
        for i in range(8):
            ytmp[i] = y[i] + h * (_A51 * k[0, i] + _A52 * k[1, i] + _A53 * k[2, i]
                                  + _A54 * k[3, i])
        _rhs(mode, breaks, kinds, params, tab_meta, tab_phi, tab_dphi, ytmp, dy, want_j2)
        for i in range(8):
            k[4, i] = dy[i]
        for i in range(8):
            ytmp[i] = y[i] + h * (_A61 * k[0, i] + _A62 * k[1, i] + _A63 * k[2, i]
                                  + _A64 * k[3, i] + _A65 * k[4, i])
        _rhs(mode, breaks, kinds, params, tab_meta, tab_phi, tab_dphi, ytmp, dy, want_j2)
        for i in range(8):
            k[5, i] = dy[i]
        for i in range(8):
            ytmp[i] = y[i] + h * (_A71 * k[0, i] + _A73 * k[2, i] + _A74 * k[3, i]
                                  + _A75 * k[4, i] + _A76 * k[5, i])
        _rhs(mode, breaks, kinds, params, tab_meta, tab_phi, tab_dphi, ytmp, dy, want_j2)
        for i in range(8):
            k[6, i] = dy[i]

        # --- error estimate -------------------------------------------
        errsum = 0.0
        for i in range(8):
            e = h * (_E1 * k[0, i] + _E3 * k[2, i] + _E4 * k[3, i]
                     + _E5 * k[4, i] + _E6 * k[5, i] + _E7 * k[6, i])
            sc = atol + rtol * max(abs(y[i]), abs(ytmp[i]))
            errsum += (e / sc) * (e / sc)
        errnorm = math.sqrt(errsum / 8.0)

        if errnorm > 1.0 and h > 1e-12:
            nrej += 1
            fac = 0.9 * errnorm ** -0.2
            if fac < 0.2:
                fac = 0.2
            h *= fac
            have_k1 = True  # k1 still valid at unchanged y
            continue

        # --- accepted --------------------------------------------------
        nacc += 1
        # dense output coefficients
        for i in range(8):
            ydiff = ytmp[i] - y[i]
            rc[0, i] = y[i]
            rc[1, i] = ydiff
            rc[2, i] = h * k[0, i] - ydiff
            rc[3, i] = ydiff - h * k[6, i] - rc[2, i]
            rc[4, i] = h * (_D1 * k[0, i] + _D3 * k[2, i] + _D4 * k[3, i]
                            + _D5 * k[4, i] + _D6 * k[5, i] + _D7 * k[6, i])

        tau_hi = 1.0
        pending = -1  # exit/stop code taking effect this step

        # 1. domain exit at r_max
        r_end_step = _dense_radius(rc, 1.0, mode)
        if r_end_step >= r_max:
            tau_x = _bisect_radius(rc, 0.0, 1.0, mode, r_max)
            if tau_x < tau_hi:
                tau_hi = tau_x
                pending = EXIT_RMAX
        # …or at the pole when it is not smooth
        if smooth_pole == 0:
            if _dense_radius(rc, tau_hi, mode) <= 1e-6 < _dense_radius(rc, 0.0, mode):
                tau_x = _bisect_radius(rc, 0.0, tau_hi, mode, 1e-6)
                if tau_x < tau_hi:
                    tau_hi = tau_x
                    pending = EXIT_POLE

        # 2. J' events: scan dense nodes over [0, tau_hi]
        jp_prev = _dense1(rc, 0.0, 5)
        tau_prev = 0.0
        for node in range(1, 9):
            tau_n = tau_hi * node / 8.0
            jp_n = _dense1(rc, tau_n, 5)
            if jp_n < out_events[EV_MIN_JP]:
                out_events[EV_MIN_JP] = jp_n
                out_events[EV_T_MIN_JP] = t + tau_n * h
            aj = abs(_dense1(rc, tau_n, 4))
            if aj > out_events[EV_MAX_ABS_J]:
                out_events[EV_MAX_ABS_J] = aj
            if jp_prev > 0.0 >= jp_n:
                tau_f = _bisect_comp(rc, tau_prev, tau_n, 5, 0.0)
                if math.isnan(out_events[EV_T_FOC]):
                    out_events[EV_T_FOC] = t + tau_f * h
                    rr = _dense_radius(rc, tau_f, mode)
                    Kf = _curv(breaks, kinds, params, tab_meta, tab_phi, tab_dphi, rr)
                    jv = _dense1(rc, tau_f, 4)
                    j2nd = -Kf * jv
                    out_events[EV_FOC_J2ND] = j2nd
                    scale = 1e-5 * (1.0 + abs(Kf * jv))
                    out_events[EV_FOC_KIND] = 1.0 if j2nd < -scale else -1.0
            if jp_n < -EPS_NEG and math.isnan(out_events[EV_T_FOCE]):
                # genuine negativity: its onset is the preceding zero of J'
                if jp_prev >= 0.0:
                    tau_f = _bisect_comp(rc, tau_prev, tau_n, 5, 0.0)
                    out_events[EV_T_FOCE] = t + tau_f * h
                elif not math.isnan(out_events[EV_T_FOC]):
                    out_events[EV_T_FOCE] = out_events[EV_T_FOC]
                else:
                    out_events[EV_T_FOCE] = t
            jp_prev = jp_n
            tau_prev = tau_n

        # 3. first zero of J
        if math.isnan(out_events[EV_T_CONJ]):
            j0 = _dense1(rc, 0.0, 4)
            j1 = _dense1(rc, tau_hi, 4)
            if t > 0.0 and j0 > 0.0 >= j1:
                tau_j = _bisect_comp(rc, 0.0, tau_hi, 4, 0.0)
                out_events[EV_T_CONJ] = t + tau_j * h
                if stop_mode >= STOP_CONJ and tau_j < tau_hi:
                    tau_hi = tau_j
                    pending = EXIT_STOP_CONJ

        # 4. first |theta - theta0| = pi
        if track_dthpi and math.isnan(out_events[EV_T_DTHPI]):
            d1v = _dense_absdth(rc, tau_hi, mode, th_cont, th_ref)
            if d1v >= math.pi:
                tau_d = _bisect_dthpi(rc, 0.0, tau_hi, mode, th_cont, th_ref)
                out_events[EV_T_DTHPI] = t + tau_d * h
                out_events[EV_J_AT_DTHPI] = _dense1(rc, tau_d, 4)
                if stop_mode == STOP_CUT and tau_d < tau_hi:
                    tau_hi = tau_d
                    pending = EXIT_STOP_CUT

        # --- samples over [0, tau_hi] ----------------------------------
        t_new = t + tau_hi * h
        if sample_ds > 0.0:
            while next_s <= t_new + 1e-15:
                if n_s >= max_s:
                    if pending < 0:
                        pending = EXIT_SAMPLES
                        tau_hi = (next_s - t) / h if next_s > t else 0.0
                        if tau_hi > 1.0:
                            tau_hi = 1.0
                        t_new = t + tau_hi * h
                    break
                tau_s = (next_s - t) / h
                if tau_s < 0.0:
                    tau_s = 0.0
                _dense_all(rc, tau_s, ysmp)
                out_samples[n_s, SMP_T] = next_s
                if mode == 0:
                    out_samples[n_s, SMP_R] = ysmp[0]
                    out_samples[n_s, SMP_TH] = ysmp[1]
                    out_samples[n_s, SMP_RDOT] = ysmp[2]
                    out_samples[n_s, SMP_THDOT] = ysmp[3]
                    out_samples[n_s, SMP_CHART] = 0.0
                else:
                    rr = math.sqrt(ysmp[0] * ysmp[0] + ysmp[1] * ysmp[1])
                    out_samples[n_s, SMP_R] = rr
                    out_samples[n_s, SMP_TH] = th_cont + _sweep(rc[0, 0], rc[0, 1],
                                                               ysmp[0], ysmp[1])
                    if rr > 1e-13:
                        out_samples[n_s, SMP_RDOT] = (ysmp[0] * ysmp[2]
                                                      + ysmp[1] * ysmp[3]) / rr
                        out_samples[n_s, SMP_THDOT] = (ysmp[0] * ysmp[3]
                                                       - ysmp[1] * ysmp[2]) / (rr * rr)
                    else:
                        out_samples[n_s, SMP_RDOT] = 0.0
                        out_samples[n_s, SMP_THDOT] = 0.0
                    out_samples[n_s, SMP_CHART] = 1.0
                out_samples[n_s, SMP_J] = ysmp[4]
                out_samples[n_s, SMP_JP] = ysmp[5]
                n_s += 1
                next_s += sample_ds

        # --- advance ----------------------------------------------------
        if tau_hi < 1.0:
            _dense_all(rc, tau_hi, yend)
        else:
            for i in range(8):
                yend[i] = ytmp[i]
        if mode == 1:
            th_cont += _sweep(rc[0, 0], rc[0, 1], yend[0], yend[1])
        else:
            th_cont = yend[1]
        t = t_new

        # drift diagnostics and r_min
        if mode == 0:
            rr = yend[0]
            phi_e, _, _ = _eval_phi(breaks, kinds, params, tab_meta, tab_phi,
                                    tab_dphi, rr)
            sp2 = yend[2] * yend[2] + phi_e * phi_e * yend[3] * yend[3]
            cc = phi_e * phi_e * yend[3]
        else:
            rr = math.sqrt(yend[0] * yend[0] + yend[1] * yend[1])
            if rr > 1e-10:
                phi_e, _, _ = _eval_phi(breaks, kinds, params, tab_meta, tab_phi,
                                        tab_dphi, rr)
                S = yend[0] * yend[2] + yend[1] * yend[3]
                T = yend[0] * yend[3] - yend[1] * yend[2]
                sp2 = (S / rr) * (S / rr) + (phi_e * T / (rr * rr)) ** 2
                cc = phi_e * phi_e * T / (rr * rr)
            else:
                sp2 = yend[2] * yend[2] + yend[3] * yend[3]
                cc = c0
        if rr < r_min_seen:
            r_min_seen = rr
        du_ = abs(sp2 - 1.0)
        if du_ > out_events[EV_DRIFT_UNIT]:
            out_events[EV_DRIFT_UNIT] = du_
        dc_ = abs(cc - c0)
        if dc_ > out_events[EV_DRIFT_CLAIR]:
            out_events[EV_DRIFT_CLAIR] = dc_

        if pending >= 0:
            exit_code = pending
            for i in range(8):
                y[i] = yend[i]
            t_end_final = t
            break

        for i in range(8):
            y[i] = yend[i]
        t_end_final = t

        # FSAL: k7 is the derivative at the accepted endpoint
        for i in range(8):
            k[0, i] = k[6, i]
        have_k1 = True

        # step size update
        if errnorm > 1e-30:
            fac = 0.9 * errnorm ** -0.2
            if fac > 5.0:
                fac = 5.0
            elif fac < 0.2:
                fac = 0.2
            h *= fac
        else:
            h *= 5.0

        # mode switches (state is exact at step ends)
        if mode == 0 and smooth_pole != 0 and y[0] < CHART_IN:
            r_c = y[0]
            ct, st = math.cos(y[1]), math.sin(y[1])
            vr, vth = y[2], y[3]
            y[0] = r_c * ct
            y[1] = r_c * st
            y[2] = vr * ct - r_c * vth * st
            y[3] = vr * st + r_c * vth * ct
            mode = 1
            have_k1 = False
            if h > H_MAX_CHART:
                h = H_MAX_CHART
        elif mode == 1:
            rr = math.sqrt(y[0] * y[0] + y[1] * y[1])
            if rr > CHART_OUT:
                S = y[0] * y[2] + y[1] * y[3]
                T = y[0] * y[3] - y[1] * y[2]
                y[0] = rr
                y[1] = th_cont
                y[2] = S / rr
                y[3] = T / (rr * rr)
                mode = 0
                have_k1 = False

    if exit_code < 0:
        exit_code = EXIT_TMAX
        for i in range(8):
            yend[i] = y[i]

    # --- terminal bookkeeping -------------------------------------------
    t = t_end_final
    out_events[EV_T_END] = t
    out_events[EV_EXIT] = exit_code
    if mode == 0:
        r_e = yend[0]
        rdot_e = yend[2]
        thdot_e = yend[3]
    else:
        r_e = math.sqrt(yend[0] * yend[0] + yend[1] * yend[1])
        if r_e > 1e-13:
            rdot_e = (yend[0] * yend[2] + yend[1] * yend[3]) / r_e
            thdot_e = (yend[0] * yend[3] - yend[1] * yend[2]) / (r_e * r_e)
        else:
            rdot_e = math.sqrt(yend[2] * yend[2] + yend[3] * yend[3])
            thdot_e = 0.0
    out_events[EV_R_END] = r_e
    out_events[EV_TH_END] = th_cont
    out_events[EV_RDOT_END] = rdot_e
    out_events[EV_THDOT_END] = thdot_e
    out_events[EV_J_END] = yend[4]
    out_events[EV_JP_END] = yend[5]
    out_events[EV_J2_END] = yend[6]
    out_events[EV_J2P_END] = yend[7]
    out_events[EV_NSTEPS] = float(nacc)
    out_events[EV_NREJECT] = float(nrej)
    if r_min_seen < 0.0:
        r_min_seen = 0.0
    out_events[EV_R_MIN] = r_min_seen

    # extrapolated conjugate event at a truncated endpoint
    if (math.isnan(out_events[EV_T_CONJ])
            and (exit_code == EXIT_RMAX or exit_code == EXIT_TMAX)
            and yend[4] > 0.0 and yend[5] < 0.0):
        dt_ext = yend[4] / (-yend[5])
        if dt_ext <= 1e-6 * max(1.0, t):
            out_events[EV_T_CONJ] = t + dt_ext
            out_events[EV_CONJ_EXTRAP] = 1.0

    # terminal sample
    if sample_ds > 0.0 and n_s < max_s:
        if n_s == 0 or out_samples[n_s - 1, SMP_T] < t - 1e-12:
            out_samples[n_s, SMP_T] = t
            out_samples[n_s, SMP_R] = r_e
            out_samples[n_s, SMP_TH] = th_cont
            out_samples[n_s, SMP_RDOT] = rdot_e
            out_samples[n_s, SMP_THDOT] = thdot_e
            out_samples[n_s, SMP_J] = yend[4]
            out_samples[n_s, SMP_JP] = yend[5]
            out_samples[n_s, SMP_CHART] = 1.0 if mode == 1 else 0.0
            n_s += 1
    return n_s


@maybe_njit(parallel=True)
def integrate_fan(breaks, kinds, params, tab_meta, tab_phi, tab_dphi,
                  smooth_pole, r_max, r0, th0, psis, t_max,
                  rtol, atol, want_j2, stop_mode, sample_ds,
                  out_events, out_samples, out_counts):
    """Integrate a fan of geodesics over launch angles psis (parallel)."""
    n = psis.shape[0]
    for i in prange(n):
        out_counts[i] = integrate_geodesic(
            breaks, kinds, params, tab_meta, tab_phi, tab_dphi,
            smooth_pole, r_max, r0, th0, psis[i], t_max,
            rtol, atol, want_j2, stop_mode, sample_ds,
            out_events[i], out_samples[i])
