"""Jitted integration kernels for motion inside one support disc.

The ODE is qdd = B(|q - c|) J qd with J v = (v2, -v1); the winding angle about
the disc center is carried as a fifth state component.  The adaptive stepper
is an embedded Dormand-Prince 5(4) pair with endpoint sign-change event
detection; located crossings are polished by re-integration plus Newton
iterations on the event function, so event states satisfy |g| <= ~1e-12
independently of the interpolant order.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# event kinds recorded by the kernel
EV_EXIT = 0
EV_SECTION = 1
EV_TURN = 2
EV_SECTION_REJECT = 3

# kernel status codes
ST_EXIT = 0
ST_TIMECAP = 1
ST_SECT_STOP = 2
ST_STEPFAIL = 3
ST_OVERFLOW = 4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@njit(cache=True, inline="always")
def _b_of_r(r, rnodes, bnodes):
    n = rnodes.shape[0]
    if r >= rnodes[n - 1]:
        return 0.0
    i = 0
    while i < n - 2 and r >= rnodes[i + 1]:
        i += 1
    r0 = rnodes[i]
    r1 = rnodes[i + 1]
    return bnodes[i] + (bnodes[i + 1] - bnodes[i]) * (r - r0) / (r1 - r0)


@njit(cache=True, inline="always")
def _rhs(y, cx, cy, rnodes, bnodes, out):
    dx = y[0] - cx
    dy = y[1] - cy
    r = np.sqrt(dx * dx + dy * dy)
    B = _b_of_r(r, rnodes, bnodes)
    out[0] = y[2]
    out[1] = y[3]
    out[2] = B * y[3]
    out[3] = -B * y[2]
    r2 = r * r
    if r2 < 1e-300:
        r2 = 1e-300
    out[4] = (dx * y[3] - dy * y[2]) / r2


@njit(cache=True, inline="always")
def _rk4_step(y, h, cx, cy, rnodes, bnodes, k1, k2, k3, k4, yt, out):
    _rhs(y, cx, cy, rnodes, bnodes, k1)
    for i in range(5):
        yt[i] = y[i] + 0.5 * h * k1[i]
    _rhs(yt, cx, cy, rnodes, bnodes, k2)
    for i in range(5):
        yt[i] = y[i] + 0.5 * h * k2[i]
    _rhs(yt, cx, cy, rnodes, bnodes, k3)
    for i in range(5):
        yt[i] = y[i] + h * k3[i]
    _rhs(yt, cx, cy, rnodes, bnodes, k4)
    for i in range(5):
        out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@njit(cache=True, inline="always")
def _g_event(kind, y, cx, cy, rsup, sux, suy):
    dx = y[0] - cx
    dy = y[1] - cy
    if kind == EV_EXIT:
        return np.sqrt(dx * dx + dy * dy) - rsup
    elif kind == EV_SECTION:
        return sux * dy - suy * dx
    else:
        return dx * y[2] + dy * y[3]


@njit(cache=True, inline="always")
def _gdot_event(kind, y, cx, cy, rnodes, bnodes, sux, suy):
    dx = y[0] - cx
    dy = y[1] - cy
    if kind == EV_EXIT:
        r = np.sqrt(dx * dx + dy * dy)
        if r < 1e-300:
            r = 1e-300
        return (dx * y[2] + dy * y[3]) / r
    elif kind == EV_SECTION:
        return sux * y[3] - suy * y[2]
    else:
        B = _b_of_r(np.sqrt(dx * dx + dy * dy), rnodes, bnodes)
        return y[2] * y[2] + y[3] * y[3] + B * (dx * y[3] - dy * y[2])


@njit(cache=True)
def _hermite(y0, f0, y1, f1, h, s, out):
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    for i in range(5):
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]


@njit(cache=True)
def _locate_event(kind, t0, y0, f0, y1, f1, h, cx, cy, rnodes, bnodes, rsup,
                  sux, suy, gtol, yev, k1, k2, k3, k4, yt, ytmp):
    """Polish one sign change of event `kind` inside the accepted step.

    Returns the event time; the event state is written to yev.
    """
    g0 = _g_event(kind, y0, cx, cy, rsup, sux, suy)
    g1 = _g_event(kind, y1, cx, cy, rsup, sux, suy)
    # bisection on the cubic Hermite interpolant for a first guess
    a = 0.0
    b = 1.0
    ga = g0
    for _ in range(48):
        m = 0.5 * (a + b)
        _hermite(y0, f0, y1, f1, h, m, ytmp)
        gm = _g_event(kind, ytmp, cx, cy, rsup, sux, suy)
        if ga * gm <= 0.0:
            b = m
        else:
            a = m
            ga = gm
    s_est = 0.5 * (a + b)
    t_ev = s_est * h
    # re-integrate from the step start in a few RK4 substeps (accuracy beyond
    # the interpolant), then Newton-polish on the true event function
    nsub = 4
    for i in range(5):
        yev[i] = y0[i]
    dt = t_ev / nsub
    for _ in range(nsub):
        _rk4_step(yev, dt, cx, cy, rnodes, bnodes, k1, k2, k3, k4, yt, ytmp)
        for i in range(5):
            yev[i] = ytmp[i]
    for _ in range(12):
        g = _g_event(kind, yev, cx, cy, rsup, sux, suy)
        if abs(g) <= gtol:
            break
        gd = _gdot_event(kind, yev, cx, cy, rnodes, bnodes, sux, suy)
        if gd == 0.0:
            break
        step = -g / gd
        if abs(step) > abs(h):
            step = -abs(h) if step < 0 else abs(h)
        _rk4_step(yev, step, cx, cy, rnodes, bnodes, k1, k2, k3, k4, yt, ytmp)
        for i in range(5):
            yev[i] = ytmp[i]
        t_ev += step
    return t0 + t_ev


@njit(cache=True)
def integrate_disc_core(y0, t0, tmax, cx, cy, rnodes, bnodes, rsup,
                        rtol, atol, hmin, hmax,
                        sect_on, sux, suy, lam_lo, lam_hi, trans_tol, max_sect,
                        sect_tmin,
                        ev_kind, ev_t, ev_y,
                        rec_steps, st_t, st_y, y_end):
    """Adaptive DP5(4) propagation inside one disc until exit/section-cap/tmax.

    Returns (status, n_events, n_steps_recorded, t_end, n_sect_hits).
    """
    # Dormand-Prince coefficients
    a21 = 1.0 / 5.0
    a31 = 3.0 / 40.0
    a32 = 9.0 / 40.0
    a41 = 44.0 / 45.0
    a42 = -56.0 / 15.0
    a43 = 32.0 / 9.0
    a51 = 19372.0 / 6561.0
    a52 = -25360.0 / 2187.0
    a53 = 64448.0 / 6561.0
    a54 = -212.0 / 729.0
    a61 = 9017.0 / 3168.0
    a62 = -355.0 / 33.0
    a63 = 46732.0 / 5247.0
    a64 = 49.0 / 176.0
    a65 = -5103.0 / 18656.0
    b1 = 35.0 / 384.0
    b3 = 500.0 / 1113.0
    b4 = 125.0 / 192.0
    b5 = -2187.0 / 6784.0
    b6 = 11.0 / 84.0
    e1 = 71.0 / 57600.0
    e3 = -71.0 / 16695.0
    e4 = 71.0 / 1920.0
    e5 = -17253.0 / 339200.0
    e6 = 22.0 / 525.0
    e7 = -1.0 / 40.0

    y = y0.copy()
    f = np.empty(5)
    k2 = np.empty(5)
    k3 = np.empty(5)
    k4 = np.empty(5)
    k5 = np.empty(5)
    k6 = np.empty(5)
    k7 = np.empty(5)
    yt = np.empty(5)
    y1 = np.empty(5)
    yev = np.empty(5)
    w1 = np.empty(5)
    w2 = np.empty(5)
    w3 = np.empty(5)
    w4 = np.empty(5)
    w5 = np.empty(5)
    w6 = np.empty(5)

    _rhs(y, cx, cy, rnodes, bnodes, f)
    t = t0
    h = min(hmax, 1e-3 * rsup / max(np.sqrt(y[2] * y[2] + y[3] * y[3]), 1e-300))

    gtol = 1e-12 * max(rsup, 1.0)
    arm_tol = 1e-12 * rsup
    armed = _g_event(EV_EXIT, y, cx, cy, rsup, sux, suy) < -arm_tol

    nev = 0
    nst = 0
    n_hits = 0
    ev_cap = ev_kind.shape[0]
    st_cap = st_t.shape[0]
    if rec_steps and st_cap > 0:
        st_t[0] = t
        for i in range(5):
            st_y[0, i] = y[i]
        nst = 1

    g_exit_prev = _g_event(EV_EXIT, y, cx, cy, rsup, sux, suy)
    g_sect_prev = _g_event(EV_SECTION, y, cx, cy, rsup, sux, suy)
    g_turn_prev = _g_event(EV_TURN, y, cx, cy, rsup, sux, suy)

    while t < tmax:
        if h > tmax - t:
            h = tmax - t
        if h < hmin:
            h = hmin
        # one DP step attempt
        for i in range(5):
            yt[i] = y[i] + h * a21 * f[i]
        _rhs(yt, cx, cy, rnodes, bnodes, k2)
        for i in range(5):
            yt[i] = y[i] + h * (a31 * f[i] + a32 * k2[i])
        _rhs(yt, cx, cy, rnodes, bnodes, k3)
        for i in range(5):
            yt[i] = y[i] + h * (a41 * f[i] + a42 * k2[i] + a43 * k3[i])
        _rhs(yt, cx, cy, rnodes, bnodes, k4)
        for i in range(5):
            yt[i] = y[i] + h * (a51 * f[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i])
        _rhs(yt, cx, cy, rnodes, bnodes, k5)
        for i in range(5):
            yt[i] = y[i] + h * (a61 * f[i] + a62 * k2[i] + a63 * k3[i]
                                + a64 * k4[i] + a65 * k5[i])
        _rhs(yt, cx, cy, rnodes, bnodes, k6)
        for i in range(5):
            y1[i] = y[i] + h * (b1 * f[i] + b3 * k3[i] + b4 * k4[i]
                                + b5 * k5[i] + b6 * k6[i])
        _rhs(y1, cx, cy, rnodes, bnodes, k7)
        errnorm = 0.0
        for i in range(5):
            err_i = h * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i]
                         + e6 * k6[i] + e7 * k7[i])
            sc = atol + rtol * max(abs(y[i]), abs(y1[i]))
            q = err_i / sc
            errnorm += q * q
        errnorm = np.sqrt(errnorm / 5.0)

        if errnorm > 1.0 and h > hmin:
            factor = _SAFETY * errnorm ** (-0.2)
            if factor < _MIN_FACTOR:
                factor = _MIN_FACTOR
            h *= factor
            continue
        if errnorm > 1.0 and h <= hmin * (1.0 + 1e-12):
            return ST_STEPFAIL, nev, nst, t, n_hits

        # accepted step: event processing on [t, t+h]
        g_exit_new = _g_event(EV_EXIT, y1, cx, cy, rsup, sux, suy)
        g_sect_new = _g_event(EV_SECTION, y1, cx, cy, rsup, sux, suy)
        g_turn_new = _g_event(EV_TURN, y1, cx, cy, rsup, sux, suy)

        n_cand = 0
        cand_kind = np.empty(3, dtype=np.int64)
        cand_t = np.empty(3)
        cand_y = np.empty((3, 5))

        if sect_on and g_sect_prev * g_sect_new < 0.0:
            te = _locate_event(EV_SECTION, t, y, f, y1, k7, h, cx, cy,
                               rnodes, bnodes, rsup, sux, suy, gtol,
                               yev, w1, w2, w3, w4, yt, w5)
            if te - t0 >= sect_tmin:
                cand_kind[n_cand] = EV_SECTION
                cand_t[n_cand] = te
                for i in range(5):
                    cand_y[n_cand, i] = yev[i]
                n_cand += 1
        if g_turn_prev * g_turn_new < 0.0:
            te = _locate_event(EV_TURN, t, y, f, y1, k7, h, cx, cy,
                               rnodes, bnodes, rsup, sux, suy,
                               1e-10 * (y[2] * y[2] + y[3] * y[3] + 1.0),
                               yev, w1, w2, w3, w4, yt, w5)
            cand_kind[n_cand] = EV_TURN
            cand_t[n_cand] = te
            for i in range(5):
                cand_y[n_cand, i] = yev[i]
            n_cand += 1
        if armed and g_exit_prev < 0.0 and g_exit_new >= 0.0:
            te = _locate_event(EV_EXIT, t, y, f, y1, k7, h, cx, cy,
                               rnodes, bnodes, rsup, sux, suy, gtol,
                               yev, w1, w2, w3, w4, yt, w5)
            cand_kind[n_cand] = EV_EXIT
            cand_t[n_cand] = te
            for i in range(5):
                cand_y[n_cand, i] = yev[i]
            n_cand += 1
        if not armed and g_exit_new < -arm_tol:
            armed = True
        if not armed and g_exit_new > 1e-9 * rsup:
            # grazing start that never went inside: immediate tangent exit
            for i in range(5):
                y_end[i] = y[i]
            if nev < ev_cap:
                ev_kind[nev] = EV_EXIT
                ev_t[nev] = t
                for i in range(5):
                    ev_y[nev, i] = y[i]
                nev += 1
            return ST_EXIT, nev, nst, t, n_hits

        # process candidates in time order
        for _ in range(n_cand):
            jmin = -1
            tmin_c = 1e308
            for j in range(n_cand):
                if cand_kind[j] >= 0 and cand_t[j] < tmin_c:
                    tmin_c = cand_t[j]
                    jmin = j
            if jmin < 0:
                break
            kind = cand_kind[jmin]
            cand_kind[jmin] = -1
            if nev >= ev_cap:
                return ST_OVERFLOW, nev, nst, t, n_hits
            if kind == EV_SECTION:
                dx = cand_y[jmin, 0] - cx
                dy = cand_y[jmin, 1] - cy
                lam = (sux * dx + suy * dy) / rsup
                trans = abs(sux * cand_y[jmin, 3] - suy * cand_y[jmin, 2])
                valid = (lam_lo < lam < lam_hi) and trans > trans_tol
                ev_kind[nev] = EV_SECTION if valid else EV_SECTION_REJECT
                ev_t[nev] = cand_t[jmin]
                for i in range(5):
                    ev_y[nev, i] = cand_y[jmin, i]
                nev += 1
                if valid:
                    n_hits += 1
                    if max_sect > 0 and n_hits >= max_sect:
                        for i in range(5):
                            y_end[i] = cand_y[jmin, i]
                        return ST_SECT_STOP, nev, nst, cand_t[jmin], n_hits
            elif kind == EV_TURN:
                ev_kind[nev] = EV_TURN
                ev_t[nev] = cand_t[jmin]
                for i in range(5):
                    ev_y[nev, i] = cand_y[jmin, i]
                nev += 1
            else:  # exit, terminal
                ev_kind[nev] = EV_EXIT
                ev_t[nev] = cand_t[jmin]
                for i in range(5):
                    ev_y[nev, i] = cand_y[jmin, i]
                nev += 1
                for i in range(5):
                    y_end[i] = cand_y[jmin, i]
                if rec_steps and nst < st_cap:
                    st_t[nst] = cand_t[jmin]
                    for i in range(5):
                        st_y[nst, i] = cand_y[jmin, i]
                    nst += 1
                return ST_EXIT, nev, nst, cand_t[jmin], n_hits

        t += h
        for i in range(5):
            y[i] = y1[i]
            f[i] = k7[i]
        g_exit_prev = g_exit_new
        g_sect_prev = g_sect_new
        g_turn_prev = g_turn_new
        if rec_steps and nst < st_cap:
            st_t[nst] = t
            for i in range(5):
                st_y[nst, i] = y[i]
            nst += 1
        if errnorm > 0.0:
            factor = _SAFETY * errnorm ** (-0.2)
            if factor > _MAX_FACTOR:
                factor = _MAX_FACTOR
        else:
            factor = _MAX_FACTOR
        h *= factor
        if h > hmax:
            h = hmax

    for i in range(5):
        y_end[i] = y[i]
    return ST_TIMECAP, nev, nst, t, n_hits


@njit(cache=True)
def rk4_passage_core(y0, cx, cy, rnodes, bnodes, rsup, h, tcap, y_end):
    """Classical fixed-step RK4 through one disc passage (oracle route).

    Returns (status, t_exit); the exit state (|r - R| <= 1e-12 R) is written
    to y_end.  status: 0 exit, 1 time cap, 3 never entered.
    """
    y = y0.copy()
    k1 = np.empty(5)
    k2 = np.empty(5)
    k3 = np.empty(5)
    k4 = np.empty(5)
    yt = np.empty(5)
    yn = np.empty(5)
    t = 0.0
    arm_tol = 1e-12 * rsup
    armed = False
    dx = y[0] - cx
    dy = y[1] - cy
    if np.sqrt(dx * dx + dy * dy) - rsup < -arm_tol:
        armed = True
    nmax = int(tcap / h) + 2
    for _ in range(nmax):
        _rk4_step(y, h, cx, cy, rnodes, bnodes, k1, k2, k3, k4, yt, yn)
        dx = yn[0] - cx
        dy = yn[1] - cy
        g = np.sqrt(dx * dx + dy * dy) - rsup
        if not armed:
            if g < -arm_tol:
                armed = True
            elif g > 1e-9 * rsup:
                for i in range(5):
                    y_end[i] = y[i]
                return 3, t
        elif g >= 0.0:
            # bisect the step fraction with single RK4 sub-steps from y
            lo = 0.0
            hi = h
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                _rk4_step(y, mid, cx, cy, rnodes, bnodes, k1, k2, k3, k4, yt, yn)
                dx = yn[0] - cx
                dy = yn[1] - cy
                gm = np.sqrt(dx * dx + dy * dy) - rsup
                if abs(gm) <= 1e-12 * rsup:
                    break
                if gm > 0.0:
                    hi = mid
                else:
                    lo = mid
            for i in range(5):
                y_end[i] = yn[i]
            return 0, t + 0.5 * (lo + hi)
        for i in range(5):
            y[i] = yn[i]
        t += h
        if t >= tcap:
            break
    for i in range(5):
        y_end[i] = y[i]
    return 1, t
