"""Pure-Python Dormand-Prince 5(4) kernel for the mass-spring system.

Mirrors ``_ckernel.pyx`` statement for statement; used when the compiled
extension is unavailable and as the reference in the backend benchmark.
"""
from __future__ import annotations

import math

import numpy as np

# stop reasons shared with the compiled kernel
T_MAX = 0
TOUCHDOWN = 1
TRAPPED = 2
SADDLE = 3
TURNED = 4
MAX_STEPS = 5
UNDERFLOW = 6

RECORD_ENDS = 0
RECORD_STEPS = 1
RECORD_EVAL = 2

_POLE_GUARD = 1e-13
_EVENT_TTOL = 1e-10

# Dormand-Prince tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423


def _dense(r1, r2, r3, r4, r5, theta):
    th1 = 1.0 - theta
    return r1 + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)))


def integrate_kernel(
    lam, alpha, x0, y0, t0, t_max, rtol, atol, eps_td, max_steps,
    h_init, h_max, record, t_eval,
    trap_energy, trap_x, saddle_x, saddle_radius, saddle_dwell, stop_on_turn,
):
    """Advance ``(x0, y0)`` from ``t0`` until ``t_max`` or a stop event.

    Returns ``(t, x, y, status, t_event, x_event, y_event, n_steps,
    n_rejected, min_gap)``; the sample arrays follow ``record``.
    """
    ts: list[float] = []
    xs: list[float] = []
    ys: list[float] = []
    thr = -1.0 + eps_td
    use_trap = not math.isnan(trap_x)
    use_saddle = saddle_radius > 0.0
    n_eval = 0 if t_eval is None else len(t_eval)
    i_eval = 0

    t, x, y = t0, x0, y0
    status = T_MAX
    t_ev = x_ev = y_ev = math.nan
    n_steps = n_rej = 0
    min_gap = 1.0 + x
    inside_since = math.nan
    seen_negative = y < 0.0

    if record == RECORD_EVAL:
        while i_eval < n_eval and t_eval[i_eval] <= t:
            if t_eval[i_eval] == t:
                ts.append(t); xs.append(x); ys.append(y)
            i_eval += 1
    else:
        ts.append(t); xs.append(x); ys.append(y)

    g = 1.0 + x
    k1x = y
    k1y = -(alpha * y + x + lam / (g * g))

    # initial-time checks so that a start inside the trap is reported at once
    if use_trap and 0.5 * y * y + 0.5 * x * x - lam / g < trap_energy and x > trap_x:
        status = TRAPPED
        t_ev, x_ev, y_ev = t, x, y
    elif x <= thr:
        status = TOUCHDOWN
        t_ev, x_ev, y_ev = t, x, y
    if status != T_MAX:
        return (np.asarray(ts), np.asarray(xs), np.asarray(ys), status,
                t_ev, x_ev, y_ev, 0, 0, min_gap)
    if use_saddle and math.hypot(x - saddle_x, y) < saddle_radius:
        inside_since = t

    # starting step size
    if h_init > 0.0:
        h = h_init
    else:
        sx = atol + rtol * abs(x)
        sy = atol + rtol * abs(y)
        d0 = math.sqrt(0.5 * ((x / sx) * (x / sx) + (y / sy) * (y / sy)))
        d1 = math.sqrt(0.5 * ((k1x / sx) * (k1x / sx) + (k1y / sy) * (k1y / sy)))
        h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        xe = x + h0 * k1x
        ye = y + h0 * k1y
        if xe <= -1.0 + _POLE_GUARD:
            h = h0
        else:
            ge = 1.0 + xe
            fx = ye
            fy = -(alpha * ye + xe + lam / (ge * ge))
            qx = (fx - k1x) / sx
            qy = (fy - k1y) / sy
            d2 = math.sqrt(0.5 * (qx * qx + qy * qy)) / h0
            dm = max(d1, d2)
            h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
            h = min(100.0 * h0, h1)
    h = min(h, h_max)

    last_rejected = False
    while True:
        if t >= t_max:
            status = T_MAX
            break
        if n_steps >= max_steps:
            status = MAX_STEPS
            break
        if x < -0.9:
            h = min(h, 0.1 * (1.0 + x) / max(1.0, abs(y)))
        if h > t_max - t:
            h = t_max - t
        if h < 1e-14 * max(1.0, abs(t)):
            status = UNDERFLOW
            break

        # stages; a stage on or past the pole rejects the step outright
        xs2 = x + h * A21 * k1x
        ys2 = y + h * A21 * k1y
        if xs2 <= -1.0 + _POLE_GUARD:
            h *= 0.25; n_rej += 1; last_rejected = True
            continue
        g = 1.0 + xs2
        k2x = ys2
        k2y = -(alpha * ys2 + xs2 + lam / (g * g))

        xs3 = x + h * (A31 * k1x + A32 * k2x)
        ys3 = y + h * (A31 * k1y + A32 * k2y)
        if xs3 <= -1.0 + _POLE_GUARD:
            h *= 0.25; n_rej += 1; last_rejected = True
            continue
        g = 1.0 + xs3
        k3x = ys3
        k3y = -(alpha * ys3 + xs3 + lam / (g * g))

        xs4 = x + h * (A41 * k1x + A42 * k2x + A43 * k3x)
        ys4 = y + h * (A41 * k1y + A42 * k2y + A43 * k3y)
        if xs4 <= -1.0 + _POLE_GUARD:
            h *= 0.25; n_rej += 1; last_rejected = True
            continue
        g = 1.0 + xs4
        k4x = ys4
        k4y = -(alpha * ys4 + xs4 + lam / (g * g))

        xs5 = x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x)
        ys5 = y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y)
        if xs5 <= -1.0 + _POLE_GUARD:
            h *= 0.25; n_rej += 1; last_rejected = True
            continue
        g = 1.0 + xs5
        k5x = ys5
        k5y = -(alpha * ys5 + xs5 + lam / (g * g))

        xs6 = x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x)
        ys6 = y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y)
        if xs6 <= -1.0 + _POLE_GUARD:
            h *= 0.25; n_rej += 1; last_rejected = True
            continue
        g = 1.0 + xs6
        k6x = ys6
        k6y = -(alpha * ys6 + xs6 + lam / (g * g))

        xn = x + h * (A71 * k1x + A73 * k3x + A74 * k4x + A75 * k5x + A76 * k6x)
        yn = y + h * (A71 * k1y + A73 * k3y + A74 * k4y + A75 * k5y + A76 * k6y)
        if xn <= -1.0 + _POLE_GUARD:
            h *= 0.25; n_rej += 1; last_rejected = True
            continue
        g = 1.0 + xn
        k7x = yn
        k7y = -(alpha * yn + xn + lam / (g * g))

        ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
        ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
        sx = atol + rtol * max(abs(x), abs(xn))
        sy = atol + rtol * max(abs(y), abs(yn))
        qx = ex / sx
        qy = ey / sy
        err = math.sqrt(0.5 * (qx * qx + qy * qy))
        if not math.isfinite(err):
            h *= 0.25; n_rej += 1; last_rejected = True
            continue

        if err > 1.0:
            fac = max(0.2, 0.9 * err ** -0.2)
            h *= fac
            n_rej += 1
            last_rejected = True
            continue

        # accepted: dense-output coefficients for [t, t + h]
        n_steps += 1
        rx1, ry1 = x, y
        rx2, ry2 = xn - x, yn - y
        rx3, ry3 = h * k1x - rx2, h * k1y - ry2
        rx4, ry4 = rx2 - h * k7x - rx3, ry2 - h * k7y - ry3
        rx5 = h * (D1 * k1x + D3 * k3x + D4 * k4x + D5 * k5x + D6 * k6x + D7 * k7x)
        ry5 = h * (D1 * k1y + D3 * k3y + D4 * k4y + D5 * k5y + D6 * k6y + D7 * k7y)
        t_old = t
        t_new = t + h

        if xn <= thr:
            lo, hi = 0.0, 1.0
            while (hi - lo) * h > _EVENT_TTOL:
                mid = 0.5 * (lo + hi)
                if _dense(rx1, rx2, rx3, rx4, rx5, mid) > thr:
                    lo = mid
                else:
                    hi = mid
            t_ev = t_old + hi * h
            x_ev = _dense(rx1, rx2, rx3, rx4, rx5, hi)
            y_ev = _dense(ry1, ry2, ry3, ry4, ry5, hi)
            if record == RECORD_EVAL:
                while i_eval < n_eval and t_eval[i_eval] < t_ev:
                    th = (t_eval[i_eval] - t_old) / h
                    ts.append(t_eval[i_eval])
                    xs.append(_dense(rx1, rx2, rx3, rx4, rx5, th))
                    ys.append(_dense(ry1, ry2, ry3, ry4, ry5, th))
                    i_eval += 1
            min_gap = min(min_gap, 1.0 + x_ev)
            status = TOUCHDOWN
            break

        if record == RECORD_EVAL:
            while i_eval < n_eval and t_eval[i_eval] <= t_new:
                th = (t_eval[i_eval] - t_old) / h
                ts.append(t_eval[i_eval])
                xs.append(_dense(rx1, rx2, rx3, rx4, rx5, th))
                ys.append(_dense(ry1, ry2, ry3, ry4, ry5, th))
                i_eval += 1
        elif record == RECORD_STEPS:
            ts.append(t_new); xs.append(xn); ys.append(yn)

        t, x, y = t_new, xn, yn
        k1x, k1y = k7x, k7y
        if 1.0 + x < min_gap:
            min_gap = 1.0 + x

        if use_trap and 0.5 * y * y + 0.5 * x * x - lam / (1.0 + x) < trap_energy and x > trap_x:
            status = TRAPPED
            t_ev, x_ev, y_ev = t, x, y
            break
        if y < 0.0:
            seen_negative = True
        elif stop_on_turn and seen_negative:
            # locate y = 0 inside the step
            lo, hi = 0.0, 1.0
            while (hi - lo) * h > _EVENT_TTOL:
                mid = 0.5 * (lo + hi)
                if _dense(ry1, ry2, ry3, ry4, ry5, mid) < 0.0:
                    lo = mid
                else:
                    hi = mid
            status = TURNED
            t_ev = t_old + hi * h
            x_ev = _dense(rx1, rx2, rx3, rx4, rx5, hi)
            y_ev = _dense(ry1, ry2, ry3, ry4, ry5, hi)
            break
        if use_saddle:
            if math.hypot(x - saddle_x, y) < saddle_radius:
                if math.isnan(inside_since):
                    inside_since = t
                elif t - inside_since >= saddle_dwell:
                    status = SADDLE
                    t_ev, x_ev, y_ev = t, x, y
                    break
            else:
                inside_since = math.nan

        fac = min(10.0, max(0.2, 0.9 * err ** -0.2)) if err > 0.0 else 10.0
        if last_rejected:
            fac = min(fac, 1.0)
        h = min(h * fac, h_max)
        last_rejected = False

    if record == RECORD_ENDS and ts[-1] != t:
        ts.append(t); xs.append(x); ys.append(y)
    return (np.asarray(ts, dtype=float), np.asarray(xs, dtype=float),
            np.asarray(ys, dtype=float), status, t_ev, x_ev, y_ev,
            n_steps, n_rej, min_gap)
