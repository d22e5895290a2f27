# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) kernel; same contract as ``_pykernel``."""
from libc.math cimport sqrt, fabs, fmin, fmax, pow, isnan, isfinite, hypot, NAN
from libc.stdlib cimport malloc, realloc, free

import numpy as np

cdef int T_MAX = 0
cdef int TOUCHDOWN = 1
cdef int TRAPPED = 2
cdef int SADDLE = 3
cdef int TURNED = 4
cdef int MAX_STEPS = 5
cdef int UNDERFLOW = 6

cdef int RECORD_ENDS = 0
cdef int RECORD_STEPS = 1
cdef int RECORD_EVAL = 2

cdef double POLE_GUARD = 1e-13
cdef double EVENT_TTOL = 1e-10

cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784, A76 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40
cdef double D1 = -12715105075.0 / 11282082432.0
cdef double D3 = 87487479700.0 / 32700410799.0
cdef double D4 = -10690763975.0 / 1880347072.0
cdef double D5 = 701980252875.0 / 199316789632.0
cdef double D6 = -1453857185.0 / 822651844.0
cdef double D7 = 69997945.0 / 29380423.0


cdef inline double _dense(double r1, double r2, double r3, double r4, double r5, double th) nogil:
    cdef double th1 = 1.0 - th
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)))


cdef inline double _accel(double lam, double alpha, double x, double y) nogil:
    cdef double g = 1.0 + x
    return -(alpha * y + x + lam / (g * g))


cdef struct Buffer:
    double* t
    double* x
    double* y
    Py_ssize_t n
    Py_ssize_t cap


cdef int _push(Buffer* b, double t, double x, double y) except -1:
    cdef Py_ssize_t cap
    if b.n == b.cap:
        cap = 2 * b.cap if b.cap > 0 else 1024
        b.t = <double*> realloc(b.t, cap * sizeof(double))
        b.x = <double*> realloc(b.x, cap * sizeof(double))
        b.y = <double*> realloc(b.y, cap * sizeof(double))
        if b.t == NULL or b.x == NULL or b.y == NULL:
            raise MemoryError()
        b.cap = cap
    b.t[b.n] = t
    b.x[b.n] = x
    b.y[b.n] = y
    b.n += 1
    return 0


cdef object _arrays(Buffer* b):
    cdef Py_ssize_t i
    ta = np.empty(b.n)
    xa = np.empty(b.n)
    ya = np.empty(b.n)
    cdef double[::1] tv = ta
    cdef double[::1] xv = xa
    cdef double[::1] yv = ya
    for i in range(b.n):
        tv[i] = b.t[i]
        xv[i] = b.x[i]
        yv[i] = b.y[i]
    return ta, xa, ya


def integrate_kernel(
    double lam, double alpha, double x0, double y0, double t0, double t_max,
    double rtol, double atol, double eps_td, long max_steps,
    double h_init, double h_max, int record, t_eval,
    double trap_energy, double trap_x, double saddle_x, double saddle_radius,
    double saddle_dwell, bint stop_on_turn,
):
    """Advance ``(x0, y0)`` from ``t0`` until ``t_max`` or a stop event.

    Returns ``(t, x, y, status, t_event, x_event, y_event, n_steps,
    n_rejected, min_gap)``; the sample arrays follow ``record``.
    """
    cdef Buffer buf
    buf.t = NULL
    buf.x = NULL
    buf.y = NULL
    buf.n = 0
    buf.cap = 0
    cdef double[::1] te
    cdef Py_ssize_t n_eval = 0, i_eval = 0
    if t_eval is not None:
        te = np.ascontiguousarray(t_eval, dtype=np.float64)
        n_eval = te.shape[0]

    cdef double thr = -1.0 + eps_td
    cdef bint use_trap = not isnan(trap_x)
    cdef bint use_saddle = saddle_radius > 0.0
    cdef double t = t0, x = x0, y = y0
    cdef int status = T_MAX
    cdef double t_ev = NAN, x_ev = NAN, y_ev = NAN
    cdef long n_steps = 0, n_rej = 0
    cdef double min_gap = 1.0 + x
    cdef double inside_since = NAN
    cdef bint seen_negative = y < 0.0
    cdef bint last_rejected = False
    cdef double g, h, h0, h1, d0, d1, d2, dm, sx, sy, xe, ye, fx, fy
    cdef double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y, k5x, k5y, k6x, k6y, k7x, k7y
    cdef double xs2, ys2, xs3, ys3, xs4, ys4, xs5, ys5, xs6, ys6, xn, yn
    cdef double ex, ey, err, fac, th, lo, hi, mid
    cdef double rx1, rx2, rx3, rx4, rx5, ry1, ry2, ry3, ry4, ry5, t_old, t_new

    try:
        if record == RECORD_EVAL:
            while i_eval < n_eval and te[i_eval] <= t:
                if te[i_eval] == t:
                    _push(&buf, t, x, y)
                i_eval += 1
        else:
            _push(&buf, t, x, y)

        g = 1.0 + x
        k1x = y
        k1y = -(alpha * y + x + lam / (g * g))

        if use_trap and 0.5 * y * y + 0.5 * x * x - lam / g < trap_energy and x > trap_x:
            status = TRAPPED
            t_ev = t; x_ev = x; y_ev = y
        elif x <= thr:
            status = TOUCHDOWN
            t_ev = t; x_ev = x; y_ev = y
        if status != T_MAX:
            ta, xa, ya = _arrays(&buf)
            return (ta, xa, ya, status, t_ev, x_ev, y_ev, 0, 0, min_gap)
        if use_saddle and hypot(x - saddle_x, y) < saddle_radius:
            inside_since = t

        if h_init > 0.0:
            h = h_init
        else:
            sx = atol + rtol * fabs(x)
            sy = atol + rtol * fabs(y)
            d0 = sqrt(0.5 * ((x / sx) * (x / sx) + (y / sy) * (y / sy)))
            d1 = sqrt(0.5 * ((k1x / sx) * (k1x / sx) + (k1y / sy) * (k1y / sy)))
            if d0 < 1e-5 or d1 < 1e-5:
                h0 = 1e-6
            else:
                h0 = 0.01 * d0 / d1
            xe = x + h0 * k1x
            ye = y + h0 * k1y
            if xe <= -1.0 + POLE_GUARD:
                h = h0
            else:
                fx = ye
                fy = _accel(lam, alpha, xe, ye)
                d2 = sqrt(0.5 * ((fx - k1x) / sx * ((fx - k1x) / sx) + (fy - k1y) / sy * ((fy - k1y) / sy))) / h0
                dm = fmax(d1, d2)
                if dm <= 1e-15:
                    h1 = fmax(1e-6, h0 * 1e-3)
                else:
                    h1 = pow(0.01 / dm, 0.2)
                h = fmin(100.0 * h0, h1)
        h = fmin(h, h_max)

        while True:
            if t >= t_max:
                status = T_MAX
                break
            if n_steps >= max_steps:
                status = MAX_STEPS
                break
            if x < -0.9:
                h = fmin(h, 0.1 * (1.0 + x) / fmax(1.0, fabs(y)))
            if h > t_max - t:
                h = t_max - t
            if h < 1e-14 * fmax(1.0, fabs(t)):
                status = UNDERFLOW
                break

            xs2 = x + h * A21 * k1x
            ys2 = y + h * A21 * k1y
            if xs2 <= -1.0 + POLE_GUARD:
                h *= 0.25; n_rej += 1; last_rejected = True
                continue
            k2x = ys2
            k2y = _accel(lam, alpha, xs2, ys2)

            xs3 = x + h * (A31 * k1x + A32 * k2x)
            ys3 = y + h * (A31 * k1y + A32 * k2y)
            if xs3 <= -1.0 + POLE_GUARD:
                h *= 0.25; n_rej += 1; last_rejected = True
                continue
            k3x = ys3
            k3y = _accel(lam, alpha, xs3, ys3)

            xs4 = x + h * (A41 * k1x + A42 * k2x + A43 * k3x)
            ys4 = y + h * (A41 * k1y + A42 * k2y + A43 * k3y)
            if xs4 <= -1.0 + POLE_GUARD:
                h *= 0.25; n_rej += 1; last_rejected = True
                continue
            k4x = ys4
            k4y = _accel(lam, alpha, xs4, ys4)

            xs5 = x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x)
            ys5 = y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y)
            if xs5 <= -1.0 + POLE_GUARD:
                h *= 0.25; n_rej += 1; last_rejected = True
                continue
            k5x = ys5
            k5y = _accel(lam, alpha, xs5, ys5)

            xs6 = x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x)
            ys6 = y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y)
            if xs6 <= -1.0 + POLE_GUARD:
                h *= 0.25; n_rej += 1; last_rejected = True
                continue
            k6x = ys6
            k6y = _accel(lam, alpha, xs6, ys6)

            xn = x + h * (A71 * k1x + A73 * k3x + A74 * k4x + A75 * k5x + A76 * k6x)
            yn = y + h * (A71 * k1y + A73 * k3y + A74 * k4y + A75 * k5y + A76 * k6y)
            if xn <= -1.0 + POLE_GUARD:
                h *= 0.25; n_rej += 1; last_rejected = True
                continue
            k7x = yn
            k7y = _accel(lam, alpha, xn, yn)

            ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
            ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
            sx = atol + rtol * fmax(fabs(x), fabs(xn))
            sy = atol + rtol * fmax(fabs(y), fabs(yn))
            err = sqrt(0.5 * ((ex / sx) * (ex / sx) + (ey / sy) * (ey / sy)))
            if not isfinite(err):
                h *= 0.25; n_rej += 1; last_rejected = True
                continue
            if err > 1.0:
                fac = fmax(0.2, 0.9 * pow(err, -0.2))
                h *= fac
                n_rej += 1
                last_rejected = True
                continue

            n_steps += 1
            rx1 = x; ry1 = y
            rx2 = xn - x; ry2 = yn - y
            rx3 = h * k1x - rx2; ry3 = h * k1y - ry2
            rx4 = rx2 - h * k7x - rx3; ry4 = ry2 - h * k7y - ry3
            rx5 = h * (D1 * k1x + D3 * k3x + D4 * k4x + D5 * k5x + D6 * k6x + D7 * k7x)
            ry5 = h * (D1 * k1y + D3 * k3y + D4 * k4y + D5 * k5y + D6 * k6y + D7 * k7y)
            t_old = t
            t_new = t + h

            if xn <= thr:
                lo = 0.0
                hi = 1.0
                while (hi - lo) * h > EVENT_TTOL:
                    mid = 0.5 * (lo + hi)
                    if _dense(rx1, rx2, rx3, rx4, rx5, mid) > thr:
                        lo = mid
                    else:
                        hi = mid
                t_ev = t_old + hi * h
                x_ev = _dense(rx1, rx2, rx3, rx4, rx5, hi)
                y_ev = _dense(ry1, ry2, ry3, ry4, ry5, hi)
                if record == RECORD_EVAL:
                    while i_eval < n_eval and te[i_eval] < t_ev:
                        th = (te[i_eval] - t_old) / h
                        _push(&buf, te[i_eval], _dense(rx1, rx2, rx3, rx4, rx5, th),
                              _dense(ry1, ry2, ry3, ry4, ry5, th))
                        i_eval += 1
                min_gap = fmin(min_gap, 1.0 + x_ev)
                status = TOUCHDOWN
                break

            if record == RECORD_EVAL:
                while i_eval < n_eval and te[i_eval] <= t_new:
                    th = (te[i_eval] - t_old) / h
                    _push(&buf, te[i_eval], _dense(rx1, rx2, rx3, rx4, rx5, th),
                          _dense(ry1, ry2, ry3, ry4, ry5, th))
                    i_eval += 1
            elif record == RECORD_STEPS:
                _push(&buf, t_new, xn, yn)

            t = t_new
            x = xn
            y = yn
            k1x = k7x
            k1y = k7y
            if 1.0 + x < min_gap:
                min_gap = 1.0 + x

            if use_trap and 0.5 * y * y + 0.5 * x * x - lam / (1.0 + x) < trap_energy and x > trap_x:
                status = TRAPPED
                t_ev = t; x_ev = x; y_ev = y
                break
            if y < 0.0:
                seen_negative = True
            elif stop_on_turn and seen_negative:
                # locate y = 0 inside the step
                lo = 0.0
                hi = 1.0
                while (hi - lo) * h > EVENT_TTOL:
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
                if hypot(x - saddle_x, y) < saddle_radius:
                    if isnan(inside_since):
                        inside_since = t
                    elif t - inside_since >= saddle_dwell:
                        status = SADDLE
                        t_ev = t; x_ev = x; y_ev = y
                        break
                else:
                    inside_since = NAN

            if err > 0.0:
                fac = fmin(10.0, fmax(0.2, 0.9 * pow(err, -0.2)))
            else:
                fac = 10.0
            if last_rejected:
                fac = fmin(fac, 1.0)
            h = fmin(h * fac, h_max)
            last_rejected = False

        if record == RECORD_ENDS and buf.t[buf.n - 1] != t:
            _push(&buf, t, x, y)
        ta, xa, ya = _arrays(&buf)
        return (ta, xa, ya, status, t_ev, x_ev, y_ev, n_steps, n_rej, min_gap)
    finally:
        free(buf.t)
        free(buf.x)
        free(buf.y)
