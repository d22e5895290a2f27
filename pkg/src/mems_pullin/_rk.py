"""Adaptive Dormand-Prince 5(4) for scalar ODEs, with dense output.

Used by the manifold tracer, where the independent variable is ``u`` or
``v`` rather than time. Integration may run in either direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from ._pykernel import (
    A21, A31, A32, A41, A42, A43, A51, A52, A53, A54, A61, A62, A63, A64, A65,
    A71, A73, A74, A75, A76, C2, C3, C4, C5, D1, D3, D4, D5, D6, D7,
    E1, E3, E4, E5, E6, E7,
)


@dataclass(frozen=True)
class DenseStep:
    t0: float
    h: float
    r1: float
    r2: float
    r3: float
    r4: float
    r5: float

    @property
    def t1(self) -> float:
        return self.t0 + self.h

    @property
    def y0(self) -> float:
        return self.r1

    @property
    def y1(self) -> float:
        return self.r1 + self.r2

    def __call__(self, t: float) -> float:
        th = (t - self.t0) / self.h
        th1 = 1.0 - th
        return self.r1 + th * (self.r2 + th1 * (self.r3 + th * (self.r4 + th1 * self.r5)))


class StepFailure(RuntimeError):
    pass


def solve_scalar(
    fun: Callable[[float, float], float],
    t0: float,
    y0: float,
    t_end: float,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-13,
    h_init: Optional[float] = None,
    h_max: float = math.inf,
    max_steps: int = 200_000,
    stop: Optional[Callable[[float, float, float], bool]] = None,
) -> tuple[list[DenseStep], bool]:
    """Integrate ``y' = fun(t, y)`` from ``t0`` toward ``t_end``.

    ``fun`` may return NaN to flag an inadmissible stage; the step is then
    retried with a quarter of the size. ``stop(t, y, y')`` is tested after
    every accepted step. Returns the accepted steps and whether ``stop``
    fired.
    """
    direction = 1.0 if t_end >= t0 else -1.0
    span = abs(t_end - t0)
    t, y = t0, y0
    k1 = fun(t, y)
    if not math.isfinite(k1):
        raise StepFailure(f"right-hand side undefined at the start ({t0}, {y0})")
    if h_init is None:
        sc = atol + rtol * abs(y)
        d0, d1 = abs(y) / sc, abs(k1) / sc
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    else:
        h = h_init
    h = min(h, h_max, span)
    steps: list[DenseStep] = []
    last_rejected = False
    while abs(t_end - t) > 0.0:
        if len(steps) >= max_steps:
            raise StepFailure("step budget exhausted")
        h = min(h, abs(t_end - t))
        if h <= 1e-15 * max(1.0, abs(t)):
            raise StepFailure(f"step size underflow at t={t}")
        s = direction * h
        k2 = fun(t + C2 * s, y + s * A21 * k1)
        k3 = fun(t + C3 * s, y + s * (A31 * k1 + A32 * k2))
        k4 = fun(t + C4 * s, y + s * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = fun(t + C5 * s, y + s * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = fun(t + s, y + s * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        yn = y + s * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
        k7 = fun(t + s, yn)
        err_abs = s * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        err = abs(err_abs) / (atol + rtol * max(abs(y), abs(yn)))
        if not math.isfinite(err):
            h *= 0.25
            last_rejected = True
            continue
        if err > 1.0:
            h *= max(0.2, 0.9 * err**-0.2)
            last_rejected = True
            continue
        r2 = yn - y
        r3 = s * k1 - r2
        r4 = r2 - s * k7 - r3
        r5 = s * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7)
        steps.append(DenseStep(t, s, y, r2, r3, r4, r5))
        t = t + s if abs(t_end - (t + s)) > 1e-15 * max(1.0, abs(t_end)) else t_end
        y, k1 = yn, k7
        if stop is not None and stop(t, y, k1):
            return steps, True
        fac = min(10.0, max(0.2, 0.9 * err**-0.2)) if err > 0.0 else 10.0
        if last_rejected:
            fac = min(fac, 1.0)
        h = min(h * fac, h_max)
        last_rejected = False
    return steps, False
