"""The saddle's separatrix branch as a graph, and its axis crossing.

Reversing time and velocity and shifting to the saddle, ``u = x - x1``,
``v = -y``, turns the branch of the saddle's stable manifold that arrives
from ``x > x1`` into the first-quadrant unstable branch of

    u' = v,   v' = alpha*v - f(u + x1, lam).

While ``v > 0`` the branch is a graph ``v = Phi(u)`` solving
``dPhi/du = alpha - f(u + x1)/Phi`` with ``Phi(0) = 0`` and slope ``mu+``
at the saddle. Where the branch returns to ``v = 0`` it meets the x-axis at
``x_bar = u_bar + x1``; the origin lies in the basin of ``x2`` iff
``x_bar > 0`` (or the branch never returns).
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._rk import DenseStep, solve_scalar
from .model import Params, dforce_dx
from .steady import EquilibriumKind, equilibria

__all__ = [
    "ManifoldTrace",
    "seed_slope",
    "default_u_max",
    "trace_stable_manifold",
    "crossing_x_bar",
    "origin_is_stable",
    "lemma1_bound_check",
    "monotonicity_check",
]

TRACE_RTOL = 1e-10
TRACE_ATOL = 1e-13
#: the graph leg hands over to the v-parameterised leg once dPhi/du <= this
SWITCH_SLOPE = -1.0


@dataclass(frozen=True)
class ManifoldTrace:
    lam: float
    alpha: float
    x1: float
    x2: float
    mu_plus: float
    seed: float
    u_samples: np.ndarray
    phi_samples: np.ndarray
    #: u_bar where Phi returns to zero; None if not reached before ``horizon``
    crossing: Optional[float]
    horizon: float
    graph_steps: tuple[DenseStep, ...] = field(repr=False, default=())
    v_steps: tuple[DenseStep, ...] = field(repr=False, default=())

    @property
    def x_bar(self) -> Optional[float]:
        return None if self.crossing is None else self.crossing + self.x1

    @property
    def u_end(self) -> float:
        return float(self.u_samples[-1])

    def phi_at(self, u: float) -> float:
        """Dense evaluation of the graph at ``u`` (NaN outside the trace)."""
        if u < 0.0 or u > self.u_end:
            return math.nan
        if u <= self.seed:
            return self.mu_plus * u
        gs = self.graph_steps
        if gs and u <= gs[-1].t1:
            i = bisect.bisect_left([s.t1 for s in gs], u)
            return gs[min(i, len(gs) - 1)](u)
        # v leg: u(v) increases as v decreases; invert inside the bracketing step
        for step in self.v_steps:
            ua, ub = step.y0, step.y1
            if ua <= u <= ub:
                va, vb = step.t0, step.t1
                for _ in range(80):
                    vm = 0.5 * (va + vb)
                    if step(vm) < u:
                        va = vm
                    else:
                        vb = vm
                return 0.5 * (va + vb)
        return math.nan

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "alpha": self.alpha,
            "x1": self.x1,
            "x2": self.x2,
            "mu_plus": self.mu_plus,
            "seed": self.seed,
            "crossing": self.crossing,
            "x_bar": self.x_bar,
            "horizon": self.horizon,
            "u": self.u_samples.tolist(),
            "phi": self.phi_samples.tolist(),
        }


def seed_slope(x1: float, lam: float, alpha: float) -> float:
    """Unstable eigenvalue of the reversed saddle, ``alpha/2 + sqrt(alpha^2/4 - f_x)``."""
    d = dforce_dx(x1, lam)
    return 0.5 * alpha + math.sqrt(0.25 * alpha * alpha - d)


def default_u_max(x1: float, x2: float) -> float:
    return 10.0 * (x2 - x1) + 5.0


def _f(x: float, lam: float) -> float:
    g = 1.0 + x
    if g <= 0.0:
        return math.nan
    return x + lam / (g * g)


def trace_stable_manifold(
    params: Params,
    u_max: Optional[float] = None,
    *,
    u_stop: Optional[float] = None,
    seed_offset: Optional[float] = None,
    rtol: float = TRACE_RTOL,
    atol: float = TRACE_ATOL,
) -> ManifoldTrace:
    """Trace ``Phi`` from the saddle until it returns to zero or ``u_max``.

    ``u_stop`` ends the trace early (without a crossing) once the graph is
    still positive there; the pull-in bisection uses ``u_stop = -x1``.
    """
    lam, alpha = params.lam, params.alpha
    eq = equilibria(lam)
    if eq.kind is not EquilibriumKind.PAIR:
        raise ValueError(f"cannot seed the separatrix: lam={lam!r} outside (0, 4/27)")
    x1, x2 = eq.x1, eq.x2
    mu = seed_slope(x1, lam, alpha)
    delta = seed_offset if seed_offset is not None else 1e-8 * max(1.0, abs(x1))
    if u_max is None:
        u_max = default_u_max(x1, x2)
    horizon = u_max if u_stop is None else min(u_max, u_stop)
    l_gap = x2 - x1

    def graph_rhs(u: float, p: float) -> float:
        if not p > 0.0:
            return math.nan
        return alpha - _f(u + x1, lam) / p

    def switch(u: float, p: float, dp: float) -> bool:
        return u > l_gap and dp <= SWITCH_SLOPE

    gsteps, switched = solve_scalar(
        graph_rhs, delta, mu * delta, horizon, rtol=rtol, atol=atol,
        h_init=0.1 * delta, stop=switch,
    )
    us = [0.0, delta] + [s.t1 for s in gsteps]
    ps = [0.0, mu * delta] + [s.y1 for s in gsteps]
    crossing = None
    vsteps: list[DenseStep] = []
    if switched:
        # du/dv = v / (alpha v - f) is regular down to v = 0 since f > 0 there
        def v_rhs(v: float, u: float) -> float:
            den = alpha * v - _f(u + x1, lam)
            if not den < 0.0:
                return math.nan
            return v / den

        u_sw, v_sw = us[-1], ps[-1]
        vsteps, _ = solve_scalar(v_rhs, v_sw, u_sw, 0.0, rtol=rtol, atol=atol)
        us += [s.y1 for s in vsteps]
        ps += [s.t1 for s in vsteps]
        ps[-1] = 0.0
        crossing = us[-1]
    return ManifoldTrace(
        lam, alpha, x1, x2, mu, delta, np.asarray(us), np.asarray(ps), crossing,
        horizon, tuple(gsteps), tuple(vsteps),
    )


def crossing_x_bar(params: Params, u_max: Optional[float] = None) -> Optional[float]:
    """Abscissa where the separatrix branch meets the x-axis, if it does."""
    return trace_stable_manifold(params, u_max).x_bar


def origin_is_stable(params: Params) -> bool:
    """True when the branch stays above the axis up to x = 0, i.e. x_bar > 0."""
    eq = equilibria(params.lam)
    tr = trace_stable_manifold(params, u_stop=-eq.x1)
    return tr.crossing is None or tr.x_bar > 0.0


def lemma1_bound_check(params: Params, n_grid: int = 200, slack: float = 1e-9) -> bool:
    """Check ``Phi(u) >= alpha*u`` on ``[0, x2 - x1]`` where ``f < 0``."""
    if not params.alpha > 0.0:
        raise ValueError("the linear lower bound is stated for alpha > 0")
    tr = trace_stable_manifold(params)
    span = tr.x2 - tr.x1
    if tr.u_end < span:
        return False
    mask = tr.u_samples <= span
    if np.any(tr.phi_samples[mask] < params.alpha * tr.u_samples[mask] - slack):
        return False
    grid = np.linspace(0.0, span, n_grid)
    vals = np.array([tr.phi_at(u) for u in grid])
    return bool(np.all(vals >= params.alpha * grid - slack))


def monotonicity_check(lam: float, alphas: Sequence[float], n_grid: int = 400) -> bool:
    """Traces for increasing damping must be strictly ordered pointwise,
    and their seed slopes and axis crossings strictly increasing."""
    alphas = list(alphas)
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly increasing")
    traces = [trace_stable_manifold(Params(lam, a)) for a in alphas]
    for lo, hi in zip(traces, traces[1:]):
        if not hi.mu_plus > lo.mu_plus:
            return False
        u_top = min(lo.u_end, hi.u_end)
        u_bot = 10.0 * max(lo.seed, hi.seed)
        # stay off the crossing endpoint where the lower trace is exactly 0
        grid = np.linspace(u_bot, u_top, n_grid)[:-1]
        a = np.array([lo.phi_at(u) for u in grid])
        b = np.array([hi.phi_at(u) for u in grid])
        if not np.all(b > a):
            return False
        if lo.crossing is not None and hi.crossing is not None and not hi.crossing > lo.crossing:
            return False
        if lo.crossing is None and hi.crossing is not None:
            return False
    return True
