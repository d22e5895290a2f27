"""Trajectories from rest, touchdown detection and regime classification."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from . import _backend
from . import _pykernel as K
from .model import Params, PhaseState, potential
from .steady import LAMBDA_STAR, X_FOLD, EquilibriumKind, equilibria

__all__ = [
    "IntegrationOptions",
    "ConvergedStable",
    "ConvergedSaddle",
    "Touchdown",
    "BudgetExhausted",
    "Outcome",
    "TrajectoryStats",
    "Trajectory",
    "integrate",
    "classify",
    "classify_trajectory",
    "first_turn",
    "prop2_invariant_check",
    "conservative_orbit",
    "phi",
    "lambda_d_conservative",
    "ResidenceProfile",
    "residence_profile",
]


@dataclass(frozen=True)
class IntegrationOptions:
    t_max: float = 2000.0
    rtol: float = 1e-10
    atol: float = 1e-12
    eps_td: float = 1e-6
    max_steps: int = 5_000_000
    h_max: float = math.inf
    #: saddle ball radius and dwell time for the critical saddle verdict
    tol_saddle: float = 1e-6
    t_dwell: float = 50.0
    trap_margin: float = 1e-12
    #: sample times; ``None`` records every accepted step
    t_eval: Optional[Sequence[float]] = None

    def __post_init__(self) -> None:
        for name in ("t_max", "rtol", "atol", "eps_td", "h_max", "tol_saddle", "t_dwell"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "t_eval"}
        d["h_max"] = None if math.isinf(self.h_max) else self.h_max
        d["t_eval"] = None if self.t_eval is None else [float(t) for t in self.t_eval]
        return d


DEFAULT_OPTIONS = IntegrationOptions()


@dataclass(frozen=True)
class ConvergedStable:
    """Stable operation: the orbit is trapped in the well of ``x2``."""

    x2: float
    name = "converged-stable"


@dataclass(frozen=True)
class ConvergedSaddle:
    """Critical behaviour: the orbit parks on the saddle within tolerance."""

    x1: float
    name = "converged-saddle"


@dataclass(frozen=True)
class Touchdown:
    t_td: float
    name = "touchdown"


@dataclass(frozen=True)
class BudgetExhausted:
    reason: str
    name = "budget-exhausted"


Outcome = Union[ConvergedStable, ConvergedSaddle, Touchdown, BudgetExhausted]


def outcome_to_dict(outcome: Outcome) -> dict:
    d = {"kind": outcome.name}
    d.update({k: getattr(outcome, k) for k in outcome.__dataclass_fields__})
    return d


@dataclass(frozen=True)
class TrajectoryStats:
    steps: int
    rejected_steps: int
    min_gap: float


@dataclass(frozen=True)
class Trajectory:
    params: Params
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    outcome: Outcome
    stats: TrajectoryStats
    #: state at the stop event (touchdown surface, trap entry, ...)
    event_state: Optional[tuple[float, float, float]] = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def samples(self) -> list[PhaseState]:
        return [PhaseState(float(t), float(x), float(y)) for t, x, y in zip(self.t, self.x, self.y)]

    def energy(self) -> np.ndarray:
        lam = self.params.lam
        return 0.5 * self.y**2 + 0.5 * self.x**2 - lam / (1.0 + self.x)


def _record_mode(opts: IntegrationOptions):
    if opts.t_eval is None:
        return K.RECORD_STEPS, None
    t_eval = np.asarray(opts.t_eval, dtype=float)
    if t_eval.ndim != 1 or np.any(np.diff(t_eval) <= 0):
        raise ValueError("t_eval must be a strictly increasing 1-d sequence")
    return K.RECORD_EVAL, t_eval


def _run(params, x0, y0, t0, opts, *, trap=None, saddle=None, stop_on_turn=False, record=None):
    mode, t_eval = _record_mode(opts)
    if record is not None:
        mode = record
    trap_energy, trap_x = trap if trap is not None else (math.nan, math.nan)
    saddle_x, saddle_r = saddle if saddle is not None else (0.0, -1.0)
    return _backend.integrate_kernel(
        float(params.lam), float(params.alpha), float(x0), float(y0), float(t0),
        float(t0 + opts.t_max), opts.rtol, opts.atol, opts.eps_td, int(opts.max_steps),
        -1.0, opts.h_max, mode, t_eval,
        trap_energy, trap_x, saddle_x, saddle_r, opts.t_dwell, bool(stop_on_turn),
    )


def _trap(lam: float, opts: IntegrationOptions):
    """Energy below the saddle level plus x > x1 confines the orbit to the
    well of x2; with nonincreasing energy it can never leave."""
    eq = equilibria(lam)
    if eq.kind is not EquilibriumKind.PAIR:
        return None, eq
    return (potential(eq.x1, lam) - opts.trap_margin, eq.x1), eq


def _budget_reason(status: int) -> str:
    return {
        K.T_MAX: "t_max reached without a verdict",
        K.MAX_STEPS: "step budget exhausted",
        K.UNDERFLOW: "step size underflow away from the pole",
    }[status]


def _build(params, raw, outcome) -> Trajectory:
    t, x, y, status, t_ev, x_ev, y_ev, n_steps, n_rej, min_gap = raw
    ev = None if math.isnan(t_ev) else (t_ev, x_ev, y_ev)
    return Trajectory(params, t, x, y, outcome, TrajectoryStats(n_steps, n_rej, min_gap), ev)


def integrate(
    params: Params, initial: PhaseState, opts: IntegrationOptions = DEFAULT_OPTIONS
) -> Trajectory:
    """Integrate to ``initial.t + opts.t_max``, stopping only at touchdown.

    The outcome of a run that survives is read off the final state: trapped
    in the well of ``x2`` gives :class:`ConvergedStable`, parked within
    ``tol_saddle`` of the saddle gives :class:`ConvergedSaddle`, anything
    else is :class:`BudgetExhausted`.
    """
    raw = _run(params, initial.x, initial.y, initial.t, opts)
    status = raw[3]
    if status == K.TOUCHDOWN:
        return _build(params, raw, Touchdown(raw[4]))
    if status != K.T_MAX:
        return _build(params, raw, BudgetExhausted(_budget_reason(status)))
    trap, eq = _trap(params.lam, opts)
    if raw[1].size:
        xf, yf = float(raw[1][-1]), float(raw[2][-1])
    else:  # t_eval sampling may leave nothing to inspect
        xf, yf = initial.x, initial.y
    if trap is not None:
        ef = 0.5 * yf * yf + potential(xf, params.lam)
        if ef < trap[0] and xf > trap[1]:
            return _build(params, raw, ConvergedStable(eq.x2))
        if math.hypot(xf - eq.x1, yf) < opts.tol_saddle:
            return _build(params, raw, ConvergedSaddle(eq.x1))
    return _build(params, raw, BudgetExhausted(_budget_reason(status)))


def classify_trajectory(
    params: Params, opts: IntegrationOptions = DEFAULT_OPTIONS, initial: Optional[PhaseState] = None
) -> Trajectory:
    """Run from rest at the origin (or ``initial``) until a verdict fires."""
    initial = initial or PhaseState(0.0, 0.0, 0.0)
    trap, eq = _trap(params.lam, opts)
    saddle = (eq.x1, opts.tol_saddle) if trap is not None else None
    raw = _run(params, initial.x, initial.y, initial.t, opts, trap=trap, saddle=saddle)
    status = raw[3]
    if status == K.TOUCHDOWN:
        outcome: Outcome = Touchdown(raw[4])
    elif status == K.TRAPPED:
        outcome = ConvergedStable(eq.x2)
    elif status == K.SADDLE:
        outcome = ConvergedSaddle(eq.x1)
    else:
        outcome = BudgetExhausted(_budget_reason(status))
    return _build(params, raw, outcome)


def classify(params: Params, opts: IntegrationOptions = DEFAULT_OPTIONS) -> Outcome:
    """Regime of the orbit released from rest at the origin."""
    return classify_trajectory(params, replace(opts, t_eval=()), None).outcome


def first_turn(params: Params, opts: IntegrationOptions = DEFAULT_OPTIONS) -> Union[Touchdown, PhaseState, BudgetExhausted]:
    """Follow the orbit from rest until its velocity first returns to zero.

    Returns the turning state, or the touchdown if the pole is hit first.
    A turn at ``x > x1`` means the orbit stays off the pole; for the
    undamped system this is exactly the periodic case.
    """
    raw = _run(params, 0.0, 0.0, 0.0, replace(opts, t_eval=()), stop_on_turn=True)
    status = raw[3]
    if status == K.TOUCHDOWN:
        return Touchdown(raw[4])
    if status == K.TURNED:
        return PhaseState(raw[4], raw[5], raw[6])
    return BudgetExhausted(_budget_reason(status))


def prop2_invariant_check(
    lam: float,
    alpha: float,
    n_samples: int = 200,
    *,
    seed: int = 0,
    t_max: float = 100.0,
    opts: IntegrationOptions = DEFAULT_OPTIONS,
) -> bool:
    """Sample the disk-and-energy set ``U`` and confirm that it traps orbits.

    ``U = {x^2 + y^2 < 1/16, E <= -lam}``; every sampled orbit must stay in
    ``U`` (energy to 1e-12 slack) and be classified as stable operation.
    """
    if not lam < 1.0 / 32.0:
        raise ValueError("the invariant disk argument needs lam < 1/32")
    rng = np.random.default_rng(seed)
    points: list[tuple[float, float]] = []
    while len(points) < n_samples:
        r = 0.25 * math.sqrt(rng.random())
        th = 2.0 * math.pi * rng.random()
        x, y = r * math.cos(th), r * math.sin(th)
        if x * x + y * y < 1.0 / 16.0 and 0.5 * y * y + potential(x, lam) <= -lam:
            points.append((x, y))
    params = Params(lam, alpha)
    run_opts = replace(opts, t_max=t_max, t_eval=None)
    for x0, y0 in points:
        traj = integrate(params, PhaseState(0.0, x0, y0), run_opts)
        if not isinstance(traj.outcome, ConvergedStable):
            return False
        d = traj.x**2 + traj.y**2
        if np.any(d >= 1.0 / 16.0) or np.any(traj.energy() > -lam + 1e-12):
            return False
        if not isinstance(classify_trajectory(params, opts, PhaseState(0.0, x0, y0)).outcome, ConvergedStable):
            return False
    return True


def conservative_orbit(lam: float, e0: float, x_grid: Sequence[float], *, well_only: bool = True) -> np.ndarray:
    """Level set ``y = +-sqrt(2 (e0 - F(x)))`` of the undamped system.

    Returns an ``(n, 2)`` array: the upper branch left to right, then the
    lower branch right to left, so consecutive rows trace a closed curve.
    With ``well_only`` the curve is restricted to ``x >= x1`` (the potential
    well of ``x2``) whenever the equilibria exist.
    """
    xg = np.asarray(x_grid, dtype=float)
    xg = xg[xg > -1.0]
    if well_only:
        eq = equilibria(lam)
        if eq.exists:
            xg = xg[xg >= eq.x1]
    gap = e0 - (0.5 * xg**2 - lam / (1.0 + xg))
    keep = gap >= -1e-14
    xk = xg[keep]
    yk = np.sqrt(2.0 * np.clip(gap[keep], 0.0, None))
    upper = np.column_stack([xk, yk])
    lower = np.column_stack([xk[::-1], -yk[::-1]])
    lower = lower[lower[:, 1] != 0.0]
    return np.vstack([upper, lower]) if len(upper) else np.empty((0, 2))


def phi(lam: float) -> float:
    """Height of the saddle's potential above the origin's, ``F(x1) - F(0)``."""
    eq = equilibria(lam)
    if not eq.exists:
        raise ValueError(f"no equilibria for lam={lam!r}")
    return potential(eq.x1, lam) + lam


def lambda_d_conservative(lo: float = 1e-6, hi: float = LAMBDA_STAR, tol: float = 1e-12) -> float:
    """Undamped dynamic pull-in value: the zero of :func:`phi` by bisection."""
    flo = phi(lo)
    if not (flo > 0.0 > phi(hi)):
        raise ValueError("phi does not change sign on the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if phi(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


#: load excess over 4/27 for which the fold bottleneck still stands in for the saddle
GHOST_WINDOW = 2e-2


@dataclass(frozen=True)
class ResidenceProfile:
    t_approach: float
    t_dwell: float
    t_collapse: float
    t_td: float
    saddle_radius: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def residence_profile(
    params: Params, saddle_radius: float = 0.05, opts: IntegrationOptions = DEFAULT_OPTIONS
) -> ResidenceProfile:
    """Split a touchdown orbit into approach, saddle dwell and collapse times.

    The dwell is the time between the first entry into and the last exit
    from the ball of ``saddle_radius`` about ``(x1, 0)``. Slightly above the
    static limit (within ``GHOST_WINDOW``) the ball is centred on the fold
    point ``(-1/3, 0)`` instead.
    """
    eq = equilibria(params.lam)
    if eq.exists:
        xc = eq.x1
    elif params.lam - LAMBDA_STAR <= GHOST_WINDOW:
        # just past the fold the saddle is gone, but the orbit still slows
        # down in the bottleneck it leaves behind at x = -1/3
        xc = X_FOLD
    else:
        raise ValueError(f"lam={params.lam!r} has no saddle; residence profile undefined")
    traj = classify_trajectory(params, replace(opts, t_eval=None))
    if not isinstance(traj.outcome, Touchdown):
        raise ValueError(f"orbit does not touch down ({traj.outcome.name})")
    inside = np.hypot(traj.x - xc, traj.y) < saddle_radius
    if not inside.any():
        raise ValueError("orbit never enters the saddle ball")
    idx = np.flatnonzero(inside)
    t_in = _crossing_time(traj, xc, saddle_radius, idx[0], entering=True)
    t_out = _crossing_time(traj, xc, saddle_radius, idx[-1], entering=False)
    t_td = traj.outcome.t_td
    return ResidenceProfile(float(t_in - traj.t[0]), float(t_out - t_in), float(t_td - t_out), float(t_td), saddle_radius)


def _crossing_time(traj: Trajectory, xs: float, r: float, i: int, *, entering: bool) -> float:
    """Linear interpolation of the ball-boundary crossing next to sample ``i``."""
    j = i - 1 if entering else i + 1
    if j < 0 or j >= len(traj.t):
        return float(traj.t[i])
    di = math.hypot(traj.x[i] - xs, traj.y[i]) - r
    dj = math.hypot(traj.x[j] - xs, traj.y[j]) - r
    w = di / (di - dj)
    return float(traj.t[i] + w * (traj.t[j] - traj.t[i]))
