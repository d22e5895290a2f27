"""Dynamic pull-in thresholds: critical damping alpha*(lam) and its inverse.

Two independent predicates decide which side of the threshold a parameter
point is on:

* ``manifold``: the separatrix branch of the saddle stays above the axis up
  to ``x = 0`` (cheap, smooth, default tolerance 1e-8);
* ``trajectory``: the orbit released from rest is classified directly
  (expensive near threshold, default tolerance 1e-6).
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .dynamics import (
    DEFAULT_OPTIONS,
    BudgetExhausted,
    ConvergedStable,
    IntegrationOptions,
    Touchdown,
    classify,
    first_turn,
    lambda_d_conservative,
)
from .manifold import origin_is_stable
from .model import Params, PhaseState
from .steady import LAMBDA_STAR

__all__ = [
    "Method",
    "BracketError",
    "ThresholdPoint",
    "CurvePoint",
    "PullInCurve",
    "ALPHA_CAP",
    "LAMBDA_D0",
    "alpha_star",
    "lambda_d_star",
    "lambda_threshold",
    "sweep_curve",
]

LAMBDA_D0 = 0.125
ALPHA_CAP = 1e4
LAMBDA_PAD = 1e-9


class Method(str, enum.Enum):
    MANIFOLD = "manifold"
    TRAJECTORY = "trajectory"

    @property
    def default_tol(self) -> float:
        return 1e-8 if self is Method.MANIFOLD else 1e-6


class BracketError(RuntimeError):
    """No sign change before the search cap."""


@dataclass(frozen=True)
class ThresholdPoint:
    lam: float
    alpha_star: float
    method: Method
    half_width: float
    #: set when bisection stopped on a point that could not be classified
    ambiguous: bool = False

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "alpha_star": self.alpha_star,
            "method": self.method.value,
            "half_width": self.half_width,
            "ambiguous": self.ambiguous,
        }


def _stable(params: Params, method: Method, opts: IntegrationOptions) -> Optional[bool]:
    """True = stable operation, False = touchdown side, None = undecided."""
    if method is Method.MANIFOLD:
        return origin_is_stable(params)
    if params.alpha == 0.0:
        turn = first_turn(params, opts)
        if isinstance(turn, PhaseState):
            return True
        return False if isinstance(turn, Touchdown) else None
    outcome = classify(params, opts)
    if isinstance(outcome, ConvergedStable):
        return True
    if isinstance(outcome, BudgetExhausted):
        return None
    # Touchdown, and the critical saddle case, which sits on the threshold
    return False


def _bisect(pred, lo: float, hi: float, tol: float):
    """Shrink ``[lo, hi]`` with ``pred(lo)`` False and ``pred(hi)`` True.

    An undecided midpoint ends the search: the threshold is then only known
    to lie in the current bracket.
    """
    while 0.5 * (hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        s = pred(mid)
        if s is None:
            return lo, hi, True
        if s:
            hi = mid
        else:
            lo = mid
    return lo, hi, False


def alpha_star(
    lam: float,
    method: Method | str = Method.MANIFOLD,
    tol: Optional[float] = None,
    opts: IntegrationOptions = DEFAULT_OPTIONS,
    *,
    alpha_cap: float = ALPHA_CAP,
) -> ThresholdPoint:
    """Critical damping separating touchdown (below) from stable operation."""
    method = Method(method)
    if not LAMBDA_D0 < lam < LAMBDA_STAR:
        raise ValueError(f"lam={lam!r} must lie strictly inside (1/8, 4/27)")
    tol = method.default_tol if tol is None else tol

    def pred(a: float) -> Optional[bool]:
        return _stable(Params(lam, a), method, opts)

    lo, hi = 0.0, min(1.0, alpha_cap)
    while True:
        s = pred(hi)
        if s:
            break
        if s is False:
            lo = hi
        hi *= 2.0
        if hi > alpha_cap:
            raise BracketError(
                f"no stable operation found for lam={lam!r} up to alpha={alpha_cap:g}"
            )
    lo, hi, amb = _bisect(pred, lo, hi, tol)
    return ThresholdPoint(lam, 0.5 * (lo + hi), method, 0.5 * (hi - lo), amb)


@dataclass(frozen=True)
class CurvePoint:
    alpha: float
    lambda_d: float
    half_width: float
    method: Method
    ambiguous: bool = False
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "lambda_d": self.lambda_d,
            "half_width": self.half_width,
            "method": self.method.value,
            "ambiguous": self.ambiguous,
            "error": self.error,
        }


def lambda_threshold(
    alpha: float,
    method: Method | str = Method.TRAJECTORY,
    tol: Optional[float] = None,
    opts: IntegrationOptions = DEFAULT_OPTIONS,
) -> CurvePoint:
    """Dynamic pull-in load at damping ``alpha`` with its bracket half-width.

    The undamped value comes from the potential-barrier bisection; for
    ``alpha > 0`` the load is bisected on ``(1/8, 4/27)`` whose ends are
    known to be stable and touchdown respectively.
    """
    method = Method(method)
    if not alpha >= 0.0:
        raise ValueError("alpha must be nonnegative")
    tol = method.default_tol if tol is None else tol
    if alpha == 0.0 and method is Method.MANIFOLD:
        return CurvePoint(0.0, lambda_d_conservative(), 1e-12, method)
    if alpha == 0.0:
        lo, hi = 1e-3, LAMBDA_STAR - LAMBDA_PAD
    else:
        lo, hi = LAMBDA_D0 + LAMBDA_PAD, LAMBDA_STAR - LAMBDA_PAD

    def touchdown(lam: float) -> Optional[bool]:
        s = _stable(Params(lam, alpha), method, opts)
        return None if s is None else not s

    lo, hi, amb = _bisect(touchdown, lo, hi, tol)
    return CurvePoint(alpha, 0.5 * (lo + hi), 0.5 * (hi - lo), method, amb)


def lambda_d_star(
    alpha: float,
    tol: Optional[float] = None,
    method: Method | str = Method.TRAJECTORY,
    opts: IntegrationOptions = DEFAULT_OPTIONS,
) -> float:
    """Dynamic pull-in value: the load above which the orbit from rest
    touches down. At ``alpha = 0`` this is the exact undamped value."""
    if alpha == 0.0:
        return lambda_d_conservative()
    return lambda_threshold(alpha, method, tol, opts).lambda_d


@dataclass(frozen=True)
class PullInCurve:
    points: tuple[CurvePoint, ...]
    method: Method
    tol: float
    opts: dict = field(default_factory=dict)

    @property
    def failures(self) -> list[CurvePoint]:
        return [p for p in self.points if not p.ok]

    def _good(self) -> list[CurvePoint]:
        return [p for p in self.points if p.ok]

    @property
    def strictly_increasing(self) -> bool:
        vals = [p.lambda_d for p in self._good()]
        return all(b > a for a, b in zip(vals, vals[1:]))

    @property
    def in_range(self) -> bool:
        return all(
            LAMBDA_D0 - 1e-8 < p.lambda_d < LAMBDA_STAR if p.alpha == 0.0
            else LAMBDA_D0 < p.lambda_d < LAMBDA_STAR
            for p in self._good()
        )

    def as_dict(self) -> dict:
        return {
            "method": self.method.value,
            "tol": self.tol,
            "strictly_increasing": self.strictly_increasing,
            "in_range": self.in_range,
            "points": [p.as_dict() for p in self.points],
        }


def _curve_point(args) -> CurvePoint:
    alpha, method, tol, opts = args
    try:
        if alpha == 0.0:
            return CurvePoint(0.0, lambda_d_conservative(), 1e-12, method)
        return lambda_threshold(alpha, method, tol, opts)
    except (ValueError, RuntimeError) as exc:
        return CurvePoint(alpha, math.nan, math.nan, method, error=str(exc))


def sweep_curve(
    alpha_grid: Sequence[float],
    tol: Optional[float] = None,
    method: Method | str = Method.TRAJECTORY,
    opts: IntegrationOptions = DEFAULT_OPTIONS,
    *,
    jobs: int = 1,
) -> PullInCurve:
    """Dynamic pull-in values over a damping grid, one task per grid point.

    Failures are recorded per point and the sweep carries on; results keep
    grid order whatever ``jobs`` is.
    """
    grid = [float(a) for a in alpha_grid]
    if not grid:
        raise ValueError("empty damping grid")
    if any(a < 0.0 for a in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("damping grid must be nonnegative and strictly increasing")
    method = Method(method)
    tol = method.default_tol if tol is None else tol
    tasks = [(a, method, tol, opts) for a in grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            points = list(pool.map(_curve_point, tasks))
    else:
        points = [_curve_point(t) for t in tasks]
    return PullInCurve(tuple(points), method, tol, opts.to_dict())
