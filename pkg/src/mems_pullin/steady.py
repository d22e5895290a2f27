"""Stationary solutions, their linear stability, and the node threshold."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Optional

from .model import EPS_DOMAIN, Params, cubic_g, dforce_dx, force

__all__ = [
    "LAMBDA_STAR",
    "X_FOLD",
    "EquilibriumKind",
    "Equilibria",
    "StabilityLabel",
    "StabilityReport",
    "static_pullin",
    "equilibria",
    "stability",
    "fisher_slope",
    "heteroclinic_threshold",
]

LAMBDA_STAR = 4.0 / 27.0
X_FOLD = -1.0 / 3.0

DEGENERATE_TOL = 1e-12
ROOT_RESIDUAL_TOL = 1e-14
EQUILIBRIUM_RESIDUAL_TOL = 1e-9
STIFFNESS_ZERO_TOL = 1e-9
NODE_TIE_TOL = 1e-12


class EquilibriumKind(str, enum.Enum):
    PAIR = "pair"
    DEGENERATE = "degenerate"
    NONE = "none"


@dataclass(frozen=True)
class Equilibria:
    """Stationary points ``x1 <= x2`` on (-1, 0) for a given load."""

    lam: float
    kind: EquilibriumKind
    x1: Optional[float] = None
    x2: Optional[float] = None

    @property
    def exists(self) -> bool:
        return self.kind is not EquilibriumKind.NONE


class StabilityLabel(str, enum.Enum):
    SADDLE = "saddle"
    STABLE_NODE = "stable-node"
    STABLE_FOCUS = "stable-focus"
    CENTER = "center"
    DEGENERATE = "degenerate-center-direction"


@dataclass(frozen=True)
class StabilityReport:
    x_eq: float
    stiffness: float
    mu_plus: complex
    mu_minus: complex
    label: StabilityLabel


def static_pullin() -> float:
    """Largest load admitting a stationary solution, ``-cubic_g(-1/3) = 4/27``."""
    return LAMBDA_STAR


def _cubic_residual(x: float, lam: float) -> float:
    return cubic_g(x) + lam


def _cubic_slope(x: float) -> float:
    # d/dx x(1+x)^2
    return (1.0 + x) * (1.0 + 3.0 * x)


def _bracketed_root(lam: float, lo: float, hi: float, maxiter: int = 200) -> float:
    """Newton on ``cubic_g + lam`` safeguarded by a sign-change bracket."""
    flo = _cubic_residual(lo, lam)
    fhi = _cubic_residual(hi, lam)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError(f"no sign change on [{lo}, {hi}] for lam={lam}")
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = _cubic_residual(x, lam)
        if fx == 0.0:
            return x
        if (fx > 0.0) == (flo > 0.0):
            lo, flo = x, fx
        else:
            hi = x
        if abs(fx) <= ROOT_RESIDUAL_TOL and hi - lo <= 4.0 * math.ulp(abs(x) + 1.0):
            return x
        dfx = _cubic_slope(x)
        step_ok = False
        if dfx != 0.0:
            xn = x - fx / dfx
            if lo < xn < hi:
                step_ok = True
        if not step_ok:
            xn = 0.5 * (lo + hi)
        if xn == x:
            break
        x = xn
    # polish: pick the best point seen among x and the bracket ends
    return min((x, lo, hi), key=lambda z: abs(_cubic_residual(z, lam)))


def equilibria(lam: float) -> Equilibria:
    if not lam > 0.0:
        raise ValueError(f"lam must be positive, got {lam!r}")
    if abs(lam - LAMBDA_STAR) <= DEGENERATE_TOL:
        return Equilibria(lam, EquilibriumKind.DEGENERATE, X_FOLD, X_FOLD)
    if lam > LAMBDA_STAR:
        return Equilibria(lam, EquilibriumKind.NONE)
    x1 = _bracketed_root(lam, -1.0 + EPS_DOMAIN, X_FOLD)
    x2 = _bracketed_root(lam, X_FOLD, -EPS_DOMAIN)
    return Equilibria(lam, EquilibriumKind.PAIR, x1, x2)


def _require_pair(lam: float) -> Equilibria:
    eq = equilibria(lam)
    if eq.kind is not EquilibriumKind.PAIR:
        raise ValueError(f"lam={lam!r} must lie in (0, 4/27) for a saddle/node pair")
    return eq


def stability(x_eq: float, params: Params) -> StabilityReport:
    """Eigenvalues ``-alpha/2 +- sqrt(alpha^2/4 - f_x)`` and their type."""
    residual = force(x_eq, params.lam)
    if abs(residual) > EQUILIBRIUM_RESIDUAL_TOL:
        raise ValueError(
            f"x={x_eq!r} is not an equilibrium for lam={params.lam!r} (residual {residual:.3e})"
        )
    alpha = params.alpha
    d = dforce_dx(x_eq, params.lam)
    half = 0.5 * alpha
    disc = half * half - d
    if disc >= 0.0:
        root = math.sqrt(disc)
        # the larger-magnitude root has no cancellation; Vieta gives the other
        big = -half - root
        if big != 0.0:
            small = d / big
        else:
            small = 0.0
        mu_plus, mu_minus = complex(max(small, big)), complex(min(small, big))
    else:
        root = cmath.sqrt(disc)
        mu_plus, mu_minus = -half + root, -half - root

    if abs(d) <= STIFFNESS_ZERO_TOL:
        label = StabilityLabel.DEGENERATE
    elif d < 0.0:
        label = StabilityLabel.SADDLE
    elif alpha == 0.0:
        label = StabilityLabel.CENTER
    elif alpha >= 2.0 * math.sqrt(d) - NODE_TIE_TOL:
        label = StabilityLabel.STABLE_NODE
    else:
        label = StabilityLabel.STABLE_FOCUS
    return StabilityReport(x_eq, d, mu_plus, mu_minus, label)


def fisher_slope(lam: float) -> float:
    """sup over x of f(x)/(x - x2), attained at x2 since f_x is increasing."""
    eq = _require_pair(lam)
    return dforce_dx(eq.x2, lam)


def heteroclinic_threshold(lam: float) -> float:
    """Damping above which the stable point is a node and the saddle's
    unstable branch connects to it."""
    return 2.0 * math.sqrt(fisher_slope(lam))
