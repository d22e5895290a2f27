"""Vector field, potential and energy of the mass-spring MEMS model.

The dimensionless equation of motion is

    x'' + alpha * x' + x = -lam / (1 + x)**2

written as the first-order system x' = y, y' = -(alpha*y + f(x, lam)) with
f(x, lam) = x + lam / (1 + x)**2. The plate touches the ground at x = -1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "EPS_DOMAIN",
    "DomainError",
    "Params",
    "PhaseState",
    "force",
    "cubic_g",
    "potential",
    "energy",
    "dforce_dx",
    "dforce_dlambda",
    "vector_field",
]

#: States closer than this to the pole x = -1 are rejected.
EPS_DOMAIN = 1e-13


class DomainError(ValueError):
    """Raised when a state lies at or beyond the touchdown singularity."""


def _check_x(x: float) -> None:
    if not x > -1.0 + EPS_DOMAIN:
        raise DomainError(f"x = {x!r} is at or beyond the touchdown pole x = -1")


@dataclass(frozen=True)
class Params:
    """One instance of the system: load ``lam`` and damping ``alpha``.

    ``lam`` is proportional to the applied voltage squared; ``alpha`` is the
    inverse quality factor (``alpha = 0`` is the conservative case).
    """

    lam: float
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise ValueError(f"lam must be positive and finite, got {self.lam!r}")
        if not (self.alpha >= 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be nonnegative and finite, got {self.alpha!r}")

    @classmethod
    def from_quality_factor(cls, lam: float, gamma: float) -> "Params":
        return cls(lam, 1.0 / gamma)


@dataclass(frozen=True)
class PhaseState:
    t: float
    x: float
    y: float

    def __post_init__(self) -> None:
        _check_x(self.x)


def force(x: float, lam: float) -> float:
    """Restoring plus electrostatic force ``x + lam/(1+x)^2``."""
    _check_x(x)
    return x + lam / ((1.0 + x) * (1.0 + x))


def cubic_g(x: float) -> float:
    """``x (1+x)^2``; stationary points solve ``cubic_g(x) = -lam``."""
    return x * (1.0 + x) * (1.0 + x)


def potential(x: float, lam: float) -> float:
    """Primitive of :func:`force`: ``x^2/2 - lam/(1+x)``."""
    _check_x(x)
    return 0.5 * x * x - lam / (1.0 + x)


def energy(state: PhaseState, lam: float) -> float:
    return 0.5 * state.y * state.y + potential(state.x, lam)


def dforce_dx(x: float, lam: float) -> float:
    _check_x(x)
    return 1.0 - 2.0 * lam / (1.0 + x) ** 3


def dforce_dlambda(x: float) -> float:
    """Sensitivity of the force to the load, ``1/(1+x)^2`` (always positive)."""
    _check_x(x)
    return 1.0 / ((1.0 + x) * (1.0 + x))


def vector_field(state: PhaseState, params: Params) -> tuple[float, float]:
    return state.y, -(params.alpha * state.y + force(state.x, params.lam))
