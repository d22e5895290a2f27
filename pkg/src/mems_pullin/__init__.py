"""Dynamic pull-in of a damped electrostatic MEMS mass-spring actuator.

The nondimensional model is ``x'' + alpha x' + x = -lam / (1 + x)^2``;
touchdown is ``x -> -1`` in finite time.
"""
from ._backend import BACKEND
from .dynamics import (
    DEFAULT_OPTIONS,
    BudgetExhausted,
    ConvergedSaddle,
    ConvergedStable,
    IntegrationOptions,
    ResidenceProfile,
    Touchdown,
    Trajectory,
    classify,
    classify_trajectory,
    conservative_orbit,
    first_turn,
    integrate,
    lambda_d_conservative,
    phi,
    prop2_invariant_check,
    residence_profile,
)
from .manifold import (
    ManifoldTrace,
    crossing_x_bar,
    lemma1_bound_check,
    monotonicity_check,
    origin_is_stable,
    trace_stable_manifold,
)
from .model import DomainError, Params, PhaseState, energy, force, potential, vector_field
from .pullin import (
    Method,
    PullInCurve,
    alpha_star,
    lambda_d_star,
    lambda_threshold,
    sweep_curve,
)
from .steady import (
    LAMBDA_STAR,
    EquilibriumKind,
    Equilibria,
    StabilityLabel,
    StabilityReport,
    equilibria,
    fisher_slope,
    heteroclinic_threshold,
    stability,
)

__version__ = "0.1.0"
