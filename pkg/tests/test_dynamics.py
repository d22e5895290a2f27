import math
from dataclasses import replace

import numpy as np
import pytest

from mems_pullin.dynamics import (
    DEFAULT_OPTIONS,
    BudgetExhausted,
    ConvergedSaddle,
    ConvergedStable,
    IntegrationOptions,
    Touchdown,
    classify,
    classify_trajectory,
    conservative_orbit,
    first_turn,
    integrate,
    lambda_d_conservative,
    outcome_to_dict,
    phi,
    prop2_invariant_check,
    residence_profile,
)
from mems_pullin.model import Params, PhaseState, potential
from mems_pullin.steady import LAMBDA_STAR, equilibria, heteroclinic_threshold, stability

ORIGIN = PhaseState(0.0, 0.0, 0.0)


def test_options_validation():
    with pytest.raises(ValueError):
        IntegrationOptions(rtol=0.0)
    with pytest.raises(ValueError):
        IntegrationOptions(max_steps=0)
    with pytest.raises(ValueError):
        integrate(Params(0.1), ORIGIN, replace(DEFAULT_OPTIONS, t_eval=[1.0, 0.5]))
    assert DEFAULT_OPTIONS.to_dict()["h_max"] is None


def test_equilibrium_start_stays_put():
    eq = equilibria(0.1)
    tr = integrate(Params(0.1, 0.5), PhaseState(0.0, eq.x2, 0.0), replace(DEFAULT_OPTIONS, t_max=20.0))
    assert np.max(np.abs(tr.x - eq.x2)) < 1e-11
    assert np.max(np.abs(tr.y)) < 1e-11
    assert isinstance(tr.outcome, ConvergedStable)


def test_touchdown_event_located():
    opts = DEFAULT_OPTIONS
    tr = integrate(Params(0.2, 1.0), ORIGIN, opts)
    assert isinstance(tr.outcome, Touchdown)
    assert tr.t[-1] == pytest.approx(tr.outcome.t_td, abs=1e-9)
    # located to 1e-10 in time, so x is off by at most |y| * 1e-10
    assert abs(tr.x[-1] - (-1 + opts.eps_td)) <= abs(tr.y[-1]) * 1e-10 + 1e-12
    assert np.all(tr.x > -1.0)
    assert tr.stats.min_gap < 2e-6


def test_conservative_orbit_periodic():
    tr = integrate(Params(0.1, 0.0), ORIGIN, replace(DEFAULT_OPTIONS, t_max=100.0))
    e = tr.energy()
    assert np.max(np.abs(e - e[0])) <= 1e-8
    assert tr.x.max() <= 1e-9 and tr.x.min() > -0.5


@pytest.mark.parametrize("alpha", [0.1, 0.5, 2.0, 8.0])
def test_dissipation(alpha):
    tr = integrate(Params(0.12, alpha), ORIGIN, replace(DEFAULT_OPTIONS, t_max=60.0))
    assert np.all(np.diff(tr.energy()) <= 1e-9)


def test_t_eval_sampling_matches_steps():
    te = np.linspace(0, 10, 41)
    a = integrate(Params(0.1, 0.3), ORIGIN, replace(DEFAULT_OPTIONS, t_max=10.0, t_eval=te))
    b = integrate(Params(0.1, 0.3), ORIGIN, replace(DEFAULT_OPTIONS, t_max=10.0))
    np.testing.assert_array_equal(a.t, te)
    np.testing.assert_allclose(a.x, np.interp(te, b.t, b.x), atol=1e-4)
    assert a.x[-1] == pytest.approx(b.x[-1], abs=1e-10)


@pytest.mark.parametrize(
    "lam, alpha, kind",
    [
        (0.03, 1.0, ConvergedStable),
        # undamped but below the barrier: the energy trap confines the orbit
        (0.10, 0.0, ConvergedStable),
        (0.13, 0.0, Touchdown),
        (0.13, 2.0, ConvergedStable),
        (0.2, 0.0, Touchdown),
        (0.2, 8.0, Touchdown),
        (LAMBDA_STAR + 1e-3, 1.0, Touchdown),
    ],
)
def test_classify_examples(lam, alpha, kind):
    assert isinstance(classify(Params(lam, alpha), replace(DEFAULT_OPTIONS, t_max=300.0)), kind)


def test_classify_from_saddle():
    eq = equilibria(0.13)
    # roundoff leaves the saddle at rate mu+, so keep the dwell short
    opts = replace(DEFAULT_OPTIONS, t_dwell=10.0)
    out = classify_trajectory(Params(0.13, 0.5), opts, PhaseState(0.0, eq.x1, 0.0)).outcome
    assert isinstance(out, ConvergedSaddle)
    assert out.x1 == eq.x1


def test_budget_outcomes():
    tiny = replace(DEFAULT_OPTIONS, max_steps=5)
    out = classify(Params(0.13, 0.0), tiny)
    assert isinstance(out, BudgetExhausted) and "step budget" in out.reason
    short = replace(DEFAULT_OPTIONS, t_max=0.5)
    assert isinstance(classify(Params(0.13, 0.5), short), BudgetExhausted)
    assert outcome_to_dict(Touchdown(1.5)) == {"kind": "touchdown", "t_td": 1.5}


def test_first_turn():
    turn = first_turn(Params(0.1, 0.0))
    assert isinstance(turn, PhaseState)
    assert abs(turn.y) < 1e-8
    # the turning point is the other root of E = -lam on the well
    assert potential(turn.x, 0.1) == pytest.approx(-0.1, abs=1e-9)
    assert isinstance(first_turn(Params(0.13, 0.0)), Touchdown)


def test_invariant_region_samples():
    assert prop2_invariant_check(0.02, 1.0, 40)
    assert prop2_invariant_check(0.02, 0.1, 40, seed=3)
    with pytest.raises(ValueError):
        prop2_invariant_check(0.05, 1.0, 10)


def test_heteroclinic_connection():
    lam = 0.13
    alpha = heteroclinic_threshold(lam) + 0.5
    eq = equilibria(lam)
    mu = stability(eq.x1, Params(lam, alpha)).mu_plus.real
    eps = 1e-7
    start = PhaseState(0.0, eq.x1 + eps, mu * eps)
    tr = integrate(Params(lam, alpha), start, replace(DEFAULT_OPTIONS, t_max=200.0))
    assert isinstance(tr.outcome, ConvergedStable)
    assert tr.x[-1] == pytest.approx(eq.x2, abs=1e-6)
    # a node: no overshoot past x2
    assert np.all(tr.x <= eq.x2 + 1e-9)


def test_conservative_orbit_levels():
    lam = 0.1
    eq = equilibria(lam)
    pt = conservative_orbit(lam, potential(eq.x2, lam), [eq.x2])
    np.testing.assert_allclose(pt, [[eq.x2, 0.0]])
    xs = np.union1d(np.linspace(eq.x1, 0.6, 400), [eq.x1])
    loop = conservative_orbit(lam, potential(eq.x1, lam), xs)
    assert loop[0, 0] == eq.x1 and loop[0, 1] == 0.0
    assert np.all(loop[:, 0] >= eq.x1)
    top = loop[loop[:, 1] > 0]
    assert top[:, 1].max() > 0.1
    assert conservative_orbit(lam, -5.0, xs).shape == (0, 2)


def test_phi_and_undamped_threshold():
    assert phi(4 / 27) == pytest.approx(-1 / 54, abs=1e-12)
    lam0 = lambda_d_conservative()
    assert lam0 == pytest.approx(0.125, abs=1e-10)
    assert equilibria(lam0).x1 == pytest.approx(-0.5, abs=1e-9)
    with pytest.raises(ValueError):
        phi(0.2)


def test_residence_errors_and_shape():
    with pytest.raises(ValueError):
        residence_profile(Params(0.2, 1.0))
    with pytest.raises(ValueError):
        residence_profile(Params(0.1, 1.0))  # stable: no touchdown
    p = residence_profile(Params(0.1475, 0.6))
    assert p.t_approach > 0 and p.t_dwell > 0 and p.t_collapse > 0
    assert p.t_approach + p.t_dwell + p.t_collapse == pytest.approx(p.t_td, rel=1e-12)
