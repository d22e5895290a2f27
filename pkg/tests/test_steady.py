import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mems_pullin.model import Params, cubic_g, dforce_dx
from mems_pullin.steady import (
    LAMBDA_STAR,
    EquilibriumKind,
    StabilityLabel,
    equilibria,
    fisher_slope,
    heteroclinic_threshold,
    stability,
    static_pullin,
)


def test_static_value():
    assert static_pullin() == 4 / 27
    assert -cubic_g(-1 / 3) == pytest.approx(static_pullin(), abs=1e-16)


def test_known_pair():
    eq = equilibria(0.125)
    assert eq.x1 == pytest.approx(-0.5, abs=1e-14)
    assert eq.x2 == pytest.approx((-3 + math.sqrt(5)) / 4, abs=1e-14)


def test_kinds():
    assert equilibria(LAMBDA_STAR).kind is EquilibriumKind.DEGENERATE
    assert equilibria(0.148148148148).kind is EquilibriumKind.DEGENERATE
    assert equilibria(0.2).kind is EquilibriumKind.NONE
    assert not equilibria(0.2).exists
    with pytest.raises(ValueError):
        equilibria(0.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-8, max_value=LAMBDA_STAR - 1e-11))
def test_pair_invariants(lam):
    eq = equilibria(lam)
    assert eq.kind is EquilibriumKind.PAIR
    assert -1 < eq.x1 < -1 / 3 < eq.x2 < 0
    for x in (eq.x1, eq.x2):
        assert abs(cubic_g(x) + lam) <= 1e-14
    assert dforce_dx(eq.x1, lam) < 0 < dforce_dx(eq.x2, lam)


def test_roots_monotone_in_load():
    lams = np.linspace(1e-4, LAMBDA_STAR - 1e-4, 100)
    e = [equilibria(l) for l in lams]
    assert np.all(np.diff([q.x1 for q in e]) > 0)
    assert np.all(np.diff([q.x2 for q in e]) < 0)


def test_small_load_limits():
    eq = equilibria(1e-6)
    assert abs(eq.x1 + 1) < 1e-2
    assert abs(eq.x2) < 1e-5


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-4, max_value=0.148), st.floats(min_value=0, max_value=20))
def test_vieta(lam, alpha):
    eq = equilibria(lam)
    for x in (eq.x1, eq.x2):
        r = stability(x, Params(lam, alpha))
        d = dforce_dx(x, lam)
        assert (r.mu_plus * r.mu_minus).real == pytest.approx(d, rel=1e-12, abs=1e-300)
        scale = max(abs(r.mu_plus), abs(r.mu_minus))
        assert (r.mu_plus + r.mu_minus).real == pytest.approx(-alpha, rel=1e-12, abs=1e-12 * scale)
        assert r.mu_minus.real <= r.mu_plus.real


def test_labels():
    eq = equilibria(0.125)
    assert stability(eq.x1, Params(0.125, 0.5)).label is StabilityLabel.SADDLE
    assert stability(eq.x2, Params(0.125, 0.5)).label is StabilityLabel.STABLE_FOCUS
    assert stability(eq.x2, Params(0.125, 5.0)).label is StabilityLabel.STABLE_NODE
    assert stability(eq.x2, Params(0.125, 0.0)).label is StabilityLabel.CENTER
    assert stability(-1 / 3, Params(LAMBDA_STAR, 1.0)).label is StabilityLabel.DEGENERATE
    # boundary tie goes to the node
    a = heteroclinic_threshold(0.125)
    assert stability(eq.x2, Params(0.125, a)).label is StabilityLabel.STABLE_NODE


def test_saddle_iff_real_opposite_signs():
    eq = equilibria(0.1)
    r = stability(eq.x1, Params(0.1, 0.3))
    assert r.mu_plus.imag == 0 and r.mu_minus.real < 0 < r.mu_plus.real


def test_stability_rejects_non_equilibrium():
    with pytest.raises(ValueError):
        stability(0.0, Params(0.1, 0.0))


def test_heteroclinic_threshold():
    lam = 0.13
    x2 = equilibria(lam).x2
    assert heteroclinic_threshold(lam) == pytest.approx(2 * math.sqrt(1 - 2 * lam / (1 + x2) ** 3), rel=1e-14)
    assert fisher_slope(lam) > 0
    near = [heteroclinic_threshold(LAMBDA_STAR - e) for e in (1e-3, 1e-6, 1e-9, 1e-11)]
    assert all(b < a for a, b in zip(near, near[1:]))
    assert near[-1] < 1e-2
    with pytest.raises(ValueError):
        fisher_slope(0.2)
