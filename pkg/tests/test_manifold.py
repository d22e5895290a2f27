import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mems_pullin.manifold import (
    crossing_x_bar,
    default_u_max,
    lemma1_bound_check,
    monotonicity_check,
    origin_is_stable,
    seed_slope,
    trace_stable_manifold,
)
from mems_pullin.model import Params, potential
from mems_pullin.steady import equilibria


def level_set(tr, u):
    f1 = potential(tr.x1, tr.lam)
    return math.sqrt(max(2.0 * (f1 - potential(u + tr.x1, tr.lam)), 0.0))


@pytest.mark.parametrize("lam", [0.05, 0.10, 0.125, 0.14])
def test_undamped_trace_is_level_set(lam):
    tr = trace_stable_manifold(Params(lam, 0.0))
    err = max(abs(p - level_set(tr, u)) for u, p in zip(tr.u_samples, tr.phi_samples))
    assert err <= 1e-7
    # dense evaluation between samples, graph and v legs alike
    grid = np.linspace(0, tr.u_end, 301)[1:-1]
    err = max(abs(tr.phi_at(u) - level_set(tr, u)) for u in grid)
    assert err <= 1e-7


def test_undamped_crossing_signs():
    assert crossing_x_bar(Params(0.10, 0.0)) > 0
    assert abs(crossing_x_bar(Params(0.125, 0.0))) <= 1e-8
    assert crossing_x_bar(Params(0.14, 0.0)) < 0


def test_crossing_is_turning_point():
    # at alpha = 0 the crossing is where F(x_bar) = F(x1)
    tr = trace_stable_manifold(Params(0.10, 0.0))
    assert potential(tr.x_bar, 0.10) == pytest.approx(potential(tr.x1, 0.10), abs=1e-10)
    assert tr.phi_samples[-1] == 0.0


def test_seed_and_metadata():
    p = Params(0.13, 0.7)
    tr = trace_stable_manifold(p)
    assert tr.mu_plus == seed_slope(tr.x1, 0.13, 0.7)
    assert tr.phi_samples[1] == pytest.approx(tr.mu_plus * tr.seed)
    assert tr.horizon == default_u_max(tr.x1, tr.x2)
    assert math.isnan(tr.phi_at(-1.0))
    d = tr.as_dict()
    assert d["x_bar"] == tr.x_bar and len(d["u"]) == len(d["phi"])


def test_no_crossing_when_stopped_early():
    tr = trace_stable_manifold(Params(0.13, 2.0), u_stop=0.3)
    assert tr.crossing is None and tr.x_bar is None
    assert tr.u_end == pytest.approx(0.3)


def test_requires_saddle():
    with pytest.raises(ValueError):
        trace_stable_manifold(Params(0.2, 1.0))


def test_origin_stability_matches_crossing():
    for a in (0.05, 0.2, 0.5):
        xb = crossing_x_bar(Params(0.13, a))
        assert origin_is_stable(Params(0.13, a)) == (xb is None or xb > 0)


@pytest.mark.parametrize("lam", [0.13, 0.14])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 4.0])
def test_linear_lower_bound(lam, alpha):
    assert lemma1_bound_check(Params(lam, alpha))


def test_linear_bound_needs_damping():
    with pytest.raises(ValueError):
        lemma1_bound_check(Params(0.13, 0.0))


def test_monotone_in_damping():
    assert monotonicity_check(0.13, [0.0, 0.5, 1.0, 2.0, 4.0])
    with pytest.raises(ValueError):
        monotonicity_check(0.13, [1.0, 0.5])


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.126, max_value=0.147), st.floats(min_value=0.0, max_value=3.0))
def test_crossing_increases_with_damping(lam, alpha):
    a = crossing_x_bar(Params(lam, alpha))
    b = crossing_x_bar(Params(lam, alpha + 0.05))
    if a is not None and b is not None:
        assert b > a
    else:
        assert b is None or a is not None


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.147), st.floats(min_value=0.0, max_value=3.0))
def test_trace_positive_before_crossing(lam, alpha):
    tr = trace_stable_manifold(Params(lam, alpha))
    assert np.all(tr.phi_samples[1:-1] > 0)
    assert np.all(np.diff(tr.u_samples) > 0)
