import math
from dataclasses import replace

import pytest

from mems_pullin import pullin
from mems_pullin.dynamics import DEFAULT_OPTIONS
from mems_pullin.pullin import (
    BracketError,
    Method,
    _bisect,
    alpha_star,
    lambda_d_star,
    lambda_threshold,
    sweep_curve,
)
from mems_pullin.steady import LAMBDA_STAR


def test_default_tolerances():
    assert Method.MANIFOLD.default_tol == 1e-8
    assert Method.TRAJECTORY.default_tol == 1e-6


@pytest.mark.parametrize("lam", [0.13, 0.135, 0.14])
def test_methods_agree(lam):
    m = alpha_star(lam, "manifold")
    t = alpha_star(lam, "trajectory")
    assert not m.ambiguous and not t.ambiguous
    assert m.half_width <= 1e-8 and t.half_width <= 1e-6
    assert abs(m.alpha_star - t.alpha_star) <= 2 * (1e-8 + 1e-6)


def test_anchored_at_undamped_threshold():
    assert alpha_star(0.125 + 1e-6).alpha_star < 0.01
    assert alpha_star(0.13).alpha_star > alpha_star(0.126).alpha_star > 0


def test_critical_damping_increasing():
    lams = [0.126, 0.13, 0.135, 0.14, 0.145, 0.147, 0.148]
    vals = [alpha_star(l).alpha_star for l in lams]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_domain_and_bracket_errors():
    with pytest.raises(ValueError):
        alpha_star(0.12)
    with pytest.raises(ValueError):
        alpha_star(0.15)
    with pytest.raises(BracketError):
        alpha_star(0.147, alpha_cap=0.3)


def test_lambda_d_star_values():
    assert lambda_d_star(0.0) == pytest.approx(0.125, abs=1e-10)
    for a in (0.1, 0.3, 0.5, 1.0):
        v = lambda_d_star(a)
        assert 0.125 < v < LAMBDA_STAR and v > 1 / 32


def test_inverse_round_trip():
    lam = lambda_d_star(0.5, tol=1e-9, method="manifold")
    assert alpha_star(lam).alpha_star == pytest.approx(0.5, abs=1e-4)


def test_undamped_trajectory_threshold():
    p = lambda_threshold(0.0, Method.TRAJECTORY)
    assert abs(p.lambda_d - 0.125) <= 1e-5


def test_bisect_stops_on_undecided():
    calls = []

    def pred(a):
        calls.append(a)
        return None if a < 0.3 else a > 0.4

    lo, hi, amb = _bisect(pred, 0.0, 1.0, 1e-6)
    assert amb and (lo, hi) == (0.0, 0.5)
    lo, hi, amb = _bisect(lambda a: a > 0.4, 0.0, 1.0, 1e-6)
    assert not amb and lo <= 0.4 <= hi and hi - lo <= 2e-6


def test_budget_limited_trajectory_is_flagged():
    opts = replace(DEFAULT_OPTIONS, t_max=3.0)
    p = alpha_star(0.13, "trajectory", opts=opts)
    assert p.ambiguous


def test_sweep_order_and_jobs():
    grid = [0.0, 0.2, 0.4, 0.6]
    a = sweep_curve(grid, method="manifold")
    b = sweep_curve(grid, method="manifold", jobs=3)
    assert [p.alpha for p in a.points] == grid
    assert a.as_dict() == b.as_dict()
    assert a.strictly_increasing and a.in_range
    assert a.points[0].lambda_d == pytest.approx(0.125, abs=1e-10)


def test_sweep_rejects_bad_grids():
    with pytest.raises(ValueError):
        sweep_curve([])
    with pytest.raises(ValueError):
        sweep_curve([0.5, 0.2])
    with pytest.raises(ValueError):
        sweep_curve([-1.0, 0.2])


def test_sweep_records_failures(monkeypatch):
    real = pullin.lambda_threshold

    def flaky(alpha, *args, **kw):
        if alpha == 0.3:
            raise BracketError("boom")
        return real(alpha, *args, **kw)

    monkeypatch.setattr(pullin, "lambda_threshold", flaky)
    c = sweep_curve([0.1, 0.3, 0.5], method="manifold")
    assert [p.alpha for p in c.failures] == [0.3]
    assert math.isnan(c.points[1].lambda_d) and c.points[1].error == "boom"
    assert c.strictly_increasing
