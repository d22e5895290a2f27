"""Cross-checks against independent scipy solvers."""
import math

import numpy as np
import pytest

scipy = pytest.importorskip("scipy")
from scipy.integrate import solve_ivp  # noqa: E402
from scipy.optimize import brentq  # noqa: E402

from mems_pullin.dynamics import ConvergedStable, Touchdown, classify, integrate  # noqa: E402
from mems_pullin.manifold import crossing_x_bar, seed_slope  # noqa: E402
from mems_pullin.model import Params, PhaseState, cubic_g  # noqa: E402
from mems_pullin.pullin import alpha_star  # noqa: E402
from mems_pullin.steady import LAMBDA_STAR, equilibria  # noqa: E402


def rhs(lam, alpha):
    def f(t, s):
        x, y = s
        return [y, -(alpha * y + x + lam / (1 + x) ** 2)]

    return f


def scipy_touchdown(lam, alpha, t_max=500.0):
    ev = lambda t, s: s[0] + 1 - 1e-6  # noqa: E731
    ev.terminal, ev.direction = True, -1
    sol = solve_ivp(rhs(lam, alpha), (0, t_max), [0.0, 0.0], method="DOP853",
                    rtol=1e-12, atol=1e-14, events=ev)
    return sol


@pytest.mark.parametrize("lam", [0.01, 0.07, 0.125, 0.14])
def test_equilibria_against_brentq(lam):
    eq = equilibria(lam)
    r1 = brentq(lambda x: cubic_g(x) + lam, -1 + 1e-15, -1 / 3, xtol=1e-16)
    r2 = brentq(lambda x: cubic_g(x) + lam, -1 / 3, 0.0, xtol=1e-16)
    assert eq.x1 == pytest.approx(r1, abs=1e-12)
    assert eq.x2 == pytest.approx(r2, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 4.0])
def test_touchdown_time(alpha):
    ref = scipy_touchdown(0.2, alpha).t_events[0][0]
    ours = integrate(Params(0.2, alpha), PhaseState(0, 0, 0)).outcome
    assert isinstance(ours, Touchdown)
    assert ours.t_td == pytest.approx(ref, abs=1e-7)


def test_orbit_samples():
    te = np.linspace(0, 40, 81)
    sol = solve_ivp(rhs(0.11, 0.3), (0, 40), [0.0, 0.0], method="DOP853",
                    rtol=1e-12, atol=1e-14, t_eval=te)
    from dataclasses import replace

    from mems_pullin.dynamics import DEFAULT_OPTIONS

    ours = integrate(Params(0.11, 0.3), PhaseState(0, 0, 0), replace(DEFAULT_OPTIONS, t_max=40.0, t_eval=te))
    np.testing.assert_allclose(ours.x, sol.y[0], atol=1e-8)
    np.testing.assert_allclose(ours.y, sol.y[1], atol=1e-8)


@pytest.mark.parametrize("lam, alpha", [(0.13, 0.0), (0.13, 0.5), (0.14, 0.3)])
def test_crossing_against_planar_reversed_flow(lam, alpha):
    eq = equilibria(lam)
    mu = seed_slope(eq.x1, lam, alpha)
    d = 1e-8

    def rev(t, s):
        u, v = s
        x = u + eq.x1
        return [v, alpha * v - (x + lam / (1 + x) ** 2)]

    ev = lambda t, s: s[1]  # noqa: E731
    ev.terminal, ev.direction = True, -1
    sol = solve_ivp(rev, (0, 200), [d, mu * d], method="DOP853", rtol=1e-12, atol=1e-15, events=ev)
    ref = sol.y_events[0][0][0] + eq.x1
    assert crossing_x_bar(Params(lam, alpha)) == pytest.approx(ref, abs=1e-6)


def scipy_stable(lam, alpha):
    eq = equilibria(lam)
    e1 = 0.5 * eq.x1**2 - lam / (1 + eq.x1)
    td = lambda t, s: s[0] + 1 - 1e-6  # noqa: E731
    td.terminal = True
    trap = lambda t, s: 0.5 * s[1] ** 2 + 0.5 * s[0] ** 2 - lam / (1 + s[0]) - e1 + 1e-12 if s[0] > eq.x1 else 1.0  # noqa: E731
    trap.terminal, trap.direction = True, -1
    sol = solve_ivp(rhs(lam, alpha), (0, 2000), [0.0, 0.0], method="DOP853",
                    rtol=1e-12, atol=1e-14, events=[td, trap])
    if sol.t_events[0].size:
        return False
    return bool(sol.t_events[1].size)


def test_independent_threshold():
    lam = 0.13
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if scipy_stable(lam, mid):
            hi = mid
        else:
            lo = mid
    assert alpha_star(lam).alpha_star == pytest.approx(0.5 * (lo + hi), abs=2e-6)


def test_critical_damping_saturates():
    # just below the fold, damping of order one already prevents touchdown
    lam = LAMBDA_STAR - 1e-7
    assert scipy_stable(lam, 1.0)
    assert isinstance(classify(Params(lam, 1.0)), ConvergedStable)
    assert not scipy_stable(lam, 0.7)
    assert isinstance(classify(Params(lam, 0.7)), Touchdown)
    assert 0.7 < alpha_star(lam).alpha_star < 1.0
    assert math.isfinite(alpha_star(LAMBDA_STAR - 1e-12).alpha_star)
