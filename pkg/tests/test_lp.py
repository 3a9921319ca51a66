from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import linprog as highs

from lipext.lp import linprog, simplex_standard


def test_small_standard_form():
    # min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
    A = np.array([[1, 2, 1, 0], [3, 1, 0, 1]], dtype=float)
    res = simplex_standard(np.array([-1, -1, 0, 0.0]), A, np.array([4, 6.0]))
    assert res.success
    assert res.fun == pytest.approx(-2.8)
    assert np.allclose(res.x[:2], [1.6, 1.2])


def test_infeasible_and_unbounded():
    assert linprog([1.0], A_eq=[[1.0]], b_eq=[-1.0]).status == "infeasible"
    assert linprog([-1.0], A_ub=[[-1.0]], b_ub=[0.0]).status == "unbounded"


@pytest.mark.parametrize("rule", ["bland", "dantzig"])
def test_random_lps_against_highs(rng, rule):
    for _ in range(60):
        m, n = int(rng.integers(2, 7)), int(rng.integers(2, 8))
        A = rng.integers(-4, 5, (m, n)).astype(float)
        x0 = rng.uniform(0, 2, n)
        b = A @ x0 + rng.uniform(0, 1, m)
        c = rng.integers(-3, 4, n).astype(float)
        free = rng.random(n) < 0.3
        ref = highs(c, A_ub=A, b_ub=b, bounds=[(None, None) if f else (0, None) for f in free],
                    method="highs")
        mine = linprog(c, A_ub=A, b_ub=b, free=free, rule=rule)
        if ref.status == 3:
            assert mine.status == "unbounded"
            continue
        assert mine.success
        assert mine.fun == pytest.approx(ref.fun, abs=1e-8)
        assert np.all(A @ mine.x <= b + 1e-8)
        assert mine.duals[:m] == pytest.approx(ref.ineqlin.marginals, abs=1e-7)


def test_degenerate_lp_terminates():
    # many tight constraints at the optimum; Bland's rule must not cycle
    A = np.vstack([np.eye(3), -np.eye(3), np.ones((4, 3))])
    b = np.concatenate([np.ones(3), np.zeros(3), np.full(4, 3.0)])
    res = linprog(-np.ones(3), A_ub=A, b_ub=b)
    assert res.success and res.fun == pytest.approx(-3.0)
