from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lipext import LipFunction, SubsetRef, lip_norm, mcshane_extend, product_rule_check

from conftest import line, path_space, random_graph_metric


def test_constant_has_zero_norm():
    M = path_space(4)
    assert lip_norm(LipFunction(SubsetRef(M, range(4)), [3, 3, 3, 3])).value == 0.0


def test_distance_function_norm_one(rng):
    M = random_graph_metric(rng, 7)
    f = LipFunction(SubsetRef(M, range(7)), M.dist[:, 2])
    assert lip_norm(f).value == pytest.approx(1.0)


def test_path_norm_with_witness():
    M = path_space(3)
    n = lip_norm(LipFunction(SubsetRef(M, (0, 1, 2)), [0, 2, 3]))
    assert n.value == 2.0 and n.witness == (0, 1)


@pytest.mark.parametrize("mode", ["inf", "sup", "midpoint"])
def test_mcshane_zero_and_restriction(mode):
    M = path_space(5)
    S = SubsetRef(M, (0, 3))
    F = mcshane_extend(LipFunction(S, [0, 0]), range(5), mode)
    assert np.all(F.values == 0)
    F = mcshane_extend(LipFunction(S, [1.0, 2.5]), range(5), mode)
    assert F(0) == 1.0 and F(3) == 2.5


def test_mcshane_line_example():
    M = line(0, 2, 3)
    F = mcshane_extend(LipFunction(SubsetRef(M, (0, 1)), [0, 2]), [2], "inf")
    assert F(2) == 3.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["inf", "sup", "midpoint"]))
def test_mcshane_preserves_norm(seed, mode):
    rng = np.random.default_rng(seed)
    M = random_graph_metric(rng, 8)
    S = SubsetRef(M, tuple(sorted(rng.choice(8, 4, replace=False).tolist())))
    f = LipFunction(S, rng.uniform(-1, 1, 4))
    F = mcshane_extend(f, range(8), mode)
    assert lip_norm(F).value == pytest.approx(lip_norm(f).value, abs=1e-12)


def test_product_rule_trivial_cases():
    M = path_space(4)
    S = SubsetRef(M, range(4))
    f = LipFunction(S, [0, 1, 3, 2])
    one = LipFunction(S, [1, 1, 1, 1])
    chk = product_rule_check(f, one)
    assert chk.lhs == pytest.approx(lip_norm(f).value) and chk.rhs >= chk.lhs and chk.holds
    zero = LipFunction(S, [0, 0, 0, 0])
    assert product_rule_check(zero, f).lhs == 0 and product_rule_check(zero, f).holds


def test_product_rule_random(rng):
    for _ in range(30):
        M = random_graph_metric(rng, 10)
        S = SubsetRef(M, range(10))
        f = LipFunction(S, rng.uniform(-1, 1, 10) * (rng.random(10) < 0.7))
        g = LipFunction(S, rng.uniform(-1, 1, 10))
        assert product_rule_check(f, g).holds
