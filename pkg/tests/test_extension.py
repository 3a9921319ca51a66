from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone

from lipext import (
    ConePartitionExtension,
    EmptyFamily,
    FunctionCorpus,
    GlueFamily,
    GluePair,
    HypothesisViolation,
    L1PointSet,
    LipFunction,
    McShaneExtender,
    MissingVertex,
    NetBallRetraction,
    RetractionExtender,
    SetsTooClose,
    SubsetRef,
    axis_grid_points,
    certify_norm,
    cone_partition_extend,
    cone_retract,
    family_constant,
    glue_family,
    grid_extension_operator,
    grid_points,
    hypercube_interpolate,
    lattice_covering_radius,
    lip_norm,
    net_ball_retract,
    operator_norm_from_extension,
)

from conftest import line, random_graph_metric


# --- estimator API -------------------------------------------------------

def test_estimator_api_roundtrip():
    M = line(0, 1, 2, 5)
    E = McShaneExtender(M, (0, 3))
    assert clone(E).get_params()["source"] == (0, 3)
    E.fit()
    X = np.array([[1.0, 4.0], [0.0, -2.0]])
    out = E.transform(X)
    assert out.shape == (2, 4)
    assert np.array_equal(out[:, [0, 3]], X)
    assert E.check_extension_property()
    assert E.descriptor()["kind"] == "mcshane"


def test_mcshane_rejects_nonlinear_geometry(rng):
    M = random_graph_metric(rng, 6)
    with pytest.raises(HypothesisViolation):
        McShaneExtender(M, (0, 1, 2)).fit()


# --- glue pair -----------------------------------------------------------

def _pair():
    M = line(*range(-3, 16))
    idx = {int(x): i for i, x in enumerate(M.coords[:, 0])}
    S1 = SubsetRef(M, (idx[0], idx[2]))
    S2 = SubsetRef(M, (idx[9], idx[11]))
    E = GluePair(McShaneExtender(M, S1).fit(), McShaneExtender(M, S2).fit()).fit()
    return M, E, S1, S2


def test_glue_pair_examples(rng):
    M, E, S1, S2 = _pair()
    assert np.all(E.transform(np.zeros(4)) == 0)
    f = rng.uniform(-1, 1, 4)
    Ef = E.transform(f)
    E1f = E.E1.transform(f[:2])
    src = E.source_.indices
    assert np.array_equal(Ef[S2.array], f[[src.index(i) for i in S2.indices]])
    far = np.flatnonzero(E.h_ == 0)
    assert np.allclose(Ef[far], E1f[far])


def test_glue_pair_norm_under_claim(rng):
    _, E, _, _ = _pair()
    res = certify_norm(E, trials=50, seed=1)
    assert res.bound_ok and res.empirical <= res.exact + 1e-9


def test_glue_pair_radius_check():
    M, E, S1, S2 = _pair()
    with pytest.raises(SetsTooClose):
        GluePair(E.E1, E.E2, r=100.0).fit()


# --- glue family ---------------------------------------------------------

def _family_on_line():
    M = line(*range(0, 50), base=0)
    A, B = SubsetRef(M, (1,)), SubsetRef(M, (8,))
    ext = [McShaneExtender(M, S).fit() for S in (A, B)]
    return M, [A, B], ext


def test_family_constant_closed_form():
    Kp, K = family_constant(1.0, 0.0, 1.0)
    assert Kp == pytest.approx(2 + 2 * 1)
    assert K == pytest.approx(Kp + 2 * (0 + 1))


def test_glue_family_line_example():
    M, fam, ext = _family_on_line()
    E = glue_family(fam, ext, 0, C=1.0)
    assert E.lambda_ == pytest.approx(9 / 7)
    res = certify_norm(E, trials=100, seed=0)
    assert res.empirical <= E.claimed_bound_ + 1e-9
    assert res.exact <= E.claimed_bound_ + 1e-9
    assert res.empirical <= res.exact + 1e-9
    assert res.exact <= E.bound_28_ + 1e-9


def test_glue_family_single_set_is_cutoff():
    M = line(*range(0, 20))
    S = SubsetRef(M, (6, 8))
    E1 = McShaneExtender(M, S).fit()
    E = GlueFamily([S], [E1], 0, C=1.0).fit()
    f = np.array([0.3, -0.7])
    x = M.coords[:, 0]
    dS = np.minimum(np.abs(x - 6), np.abs(x - 8))
    r = 6 / 2
    Pi = np.maximum(0, 1 - dS / r)
    expected = np.where(dS <= r, Pi * E1.transform(f), 0.0)
    assert np.allclose(E.transform(f), expected)
    assert np.all(E.transform(np.zeros(2)) == 0)


def test_glue_family_errors():
    M, fam, ext = _family_on_line()
    with pytest.raises(EmptyFamily):
        GlueFamily([], [], 0).fit()
    with pytest.raises(HypothesisViolation):
        GlueFamily(fam, ext, 0, C=0.5).fit()


# --- grid interpolation ----------------------------------------------------

def test_interpolation_examples():
    f = {(0, 0): 0.0, (1, 0): 1.0, (0, 1): 1.0, (1, 1): 2.0}
    assert hypercube_interpolate(f, [0.5, 0.5]) == 1.0
    assert hypercube_interpolate(f, [1, 0]) == 1.0
    with pytest.raises(MissingVertex):
        hypercube_interpolate(f, [1.5, 0.5])


def test_interpolation_reproduces_affine(rng):
    grid = grid_points([0, 0, 0], [2, 2, 2])
    a, b = rng.normal(size=3), 0.7
    f = {tuple(int(c) for c in p): float(a @ p + b) for p in grid}
    for q in rng.uniform(0, 2, (30, 3)):
        assert hypercube_interpolate(f, q) == pytest.approx(a @ q + b, abs=1e-12)


def test_grid_operator_examples(rng):
    sample = rng.uniform(0, 3, (200, 2))
    E = grid_extension_operator([0, 0], [3, 3], sample)
    assert E.check_extension_property()
    first = E.space.coords[E.source_.array, 0]
    assert np.allclose(E.transform(first), E.space.coords[:, 0])
    for _ in range(5):
        f = LipFunction(E.source_, rng.uniform(-1, 1, len(E.source_)))
        assert lip_norm(E.extend(f)).value <= lip_norm(f).value + 1e-9


# --- cones -----------------------------------------------------------------

def test_cone_retract_examples():
    assert np.array_equal(cone_retract([0], [2, 1]), [1, 0])
    assert np.array_equal(cone_retract([0, 2], [1.5, 0, -2]), [1.5, 0, -2])
    assert np.array_equal(cone_retract([1], [3, 0]), [0, 0])


def test_cone_partition_examples():
    grid = axis_grid_points(2, [[0], [1]], 3)
    f = {tuple(int(c) for c in p): float(p.sum()) for p in grid}
    assert cone_partition_extend([[0], [1]], f, [2, 1]) == f[(1, 0)]
    assert cone_partition_extend([[0], [1]], f, [0, 0]) == 0.0
    assert cone_partition_extend([[0], [1]], f, [0, -2]) == f[(0, -2)]


def test_cone_retraction_two_lipschitz(rng):
    worst = 0.0
    for _ in range(2000):
        n = int(rng.integers(1, 6))
        I = sorted(rng.choice(n, int(rng.integers(1, n + 1)), replace=False).tolist())
        x, y = rng.normal(size=(2, n))
        worst = max(worst, np.abs(cone_retract(I, x) - cone_retract(I, y)).sum() / np.abs(x - y).sum())
    assert worst <= 2 + 1e-9


def test_cone_partition_operator_norm(rng):
    grid = axis_grid_points(2, [[0], [1]], 2)
    extra = np.round(rng.uniform(-2, 2, (10, 2)), 2)
    M = L1PointSet(np.vstack([grid, extra]))
    E = ConePartitionExtension(M, range(len(grid)), [[0], [1]]).fit()
    assert operator_norm_from_extension(E).value <= 2 + 1e-9


# --- nets ------------------------------------------------------------------

def test_net_ball_examples():
    net = np.arange(-10, 11, dtype=float)[:, None]
    assert net[net_ball_retract(net, [0.0], 2.5, [7.0])][0] == 2.0
    assert net_ball_retract(net, [0.0], 2.5, [1.0]) == 11


def test_net_ball_z2():
    axes = np.arange(-10, 11)
    coords = np.array([(a, b) for a in axes for b in axes], dtype=float)
    M = L1PointSet(coords, base_point=int(np.argmin(np.abs(coords).sum(axis=1))))
    E = NetBallRetraction(M, [0.0, 0.0], 3.0).fit()
    assert E.eps_ == 1.0 and E.delta_ == 1.0
    assert E.claimed_bound_ == 6.0
    assert E.lipschitz_ <= E.claimed_bound_ + 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_covering_radius(n):
    assert lattice_covering_radius(n) == n / 2


# --- certification -----------------------------------------------------------

@pytest.mark.parametrize("kind", ["uniform", "mcshane"])
def test_certify_ordering(rng, kind):
    M = random_graph_metric(rng, 8)
    E = RetractionExtender(M, (0, 3, 5)).fit()
    res = certify_norm(E, trials=60, corpus=FunctionCorpus(kind), seed=3)
    assert res.empirical <= res.exact + 1e-9
    assert res.row()["claimed"] == E.claimed_bound_


def test_certify_deterministic(rng):
    M = random_graph_metric(rng, 8)
    E = RetractionExtender(M, (0, 3, 5)).fit()
    a = certify_norm(E, trials=30, seed=9)
    b = certify_norm(E, trials=30, seed=9)
    assert a.empirical == b.empirical
