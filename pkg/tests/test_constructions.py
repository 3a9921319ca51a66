from __future__ import annotations

import numpy as np
import pytest

from lipext import (
    GridBox,
    MeshTooCoarse,
    TooLarge,
    WindowTooSmall,
    ball_sequence_lambda20,
    box_retraction,
    composed_box_retraction,
    grid_box_sequence,
    place_dyadic,
    shrinking_ball_sequence,
)


def test_singleton_band():
    fam = place_dyadic([np.array([[3, -2]])])
    k = fam.k_seq[0]
    p = fam.space.coords[fam.sets[0].indices[0]]
    assert 2 ** (k + 1) <= np.abs(p).sum() <= 2 ** (k + 2)


def test_two_singletons_lambda():
    fam = place_dyadic([np.array([[0]]), np.array([[5]])])
    assert fam.report.lambda_ <= 32 + 1e-9


def test_three_boxes_invariants():
    sets = [np.array([[0, 0], [1, 0]]), np.array([[0, 0], [5, 0], [2, 3]]), np.array([[0, 0], [17, 0], [9, 8]])]
    fam = place_dyadic(sets)
    assert fam.report.lambda_ <= 32 + 1e-9
    assert fam.report.D <= 1 + 1e-9
    for orig, S in zip(sets, fam.sets):
        d0 = np.abs(orig[:, None] - orig[None]).sum(axis=2)
        assert np.array_equal(fam.space.pairwise(S.array, S.array), d0)
    # cross-set inequality, exhaustive
    X = fam.space.coords
    for i, A in enumerate(fam.sets):
        for B in fam.sets[i + 1:]:
            for x in A:
                for y in B:
                    lhs = np.abs(X[x]).sum() + np.abs(X[y]).sum()
                    assert lhs <= 32 * np.abs(X[x] - X[y]).sum() + 1e-9


def test_balls20_single_and_bounds():
    assert ball_sequence_lambda20(1, 1).report.lambda_ == 1.0
    assert ball_sequence_lambda20(1, 3).report.lambda_ <= 20 + 1e-9
    fam = ball_sequence_lambda20(2, 3)
    for diam, dist in fam.report.per_set:
        assert diam / dist <= 1 + 1e-9
    with pytest.raises(WindowTooSmall):
        ball_sequence_lambda20(1, 3, window=5)


def test_shrinking_balls_exact_diam_and_dist():
    fam = shrinking_ball_sequence([1, 2], count=1)
    (diam, dist), = fam.report.per_set
    N1 = fam.extra["N_seq"][0]
    assert diam == 2.0 ** -N1 and dist == 2.0 ** -(N1 + 1)
    assert fam.extra["D_computed"] == 2.0 and fam.extra["D_discrepancy"]


def test_shrinking_balls_lambda_and_nesting():
    assert shrinking_ball_sequence([1, 2], count=2).report.lambda_ <= 24 + 1e-9
    fam = shrinking_ball_sequence([1, 2, 3])
    assert fam.report.min_cross_distance > 0
    norms = [np.abs(fam.space.coords[S.array]).sum(axis=1).max() for S in fam.sets]
    assert all(a > b for a, b in zip(norms, norms[1:]))
    with pytest.raises(MeshTooCoarse):
        shrinking_ball_sequence([1, 2], mesh=0.5)


def test_grid_boxes():
    boxes = grid_box_sequence()
    assert np.array_equal(boxes[0].points()[:, 0], np.arange(-4, 5))
    assert boxes[2].n_points == 129 ** 3
    with pytest.raises(TooLarge):
        boxes[2].points(max_points=512)
    with pytest.raises(TooLarge):
        grid_box_sequence(4)


def test_box_retractions(rng):
    x, y = rng.uniform(-10, 10, (2, 200))
    assert np.all(np.abs(box_retraction(3, x) - box_retraction(3, y)) <= np.abs(x - y) + 1e-12)
    box = GridBox(2, 3)
    pts = np.array([(a, b, c) for a in range(-6, 7) for b in range(-6, 7) for c in (-1, 0, 2)], dtype=float)
    img = composed_box_retraction(box, pts)
    assert all(box.contains(p) for p in img)
    d = np.abs(pts[:, None] - pts[None]).sum(axis=2)
    dr = np.abs(img[:, None] - img[None]).sum(axis=2)
    off = d > 0
    assert (dr[off] / d[off]).max() <= 1 + 1e-9
