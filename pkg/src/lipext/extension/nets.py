"""Retraction of a net in l1^n onto its intersection with a closed ball.

``phi = pi o r`` where ``r`` is the radial projection onto the ball and
``pi`` picks the nearest net point inside the ball (lowest index on ties).
For an ``(eps, delta)``-net the retraction is ``(2 + 4 eps / delta)``-Lipschitz.
"""
from __future__ import annotations

from itertools import product

import numpy as np

from .._config import TOL
from ..metric import L1PointSet, SubsetRef
from .base import HypothesisViolation, RetractionExtender

__all__ = [
    "EmptyIntersection",
    "radial_projection",
    "net_ball_retract",
    "net_ball_map",
    "lattice_covering_radius",
    "lipschitz_of_map",
    "NetBallRetraction",
]


class EmptyIntersection(ValueError):
    pass


def radial_projection(x, center, R: float) -> np.ndarray:
    """``center + (x - center) min(1, R / ||x - center||_1)``."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(center, dtype=float)
    v = x - c
    norm = float(np.abs(v).sum())
    if norm <= R:
        return x.copy()
    return c + v * (R / norm)


def _ball_members(coords, center, R, tol):
    d = np.abs(coords - np.asarray(center, dtype=float)).sum(axis=1)
    inside = np.flatnonzero(d <= R + tol * max(1.0, R))
    if inside.size == 0:
        raise EmptyIntersection("the ball contains no net point")
    return inside


def net_ball_retract(net, center, R: float, x, tol: float = TOL) -> int:
    """Index of ``pi(r(x))`` among the rows of ``net``.

    Parameters
    ----------
    net : (N, n) array of net points
    center, R : the closed l1 ball
    x : point to retract (a net point or any vector)
    """
    coords = np.asarray(net, dtype=float)
    inside = _ball_members(coords, center, R, tol)
    y = radial_projection(x, center, R)
    d = np.abs(coords[inside] - y).sum(axis=1)
    best = d.min()
    return int(inside[np.flatnonzero(d <= best + tol * max(1.0, best))[0]])


def net_ball_map(net, center, R: float, tol: float = TOL) -> np.ndarray:
    """``phi`` for every row of ``net``, as an index array."""
    coords = np.asarray(net, dtype=float)
    inside = _ball_members(coords, center, R, tol)
    c = np.asarray(center, dtype=float)
    v = coords - c
    norms = np.abs(v).sum(axis=1)
    scale = np.where(norms > R, R / np.where(norms > 0, norms, 1.0), 1.0)
    y = c + v * scale[:, None]
    d = np.abs(y[:, None, :] - coords[inside][None, :, :]).sum(axis=2)
    best = d.min(axis=1, keepdims=True)
    first = np.argmax(d <= best + tol * np.maximum(1.0, best), axis=1)
    out = inside[first]
    out[inside] = inside
    return out


def lattice_covering_radius(n: int, level: int = 6) -> float:
    """Covering radius of ``Z^n`` in l1^n by a scan of the unit cell.

    The scan uses the dyadic grid of step ``2**-level`` (which contains the
    cell centre, where the maximum ``n / 2`` is attained).
    """
    if n > 6:
        raise ValueError("scan limited to n <= 6")
    t = np.arange(2 ** level + 1) / 2 ** level
    per_axis = np.minimum(t, 1.0 - t)
    best = 0.0
    for combo in product(per_axis, repeat=n):
        best = max(best, float(sum(combo)))
    return best


def lipschitz_of_map(space, image) -> tuple[float, tuple[int, int] | None]:
    """Exact Lipschitz constant of the index map ``x -> image[x]`` with a witness pair."""
    n = space.n_points
    best, witness = 0.0, None
    rows = np.arange(n)
    for lo in range(0, n, 256):
        blk = rows[lo:lo + 256]
        d = space.pairwise(blk, rows)
        dr = space.pairwise(image[blk], image)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d > 0, dr / np.where(d > 0, d, 1.0), 0.0)
        k = int(np.argmax(ratio))
        i, j = np.unravel_index(k, ratio.shape)
        if ratio[i, j] > best:
            best, witness = float(ratio[i, j]), (int(blk[i]), int(j))
    return best, witness


class NetBallRetraction(RetractionExtender):
    """Extension ``f -> f o phi`` from ``B(center, R) ∩ N`` to a finite window of the net ``N``.

    Parameters
    ----------
    space : L1PointSet
        Finite window of the net.
    center, R : the closed l1 ball
    eps, delta : float, optional
        Net constants for the claimed bound ``2 + 4 eps / delta``.  ``delta``
        defaults to the least distance in the window; ``eps`` defaults to the
        covering radius of the integer lattice (correct when the net is
        ``Z^n``).
    """

    provenance = "net_ball"

    def __init__(self, space=None, center=None, R=None, eps=None, delta=None, base_point=None):
        super().__init__(space, None, None, base_point)
        self.center = center
        self.R = R
        self.eps = eps
        self.delta = delta

    def fit(self, X=None, y=None):
        if not isinstance(self.space, L1PointSet):
            raise HypothesisViolation("radial projection needs an l1 point set", "geometry")
        phi = net_ball_map(self.space.coords, self.center, float(self.R))
        self.retraction = phi
        self.source = SubsetRef(self.space, tuple(sorted(set(phi.tolist()))))
        return super().fit(X, y)

    def _claimed_bound(self):
        n = self.space.n_points
        if self.delta is None:
            d = self.space.pairwise(np.arange(n), np.arange(n))
            delta = float(d[np.triu_indices(n, 1)].min()) if n > 1 else 1.0
        else:
            delta = float(self.delta)
        eps = lattice_covering_radius(self.space.dim) if self.eps is None else float(self.eps)
        self.eps_, self.delta_ = eps, delta
        self.lipschitz_, self.lipschitz_witness_ = lipschitz_of_map(self.space, self.image_)
        return 2.0 + 4.0 * eps / delta

    def _descriptor_params(self):
        p = super()._descriptor_params()
        p.update(center=[float(c) for c in np.ravel(self.center)], R=float(self.R),
                 eps=self.eps_, delta=self.delta_)
        return p
