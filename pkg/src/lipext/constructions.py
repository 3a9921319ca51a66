"""Generators for well-separated families in integer grids and fine l1 grids.

Every generator returns the family inside a finite ambient point set made of
the sets plus the anchor (the origin), together with the exact separation
constants.  Constants depend only on the sets and the anchor, so truncating
the infinite ambient space to this window does not affect them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from ._config import TOL
from .metric import L1PointSet, SeparationReport, SubsetRef, TooLarge, separation_constants

__all__ = [
    "NoAdmissiblePoint",
    "UnboundedSet",
    "WindowTooSmall",
    "MeshTooCoarse",
    "Family",
    "DyadicPlacement",
    "place_dyadic",
    "l1_ball_points",
    "ball_sequence_lambda20",
    "shrinking_ball_sequence",
    "GridBox",
    "grid_box_sequence",
    "box_retraction",
    "composed_box_retraction",
]


class NoAdmissiblePoint(RuntimeError):
    pass


class UnboundedSet(ValueError):
    pass


class WindowTooSmall(ValueError):
    pass


class MeshTooCoarse(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Family:
    """A family of sets in a finite l1 point set, anchored at its base point."""

    space: L1PointSet
    sets: tuple[SubsetRef, ...]
    report: SeparationReport
    claimed_lambda: float
    claimed_D: float
    extra: dict = field(default_factory=dict)

    @property
    def anchor(self) -> int:
        return self.space.base_point

    @property
    def lambda_ok(self) -> bool:
        return self.report.lambda_ <= self.claimed_lambda + TOL

    def to_dict(self) -> dict:
        return {
            "sets": [self.space.coords[s.array].tolist() for s in self.sets],
            "anchor": self.space.coords[self.anchor].tolist(),
            "report": self.report.to_dict(),
            "claimed": {"lambda": self.claimed_lambda, "D": self.claimed_D},
            **self.extra,
        }


def _assemble(blocks: list[np.ndarray], dim: int) -> tuple[L1PointSet, tuple[SubsetRef, ...]]:
    """Point set with the origin first, then the blocks in order."""
    coords = [np.zeros((1, dim))]
    spans = []
    start = 1
    for b in blocks:
        coords.append(b)
        spans.append(tuple(range(start, start + len(b))))
        start += len(b)
    space = L1PointSet(np.vstack(coords), base_point=0)
    return space, tuple(SubsetRef(space, s) for s in spans)


@dataclass(frozen=True, eq=False)
class DyadicPlacement(Family):
    k_seq: tuple[int, ...] = ()
    translates: tuple[tuple[int, ...], ...] = ()


def _as_coords(s) -> np.ndarray:
    if isinstance(s, SubsetRef):
        return np.asarray(s.space.coords[s.array], dtype=float)
    return np.atleast_2d(np.asarray(s, dtype=float))


def place_dyadic(sets: Sequence, seeds: Sequence[int] | None = None) -> DyadicPlacement:
    """Translate bounded subsets of ``Z^n`` into dyadic shells around the origin.

    ``k_n`` is the least integer with ``k_n >= k_{n-1} + 4`` (``k_0 = 0``) and
    ``2**k_n > diam(S_n)``.  The set is translated so that its seed point
    ``q_n`` (row ``seeds[n]``, default 0) lands on ``p_n``, the
    lexicographically lowest integer point with
    ``2**(k_n+1) <= ||p_n||_1 <= 2**(k_n+2)``, namely ``-2**(k_n+2) e_1``.

    Parameters
    ----------
    sets : sequence of integer coordinate arrays (or SubsetRefs of an L1PointSet)
    seeds : row index of ``q_n`` within each set
    """
    blocks = [_as_coords(s) for s in sets]
    if not blocks:
        raise ValueError("no sets to place")
    dim = blocks[0].shape[1]
    k_prev = 0
    k_seq, translates, placed = [], [], []
    for n, b in enumerate(blocks):
        if not np.all(np.isfinite(b)):
            raise UnboundedSet(f"set {n} has non-finite coordinates")
        if not np.array_equal(b, np.round(b)) or b.shape[1] != dim:
            raise ValueError(f"set {n} is not a subset of Z^{dim}")
        diam = float(np.abs(b[:, None, :] - b[None, :, :]).sum(axis=2).max())
        k = k_prev + 4
        while 2.0 ** k <= diam:
            k += 1
        p = np.zeros(dim)
        p[0] = -(2.0 ** (k + 2))
        if not 2.0 ** (k + 1) <= np.abs(p).sum() <= 2.0 ** (k + 2):
            raise NoAdmissiblePoint(f"no grid point in the band for k = {k}")
        q = b[0 if seeds is None else int(seeds[n])]
        shift = p - q
        k_seq.append(k)
        translates.append(tuple(int(c) for c in shift))
        placed.append(b + shift)
        k_prev = k
    space, family = _assemble(placed, dim)
    report = separation_constants(list(family), 0)
    return DyadicPlacement(space, family, report, 32.0, 1.0,
                           {"k_seq": k_seq, "translates": [list(t) for t in translates]},
                           tuple(k_seq), tuple(translates))


def l1_ball_points(center, radius: float, mesh: float = 1.0, dims: int | None = None,
                   total_dim: int | None = None) -> np.ndarray:
    """Points of ``mesh * Z^dims`` (padded with zeros to ``total_dim``) in the closed l1 ball."""
    c = np.asarray(center, dtype=float).reshape(-1)
    dims = c.size if dims is None else dims
    total_dim = c.size if total_dim is None else total_dim
    steps = int(np.floor(radius / mesh + 1e-9)) + 1
    axes = []
    for i in range(dims):
        lo = np.ceil((c[i] - radius) / mesh - 1e-9)
        axes.append((lo + np.arange(2 * steps + 1)) * mesh)
    pts = []
    for combo in product(*axes):
        v = np.array(combo)
        if np.abs(v - c[:dims]).sum() + np.abs(c[dims:]).sum() <= radius * (1 + 1e-12):
            pts.append(v)
    out = np.zeros((len(pts), total_dim))
    if pts:
        out[:, :dims] = np.array(pts)
    return out


def ball_sequence_lambda20(dim: int, count: int, window: int | None = None) -> Family:
    """Balls ``S_n = B(x_n, 2**n) ∩ Z^dim`` with ``x_n = 2**(n+2) e_1``, ``n = 1..count``.

    ``window`` is the half-width of the grid window ``[-w, w]^dim`` standing
    in for the whole grid; it must contain every ball.
    """
    if dim < 1 or count < 1:
        raise ValueError("dim and count must be positive")
    need = 2 ** (count + 2) + 2 ** count
    if window is not None and window < need:
        raise WindowTooSmall(f"window half-width {window} < {need} needed for the last ball")
    blocks = []
    for n in range(1, count + 1):
        c = np.zeros(dim)
        c[0] = 2.0 ** (n + 2)
        blocks.append(l1_ball_points(c, 2.0 ** n))
    space, family = _assemble(blocks, dim)
    report = separation_constants(list(family), 0)
    return Family(space, family, report, 20.0, 1.0, {"window": need if window is None else window})


def shrinking_ball_sequence(dims: Sequence[int], count: int | None = None,
                            mesh: float | None = None, N1: int = 1) -> Family:
    """Balls ``x_n + 2**-(N_n+1) B_{E_n}`` with ``||x_n|| = 2**-N_n`` and ``N_n = N_{n-1} + 2``.

    ``E_n`` is spanned by the first ``dims[n]`` coordinates and ``x_n`` is
    ``2**-N_n e_1``.  Balls are discretised on the grid of step ``mesh``
    (default and maximum ``2**-(N_count + 3)``), which contains the ball
    centres and the extreme points along ``e_1``, so diameters and distances
    to the origin are exact.

    The computed ``D`` is ``diam / dist = 2``; the ``extra`` field records the
    mismatch with the value 1/2 stated alongside the construction.
    """
    dims = list(dims)
    count = len(dims) if count is None else count
    if count < 1 or count > len(dims):
        raise ValueError("count must be between 1 and len(dims)")
    if any(b < a for a, b in zip(dims, dims[1:])):
        raise ValueError("dims must be non-decreasing")
    N = [N1 + 2 * i for i in range(count)]
    finest = 2.0 ** -(N[-1] + 3)
    h = finest if mesh is None else float(mesh)
    if h > finest:
        raise MeshTooCoarse(f"mesh {h} exceeds 2^-(N_count+3) = {finest}")
    total = max(dims[:count])
    blocks = []
    for n in range(count):
        c = np.zeros(total)
        c[0] = 2.0 ** -N[n]
        blocks.append(l1_ball_points(c, 2.0 ** -(N[n] + 1), h, dims[n], total))
    space, family = _assemble(blocks, total)
    report = separation_constants(list(family), 0)
    diam_dist = [(a, b) for a, b in report.per_set]
    stated = [(2.0 ** -Nn, 2.0 ** -(Nn + 1)) for Nn in N]
    extra = {
        "N_seq": N,
        "mesh": h,
        "D_stated": 0.5,
        "D_computed": report.D,
        "D_discrepancy": bool(abs(report.D - 0.5) > TOL),
        "diam_dist_match": bool(np.allclose(diam_dist, stated, rtol=0, atol=TOL * 2.0 ** -N[-1])),
    }
    return Family(space, family, report, 24.0, 0.5, extra)


@dataclass(frozen=True)
class GridBox:
    """``Q_r ∩ Z^n``: integer points with all coordinates in ``[-r, r]``."""

    n: int
    r: int

    @property
    def n_points(self) -> int:
        return (2 * self.r + 1) ** self.n

    def points(self, max_points: int | None = None) -> np.ndarray:
        if max_points is not None and self.n_points > max_points:
            raise TooLarge(f"box has {self.n_points} points, cap is {max_points}")
        axes = [np.arange(-self.r, self.r + 1)] * self.n
        return np.array(list(product(*axes)), dtype=float).reshape(-1, self.n)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return x.shape[-1] == self.n and bool(np.all(np.abs(x) <= self.r))


def grid_box_sequence(n_max: int = 3) -> list[GridBox]:
    """``S_n = Q_{4**n} ∩ Z^n`` for ``n = 1..n_max`` (points materialise lazily)."""
    if n_max > 3:
        raise TooLarge("boxes beyond n = 3 are too large to enumerate")
    return [GridBox(n, 4 ** n) for n in range(1, n_max + 1)]


def box_retraction(r: float, x) -> np.ndarray:
    """Coordinatewise clamp onto ``[-r, r]``; 1-Lipschitz in l1."""
    return np.clip(np.asarray(x, dtype=float), -r, r)


def composed_box_retraction(box: GridBox, x) -> np.ndarray:
    """Project onto the first ``box.n`` coordinates, then clamp onto the box.

    Maps ``Z^m`` (``m >= n``) onto ``Q_r ∩ Z^n``, fixing the box.
    """
    x = np.asarray(x, dtype=float)
    return box_retraction(box.r, x[..., :box.n])
