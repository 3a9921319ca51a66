"""Finite metric spaces, subsets and the separation constants used by the gluing constructions.

Two concrete point containers are provided:

* :class:`FiniteMetricSpace` stores an explicit, validated distance matrix.
* :class:`L1PointSet` stores coordinate vectors and computes l1 distances on
  demand, so that large grid windows never need a dense matrix.

Both expose ``n_points``, ``base_point`` and ``pairwise(rows, cols)``; every
routine in this package only relies on that small surface.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from ._config import TOL, max_points

__all__ = [
    "MetricError",
    "NotSquare",
    "Asymmetry",
    "NegativeDistance",
    "NonzeroDiagonal",
    "ZeroOffDiagonal",
    "TriangleViolation",
    "GeometryError",
    "EmptySet",
    "AnchorInSet",
    "OverlappingSets",
    "ZeroCrossDistance",
    "TooLarge",
    "FiniteMetricSpace",
    "L1PointSet",
    "SubsetRef",
    "SeparationReport",
    "NetCheck",
    "validate_metric",
    "ball",
    "diameter",
    "dist_to_set",
    "set_distance",
    "separation_constants",
    "is_net",
    "greedy_net",
]


class MetricError(ValueError):
    """A distance matrix failed one of the metric axioms."""

    def __init__(self, message: str, witness: tuple[int, ...] = ()):
        super().__init__(message)
        self.witness = tuple(int(i) for i in witness)


class NotSquare(MetricError):
    pass


class Asymmetry(MetricError):
    pass


class NegativeDistance(MetricError):
    pass


class NonzeroDiagonal(MetricError):
    pass


class ZeroOffDiagonal(MetricError):
    pass


class TriangleViolation(MetricError):
    pass


class GeometryError(ValueError):
    """A family of subsets does not meet a geometric precondition."""

    def __init__(self, message: str, witness: tuple = ()):
        super().__init__(message)
        self.witness = witness


class EmptySet(GeometryError):
    pass


class AnchorInSet(GeometryError):
    pass


class OverlappingSets(GeometryError):
    pass


class ZeroCrossDistance(GeometryError):
    pass


class TooLarge(ValueError):
    pass


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite metric space given by its distance matrix.

    Construct through :func:`validate_metric` unless the matrix is known to be
    a metric (for instance when converting an :class:`L1PointSet`).
    """

    dist: np.ndarray
    points: tuple[str, ...] = ()
    base_point: int = 0

    def __post_init__(self):
        dist = _readonly(self.dist)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise NotSquare(f"distance matrix must be square, got shape {dist.shape}")
        object.__setattr__(self, "dist", dist)
        n = dist.shape[0]
        if not self.points:
            object.__setattr__(self, "points", tuple(str(i) for i in range(n)))
        else:
            object.__setattr__(self, "points", tuple(str(p) for p in self.points))
        if len(self.points) != n:
            raise ValueError("number of point ids does not match the matrix size")
        if len(set(self.points)) != n:
            raise ValueError("point ids must be distinct")
        if n and not 0 <= self.base_point < n:
            raise ValueError(f"base point {self.base_point} out of range")

    @property
    def n_points(self) -> int:
        return self.dist.shape[0]

    def pairwise(self, rows=None, cols=None) -> np.ndarray:
        rows = np.arange(self.n_points) if rows is None else np.asarray(rows, dtype=int)
        cols = rows if cols is None else np.asarray(cols, dtype=int)
        return self.dist[np.ix_(rows, cols)]

    def index(self, point_id: str) -> int:
        return self.points.index(str(point_id))

    def subspace(self, indices: Sequence[int], base_point: int | None = None) -> "FiniteMetricSpace":
        """Restriction of the metric to ``indices`` (re-indexed in the given order)."""
        idx = np.asarray(indices, dtype=int)
        base = 0 if base_point is None else int(base_point)
        return FiniteMetricSpace(self.pairwise(idx), tuple(self.points[i] for i in idx), base)

    def with_base_point(self, base_point: int) -> "FiniteMetricSpace":
        return FiniteMetricSpace(self.dist, self.points, int(base_point))

    def to_metric_space(self) -> "FiniteMetricSpace":
        return self


@dataclass(frozen=True, eq=False)
class L1PointSet:
    """Finite point set in l1^n with the induced metric ``sum |x_k - y_k|``."""

    coords: np.ndarray
    base_point: int = 0

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float, copy=True)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[1] < 1:
            raise ValueError("coords must be a (n_points, dim) array with dim >= 1")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        if coords.shape[0] and not 0 <= self.base_point < coords.shape[0]:
            raise ValueError(f"base point {self.base_point} out of range")

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]

    def pairwise(self, rows=None, cols=None) -> np.ndarray:
        a = self.coords if rows is None else self.coords[np.asarray(rows, dtype=int)]
        if cols is None:
            b = a
        else:
            b = self.coords[np.asarray(cols, dtype=int)]
        return np.abs(a[:, None, :] - b[None, :, :]).sum(axis=2)

    def to_metric_space(self) -> FiniteMetricSpace:
        """Exact conversion to a dense :class:`FiniteMetricSpace`."""
        if self.n_points > max_points():
            raise TooLarge(f"{self.n_points} points exceed the cap of {max_points()}")
        ids = tuple(",".join(repr(float(c)) for c in row) for row in self.coords)
        if len(set(ids)) != len(ids):
            raise ZeroOffDiagonal("duplicate coordinates", ())
        return FiniteMetricSpace(self.pairwise(), ids, self.base_point)


Space = Union[FiniteMetricSpace, L1PointSet]


def validate_metric(matrix, points: Sequence[str] | None = None, base_point: int = 0,
                    tol: float = TOL, max_size: int | None = None) -> FiniteMetricSpace:
    """Check the metric axioms and return a :class:`FiniteMetricSpace`.

    Axioms are checked in order (squareness, symmetry, nonnegativity, zero
    diagonal, positive off-diagonal, triangle inequality); the first failure
    raises the matching :class:`MetricError` subclass with witness indices.
    The triangle witness ``(i, j, k)`` means ``d[i, k] > d[i, j] + d[j, k]``.
    """
    d = np.asarray(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise NotSquare(f"distance matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    cap = max_points() if max_size is None else max_size
    if n > cap:
        raise TooLarge(f"{n} points exceed the cap of {cap}")
    if not np.all(np.isfinite(d)):
        bad = np.argwhere(~np.isfinite(d))[0]
        raise NegativeDistance("distances must be finite", tuple(bad))
    asym = np.argwhere(d != d.T)
    if asym.size:
        i, j = asym[0]
        raise Asymmetry(f"d[{i}][{j}] = {d[i, j]} differs from d[{j}][{i}] = {d[j, i]}", (i, j))
    neg = np.argwhere(d < 0)
    if neg.size:
        i, j = neg[0]
        raise NegativeDistance(f"d[{i}][{j}] = {d[i, j]} is negative", (i, j))
    diag = np.flatnonzero(np.diag(d) != 0)
    if diag.size:
        i = diag[0]
        raise NonzeroDiagonal(f"d[{i}][{i}] = {d[i, i]} is not zero", (i, i))
    off = np.argwhere((d == 0) & ~np.eye(n, dtype=bool))
    if off.size:
        i, j = off[0]
        raise ZeroOffDiagonal(f"distinct points {i} and {j} are at distance 0", (i, j))
    for i in range(n):
        # viol[j, k]: d[i, k] > d[i, j] + d[j, k]
        viol = d[i][None, :] > d[i][:, None] + d + tol * np.maximum(1.0, d[i][None, :])
        hit = np.argwhere(viol)
        if hit.size:
            j, k = hit[0]
            raise TriangleViolation(
                f"d[{i}][{k}] = {d[i, k]} > d[{i}][{j}] + d[{j}][{k}] = {d[i, j] + d[j, k]}",
                (i, j, k),
            )
    return FiniteMetricSpace(d, tuple(points) if points is not None else (), base_point)


@dataclass(frozen=True, eq=False)
class SubsetRef:
    """Sorted, duplicate-free index list into a space."""

    space: Space
    indices: tuple[int, ...]
    allow_empty: bool = False

    def __post_init__(self):
        idx = [int(i) for i in self.indices]
        if len(set(idx)) != len(idx):
            raise ValueError("subset indices must be distinct")
        n = self.space.n_points
        bad = [i for i in idx if not 0 <= i < n]
        if bad:
            raise ValueError(f"subset indices out of range: {bad}")
        if not idx and not self.allow_empty:
            raise EmptySet("subset is empty")
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i) -> bool:
        return int(i) in self.indices

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=int)

    def union(self, other: "SubsetRef") -> "SubsetRef":
        if other.space is not self.space:
            raise ValueError("subsets live in different spaces")
        return SubsetRef(self.space, tuple(sorted(set(self.indices) | set(other.indices))), True)

    def issubset(self, other: "SubsetRef") -> bool:
        return set(self.indices) <= set(other.indices)


def _as_indices(subset) -> np.ndarray:
    if isinstance(subset, SubsetRef):
        return subset.array
    return np.asarray(list(subset), dtype=int)


def ball(space: Space, center: int, r: float, tol: float = TOL) -> SubsetRef:
    """Closed ball ``B(center, r)`` as a subset of ``space``."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    d = space.pairwise([center], np.arange(space.n_points))[0]
    return SubsetRef(space, tuple(np.flatnonzero(d <= r + tol)))


def diameter(subset: SubsetRef) -> float:
    idx = subset.array
    if idx.size < 2:
        return 0.0
    return float(subset.space.pairwise(idx, idx).max())


def dist_to_set(space: Space, points, subset) -> np.ndarray:
    """``d(x, S)`` for every ``x`` in ``points``."""
    return space.pairwise(_as_indices(points), _as_indices(subset)).min(axis=1)


def set_distance(a: SubsetRef, b: SubsetRef) -> float:
    return float(a.space.pairwise(a.array, b.array).min())


@dataclass(frozen=True)
class SeparationReport:
    """Exact separation constants of a family relative to an anchor point.

    ``lambda_`` is the well-separation constant (clamped below by 1), ``D``
    the largest ratio ``diam(S_i) / d(S_i, anchor)``.
    """

    lambda_: float
    D: float
    min_cross_distance: float
    per_set: tuple[tuple[float, float], ...]
    lambda_witness: tuple[int, int] | None = None
    raw_lambda: float = 1.0

    def to_dict(self) -> dict:
        return {
            "lambda": self.lambda_,
            "raw_lambda": self.raw_lambda,
            "D": self.D,
            "min_cross_distance": self.min_cross_distance,
            "per_set": [{"diam": a, "dist_to_anchor": b} for a, b in self.per_set],
            "lambda_witness": list(self.lambda_witness) if self.lambda_witness else None,
        }


def separation_constants(family: Sequence[SubsetRef], anchor: int) -> SeparationReport:
    """Compute the constants of the well-separation and size conditions.

    ``lambda_`` is the maximum of ``(d(x, x0) + d(y, x0)) / d(x, y)`` over
    pairs lying in different sets, clamped below by 1; ``D`` is the maximum of
    ``diam(S_i) / d(S_i, x0)``.  Both are exact maxima over the finite data.
    """
    if not family:
        raise EmptySet("family is empty")
    space = family[0].space
    owner: dict[int, int] = {}
    for k, s in enumerate(family):
        if s.space is not space:
            raise ValueError("all sets must live in the same space")
        if len(s) == 0:
            raise EmptySet(f"set {k} is empty", (k,))
        if anchor in s:
            raise AnchorInSet(f"anchor {anchor} belongs to set {k}", (k,))
        for i in s.indices:
            if i in owner:
                raise OverlappingSets(f"point {i} lies in sets {owner[i]} and {k}", (owner[i], k, i))
            owner[i] = k

    idx = np.fromiter(owner.keys(), dtype=int)
    label = np.fromiter(owner.values(), dtype=int)
    to_anchor = space.pairwise(idx, [anchor])[:, 0]

    per_set = []
    D = 0.0
    for k, s in enumerate(family):
        mask = label == k
        da = float(to_anchor[mask].min())
        diam = diameter(s)
        per_set.append((diam, da))
        D = max(D, diam / da)

    raw = 1.0
    witness = None
    min_cross = float("inf")
    if len(family) > 1:
        d = space.pairwise(idx, idx)
        cross = label[:, None] != label[None, :]
        cd = np.where(cross, d, np.inf)
        min_cross = float(cd.min())
        if min_cross <= 0:
            i, j = np.unravel_index(np.argmin(cd), cd.shape)
            raise ZeroCrossDistance("sets touch", (int(idx[i]), int(idx[j])))
        ratio = np.where(cross, (to_anchor[:, None] + to_anchor[None, :]) / np.where(cross, d, 1.0), -np.inf)
        flat = int(np.argmax(ratio))
        i, j = np.unravel_index(flat, ratio.shape)
        raw = float(ratio[i, j])
        witness = tuple(sorted((int(idx[i]), int(idx[j]))))
    return SeparationReport(max(1.0, raw), D, min_cross, tuple(per_set), witness, raw)


@dataclass(frozen=True)
class NetCheck:
    ok: bool
    density_witness: int | None = None
    separation_witness: tuple[int, int] | None = None
    density: float = 0.0
    separation: float = float("inf")

    def __bool__(self) -> bool:
        return self.ok


def is_net(candidate: SubsetRef, eps: float, delta: float, tol: float = TOL) -> NetCheck:
    """Check that ``candidate`` is eps-dense in its space and delta-separated."""
    if eps <= 0 or delta <= 0:
        raise ValueError("eps and delta must be positive")
    space = candidate.space
    every = np.arange(space.n_points)
    to_net = dist_to_set(space, every, candidate)
    density = float(to_net.max())
    dens_w = None
    if density > eps + tol:
        dens_w = int(every[np.argmax(to_net > eps + tol)])
    idx = candidate.array
    sep = float("inf")
    sep_w = None
    if idx.size > 1:
        d = space.pairwise(idx, idx) + np.diag(np.full(idx.size, np.inf))
        sep = float(d.min())
        if sep < delta - tol:
            i, j = np.argwhere(d < delta - tol)[0]
            sep_w = (int(idx[i]), int(idx[j]))
    return NetCheck(dens_w is None and sep_w is None, dens_w, sep_w, density, sep)


def greedy_net(space: Space, delta: float, seed_order: Iterable[int] | None = None,
               tol: float = TOL) -> SubsetRef:
    """Maximal delta-separated subset chosen greedily along ``seed_order``.

    Maximality makes the result delta-dense as well.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    order = list(range(space.n_points)) if seed_order is None else [int(i) for i in seed_order]
    if sorted(order) != list(range(space.n_points)):
        raise ValueError("seed_order must be a permutation of the point indices")
    chosen: list[int] = []
    for i in order:
        if not chosen or space.pairwise([i], chosen)[0].min() >= delta - tol:
            chosen.append(i)
    return SubsetRef(space, tuple(chosen))
