"""Extension operators specific to finite-dimensional l1.

* multilinear interpolation on unit hypercubes of the integer grid
  (:func:`hypercube_interpolate`, :class:`GridExtension`);
* the cone retraction ``R_I x = r_I(x) P_I x`` onto a coordinate subspace and
  the operator gluing such retractions over a partition of the coordinates
  (:class:`ConePartitionExtension`).

Coordinate index sets are 0-based throughout.
"""
from __future__ import annotations

from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .._config import TOL
from ..metric import L1PointSet, SubsetRef
from .base import ExtensionOperator, HypothesisViolation

__all__ = [
    "MissingVertex",
    "QueryOutsideBox",
    "RetractedPointOutsideDomain",
    "interpolation_weights",
    "hypercube_interpolate",
    "grid_points",
    "GridExtension",
    "grid_extension_operator",
    "cone_ratio",
    "in_cone",
    "cone_retract",
    "cone_partition_extend",
    "axis_grid_points",
    "ConePartitionExtension",
]


class MissingVertex(KeyError):
    pass


class QueryOutsideBox(ValueError):
    pass


class RetractedPointOutsideDomain(ValueError):
    pass


def interpolation_weights(x, cube=None) -> list[tuple[tuple[int, ...], float]]:
    """Vertices and weights of the multilinear interpolant at ``x``.

    The cube has lower corner ``v = floor(x)`` unless ``cube`` is given (then
    ``0 <= x - cube <= 1`` is required).  The weight of ``v + gamma`` is
    ``prod_i (t_i if gamma_i else 1 - t_i)`` with ``t = x - v``; vertices of
    weight exactly zero are omitted, so a query on a face only touches the
    vertices of that face.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    v = np.floor(x) if cube is None else np.asarray(cube, dtype=float).reshape(-1)
    t = x - v
    if cube is not None and (np.any(t < -TOL) or np.any(t > 1 + TOL)):
        raise QueryOutsideBox(f"query {x.tolist()} is not in the cube at {v.tolist()}")
    t = np.clip(t, 0.0, 1.0)
    base = tuple(int(c) for c in v)
    options = []
    for ti in t:
        opts = []
        if ti < 1.0:
            opts.append((0, 1.0 - ti))
        if ti > 0.0:
            opts.append((1, ti))
        options.append(opts)
    out = []
    for combo in product(*options):
        w = 1.0
        vert = list(base)
        for i, (g, wi) in enumerate(combo):
            w *= wi
            vert[i] += g
        out.append((tuple(vert), w))
    return out


def hypercube_interpolate(f: Mapping[tuple[int, ...], float], query, box=None, cube=None) -> float:
    """Multilinear interpolant of grid values ``f`` at ``query``.

    Parameters
    ----------
    f : mapping from integer coordinate tuples to values
    query : real vector
    box : (lo, hi) integer corners, optional
        Raises :class:`QueryOutsideBox` if the query leaves the box.
    cube : integer lower corner, optional
        Evaluate with this particular unit cube (used to compare the
        interpolants of adjacent cubes on a shared face).
    """
    q = np.asarray(query, dtype=float).reshape(-1)
    if box is not None:
        lo, hi = (np.asarray(c, dtype=float) for c in box)
        if np.any(q < lo - TOL) or np.any(q > hi + TOL):
            raise QueryOutsideBox(f"query {q.tolist()} is outside the box")
        q = np.clip(q, lo, hi)
    total = 0.0
    for vert, w in interpolation_weights(q, cube):
        try:
            total += w * f[vert]
        except KeyError:
            raise MissingVertex(vert) from None
    return float(total)


def grid_points(lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
    """Integer points of the box ``[lo, hi]`` in lexicographic order."""
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    return np.array(list(product(*axes)), dtype=float).reshape(-1, len(axes))


def _vertex_index(space: L1PointSet, source: SubsetRef) -> dict[tuple[int, ...], int]:
    coords = space.coords[source.array]
    if not np.array_equal(coords, np.round(coords)):
        raise HypothesisViolation("grid source must consist of integer points", "grid")
    return {tuple(int(c) for c in row): k for k, row in enumerate(coords)}


class GridExtension(ExtensionOperator):
    """Multilinear interpolation from an integer box to points of l1^n inside it.

    The source must be exactly the integer points of a box; every ambient
    point must lie in that box.  The claimed bound is 1.
    """

    provenance = "hypercube"

    def _default_base(self, src):
        if self.space.base_point in src:
            return self.space.base_point
        coords = self.space.coords[src.array]
        return src.indices[int(np.argmin(np.abs(coords).sum(axis=1)))]

    def _build_matrix(self):
        if not isinstance(self.space, L1PointSet):
            raise HypothesisViolation("grid interpolation needs an l1 point set", "geometry")
        index = _vertex_index(self.space, self.source_)
        verts = np.array(list(index.keys()))
        lo, hi = verts.min(axis=0), verts.max(axis=0)
        if len(index) != int(np.prod(hi - lo + 1)):
            raise HypothesisViolation("grid source is not a full integer box", "grid")
        self.box_ = (lo.tolist(), hi.tolist())
        A = np.zeros((self.space.n_points, len(self.source_)))
        for x, row in enumerate(self.space.coords):
            if np.any(row < lo - TOL) or np.any(row > hi + TOL):
                raise QueryOutsideBox(f"point {x} lies outside the grid box")
            for vert, w in interpolation_weights(np.clip(row, lo, hi)):
                A[x, index[vert]] += w
        return A

    def _claimed_bound(self):
        return 1.0

    def _descriptor_params(self):
        p = super()._descriptor_params()
        p["box"] = {"lo": self.box_[0], "hi": self.box_[1]}
        return p


def grid_extension_operator(lo: Sequence[int], hi: Sequence[int], sample) -> GridExtension:
    """Fitted :class:`GridExtension` on the box grid plus ``sample`` points.

    The ambient point set lists the grid first (lexicographically), then the
    sample points not already on the grid.  The base point is the grid point
    of least norm.
    """
    grid = grid_points(lo, hi)
    sample = np.asarray(sample, dtype=float).reshape(-1, grid.shape[1])
    on_grid = {tuple(r) for r in grid.tolist()}
    extra = [r for r in sample.tolist() if tuple(r) not in on_grid]
    extra = np.unique(np.array(extra), axis=0) if extra else np.zeros((0, grid.shape[1]))
    coords = np.vstack([grid, extra])
    base = int(np.argmin(np.abs(grid).sum(axis=1)))
    space = L1PointSet(coords, base_point=base)
    return GridExtension(space, SubsetRef(space, tuple(range(len(grid))))).fit()


def _split(I, x):
    x = np.asarray(x, dtype=float).reshape(-1)
    mask = np.zeros(x.size, dtype=bool)
    mask[list(I)] = True
    return x, mask


def cone_ratio(I: Sequence[int], x) -> float:
    """``r_I(x) = max(1 - ||x - P_I x|| / ||P_I x||, 0)``, and 0 when ``P_I x = 0``."""
    x, mask = _split(I, x)
    inner = float(np.abs(x[mask]).sum())
    if inner == 0.0:
        return 0.0
    outer = float(np.abs(x[~mask]).sum())
    return max(1.0 - outer / inner, 0.0)


def in_cone(I: Sequence[int], x) -> bool:
    """Strict membership ``||x - P_I x|| < ||P_I x||``."""
    x, mask = _split(I, x)
    return float(np.abs(x[~mask]).sum()) < float(np.abs(x[mask]).sum())


def cone_retract(I: Sequence[int], x) -> np.ndarray:
    """``R_I x = r_I(x) P_I x``, supported on ``I``."""
    x, mask = _split(I, x)
    out = np.zeros_like(x)
    out[mask] = cone_ratio(I, x) * x[mask]
    return out


def _owning_block(partition, x):
    for k, I in enumerate(partition):
        if in_cone(I, x):
            return k
    return None


def cone_partition_extend(partition: Sequence[Sequence[int]], f: Mapping[tuple[int, ...], float],
                          query) -> float:
    """``f(R_I query)`` if the query lies in the cone ``C_I``, else 0.

    ``f`` maps integer points of the axis subspaces to values; a retracted
    point off the grid is evaluated by multilinear interpolation inside its
    subspace.
    """
    q = np.asarray(query, dtype=float).reshape(-1)
    k = _owning_block(partition, q)
    if k is None:
        return 0.0
    y = cone_retract(partition[k], q)
    try:
        return hypercube_interpolate(f, y)
    except MissingVertex as exc:
        raise RetractedPointOutsideDomain(f"R_I(query) needs the missing grid point {exc.args[0]}") from None


def axis_grid_points(n: int, partition: Sequence[Sequence[int]], b: int) -> np.ndarray:
    """Integer points of ``[-b, b]^n`` supported in a single block, origin first."""
    pts = {tuple([0] * n)}
    for I in partition:
        I = list(I)
        for vals in product(range(-b, b + 1), repeat=len(I)):
            p = [0] * n
            for i, v in zip(I, vals):
                p[i] = v
            pts.add(tuple(p))
    origin = tuple([0] * n)
    rest = sorted(pts - {origin})
    return np.array([origin] + rest, dtype=float)


class ConePartitionExtension(ExtensionOperator):
    """Extension from the grid points of the axis subspaces ``l1(I)``, ``I`` in a partition.

    ``Ef(x) = F(R_I x)`` on the cone ``C_I`` and 0 outside all cones, where
    ``F`` is the multilinear interpolant of ``f`` inside ``l1(I)``.  The
    claimed bound is 2.

    Parameters
    ----------
    partition : sequence of disjoint index sets covering ``range(dim)``
    """

    provenance = "cone_partition"

    def __init__(self, space=None, source=None, partition=None, base_point=None):
        super().__init__(space, source, base_point)
        self.partition = partition

    def _build_matrix(self):
        space = self.space
        n = space.dim
        blocks = [sorted(int(i) for i in I) for I in self.partition]
        flat = sorted(i for I in blocks for i in I)
        if flat != list(range(n)):
            raise HypothesisViolation("partition must split the coordinates into disjoint blocks", "partition")
        index = _vertex_index(space, self.source_)
        origin = tuple([0] * n)
        if self.base_point_ not in self.source_ or tuple(space.coords[self.base_point_]) != origin:
            raise HypothesisViolation("the base point must be the origin of the grid", "base")
        A = np.zeros((space.n_points, len(self.source_)))
        owner = np.full(space.n_points, -1)
        for x, row in enumerate(space.coords):
            k = _owning_block(blocks, row)
            if k is None:
                continue
            owner[x] = k
            y = cone_retract(blocks[k], row)
            for vert, w in interpolation_weights(y):
                col = index.get(vert)
                if col is None:
                    raise RetractedPointOutsideDomain(f"R_I of point {x} needs grid point {vert}")
                A[x, col] += w
        self.owner_ = owner
        self.blocks_ = blocks
        return A

    def _claimed_bound(self):
        return 2.0

    def _descriptor_params(self):
        p = super()._descriptor_params()
        p["partition"] = self.blocks_
        return p
