"""Lipschitz-free space computations on finite metric spaces.

Molecules are zero-mass signed measures.  Their free-space norm is the
Kantorovich-Rubinstein transport value, computed two independent ways:

* primal: min-cost transport between the positive and negative parts
  (:func:`lipext.flow.transport`);
* dual: ``max <f, mu>`` over 1-Lipschitz ``f`` (pairwise slope LP solved by
  :func:`lipext.lp.linprog`).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping

import numpy as np

from ._config import TOL, max_lp_points, max_vertex_points
from .flow import transport
from .lipfn import LipFunction
from .lp import LPError, linprog, simplex_standard
from .metric import FiniteMetricSpace, SubsetRef, TooLarge

__all__ = [
    "NonzeroMass",
    "NotMaterializable",
    "BasePointNotInS",
    "DualityGap",
    "Molecule",
    "ProjectionMatrix",
    "OperatorNorm",
    "ExtensionConstant",
    "kr_norm",
    "kr_norm_primal",
    "kr_norm_dual",
    "preadjoint",
    "operator_norm_from_extension",
    "lip_operator_norm",
    "lip_ball_vertices",
    "lip_ball_vertex_array",
    "extension_constant_lp",
]


class NonzeroMass(ValueError):
    pass


class NotMaterializable(ValueError):
    pass


class BasePointNotInS(ValueError):
    pass


class DualityGap(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Molecule:
    """Finitely supported zero-mass measure on a space.

    Use :meth:`from_weights` to build one from arbitrary weights; the residual
    mass is moved to the base point, which is the identification
    ``delta(0) = 0`` of the free space.
    """

    space: object
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True).reshape(-1)
        if w.size != self.space.n_points:
            raise ValueError("one weight per point is required")
        if abs(w.sum()) > TOL * max(1.0, np.abs(w).sum()):
            raise NonzeroMass(f"total mass {w.sum()} is not zero")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_weights(cls, space, weights: Mapping[int, float] | np.ndarray) -> "Molecule":
        w = np.zeros(space.n_points)
        if isinstance(weights, Mapping):
            for i, v in weights.items():
                w[int(i)] += float(v)
        else:
            w += np.asarray(weights, dtype=float)
        w[space.base_point] -= w.sum()
        return cls(space, w)

    @classmethod
    def dirac_difference(cls, space, x: int, y: int) -> "Molecule":
        w = np.zeros(space.n_points)
        w[x] += 1.0
        w[y] -= 1.0
        return cls(space, w)

    def __add__(self, other: "Molecule") -> "Molecule":
        return Molecule(self.space, self.weights + other.weights)

    def __mul__(self, a: float) -> "Molecule":
        return Molecule(self.space, self.weights * float(a))

    __rmul__ = __mul__

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights)

    def to_dict(self) -> dict:
        ids = getattr(self.space, "points", None)
        out = {}
        for i in self.support():
            key = ids[i] if ids else str(int(i))
            out[key] = float(self.weights[i])
        return {"weights": out}


def _split(space, weights):
    w = np.asarray(weights, dtype=float)
    pos = np.flatnonzero(w > 0)
    neg = np.flatnonzero(w < 0)
    return w, pos, neg


def kr_norm_primal(space, weights) -> float:
    """Transport cost between the positive and negative parts of ``weights``."""
    w, pos, neg = _split(space, weights)
    if pos.size == 0 or neg.size == 0:
        return 0.0
    C = space.pairwise(pos, neg)
    a, b = w[pos], -w[neg]
    if pos.size == 1:
        return float(C[0] @ b)
    if neg.size == 1:
        return float(a @ C[:, 0])
    # rescale the smaller side so margins balance exactly
    b = b * (a.sum() / b.sum())
    value, _ = transport(a, b, C)
    return value


def kr_norm_dual(space, weights) -> float:
    """``max sum_x w_x f(x)`` over functions 1-Lipschitz on the support of ``w``."""
    w = np.asarray(weights, dtype=float)
    supp = np.flatnonzero(w)
    if supp.size < 2:
        return 0.0
    d = space.pairwise(supp, supp)
    s = supp.size
    # pin f at the first support point; variables f_1..f_{s-1}
    rows, rhs = [], []
    for i in range(s):
        for j in range(s):
            if i == j:
                continue
            r = np.zeros(s)
            r[i] += 1.0
            r[j] -= 1.0
            rows.append(r[1:])
            rhs.append(d[i, j])
    res = linprog(-w[supp][1:], np.array(rows), np.array(rhs), free=np.ones(s - 1, dtype=bool))
    if not res.success:
        raise LPError(f"dual KR LP failed: {res.status}")
    return -res.fun


def kr_norm(mu: Molecule | tuple, method: str = "primal", gap_tol: float = 1e-7) -> float:
    """Free-space norm of a molecule.

    Parameters
    ----------
    mu : Molecule or (space, weights)
    method : {"primal", "dual", "both"}
        ``"both"`` solves the two programs and raises :class:`DualityGap` if
        they differ by more than ``gap_tol`` (relative to the mass).
    """
    if isinstance(mu, Molecule):
        space, w = mu.space, mu.weights
    else:
        space, w = mu
        w = np.asarray(w, dtype=float)
        if abs(w.sum()) > TOL * max(1.0, np.abs(w).sum()):
            raise NonzeroMass(f"total mass {w.sum()} is not zero")
    if method == "primal":
        return kr_norm_primal(space, w)
    if method == "dual":
        return kr_norm_dual(space, w)
    if method == "both":
        p = kr_norm_primal(space, w)
        d = kr_norm_dual(space, w)
        if abs(p - d) > gap_tol * max(1.0, abs(p)):
            raise DualityGap(f"primal {p} and dual {d} disagree")
        return p
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class ProjectionMatrix:
    """Preadjoint ``P: F(M) -> F(S)`` in the bases ``delta(x)``, x != base.

    ``entries[k, j]`` is the coefficient of ``delta(target_points[k])`` in
    ``P delta(source_points[j])``.
    """

    entries: np.ndarray
    source_points: tuple[int, ...]
    target_points: tuple[int, ...]
    base_point: int

    @property
    def source_dim(self) -> int:
        return len(self.source_points)

    @property
    def target_dim(self) -> int:
        return len(self.target_points)

    def is_projection(self, tol: float = TOL) -> bool:
        """``P delta(x) = delta(x)`` for every x in S other than the base point."""
        col = {p: j for j, p in enumerate(self.source_points)}
        for k, s in enumerate(self.target_points):
            e = np.zeros(self.target_dim)
            e[k] = 1.0
            if not np.allclose(self.entries[:, col[s]], e, atol=tol, rtol=0):
                return False
        return True


def _lip0_layout(op):
    """Columns of the operator matrix acting on Lip_0 and the domain T = S + base."""
    src = list(op.source_.indices)
    base = op.base_point_
    keep = [k for k, s in enumerate(src) if s != base]
    targets = [src[k] for k in keep]
    domain = sorted(set(src) | {base})
    return keep, targets, domain


def preadjoint(op) -> ProjectionMatrix:
    """Preadjoint of a fitted finite extension operator."""
    if not hasattr(op, "matrix_"):
        raise NotMaterializable("operator is not fitted")
    keep, targets, _ = _lip0_layout(op)
    base = op.base_point_
    sources = [x for x in range(op.space.n_points) if x != base]
    entries = op.matrix_[np.ix_(sources, keep)].T
    return ProjectionMatrix(entries.copy(), tuple(sources), tuple(targets), base)


@dataclass(frozen=True)
class OperatorNorm:
    value: float
    witness: tuple[int, int] | None
    dual_value: float | None = None
    pairs_checked: int = 0


def _pair_measure(op, keep, x, y):
    """Weights on the ambient space of ``P(delta x - delta y)`` with residual at the base."""
    w = np.zeros(op.space.n_points)
    cols = op.source_.array[keep]
    np.add.at(w, cols, op.matrix_[x, keep] - op.matrix_[y, keep])
    w[op.base_point_] -= w.sum()
    return w


def operator_norm_from_extension(op, cross_check: str = "witness", gap_tol: float = 1e-7,
                                 max_points: int | None = None) -> OperatorNorm:
    """Exact norm of the preadjoint projection of a finite extension operator.

    The unit ball of F(M) is the closed convex hull of the normalised
    molecules ``(delta x - delta y) / d(x, y)``, so the norm is the finite
    maximum of ``||P(delta x - delta y)|| / d(x, y)`` over pairs.

    Parameters
    ----------
    cross_check : {"witness", "all", "none"}
        Pairs on which the dual LP (the Lip_0 operator norm evaluated on the
        same pair) re-solves and must agree with the transport value.
    """
    if not hasattr(op, "matrix_"):
        raise NotMaterializable("operator is not fitted")
    space = op.space
    n = space.n_points
    if max_points is not None and n > max_points:
        raise TooLarge(f"{n} ambient points exceed {max_points}")
    keep, _, _ = _lip0_layout(op)
    A = op.matrix_[:, keep]
    base = op.base_point_
    if op.base_point_ not in op.source_.indices and np.any(op.matrix_[base] != 0):
        raise NotMaterializable("operator does not vanish at the base point")
    d = space.pairwise(np.arange(n), np.arange(n))
    best, witness, checked = 0.0, None, 0
    for x in range(n):
        for y in range(x + 1, n):
            diff = A[x] - A[y]
            if not diff.any():
                continue
            w = _pair_measure(op, keep, x, y)
            val = kr_norm_primal(space, w) / d[x, y]
            checked += 1
            if cross_check == "all":
                dual = kr_norm_dual(space, w) / d[x, y]
                if abs(dual - val) > gap_tol * max(1.0, val):
                    raise DualityGap(f"pair {(x, y)}: transport {val} vs dual {dual}")
            if val > best:
                best, witness = val, (x, y)
    if not keep:
        # F(S) = {0}; report the convention e = 1 used for one-point sources
        return OperatorNorm(1.0, None, None, checked)
    dual_value = None
    if witness is not None and cross_check in ("witness", "all"):
        w = _pair_measure(op, keep, *witness)
        dual_value = kr_norm_dual(space, w) / d[witness]
        if abs(dual_value - best) > gap_tol * max(1.0, best):
            raise DualityGap(f"witness {witness}: transport {best} vs dual {dual_value}")
    return OperatorNorm(best, witness, dual_value, checked)


def _vertices_from_distances(D: np.ndarray, base: int, tol: float = 1e-9) -> np.ndarray:
    """Vertices of ``{f : f(base) = 0, |f(i) - f(j)| <= D[i, j]}``.

    A feasible point is a vertex iff its tight constraints form a connected
    graph spanning all points (the base is pinned).  Vertices are generated by
    growing tight-connected partial assignments from the base one point at a
    time; partial states are deduplicated per level.
    """
    s = D.shape[0]
    scale = max(1.0, float(D.max(initial=0.0)))
    key_tol = 1e-9 * scale

    def key(mask, vals):
        return (mask, tuple(np.round(vals / key_tol).astype(np.int64).tolist()))

    level = {key(1 << base, np.zeros(s)): (1 << base, np.zeros(s))}
    for _ in range(s - 1):
        nxt = {}
        for mask, vals in level.values():
            inside = [i for i in range(s) if mask >> i & 1]
            for x in range(s):
                if mask >> x & 1:
                    continue
                cand = set()
                for y in inside:
                    cand.add(vals[y] + D[x, y])
                    cand.add(vals[y] - D[x, y])
                for v in cand:
                    if all(abs(v - vals[y]) <= D[x, y] + tol * scale for y in inside):
                        nv = vals.copy()
                        nv[x] = v
                        m2 = mask | (1 << x)
                        nxt.setdefault(key(m2, nv), (m2, nv))
        level = nxt
    verts = np.array([v for _, v in level.values()]) if level else np.zeros((0, s))
    return verts


def lip_ball_vertex_array(space, points, base: int, max_size: int | None = None) -> np.ndarray:
    """Vertex array (rows) of the Lip_0 unit ball over ``points`` (which include ``base``)."""
    pts = list(points)
    cap = max_vertex_points() if max_size is None else max_size
    if len(pts) > cap:
        raise TooLarge(f"{len(pts)} points exceed the vertex-enumeration cap of {cap}")
    D = space.pairwise(pts, pts)
    return _vertices_from_distances(D, pts.index(base))


def lip_ball_vertices(S: SubsetRef, base: int | None = None) -> list[LipFunction]:
    """Vertices of the unit ball of Lip_0 over ``S`` (base default: the space's base point).

    If the base point is outside ``S`` the ball is taken over ``S`` plus the
    base point and the returned functions live on that enlarged domain.
    """
    space = S.space
    base = space.base_point if base is None else int(base)
    pts = sorted(set(S.indices) | {base})
    V = lip_ball_vertex_array(space, pts, base)
    dom = SubsetRef(space, tuple(pts))
    return [LipFunction(dom, v) for v in V]


def lip_operator_norm(op, max_size: int | None = None) -> float:
    """``max ||E v||_Lip`` over the vertices v of the Lip_0 unit ball of the source."""
    keep, targets, domain = _lip0_layout(op)
    V = lip_ball_vertex_array(op.space, domain, op.base_point_, max_size)
    pos = [domain.index(t) for t in targets]
    vals = V[:, pos] @ op.matrix_[:, keep].T  # (n_vertices, |M|)
    n = op.space.n_points
    d = op.space.pairwise(np.arange(n), np.arange(n))
    iu = np.triu_indices(n, 1)
    if iu[0].size == 0:
        return 0.0
    return float((np.abs(vals[:, iu[0]] - vals[:, iu[1]]) / d[iu]).max(initial=0.0))


@dataclass(frozen=True)
class ExtensionConstant:
    """Result of the LP for the extension constant.

    ``matrix`` is an optimal extension operator (rows: all points of M,
    columns: points of S) which reproduces constants.
    """

    e_value: float
    matrix: np.ndarray
    source: tuple[int, ...]
    vertices_used: int
    lp_value: float
    iterations: int = 0

    def to_dict(self) -> dict:
        return {"S": list(self.source), "e": self.e_value, "vertices_used": self.vertices_used}


def extension_constant_lp(S: SubsetRef, M: FiniteMetricSpace | None = None,
                          max_size: int | None = None, rule: str = "bland") -> ExtensionConstant:
    """Extension constant ``e(S, M)`` as the optimum of a finite LP.

    Minimises ``t`` over extension matrices subject to
    ``(Ev)(x) - (Ev)(y) <= t d(x, y)`` for every vertex ``v`` of the Lip_0
    unit ball of ``S`` and every pair with at least one point outside ``S``
    (the vertex set is symmetric, so one orientation per pair suffices).  On a
    finite space every linear extension is pointwise continuous, so the
    optimum is both the weak* and the plain extension constant.

    The LP has few variables and many rows, so its dual (few rows, many
    columns) is handed to the simplex; the optimal matrix is read off the
    simplex multipliers.
    """
    M = S.space if M is None else M
    if M is not S.space:
        raise ValueError("S must be a subset of M")
    cap = max_lp_points() if max_size is None else max_size
    n = M.n_points
    if n > cap:
        raise TooLarge(f"{n} points exceed the LP cap of {cap}")
    base = M.base_point
    src = list(S.indices)
    if base not in src:
        raise BasePointNotInS(f"base point {base} is not in S")
    outside = [x for x in range(n) if x not in src]
    others = [s for s in src if s != base]
    k = len(others)
    A_full = np.zeros((n, len(src)))
    A_full[src, range(len(src))] = 1.0
    if not outside or k == 0:
        A_full[outside, src.index(base)] = 1.0
        return ExtensionConstant(1.0, A_full, tuple(src), 0, 1.0)

    V = lip_ball_vertex_array(M, src, base)  # columns follow src order
    Vk = V[:, [src.index(s) for s in others]]
    d = M.pairwise(np.arange(n), np.arange(n))
    row_of = {x: r for r, x in enumerate(outside)}
    n_z = len(outside) * k
    blocks, h, dist = [], [], []
    for x, y in combinations(range(n), 2):
        if x not in row_of and y not in row_of:
            continue
        G = np.zeros((V.shape[0], n_z))
        const = np.zeros(V.shape[0])
        for p, sgn in ((x, 1.0), (y, -1.0)):
            if p in row_of:
                G[:, row_of[p] * k:(row_of[p] + 1) * k] += sgn * Vk
            else:
                const += sgn * V[:, src.index(p)]
        # row: G z - d t <= -const
        blocks.append(G)
        h.append(-const)
        dist.append(np.full(V.shape[0], d[x, y]))
    G = np.vstack(blocks)
    h = np.concatenate(h)
    dist = np.concatenate(dist)
    # dual: min h.y  s.t.  G^T y = 0,  dist.y + s = 1,  y, s >= 0
    m = G.shape[0]
    A_dual = np.zeros((n_z + 1, m + 1))
    A_dual[:n_z, :m] = G.T
    A_dual[n_z, :m] = dist
    A_dual[n_z, m] = 1.0
    b_dual = np.zeros(n_z + 1)
    b_dual[-1] = 1.0
    res = simplex_standard(np.concatenate([h, [0.0]]), A_dual, b_dual, rule=rule)
    if not res.success:
        raise LPError(f"extension-constant LP failed: {res.status}")
    z = res.duals[:n_z]
    t = -float(res.duals[-1])
    E = z.reshape(len(outside), k)
    for r, x in enumerate(outside):
        for j, s in enumerate(others):
            A_full[x, src.index(s)] = E[r, j]
        A_full[x, src.index(base)] = 1.0 - E[r].sum()
    return ExtensionConstant(max(1.0, t), A_full, tuple(src), int(V.shape[0]), t, res.iterations)
