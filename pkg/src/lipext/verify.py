"""Verification runs: build a construction, certify it, collect result rows.

Every runner takes its parameters plus ``seed``/``tol`` and returns a
:class:`~lipext.report.RunReport` whose rows compare a claimed constant with
the computed one.  Runs are deterministic given their inputs.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ._config import TOL
from .constructions import (
    ball_sequence_lambda20,
    place_dyadic,
    shrinking_ball_sequence,
)
from .extension.base import MatrixExtension, McShaneExtender, RetractionExtender
from .extension.certify import FunctionCorpus, certify_norm, make_rng
from .extension.glue import EmptyFamily, GlueFamily, GluePair
from .extension.l1 import (
    ConePartitionExtension,
    axis_grid_points,
    cone_retract,
    grid_extension_operator,
    hypercube_interpolate,
)
from .extension.nets import NetBallRetraction
from .free_space import extension_constant_lp, operator_norm_from_extension
from .metric import L1PointSet, SubsetRef
from .report import RunReport

__all__ = [
    "TARGETS",
    "random_glue_family",
    "random_partition",
    "verify_glue_pair",
    "verify_glue_family",
    "verify_grid_interp",
    "verify_cone",
    "verify_net_ball",
    "verify_place_dyadic",
    "verify_balls_20",
    "verify_balls_24",
    "compute_e",
    "nested_e",
]


def _corpus(kind: str) -> FunctionCorpus:
    return FunctionCorpus(kind=kind)


def _certify_rows(rep: RunReport, name: str, op, trials: int, seed: int, corpus: FunctionCorpus):
    res = certify_norm(op, trials=trials, corpus=corpus, seed=seed, tol=rep.inputs["tol"])
    rep.add(f"{name}: exact norm <= claimed", op.claimed_bound_, res.exact)
    rep.add(f"{name}: empirical norm <= exact norm", res.exact, res.empirical)
    return res


# --- glue ----------------------------------------------------------------

def _line_space(points: set[int], base_value: int = 0) -> L1PointSet:
    xs = sorted(points)
    return L1PointSet(np.array(xs, dtype=float)[:, None], base_point=xs.index(base_value))


def verify_glue_pair(instances: int = 5, trials: int = 100, seed: int = 0, tol: float = TOL,
                     corpus: str = "uniform") -> RunReport:
    """Glue McShane extenders on two separated intervals of a line grid."""
    rep = RunReport("verify glue-pair", {"target": "glue-pair", "instances": instances, "trials": trials,
                                         "seed": seed, "tol": tol, "corpus": _corpus(corpus).to_dict()})
    rng = make_rng(seed)
    for k in range(instances):
        a = rng.choice(np.arange(0, 6), size=int(rng.integers(2, 4)), replace=False)
        gap = int(rng.integers(3, 12))
        b = 5 + gap + rng.choice(np.arange(0, 6), size=int(rng.integers(1, 4)), replace=False)
        pts = set(range(-8, int(b.max()) + 9)) | {0}
        space = _line_space(pts)
        idx = {int(v): i for i, v in enumerate(space.coords[:, 0])}
        S1 = SubsetRef(space, tuple(sorted(idx[int(v)] for v in a)))
        S2 = SubsetRef(space, tuple(sorted(idx[int(v)] for v in b)))
        E = GluePair(McShaneExtender(space, S1).fit(), McShaneExtender(space, S2).fit()).fit()
        _certify_rows(rep, f"instance {k}", E, trials, seed + k, _corpus(corpus))
    return rep


def random_glue_family(rng: np.random.Generator, n_sets: int, dim: int = 1,
                       filler: int = 24) -> tuple[L1PointSet, list[SubsetRef]]:
    """Random separated family around the origin (the anchor, index 0).

    On the line each set is a random subset of a short integer interval at
    distance about ``4**(i+1)`` on a random side; in the plane each set has
    one or two integer points in a random direction.  ``filler`` random
    integer points of the window are added to the ambient set.
    """
    if n_sets < 1:
        raise EmptyFamily("the family is empty", "family")
    blocks: list[np.ndarray] = []
    for i in range(n_sets):
        scale = 4 ** (i + 1)
        if dim == 1:
            start = int(rng.choice([-1, 1])) * scale
            width = int(rng.integers(1, max(2, scale // 2)))
            size = int(rng.integers(1, min(width, 4) + 1))
            vals = start + rng.choice(np.arange(width), size=size, replace=False) * int(np.sign(start))
            blocks.append(np.sort(vals).astype(float)[:, None])
        else:
            direction = rng.integers(-3, 4, size=dim)
            while not direction.any():
                direction = rng.integers(-3, 4, size=dim)
            p = np.round(direction / np.abs(direction).sum() * scale)
            pts = [p]
            if rng.random() < 0.5:
                step = np.zeros(dim)
                step[int(rng.integers(dim))] = int(rng.choice([-1, 1])) * int(rng.integers(1, 1 + scale // 4))
                pts.append(p + step)
            blocks.append(np.array(pts, dtype=float))
    taken = {tuple(r) for b in blocks for r in b.tolist()} | {tuple([0.0] * dim)}
    reach = int(max(np.abs(b).sum(axis=1).max() for b in blocks)) + 2
    extra = []
    for _ in range(filler * 4):
        if len(extra) >= filler:
            break
        q = tuple(float(v) for v in rng.integers(-reach, reach + 1, size=dim))
        if q not in taken:
            taken.add(q)
            extra.append(q)
    coords = [np.zeros((1, dim))] + blocks + ([np.array(extra)] if extra else [])
    space = L1PointSet(np.vstack(coords), base_point=0)
    family, start = [], 1
    for b in blocks:
        family.append(SubsetRef(space, tuple(range(start, start + len(b)))))
        start += len(b)
    return space, family


def verify_glue_family(families: int = 5, sets: int = 2, dim: int = 1, trials: int = 50, seed: int = 0,
                       tol: float = TOL, corpus: str = "uniform") -> RunReport:
    """Glue McShane extenders (C = 1) over random separated families."""
    rep = RunReport("verify glue-family", {"target": "glue-family", "families": families, "sets": sets,
                                           "dim": dim, "trials": trials, "seed": seed, "tol": tol,
                                           "corpus": _corpus(corpus).to_dict()})
    if sets < 1:
        raise EmptyFamily("the family is empty", "family")
    rng = make_rng(seed)
    constants = []
    for k in range(families):
        space, family = random_glue_family(rng, sets, dim)
        ext = [McShaneExtender(space, S).fit() for S in family]
        E = GlueFamily(family, ext, 0, C=1.0).fit()
        res = _certify_rows(rep, f"family {k}", E, trials, seed + k, _corpus(corpus))
        rep.add(f"family {k}: exact norm <= 28 C max(D,1)^2 lambda^2", E.bound_28_, res.exact)
        constants.append({"lambda": E.lambda_, "D": E.D_, "K_prime": E.K_prime_, "K": E.claimed_bound_,
                          "exact": res.exact, "n_points": space.n_points})
    rep.details["families"] = constants
    return rep


# --- l1 grids ------------------------------------------------------------

def verify_grid_interp(n: int = 2, box: int = 3, trials: int = 200, samples: int = 20, seed: int = 0,
                       tol: float = TOL, corpus: str = "uniform") -> RunReport:
    """Multilinear interpolation from the grid of ``[0, box]^n`` to random points of the box."""
    rep = RunReport("verify grid-interp", {"target": "grid-interp", "n": n, "box": box, "trials": trials,
                                           "samples": samples, "seed": seed, "tol": tol,
                                           "corpus": _corpus(corpus).to_dict()})
    if n < 1 or box < 1:
        raise ValueError("n and box must be positive")
    rng = make_rng(seed)
    sample = np.round(rng.uniform(0, box, size=(samples, n)), 3)
    E = grid_extension_operator([0] * n, [box] * n, sample)
    res = certify_norm(E, trials=trials, corpus=_corpus(corpus), seed=seed, tol=tol)
    rep.add("exact norm = 1", 1.0, res.exact, kind="equal")
    rep.add("empirical norm <= 1", 1.0, res.empirical)
    # pointwise agreement of the operator with the direct interpolation formula
    f = rng.uniform(-1, 1, len(E.source_))
    table = {tuple(int(c) for c in E.space.coords[s]): float(v) for s, v in zip(E.source_.indices, f)}
    Ef = E.transform(f[None, :])[0]
    err = max(abs(hypercube_interpolate(table, E.space.coords[x]) - Ef[x]) for x in range(E.space.n_points))
    rep.add("matrix agrees with interpolation formula", 0.0, err, kind="equal")
    rep.details["n_points"] = int(E.space.n_points)
    rep.details["witness"] = list(operator_norm_from_extension(E).witness or ())
    return rep


def random_partition(rng: np.random.Generator, n: int) -> list[list[int]]:
    labels = rng.integers(0, n, size=n)
    blocks: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        blocks.setdefault(int(lab), []).append(i)
    return [blocks[k] for k in sorted(blocks)]


def verify_cone(n: int = 3, trials: int = 1000, samples: int = 12, b: int = 2, seed: int = 0,
                tol: float = TOL, corpus: str = "uniform") -> RunReport:
    """Lipschitz constant of cone retractions and norm of the cone partition operator."""
    rep = RunReport("verify cone", {"target": "cone", "n": n, "trials": trials, "samples": samples, "b": b,
                                    "seed": seed, "tol": tol, "corpus": _corpus(corpus).to_dict()})
    if n < 1:
        raise ValueError("n must be positive")
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(trials):
        size = int(rng.integers(1, n + 1))
        I = sorted(rng.choice(n, size=size, replace=False).tolist())
        x, y = rng.normal(size=(2, n))
        if rng.random() < 0.3:
            y = x + 1e-3 * rng.normal(size=n)
        d = float(np.abs(x - y).sum())
        if d > 0:
            worst = max(worst, float(np.abs(cone_retract(I, x) - cone_retract(I, y)).sum()) / d)
    rep.add("R_I Lipschitz ratio <= 2", 2.0, worst)
    partition = random_partition(rng, n)
    grid = axis_grid_points(n, partition, b)
    pts = np.round(rng.uniform(-b, b, size=(samples, n)), 2)
    seen = {tuple(r) for r in grid.tolist()}
    extra = [r for r in pts.tolist() if tuple(r) not in seen]
    coords = np.vstack([grid] + ([np.unique(np.array(extra), axis=0)] if extra else []))
    space = L1PointSet(coords, base_point=0)
    E = ConePartitionExtension(space, SubsetRef(space, tuple(range(len(grid)))), partition).fit()
    _certify_rows(rep, "partition operator", E, min(trials, 200), seed, _corpus(corpus))
    rep.details["partition"] = partition
    rep.details["n_points"] = int(space.n_points)
    return rep


def verify_net_ball(n: int = 2, window: int = 10, R: float = 3.5, center: Sequence[float] | None = None,
                    seed: int = 0, tol: float = TOL) -> RunReport:
    """Retraction of ``Z^n ∩ [-window, window]^n`` onto a ball, against ``2 + 4 eps / delta``."""
    c = [0.0] * n if center is None else [float(v) for v in center]
    rep = RunReport("verify net-ball", {"target": "net-ball", "n": n, "window": window, "R": R,
                                        "center": c, "seed": seed, "tol": tol})
    if n < 1 or window < 1:
        raise ValueError("n and window must be positive")
    axes = [np.arange(-window, window + 1)] * n
    coords = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n).astype(float)
    space = L1PointSet(coords, base_point=int(np.argmin(np.abs(coords - c).sum(axis=1))))
    E = NetBallRetraction(space, c, R).fit()
    rep.add("retraction Lipschitz <= 2 + 4 eps/delta", E.claimed_bound_, E.lipschitz_)
    rep.add("covering radius eps = n/2", n / 2, E.eps_, kind="equal")
    rep.add("separation delta = 1", 1.0, E.delta_, kind="equal")
    rep.details.update(eps=E.eps_, delta=E.delta_, witness=list(E.lipschitz_witness_ or ()),
                       ball_points=len(E.source_), n_points=int(space.n_points))
    return rep


# --- separated families --------------------------------------------------

def _family_rows(rep: RunReport, fam, check_D: bool = True):
    rep.add("lambda <= claimed", fam.claimed_lambda, fam.report.lambda_)
    if check_D:
        rep.add("D <= claimed", fam.claimed_D, fam.report.D)
    rep.details["family"] = fam.to_dict()


def verify_place_dyadic(n: int = 2, count: int = 3, size: int = 4, spread: int = 6, seed: int = 0,
                        tol: float = TOL) -> RunReport:
    """Place random bounded subsets of ``Z^n`` in dyadic shells and check the constants."""
    rep = RunReport("verify place-dyadic", {"target": "place-dyadic", "n": n, "count": count, "size": size,
                                            "spread": spread, "seed": seed, "tol": tol})
    if count < 1:
        raise ValueError("count must be positive")
    rng = make_rng(seed)
    sets = []
    for _ in range(count):
        pts = {tuple(int(v) for v in rng.integers(-spread, spread + 1, size=n)) for _ in range(size)}
        sets.append(np.array(sorted(pts), dtype=float))
    fam = place_dyadic(sets)
    _family_rows(rep, fam)
    err = 0.0
    for orig, S in zip(sets, fam.sets):
        d0 = np.abs(orig[:, None] - orig[None]).sum(axis=2)
        err = max(err, float(np.abs(fam.space.pairwise(S.array, S.array) - d0).max()))
    rep.add("translates are isometric", 0.0, err, kind="equal", tol=0.0)
    return rep


def verify_balls_20(dim: int = 1, count: int = 2, seed: int = 0, tol: float = TOL) -> RunReport:
    rep = RunReport("verify balls-20", {"target": "balls-20", "dim": dim, "count": count, "seed": seed,
                                        "tol": tol})
    _family_rows(rep, ball_sequence_lambda20(dim, count))
    return rep


def verify_balls_24(dims: Sequence[int] = (1, 2, 3), mesh: float | None = None, seed: int = 0,
                    tol: float = TOL) -> RunReport:
    """Shrinking balls: lambda is checked; D is reported with its discrepancy flag."""
    rep = RunReport("verify balls-24", {"target": "balls-24", "dims": list(dims), "mesh": mesh, "seed": seed,
                                        "tol": tol})
    fam = shrinking_ball_sequence(dims, mesh=mesh)
    _family_rows(rep, fam, check_D=False)
    return rep


TARGETS: dict[str, Callable[..., RunReport]] = {
    "glue-pair": verify_glue_pair,
    "glue-family": verify_glue_family,
    "grid-interp": verify_grid_interp,
    "cone": verify_cone,
    "net-ball": verify_net_ball,
    "place-dyadic": verify_place_dyadic,
    "balls-20": verify_balls_20,
    "balls-24": verify_balls_24,
}


# --- extension constant --------------------------------------------------

def compute_e(S: SubsetRef, tol: float = TOL, inputs: dict | None = None) -> RunReport:
    """``e(S, M)`` from the LP, bracketed by the norms of constructed operators."""
    space = S.space
    M = space.to_metric_space() if isinstance(space, L1PointSet) else space
    if M.base_point not in S.indices:
        M = M.with_base_point(S.indices[0])
    S = SubsetRef(M, S.indices)
    rep = RunReport("compute-e", {**(inputs or {}), "S": list(S.indices), "tol": tol})
    res = extension_constant_lp(S)
    rep.add("e >= 1", 1.0, res.e_value, kind="lower")
    ops = [("lp_optimal", MatrixExtension(M, S, res.matrix, res.e_value, kind="lp_optimal")),
           ("retraction", RetractionExtender(M, S))]
    if len(S) <= 2:
        ops.append(("mcshane", McShaneExtender(M, S)))
    bounds = []
    for name, op in ops:
        op.fit()
        norm = operator_norm_from_extension(op).value
        kind = "equal" if name == "lp_optimal" else "upper"
        rep.add(f"e <= norm({name})" if kind == "upper" else "norm(lp_optimal) = e", norm, res.e_value,
                kind=kind, tol=max(tol, 1e-9))
        bounds.append({"kind": name, "norm": norm})
    rep.details.update({"S": list(S.indices), "M": M.n_points, "e": res.e_value, "upper_bounds": bounds,
                        "vertices_used": res.vertices_used, "operator": res.matrix.tolist()})
    return rep


def nested_e(S: SubsetRef, S_prime: Sequence[int]) -> tuple[float, float]:
    """``(e(S, S'), e(S, M))`` for ``S ⊆ S' ⊆ M``; ``S`` must contain the base point."""
    M = S.space
    order = list(S_prime)
    pos = {p: i for i, p in enumerate(order)}
    sub = M.subspace(order, base_point=pos[M.base_point])
    inner = extension_constant_lp(SubsetRef(sub, tuple(sorted(pos[i] for i in S.indices)))).e_value
    return inner, extension_constant_lp(S).e_value
