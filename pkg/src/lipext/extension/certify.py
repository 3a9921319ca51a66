"""Empirical and exact norm certification of extension operators."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .._config import TOL
from ..free_space import operator_norm_from_extension
from ..lipfn import LipFunction, lip_constant, mcshane_values
from ..metric import SubsetRef

__all__ = ["FunctionCorpus", "CertifyResult", "certify_norm", "make_rng"]


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; the seed is recorded by every caller."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class FunctionCorpus:
    """Random functions on a finite set.

    ``kind="uniform"`` draws every value uniformly from ``[low, high]``.
    ``kind="mcshane"`` draws values on a random fraction of the points and
    fills in the rest with the McShane (inf-convolution) extension, which
    gives smoother functions with the same Lipschitz constant.
    """

    kind: str = "uniform"
    low: float = -1.0
    high: float = 1.0
    anchor_fraction: float = 0.5

    def sample(self, space, points: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        k = points.size
        if self.kind == "uniform" or k <= 2:
            return rng.uniform(self.low, self.high, k)
        if self.kind != "mcshane":
            raise ValueError(f"unknown corpus kind {self.kind!r}")
        m = max(2, int(round(self.anchor_fraction * k)))
        pick = np.sort(rng.choice(k, m, replace=False))
        vals = rng.uniform(self.low, self.high, m)
        L = lip_constant(space, points[pick], vals)
        out = mcshane_values(space, points[pick], vals, points, L, "inf")
        out[pick] = vals
        return out

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CertifyResult:
    kind: str
    n_source: int
    n_ambient: int
    claimed: float
    empirical: float
    exact: float | None
    bound_ok: bool
    worst_f: LipFunction | None
    trials: int

    @property
    def margin(self) -> float:
        return self.claimed - (self.exact if self.exact is not None else self.empirical)

    def row(self) -> dict:
        return {"kind": self.kind, "|S|": self.n_source, "|M|": self.n_ambient,
                "claimed": self.claimed, "empirical": self.empirical, "exact": self.exact,
                "margin": self.margin}


def certify_norm(op, trials: int = 100, corpus: FunctionCorpus | None = None, seed: int = 0,
                 exact: bool = True, tol: float = TOL) -> CertifyResult:
    """Compare ``max Lip(Ef) / Lip(f)`` over random ``f`` with the claimed bound.

    Lipschitz constants are those of Lip_0: when the base point lies outside
    the source, ``f`` is taken as 0 there.  With ``exact=True`` the operator
    norm is also computed exactly from the preadjoint, and
    ``bound_ok`` requires both values to respect the claim.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    corpus = corpus or FunctionCorpus()
    rng = make_rng(seed)
    space = op.space
    src = op.source_.array
    base = op.base_point_
    dom = np.union1d(src, [base])
    pos = np.searchsorted(dom, src)
    F = np.stack([corpus.sample(space, src, rng) for _ in range(trials)])
    ext = op.transform(F)
    everywhere = np.arange(space.n_points)
    best, worst = 0.0, None
    for k in range(trials):
        vals = np.zeros(dom.size)
        vals[pos] = F[k]
        lf = lip_constant(space, dom, vals)
        if lf == 0.0:
            continue
        ratio = lip_constant(space, everywhere, ext[k]) / lf
        if ratio > best:
            best, worst = ratio, k
    exact_val = operator_norm_from_extension(op).value if exact else None
    ok = best <= op.claimed_bound_ + tol
    if exact_val is not None:
        ok = ok and exact_val <= op.claimed_bound_ + tol
    wf = None if worst is None else LipFunction(op.source_, F[worst])
    return CertifyResult(op.provenance, int(src.size), int(space.n_points), float(op.claimed_bound_),
                         float(best), exact_val, bool(ok), wf, int(trials))
