"""Gluing extension operators of separated sets.

Two constructions are provided:

* :class:`GluePair` glues operators on two sets at positive distance with a
  cutoff ``h`` around the second set;
* :class:`GlueFamily` glues a well-separated family around an anchor point
  with one cutoff ``Pi_i`` per set, supported in disjoint neighbourhoods.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .._config import TOL
from ..metric import (AnchorInSet, OverlappingSets, SeparationReport, SubsetRef,
                      separation_constants)
from .base import ExtensionOperator, HypothesisViolation

__all__ = [
    "SetsTooClose",
    "EmptyFamily",
    "DisjointUiViolation",
    "GluePair",
    "GlueFamily",
    "glue_pair",
    "glue_union",
    "glue_family",
    "family_constant",
    "family_bound_28",
]


class SetsTooClose(HypothesisViolation):
    pass


class EmptyFamily(HypothesisViolation):
    pass


class DisjointUiViolation(RuntimeError):
    """Two neighbourhoods ``U_i`` intersect; impossible under well-separation."""


def _constant_reproducing(op: ExtensionOperator) -> np.ndarray:
    """Matrix of ``op`` acting on Lip (not Lip_0): rows must sum to one."""
    A = op.matrix_
    if np.allclose(A.sum(axis=1), 1.0, atol=1e-12, rtol=0):
        return A
    if op.base_point_ in op.source_.indices:
        return op.base_free_matrix()
    raise HypothesisViolation("extender does not reproduce constants", "i")


def _dist_to(space, subset: SubsetRef) -> np.ndarray:
    n = space.n_points
    return space.pairwise(np.arange(n), subset.array).min(axis=1)


def _check_fitted(op, space, name):
    if not hasattr(op, "matrix_"):
        op.fit()
    if op.space is not space:
        raise ValueError(f"{name} lives on a different space")


class GluePair(ExtensionOperator):
    """``Ef = E1 f1 + h (E2 f2 - E1 f1)`` with ``h = max(0, 1 - d(., S2) / r)``.

    Parameters
    ----------
    E1, E2 : ExtensionOperator
        Operators on disjoint sets ``S1`` and ``S2``.
    r : float, optional
        Cutoff radius with ``0 < r <= d(S1, S2)``; defaults to ``d(S1, S2)``.
    x0 : int, optional
        Reference point of ``S2`` used in the norm estimate (default: its
        first index).  It does not affect the operator.

    The base point must lie in ``S1``; if the space's base point does not, the
    first point of ``S1`` is used.  The claimed bound is the estimate
    ``2 C1 + C2 + sup_{supp h} (C1 d(x, 0) + C2 d(x, x0) + d(x0, 0)) / r``
    evaluated on the realised support of ``h``.
    """

    provenance = "glue_pair"

    def __init__(self, E1=None, E2=None, r=None, x0=None):
        self.E1 = E1
        self.E2 = E2
        self.r = r
        self.x0 = x0
        super().__init__(None, None, None)

    def fit(self, X=None, y=None):
        space = self.E1.space
        _check_fitted(self.E1, space, "E1")
        _check_fitted(self.E2, space, "E2")
        S1, S2 = self.E1.source_, self.E2.source_
        common = set(S1.indices) & set(S2.indices)
        if common:
            raise OverlappingSets("S1 and S2 intersect", (min(common),))
        d12 = float(space.pairwise(S1.array, S2.array).min())
        r = d12 if self.r is None else float(self.r)
        if r <= 0:
            raise SetsTooClose("cutoff radius must be positive", "r")
        if d12 < r - TOL * max(1.0, r):
            raise SetsTooClose(f"d(S1, S2) = {d12} is smaller than r = {r}", "r")
        self.r_ = r
        self.h_ = np.maximum(0.0, 1.0 - _dist_to(space, S2) / r)
        self.space = space
        self.source = S1.union(S2)
        return super().fit(X, y)

    def _default_base(self, src):
        S1 = self.E1.source_
        return self.space.base_point if self.space.base_point in S1 else S1.indices[0]

    def _build_matrix(self):
        src = self.source_.indices
        A = np.zeros((self.space.n_points, len(src)))
        c1 = [src.index(i) for i in self.E1.source_.indices]
        c2 = [src.index(i) for i in self.E2.source_.indices]
        h = self.h_[:, None]
        A[:, c1] = (1.0 - h) * _constant_reproducing(self.E1)
        A[:, c2] = h * _constant_reproducing(self.E2)
        return A

    def _claimed_bound(self):
        C1 = max(1.0, self.E1.claimed_bound_)
        C2 = max(1.0, self.E2.claimed_bound_)
        S2 = self.E2.source_
        x0 = S2.indices[0] if self.x0 is None else int(self.x0)
        if x0 not in S2:
            raise HypothesisViolation("reference point must lie in S2", "x0", (x0,))
        supp = np.flatnonzero(self.h_ > 0)
        b = self.base_point_
        d_base = self.space.pairwise(supp, [b])[:, 0]
        d_x0 = self.space.pairwise(supp, [x0])[:, 0]
        d_x0_base = float(self.space.pairwise([x0], [b])[0, 0])
        tail = float((C1 * d_base + C2 * d_x0 + d_x0_base).max(initial=0.0))
        self.estimate_terms_ = {"2C1+C2": 2 * C1 + C2, "support_term": tail / self.r_}
        return 2 * C1 + C2 + tail / self.r_

    def _descriptor_params(self):
        p = super()._descriptor_params()
        p.update(r=self.r_, S1=list(self.E1.source_.indices), S2=list(self.E2.source_.indices),
                 E1=self.E1.descriptor(), E2=self.E2.descriptor())
        return p


def glue_pair(E1: ExtensionOperator, E2: ExtensionOperator, r: float | None = None,
              x0: int | None = None) -> GluePair:
    return GluePair(E1, E2, r, x0).fit()


def glue_union(extenders: Sequence[ExtensionOperator]) -> ExtensionOperator:
    """Glue finitely many operators on pairwise separated sets by iterating :class:`GluePair`.

    The base point must lie in the first set.  At step ``j`` the cutoff
    radius is the distance from ``S_j`` to the union of the previous sets.
    """
    if not extenders:
        raise EmptyFamily("no operators to glue", "family")
    E = extenders[0]
    if not hasattr(E, "matrix_"):
        E.fit()
    for nxt in extenders[1:]:
        E = glue_pair(E, nxt)
    return E


def family_constant(C: float, D: float, lam: float) -> tuple[float, float]:
    """``(K', K)`` from the closed-form estimate for a well-separated family."""
    Kp = 2 * C + 2 * lam * (1 + D + C * D)
    return Kp, Kp + 2 * lam * ((Kp + 1) * D + 1)


def family_bound_28(C: float, D: float, lam: float) -> float:
    return 28.0 * C * max(D, 1.0) ** 2 * lam ** 2


@dataclass(frozen=True)
class SetDiagnostic:
    """Per-set quantities of the norm estimate for ``E_i f`` on ``U_i``."""

    r: float
    p: int
    sup_estimate: float
    closed_form: float

    def to_dict(self) -> dict:
        return {"r": self.r, "p": self.p, "sup_estimate": self.sup_estimate,
                "closed_form": self.closed_form}


class GlueFamily(ExtensionOperator):
    """Extension operator for the union of a well-separated family.

    With ``r_i = d(S_i, x0) / (2 lambda)``, ``U_i = {d(x, S_i) <= r_i}`` and
    ``Pi_i = max(0, 1 - d(x, S_i) / r_i)``, the extension is
    ``Pi_i E_i f`` on ``U_i`` and 0 elsewhere.  The anchor ``x0`` is the base
    point.

    Parameters
    ----------
    family : sequence of SubsetRef
    extenders : sequence of ExtensionOperator
        One operator per set, each with ``claimed_bound <= C``.
    anchor : int
    C : float, optional
        Uniform bound for the extenders (default: their largest claimed
        bound).  Values below 1 are raised to 1.
    report : SeparationReport, optional
        Constants ``lambda`` and ``D``; computed when omitted and otherwise
        checked against the exact values.
    anchor_points : sequence of int, optional
        Points ``p_i in S_i`` used by the diagnostic estimate only.
    """

    provenance = "glue_family"

    def __init__(self, family=None, extenders=None, anchor=None, C=None, report=None,
                 anchor_points=None):
        self.family = family
        self.extenders = extenders
        self.anchor = anchor
        self.C = C
        self.report = report
        self.anchor_points = anchor_points
        super().__init__(None, None, None)

    def fit(self, X=None, y=None):
        family = list(self.family or [])
        if not family:
            raise EmptyFamily("the family is empty", "family")
        extenders = list(self.extenders or [])
        if len(extenders) != len(family):
            raise HypothesisViolation("one extender per set is required", "i")
        space = family[0].space
        anchor = int(self.anchor)
        for i, (S, E) in enumerate(zip(family, extenders)):
            _check_fitted(E, space, f"extender {i}")
            if E.source_.indices != S.indices:
                raise HypothesisViolation(f"extender {i} is not defined on set {i}", "i", (i,))
            if anchor in S:
                raise AnchorInSet(f"anchor lies in set {i}", (i, anchor))
        exact = separation_constants(family, anchor)
        rep = exact if self.report is None else self.report
        if rep.lambda_ < exact.lambda_ - TOL * exact.lambda_:
            raise HypothesisViolation(f"reported lambda {rep.lambda_} is below the exact {exact.lambda_}",
                                      "iii", exact.lambda_witness)
        if rep.D < exact.D - TOL * max(1.0, exact.D):
            raise HypothesisViolation(f"reported D {rep.D} is below the exact {exact.D}", "ii")
        bounds = [E.claimed_bound_ for E in extenders]
        C = max(bounds) if self.C is None else float(self.C)
        worst = int(np.argmax(bounds))
        if bounds[worst] > C + TOL:
            raise HypothesisViolation(f"extender {worst} has bound {bounds[worst]} > C = {C}", "i", (worst,))
        self.C_ = max(1.0, C)
        self.lambda_ = max(1.0, float(rep.lambda_))
        self.D_ = float(rep.D)
        self.separation_ = rep
        self._family = family
        self._extenders = extenders
        self.space = space
        self.source = SubsetRef(space, tuple(sorted(i for S in family for i in S.indices)))
        return super().fit(X, y)

    def _default_base(self, src):
        return int(self.anchor)

    def _build_matrix(self):
        space = self.space
        n = space.n_points
        src = self.source_.indices
        anchor = int(self.anchor)
        self.r_ = np.array([float(space.pairwise(S.array, [anchor]).min()) / (2 * self.lambda_)
                            for S in self._family])
        owner = np.full(n, -1)
        A = np.zeros((n, len(src)))
        for i, (S, E) in enumerate(zip(self._family, self._extenders)):
            dS = _dist_to(space, S)
            r = self.r_[i]
            inside = dS <= r + TOL * max(1.0, r)
            clash = np.flatnonzero(inside & (owner >= 0))
            if clash.size:
                x = int(clash[0])
                raise DisjointUiViolation(f"point {x} lies in U_{owner[x]} and U_{i}")
            owner[inside] = i
            Pi = np.maximum(0.0, 1.0 - dS / r)
            cols = [src.index(s) for s in S.indices]
            A[np.ix_(inside, cols)] = Pi[inside, None] * _constant_reproducing(E)[inside]
        self.owner_ = owner
        return A

    def _claimed_bound(self):
        Kp, K = family_constant(self.C_, self.D_, self.lambda_)
        self.K_prime_ = Kp
        self.bound_28_ = family_bound_28(self.C_, self.D_, self.lambda_)
        self.diagnostics_ = self._diagnostics()
        return K

    def _diagnostics(self) -> list[SetDiagnostic]:
        space = self.space
        anchor = int(self.anchor)
        pts = self.anchor_points
        out = []
        for i, S in enumerate(self._family):
            p = S.indices[0] if pts is None else int(pts[i])
            if p not in S:
                raise HypothesisViolation(f"anchor point {p} is not in set {i}", "p", (i, p))
            U = np.flatnonzero(self.owner_ == i)
            dS0 = float(space.pairwise(S.array, [anchor]).min())
            est = float(space.pairwise([p], [anchor])[0, 0]
                        + self.C_ * space.pairwise(U, [p]).max(initial=0.0))
            closed = (1 + self.D_ + self.C_ / (2 * self.lambda_) + self.C_ * self.D_) * dS0
            out.append(SetDiagnostic(float(self.r_[i]), p, est, closed))
        return out

    def _descriptor_params(self):
        p = super()._descriptor_params()
        p.update(anchor=int(self.anchor), C=self.C_, D=self.D_, **{"lambda": self.lambda_},
                 K_prime=self.K_prime_, bound_28=self.bound_28_,
                 family=[list(S.indices) for S in self._family],
                 r=[float(r) for r in self.r_])
        return p


def glue_family(family: Sequence[SubsetRef], extenders: Sequence[ExtensionOperator], anchor: int,
                C: float | None = None, report: SeparationReport | None = None,
                anchor_points: Sequence[int] | None = None) -> GlueFamily:
    return GlueFamily(family, extenders, anchor, C, report, anchor_points).fit()
