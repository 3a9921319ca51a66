"""Real-valued Lipschitz functions on finite subsets."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from ._config import TOL
from .metric import SubsetRef

__all__ = [
    "EmptyDomain",
    "DomainMismatch",
    "LipFunction",
    "LipNorm",
    "ProductRuleCheck",
    "lip_norm",
    "lip_constant",
    "mcshane_extend",
    "mcshane_values",
    "product_rule_check",
]


class EmptyDomain(ValueError):
    pass


class DomainMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LipFunction:
    """Values of a function on the points of ``domain`` (in index order)."""

    domain: SubsetRef
    values: np.ndarray
    pinned: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if v.shape[0] != len(self.domain):
            raise ValueError(f"expected {len(self.domain)} values, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise ValueError("function values must be finite")
        base = self.domain.space.base_point
        if self.pinned and base in self.domain:
            if v[self.domain.indices.index(base)] != 0.0:
                raise ValueError("pinned function must vanish at the base point")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def space(self):
        return self.domain.space

    def __call__(self, point: int) -> float:
        return float(self.values[self.domain.indices.index(int(point))])

    def _check(self, other: "LipFunction"):
        if other.domain.space is not self.domain.space or other.domain.indices != self.domain.indices:
            raise DomainMismatch("functions are defined on different domains")

    def __add__(self, other: "LipFunction") -> "LipFunction":
        self._check(other)
        return LipFunction(self.domain, self.values + other.values)

    def __sub__(self, other: "LipFunction") -> "LipFunction":
        self._check(other)
        return LipFunction(self.domain, self.values - other.values)

    def __mul__(self, other) -> "LipFunction":
        if isinstance(other, LipFunction):
            self._check(other)
            return LipFunction(self.domain, self.values * other.values)
        return LipFunction(self.domain, self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "LipFunction":
        return LipFunction(self.domain, -self.values)

    def restrict(self, subset: SubsetRef) -> "LipFunction":
        pos = {p: k for k, p in enumerate(self.domain.indices)}
        try:
            take = [pos[i] for i in subset.indices]
        except KeyError as exc:
            raise DomainMismatch(f"point {exc.args[0]} is outside the domain") from None
        return LipFunction(subset, self.values[take])

    def pin(self, base: int | None = None) -> "LipFunction":
        """Subtract the value at ``base`` (default: the space's base point)."""
        base = self.space.base_point if base is None else base
        return LipFunction(self.domain, self.values - self(base), pinned=base == self.space.base_point)


@dataclass(frozen=True)
class LipNorm:
    value: float
    witness: tuple[int, int] | None = None

    def __float__(self) -> float:
        return self.value


def lip_constant(space, indices, values) -> float:
    """Best Lipschitz constant of ``values`` over the points ``indices``."""
    idx = np.asarray(indices, dtype=int)
    v = np.asarray(values, dtype=float)
    if idx.size < 2:
        return 0.0
    d = space.pairwise(idx, idx)
    iu = np.triu_indices(idx.size, 1)
    return float((np.abs(v[:, None] - v[None, :])[iu] / d[iu]).max())


def lip_norm(f: LipFunction) -> LipNorm:
    """Exact Lipschitz constant with an optimal pair as witness."""
    idx = f.domain.array
    if idx.size < 2:
        return LipNorm(0.0, None)
    d = f.space.pairwise(idx, idx)
    iu = np.triu_indices(idx.size, 1)
    ratio = np.abs(f.values[iu[0]] - f.values[iu[1]]) / d[iu]
    k = int(np.argmax(ratio))
    if ratio[k] == 0.0:
        return LipNorm(0.0, None)
    return LipNorm(float(ratio[k]), (int(idx[iu[0][k]]), int(idx[iu[1][k]])))


Mode = Literal["inf", "sup", "midpoint"]


def mcshane_values(space, source, values, targets, L: float, mode: Mode = "inf",
                   chunk: int = 4096) -> np.ndarray:
    """Inf/sup-convolution formulas evaluated at ``targets``.

    ``inf``: ``min_s f(s) + L d(x, s)``; ``sup``: ``max_s f(s) - L d(x, s)``;
    ``midpoint``: their average.
    """
    src = np.asarray(source, dtype=int)
    tgt = np.asarray(targets, dtype=int)
    v = np.asarray(values, dtype=float)
    out = np.empty(tgt.size)
    for lo in range(0, tgt.size, chunk):
        d = space.pairwise(tgt[lo:lo + chunk], src)
        upper = (v[None, :] + L * d).min(axis=1)
        lower = (v[None, :] - L * d).max(axis=1)
        if mode == "inf":
            out[lo:lo + chunk] = upper
        elif mode == "sup":
            out[lo:lo + chunk] = lower
        elif mode == "midpoint":
            out[lo:lo + chunk] = 0.5 * (upper + lower)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return out


def mcshane_extend(f: LipFunction, targets: Iterable[int] | SubsetRef, mode: Mode = "inf") -> LipFunction:
    """Norm-preserving McShane extension of ``f`` to ``targets``.

    The formulas reproduce ``f`` on its domain in exact arithmetic; in floating
    point the domain values are copied verbatim so the restriction identity is
    bitwise.
    """
    if len(f.domain) == 0:
        raise EmptyDomain("cannot extend a function with empty domain")
    tgt = targets if isinstance(targets, SubsetRef) else SubsetRef(f.space, tuple(targets), True)
    L = lip_norm(f).value
    vals = mcshane_values(f.space, f.domain.array, f.values, tgt.array, L, mode)
    pos = {p: k for k, p in enumerate(f.domain.indices)}
    for k, i in enumerate(tgt.indices):
        if i in pos:
            vals[k] = f.values[pos[i]]
    return LipFunction(tgt, vals)


@dataclass(frozen=True)
class ProductRuleCheck:
    lhs: float
    rhs: float
    holds: bool


def product_rule_check(f: LipFunction, g: LipFunction, tol: float = TOL) -> ProductRuleCheck:
    """Compare ``Lip(f g)`` with the product-rule bound.

    Suprema are taken over the exact supports ``{f != 0}`` and ``{g != 0}``.
    """
    if g.domain.space is not f.domain.space or g.domain.indices != f.domain.indices:
        raise DomainMismatch("product rule needs functions on the same domain")
    lhs = lip_norm(f * g).value
    sup_g = float(np.abs(g.values[f.values != 0]).max(initial=0.0))
    sup_f = float(np.abs(f.values[g.values != 0]).max(initial=0.0))
    rhs = lip_norm(f).value * sup_g + lip_norm(g).value * sup_f
    return ProductRuleCheck(lhs, rhs, lhs <= rhs + tol)
