"""Linear extension operators as scikit-learn style transformers.

An operator is fitted on a geometry (an ambient space and a source subset)
and afterwards maps batches of functions on the source, one function per row,
to their extensions on every point of the ambient space::

    op = McShaneExtender(space, source).fit()
    F_ext = op.transform(F)          # (n_functions, |S|) -> (n_functions, |M|)

On finite spaces each operator is a matrix; ``matrix_[x, s]`` is the weight of
``f(s)`` in ``Ef(x)``.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..lipfn import LipFunction, lip_constant
from ..metric import L1PointSet, SubsetRef

__all__ = [
    "ExtensionOperator",
    "MatrixExtension",
    "McShaneExtender",
    "RetractionExtender",
    "HypothesisViolation",
    "lip_of_values",
]


class HypothesisViolation(ValueError):
    """An operator's construction precondition does not hold."""

    def __init__(self, message: str, which: str = "", witness: tuple = ()):
        super().__init__(message)
        self.which = which
        self.witness = witness


def _subset(space, source) -> SubsetRef:
    if isinstance(source, SubsetRef):
        if source.space is not space:
            raise ValueError("source subset belongs to a different space")
        return source
    return SubsetRef(space, tuple(int(i) for i in source))


class ExtensionOperator(TransformerMixin, BaseEstimator):
    """Base class; subclasses implement ``_build_matrix`` and ``_claimed_bound``.

    Parameters
    ----------
    space : FiniteMetricSpace or L1PointSet
        Ambient space M.
    source : SubsetRef or sequence of int
        The set S on which functions are given.
    base_point : int, optional
        Base point used for Lip_0 norms; defaults to the space's base point.
    """

    provenance = "abstract"

    def __init__(self, space=None, source=None, base_point=None):
        self.space = space
        self.source = source
        self.base_point = base_point

    # -- fitting -----------------------------------------------------------
    def _default_base(self, src: SubsetRef) -> int:
        return self.space.base_point

    def fit(self, X=None, y=None):
        if self.space is None or self.source is None:
            raise ValueError(f"{type(self).__name__} needs a space and a source subset")
        self.source_ = _subset(self.space, self.source)
        self.base_point_ = int(self._default_base(self.source_) if self.base_point is None else self.base_point)
        self.matrix_ = np.asarray(self._build_matrix(), dtype=float)
        expected = (self.space.n_points, len(self.source_))
        if self.matrix_.shape != expected:
            raise RuntimeError(f"operator matrix has shape {self.matrix_.shape}, expected {expected}")
        self.claimed_bound_ = float(self._claimed_bound())
        self.n_features_in_ = len(self.source_)
        return self

    def _build_matrix(self) -> np.ndarray:
        raise NotImplementedError

    def _claimed_bound(self) -> float:
        raise NotImplementedError

    # -- application -------------------------------------------------------
    def transform(self, X):
        check_is_fitted(self, "matrix_")
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = check_array(X.reshape(1, -1) if single else X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected functions with {self.n_features_in_} values, got {X.shape[1]}")
        out = X @ self.matrix_.T
        # the extension property holds bitwise: copy source values verbatim
        out[:, self.source_.array] = X
        return out[0] if single else out

    def extend(self, f: LipFunction, query: Sequence[int] | SubsetRef | None = None) -> LipFunction:
        """Apply the operator to ``f`` and return ``Ef`` on ``query`` (default: all of M)."""
        check_is_fitted(self, "matrix_")
        if f.domain.space is not self.space or f.domain.indices != self.source_.indices:
            raise ValueError("function is not defined on this operator's source")
        values = self.transform(f.values)
        if query is None:
            q = SubsetRef(self.space, tuple(range(self.space.n_points)))
        else:
            q = query if isinstance(query, SubsetRef) else SubsetRef(self.space, tuple(query))
        return LipFunction(q, values[q.array])

    def materialize_matrix(self) -> np.ndarray:
        check_is_fitted(self, "matrix_")
        return self.matrix_.copy()

    def base_free_matrix(self) -> np.ndarray:
        """Matrix of ``f -> f(b) + E(f - f(b))``, which reproduces constants.

        Only defined when the base point lies in the source.
        """
        check_is_fitted(self, "matrix_")
        src = self.source_.indices
        if self.base_point_ not in src:
            raise HypothesisViolation("base point outside the source; no base-free form", "base")
        k = src.index(self.base_point_)
        A = self.matrix_.copy()
        others = np.delete(A, k, axis=1).sum(axis=1)
        A[:, k] = 1.0 - others
        A[self.source_.array, k] = self.matrix_[self.source_.array, k]
        return A

    def descriptor(self) -> dict:
        check_is_fitted(self, "matrix_")
        return {
            "kind": self.provenance,
            "params": self._descriptor_params(),
            "claimed_bound": self.claimed_bound_,
        }

    def _descriptor_params(self) -> dict:
        return {"source": list(self.source_.indices), "base_point": self.base_point_,
                "n_ambient": int(self.space.n_points)}

    def check_extension_property(self) -> bool:
        check_is_fitted(self, "matrix_")
        rows = self.matrix_[self.source_.array]
        return bool(np.array_equal(rows, np.eye(len(self.source_))))


class MatrixExtension(ExtensionOperator):
    """Operator given by an explicit matrix, e.g. an LP-optimal extension.

    ``claimed_bound`` is taken as given.
    """

    provenance = "composed"

    def __init__(self, space=None, source=None, matrix=None, claimed_bound=1.0, base_point=None,
                 kind="composed"):
        super().__init__(space, source, base_point)
        self.matrix = matrix
        self.claimed_bound = claimed_bound
        self.kind = kind

    def fit(self, X=None, y=None):
        self.provenance = self.kind
        return super().fit(X, y)

    def _build_matrix(self):
        return np.asarray(self.matrix, dtype=float)

    def _claimed_bound(self):
        return self.claimed_bound


class McShaneExtender(ExtensionOperator):
    """Linear, norm-one extension in the cases where a McShane-type formula is linear.

    * one-point source: the constant extension;
    * two-point source ``{a, b}``: the McShane extension truncated to the
      range of ``f``, i.e. ``f(a) + (f(b) - f(a)) min(1, d(x, a) / d(a, b))``;
    * source on the real line (a one-dimensional :class:`L1PointSet`):
      piecewise-linear interpolation, constant outside the hull.

    Each of these has Lipschitz norm exactly ``Lip(f)``, so the claimed bound
    is 1.  Other geometries raise :class:`HypothesisViolation`; use
    :class:`RetractionExtender` or an LP-optimal operator instead.
    """

    provenance = "mcshane"

    def _default_base(self, src):
        return self.space.base_point if self.space.base_point in src else src.indices[0]

    def _build_matrix(self):
        src = self.source_.array
        n = self.space.n_points
        A = np.zeros((n, src.size))
        if src.size == 1:
            A[:, 0] = 1.0
        elif src.size == 2:
            dab = float(self.space.pairwise(src[:1], src[1:])[0, 0])
            g = np.minimum(1.0, self.space.pairwise(np.arange(n), src[:1])[:, 0] / dab)
            A[:, 0] = 1.0 - g
            A[:, 1] = g
        elif isinstance(self.space, L1PointSet) and self.space.dim == 1:
            x = self.space.coords[:, 0]
            order = np.argsort(x[src], kind="stable")
            xs = x[src][order]
            pos = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, src.size - 2)
            lo, hi = xs[pos], xs[pos + 1]
            t = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
            rows = np.arange(n)
            A[rows, order[pos]] = 1.0 - t
            A[rows, order[pos + 1]] += t
        else:
            raise HypothesisViolation(
                "a linear norm-one McShane extender needs |S| <= 2 or a source on the real line",
                "geometry")
        A[src] = np.eye(src.size)
        return A

    def _claimed_bound(self):
        return 1.0


class RetractionExtender(ExtensionOperator):
    """``f -> f o r`` for a retraction ``r: M -> S``.

    Parameters
    ----------
    retraction : sequence of int, optional
        ``retraction[x]`` is the image of point ``x``.  Defaults to the
        nearest-point map (ties to the lowest index).

    The claimed bound is the exact Lipschitz constant of the retraction.
    """

    provenance = "retraction"

    def __init__(self, space=None, source=None, retraction=None, base_point=None):
        super().__init__(space, source, base_point)
        self.retraction = retraction

    def _default_base(self, src):
        return self.space.base_point if self.space.base_point in src else src.indices[0]

    def _image(self) -> np.ndarray:
        src = self.source_.array
        if self.retraction is not None:
            r = np.asarray(self.retraction, dtype=int)
        else:
            d = self.space.pairwise(np.arange(self.space.n_points), src)
            r = src[np.argmin(d, axis=1)]
        if r.shape != (self.space.n_points,) or not np.all(np.isin(r, src)):
            raise HypothesisViolation("retraction must map every point into the source", "retraction")
        if not np.array_equal(r[src], src):
            raise HypothesisViolation("retraction must fix the source pointwise", "retraction")
        return r

    def _build_matrix(self):
        r = self._image()
        self.image_ = r
        col = {int(s): k for k, s in enumerate(self.source_.indices)}
        A = np.zeros((self.space.n_points, len(self.source_)))
        A[np.arange(self.space.n_points), [col[int(i)] for i in r]] = 1.0
        return A

    def _claimed_bound(self):
        n = self.space.n_points
        if n < 2:
            return 1.0
        d = self.space.pairwise(np.arange(n), np.arange(n))
        dr = self.space.pairwise(self.image_, self.image_)
        iu = np.triu_indices(n, 1)
        return max(1.0, float((dr[iu] / d[iu]).max()))


def lip_of_values(space, values, indices=None) -> float:
    """Lipschitz constant of ``values`` given on ``indices`` (default: all points)."""
    idx = np.arange(space.n_points) if indices is None else np.asarray(indices)
    return lip_constant(space, idx, values)

