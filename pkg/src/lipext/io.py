"""JSON file formats and canonical serialization.

Space::

    {"points": [ids], "dist": [[...]], "base_point": int}
    {"l1": {"dim": n, "coords": [[...]], "base_point": int}}

Subset ``{"space": path, "indices": [int]}``, function
``{"domain": subset, "values": [real]}``, molecule
``{"space": path, "weights": {"pointId": real}}``.  File references are
resolved relative to the referring file; an inline object is accepted too.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .free_space import Molecule
from .lipfn import LipFunction
from .metric import FiniteMetricSpace, L1PointSet, SubsetRef, validate_metric

__all__ = [
    "ParseError",
    "canonical",
    "dumps",
    "load_space",
    "load_subset",
    "load_function",
    "load_molecule",
    "space_to_dict",
    "subset_to_dict",
    "function_to_dict",
    "molecule_to_dict",
]


class ParseError(ValueError):
    pass


def canonical(obj: Any) -> Any:
    """Plain JSON data with floats rounded to 12 significant digits.

    Non-finite floats become the strings ``"inf"``, ``"-inf"``, ``"nan"``.
    Rounding is idempotent, so dump / load / dump is byte-stable.
    """
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return canonical(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        x = float(f"{x:.12g}")
        return 0.0 if x == 0 else x
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(canonical(obj), sort_keys=True, indent=2) + "\n"


def _read(ref, base: Path | None = None) -> tuple[dict, Path | None]:
    if isinstance(ref, dict):
        return ref, base
    path = Path(ref)
    if base is not None and not path.is_absolute():
        path = base / path
    try:
        with open(path) as fh:
            return json.load(fh), path.parent
    except FileNotFoundError:
        raise ParseError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None


def space_from_dict(data: dict):
    try:
        if "l1" in data:
            l1 = data["l1"]
            coords = np.asarray(l1["coords"], dtype=float)
            if coords.ndim != 2 or coords.shape[1] != int(l1["dim"]):
                raise ParseError("l1 coords must be a list of dim-length vectors")
            return L1PointSet(coords, base_point=int(l1.get("base_point", 0)))
        dist = np.asarray(data["dist"], dtype=float)
        return validate_metric(dist, data.get("points"), int(data.get("base_point", 0)))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed space: {exc}") from None


def load_space(ref, base: Path | None = None):
    data, _ = _read(ref, base)
    return space_from_dict(data)


def load_subset(ref, base: Path | None = None, space=None) -> SubsetRef:
    data, where = _read(ref, base)
    try:
        sp = space if space is not None else load_space(data["space"], where)
        return SubsetRef(sp, tuple(int(i) for i in data["indices"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed subset: {exc}") from None


def load_function(ref, base: Path | None = None, space=None) -> LipFunction:
    data, where = _read(ref, base)
    try:
        dom = load_subset(data["domain"], where, space)
        return LipFunction(dom, np.asarray(data["values"], dtype=float))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed function: {exc}") from None


def _ids(space) -> list[str]:
    ids = getattr(space, "points", None)
    return list(ids) if ids else [str(i) for i in range(space.n_points)]


def load_molecule(ref, base: Path | None = None, space=None) -> Molecule:
    data, where = _read(ref, base)
    try:
        sp = space if space is not None else load_space(data["space"], where)
        pos = {p: i for i, p in enumerate(_ids(sp))}
        weights = {pos[str(k)]: float(v) for k, v in data["weights"].items()}
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed molecule: {exc}") from None
    w = np.zeros(sp.n_points)
    for i, v in weights.items():
        w[i] = v
    return Molecule(sp, w)


def space_to_dict(space) -> dict:
    if isinstance(space, L1PointSet):
        return {"l1": {"dim": space.dim, "coords": space.coords.tolist(), "base_point": space.base_point}}
    if isinstance(space, FiniteMetricSpace):
        return {"points": list(space.points), "dist": space.dist.tolist(), "base_point": space.base_point}
    raise TypeError(f"cannot serialize {type(space).__name__}")


def subset_to_dict(subset: SubsetRef, space_ref=None) -> dict:
    ref = space_to_dict(subset.space) if space_ref is None else space_ref
    return {"space": ref, "indices": list(subset.indices)}


def function_to_dict(f: LipFunction, space_ref=None) -> dict:
    return {"domain": subset_to_dict(f.domain, space_ref), "values": f.values.tolist()}


def molecule_to_dict(mu: Molecule, space_ref=None) -> dict:
    ids = _ids(mu.space)
    ref = space_to_dict(mu.space) if space_ref is None else space_ref
    return {"space": ref, "weights": {ids[i]: float(mu.weights[i]) for i in mu.support()}}
