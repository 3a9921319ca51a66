from __future__ import annotations

import os

#: Comparison slack used by every certified inequality.
TOL = 1e-9

DEFAULT_MAX_POINTS = 512
DEFAULT_MAX_LP_POINTS = 12
DEFAULT_MAX_VERTEX_POINTS = 9


def _env_cap(default: int) -> int:
    raw = os.environ.get("LIPEXT_MAX_POINTS")
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"LIPEXT_MAX_POINTS must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("LIPEXT_MAX_POINTS must be positive")
    return value


def max_points() -> int:
    """Size cap for dense metric spaces (overridable via ``LIPEXT_MAX_POINTS``)."""
    return _env_cap(DEFAULT_MAX_POINTS)


def max_lp_points() -> int:
    return _env_cap(DEFAULT_MAX_LP_POINTS)


def max_vertex_points() -> int:
    return _env_cap(DEFAULT_MAX_VERTEX_POINTS)
