from __future__ import annotations

import numpy as np
import pytest

from lipext import L1PointSet, validate_metric


def line(*xs, base=0):
    """Points of the real line (l1 in one dimension)."""
    return L1PointSet(np.array(xs, dtype=float)[:, None], base_point=base)


def path_space(n):
    d = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :]).astype(float)
    return validate_metric(d)


def random_graph_metric(rng, n, p=0.6):
    """Shortest-path metric of a random connected weighted graph (Floyd-Warshall)."""
    w = np.full((n, n), np.inf)
    np.fill_diagonal(w, 0.0)
    for i in range(1, n):
        j = int(rng.integers(0, i))
        w[i, j] = w[j, i] = rng.uniform(0.5, 3.0)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                w[i, j] = w[j, i] = min(w[i, j], rng.uniform(0.5, 3.0))
    for k in range(n):
        w = np.minimum(w, w[:, [k]] + w[[k], :])
    return validate_metric(w)


def random_uniform_metric(rng, n, low=1.0, high=2.0):
    """Random distances in ``[low, high]`` with ``high <= 2 low``: always a metric."""
    d = np.triu(rng.uniform(low, high, (n, n)), 1)
    return validate_metric(d + d.T)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
