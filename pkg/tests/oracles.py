"""Independent reference computations built on scipy's HiGHS solver."""
from __future__ import annotations

from itertools import combinations

import numpy as np
from scipy.optimize import linprog


def kr_transport(D, w):
    """Wasserstein-1 norm of a zero-mass vector: min sum g_ij D_ij with net outflow w."""
    n = len(w)
    A = np.zeros((n, n * n))
    for i in range(n):
        for j in range(n):
            A[i, i * n + j] += 1
            A[j, i * n + j] -= 1
    res = linprog(D.reshape(-1), A_eq=A, b_eq=w, bounds=(0, None), method="highs")
    return res.fun


def extension_constant(D, S):
    """``e(S, M)`` as a min-max transport LP (no vertex enumeration).

    Variables: rows ``E_x`` (measures of mass 1 on S) for x outside S, a
    transport plan for every pair with a point outside S, and t.
    """
    n = D.shape[0]
    S = list(S)
    out = [x for x in range(n) if x not in S]
    k = len(S)
    if not out:
        return 1.0
    nE = len(out) * k
    pairs = [(x, y) for x, y in combinations(range(n), 2) if x in out or y in out]
    nG = len(pairs) * k * k
    nv = nE + nG + 1
    A_eq, b_eq, A_ub, b_ub = [], [], [], []
    for r in range(len(out)):
        row = np.zeros(nv)
        row[r * k:(r + 1) * k] = 1
        A_eq.append(row)
        b_eq.append(1.0)
    DS = D[np.ix_(S, S)]
    for p, (x, y) in enumerate(pairs):
        g0 = nE + p * k * k
        for i in range(k):
            row = np.zeros(nv)
            for j in range(k):
                row[g0 + i * k + j] += 1
                row[g0 + j * k + i] -= 1
            rhs = 0.0
            for z, sgn in ((x, 1.0), (y, -1.0)):
                if z in out:
                    row[out.index(z) * k + i] -= sgn
                else:
                    rhs += sgn * (1.0 if S.index(z) == i else 0.0)
            A_eq.append(row)
            b_eq.append(rhs)
        row = np.zeros(nv)
        row[g0:g0 + k * k] = DS.reshape(-1)
        row[-1] = -D[x, y]
        A_ub.append(row)
        b_ub.append(0.0)
    c = np.zeros(nv)
    c[-1] = 1
    bounds = [(None, None)] * nE + [(0, None)] * (nG + 1)
    res = linprog(c, A_ub=np.array(A_ub), b_ub=b_ub, A_eq=np.array(A_eq), b_eq=b_eq,
                  bounds=bounds, method="highs")
    assert res.status == 0, res.message
    # pairs inside S contribute ratio exactly 1
    return max(1.0, res.fun)


def lip_ball_vertices_bruteforce(D, base):
    """Vertices of {v : v(base) = 0, |v_i - v_j| <= D_ij} by tight-set enumeration."""
    n = D.shape[0]
    free = [i for i in range(n) if i != base]
    rows, rhs = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                r = np.zeros(n)
                r[i], r[j] = 1, -1
                rows.append(r[free])
                rhs.append(D[i, j])
    G, h = np.array(rows), np.array(rhs)
    found = []
    for idx in combinations(range(len(G)), len(free)):
        sub = G[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        v = np.linalg.solve(sub, h[list(idx)])
        if np.all(G @ v <= h + 1e-9) and not any(np.allclose(v, u) for u in found):
            found.append(v)
    out = []
    for v in found:
        full = np.zeros(n)
        full[free] = v
        out.append(full)
    return np.array(out)
