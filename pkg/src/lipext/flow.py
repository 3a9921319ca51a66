"""Min-cost transport by successive shortest augmenting paths.

Residual costs are kept nonnegative with node potentials, so every shortest
path search is a dense Dijkstra.  Intended for supports of at most a few
hundred points.
"""
from __future__ import annotations

import numpy as np

__all__ = ["transport"]


def transport(supply, demand, cost, rel_eps: float = 1e-13):
    """Solve ``min sum C[i, j] F[i, j]`` over ``F >= 0`` with the given margins.

    Parameters
    ----------
    supply : (k,) array of positive masses.
    demand : (l,) array of positive masses with the same total as ``supply``.
    cost : (k, l) array of nonnegative costs.

    Returns
    -------
    value : float
    flow : (k, l) ndarray
    """
    a = np.array(supply, dtype=float)
    b = np.array(demand, dtype=float)
    C = np.asarray(cost, dtype=float)
    k, l = a.size, b.size
    F = np.zeros((k, l))
    if k == 0 or l == 0:
        return 0.0, F
    scale = max(a.sum(), b.sum())
    eps = rel_eps * max(scale, 1e-300)
    pi_p = np.zeros(k)
    pi_n = np.zeros(l)

    for _ in range(4 * (k + l) * (k + l) + 16):
        src = a > eps
        if not src.any() or not (b > eps).any():
            break
        dist_p = np.where(src, 0.0, np.inf)
        dist_n = np.full(l, np.inf)
        pred_p = np.full(k, -1)  # N node feeding P node via reverse arc
        pred_n = np.full(l, -1)  # P node feeding N node
        done_p = np.zeros(k, dtype=bool)
        done_n = np.zeros(l, dtype=bool)
        while True:
            cp = np.where(done_p, np.inf, dist_p)
            cn = np.where(done_n, np.inf, dist_n)
            ip, jn = int(np.argmin(cp)), int(np.argmin(cn))
            if cp[ip] == np.inf and cn[jn] == np.inf:
                break
            if cp[ip] <= cn[jn]:
                done_p[ip] = True
                nd = dist_p[ip] + C[ip] + pi_p[ip] - pi_n
                better = (nd < dist_n) & ~done_n
                dist_n[better] = nd[better]
                pred_n[better] = ip
            else:
                done_n[jn] = True
                back = F[:, jn] > eps
                nd = dist_n[jn] - C[:, jn] + pi_n[jn] - pi_p
                better = back & (nd < dist_p) & ~done_p
                dist_p[better] = nd[better]
                pred_p[better] = jn
        sinks = np.where(b > eps, dist_n, np.inf)
        t = int(np.argmin(sinks))
        dt = sinks[t]
        if dt == np.inf:
            raise RuntimeError("transport problem is infeasible (unbalanced margins)")
        # trace the path back to a source
        path = []
        j = t
        while True:
            i = pred_n[j]
            path.append((i, j))
            if pred_p[i] < 0:
                break
            j = pred_p[i]
            path.append((i, j, "back"))
        origin = path[-1][0]
        delta = min(a[origin], b[t])
        for step in path:
            if len(step) == 3:
                delta = min(delta, F[step[0], step[1]])
        for step in path:
            if len(step) == 3:
                F[step[0], step[1]] -= delta
            else:
                F[step[0], step[1]] += delta
        a[origin] -= delta
        b[t] -= delta
        pi_p += np.minimum(dist_p, dt)
        pi_n += np.minimum(dist_n, dt)
    else:
        raise RuntimeError("transport solver did not converge")
    F[F < 0] = 0.0
    return float((F * C).sum()), F
