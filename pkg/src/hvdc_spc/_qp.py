"""Dense inequality-constrained least squares by a primal active-set method.

    minimise ||X a - y||^2   subject to   G a >= h

Only a handful of unknowns is expected (a plane in a few dimensions), while
the number of inequality rows may be in the millions; each iteration costs
one pass over the rows for the ratio test.
"""

from __future__ import annotations

import numpy as np


class QPError(RuntimeError):
    pass


def lsq_ineq(X: np.ndarray, y: np.ndarray, G: np.ndarray, h: np.ndarray, a0: np.ndarray,
             *, tol: float = 1e-10, max_iter: int = 1000) -> tuple[np.ndarray, list[int]]:
    """Return the minimiser and the final working set (row indices of G).

    ``a0`` must satisfy ``G a0 >= h``. Ties in the ratio test and in the
    multiplier test are broken by the lowest row index, so results are
    deterministic.
    """
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    G = np.asarray(G, float)
    h = np.asarray(h, float)
    a = np.asarray(a0, float).copy()
    n = X.shape[1]
    if G.size and np.min(G @ a - h) < -1e-9 * max(1.0, np.max(np.abs(h))):
        raise QPError("starting point is infeasible")
    H = X.T @ X
    g0 = X.T @ y
    scale = max(1.0, float(np.max(np.abs(H))))
    W: list[int] = []

    for _ in range(max_iter):
        grad = H @ a - g0
        k = len(W)
        K = np.zeros((n + k, n + k))
        K[:n, :n] = H
        if k:
            GW = G[W]
            K[:n, n:] = -GW.T
            K[n:, :n] = GW
        rhs = np.concatenate([-grad, np.zeros(k)])
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        p, lam = sol[:n], sol[n:]

        if np.linalg.norm(p) <= tol * max(1.0, np.linalg.norm(a)):
            if k == 0 or lam.min() >= -tol * scale:
                return a, W
            W.pop(int(np.argmin(lam)))
            continue

        Gp = G @ p if G.size else np.zeros(0)
        mask = Gp < -tol * max(1.0, np.linalg.norm(p))
        if W:
            mask[W] = False
        alpha, block = 1.0, -1
        if mask.any():
            idx = np.nonzero(mask)[0]
            ratios = (h[idx] - G[idx] @ a) / Gp[idx]
            ratios = np.maximum(ratios, 0.0)
            j = int(np.argmin(ratios))
            if ratios[j] < 1.0:
                alpha, block = float(ratios[j]), int(idx[j])
        a = a + alpha * p
        if block >= 0:
            W.append(block)
    raise QPError(f"active-set iteration limit ({max_iter}) reached")
