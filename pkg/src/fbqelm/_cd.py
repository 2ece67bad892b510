"""Compiled coordinate-descent kernels for Elastic-Net problems.

Both kernels work on centred data through the Gram matrix ``G = X^T X / N``
and the correlation ``q = X^T y / N``, minimising

    0.5 w^T G w - q^T w + l1 * pen(w) + 0.5 * l2 * ||w||^2

where ``pen`` is ``||w||_1`` (single task) or the sum of row norms
(multi-task). The smooth part is recomputed from scratch after every sweep
so the KKT check does not accumulate rounding drift.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True)
def enet_gram_cd(G, q, w, l1, l2, tol, max_sweeps):
    """Cyclic CD; returns (sweeps, kkt, objective trace, monotone flag)."""
    F = G.shape[0]
    h = G @ w
    trace = np.empty(max_sweeps + 1)
    obj = 0.5 * w @ h - q @ w + l1 * np.sum(np.abs(w)) + 0.5 * l2 * w @ w
    trace[0] = obj
    monotone = True
    kkt = np.inf
    sweeps = 0
    for sweep in range(max_sweeps):
        for j in range(F):
            denom = G[j, j] + l2
            if denom <= 0.0:
                continue
            wj = w[j]
            z = q[j] - h[j] + G[j, j] * wj
            new = _soft(z, l1) / denom
            if new != wj:
                d = new - wj
                for k in range(F):
                    h[k] += G[k, j] * d
                w[j] = new
        sweeps = sweep + 1
        h = G @ w
        new_obj = 0.5 * w @ h - q @ w + l1 * np.sum(np.abs(w)) + 0.5 * l2 * w @ w
        if new_obj > obj + 1e-13 * max(1.0, abs(obj)):
            monotone = False
        obj = new_obj
        trace[sweeps] = obj
        kkt = 0.0
        for j in range(F):
            g = h[j] - q[j] + l2 * w[j]
            if w[j] > 0.0:
                v = abs(g + l1)
            elif w[j] < 0.0:
                v = abs(g - l1)
            else:
                v = max(0.0, abs(g) - l1)
            if v > kkt:
                kkt = v
        if kkt <= tol:
            break
    return sweeps, kkt, trace[: sweeps + 1], monotone


@njit(cache=True)
def multitask_gram_cd(G, Q, W, l1, l2, tol, max_sweeps):
    """Block CD with a row-wise l2,1 penalty; same return layout as above."""
    F, M = W.shape
    H = G @ W
    trace = np.empty(max_sweeps + 1)

    def objective(W, H):
        s = 0.0
        for j in range(F):
            s += np.sqrt(np.sum(W[j] ** 2))
        return 0.5 * np.sum(W * H) - np.sum(Q * W) + l1 * s + 0.5 * l2 * np.sum(W * W)

    obj = objective(W, H)
    trace[0] = obj
    monotone = True
    kkt = np.inf
    sweeps = 0
    z = np.empty(M)
    for sweep in range(max_sweeps):
        for j in range(F):
            denom = G[j, j] + l2
            if denom <= 0.0:
                continue
            for m in range(M):
                z[m] = Q[j, m] - H[j, m] + G[j, j] * W[j, m]
            nz = np.sqrt(np.sum(z ** 2))
            scale = 0.0 if nz <= l1 else (1.0 - l1 / nz) / denom
            for m in range(M):
                d = scale * z[m] - W[j, m]
                if d != 0.0:
                    for k in range(F):
                        H[k, m] += G[k, j] * d
                    W[j, m] = scale * z[m]
        sweeps = sweep + 1
        H = G @ W
        new_obj = objective(W, H)
        if new_obj > obj + 1e-13 * max(1.0, abs(obj)):
            monotone = False
        obj = new_obj
        trace[sweeps] = obj
        kkt = 0.0
        for j in range(F):
            nw = np.sqrt(np.sum(W[j] ** 2))
            if nw > 0.0:
                v = 0.0
                for m in range(M):
                    g = H[j, m] - Q[j, m] + l2 * W[j, m] + l1 * W[j, m] / nw
                    v += g * g
                v = np.sqrt(v)
            else:
                g2 = 0.0
                for m in range(M):
                    g = H[j, m] - Q[j, m]
                    g2 += g * g
                v = max(0.0, np.sqrt(g2) - l1)
            if v > kkt:
                kkt = v
        if kkt <= tol:
            break
    return sweeps, kkt, trace[: sweeps + 1], monotone
