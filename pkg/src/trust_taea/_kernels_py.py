"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` one-to-one and are used whenever the compiled
extension is unavailable (or disabled through ``TRUST_TAEA_PURE_PYTHON=1``).
"""

from __future__ import annotations

import numpy as np


def nd_ranks(F: np.ndarray) -> np.ndarray:
    """Pareto rank of every row of ``F`` (0 = nondominated), minimization."""
    F = np.asarray(F, dtype=np.float64)
    n = F.shape[0]
    ranks = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return ranks
    a = F[:, None, :]
    b = F[None, :, :]
    dom = np.all(a <= b, axis=2) & np.any(a < b, axis=2)
    count = dom.sum(axis=0).astype(np.int64)
    remaining = np.ones(n, dtype=bool)
    rank = 0
    while remaining.any():
        front = remaining & (count == 0)
        ranks[front] = rank
        remaining &= ~front
        count -= dom[front].sum(axis=0)
        rank += 1
    return ranks


def crowding(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=np.float64)
    n, m = F.shape
    dist = np.zeros(n, dtype=np.float64)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        order = _axis_order(F, k)
        col = F[order, k]
        span = col[-1] - col[0]
        # a constant objective has no extremes and adds nothing
        if span > 0:
            dist[order[0]] = np.inf
            dist[order[-1]] = np.inf
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def _axis_order(F: np.ndarray, k: int) -> np.ndarray:
    """Sort by objective ``k``; ties fall back to the whole vector so the
    result does not depend on row order."""
    keys = [F[:, j] for j in range(F.shape[1] - 1, -1, -1)] + [F[:, k]]
    return np.lexsort(keys)


def hv2d(P: np.ndarray, ref: np.ndarray) -> float:
    P = np.asarray(P, dtype=np.float64)
    P = P[np.all(P < ref, axis=1)]
    if len(P) == 0:
        return 0.0
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    volume = 0.0
    best_f2 = ref[1]
    for f1, f2 in P:
        if f2 < best_f2:
            volume += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return float(volume)


def hv3d(P: np.ndarray, ref: np.ndarray) -> float:
    # slices along f3; each slab is the 2D front of the points seen so far
    P = np.asarray(P, dtype=np.float64)
    P = P[np.all(P < ref, axis=1)]
    n = len(P)
    if n == 0:
        return 0.0
    P = P[np.argsort(P[:, 2], kind="stable")]
    volume = 0.0
    for i in range(n):
        upper = P[i + 1, 2] if i + 1 < n else ref[2]
        depth = upper - P[i, 2]
        if depth > 0:
            volume += hv2d(P[: i + 1, :2], ref[:2]) * depth
    return float(volume)


def igd_plus_dists(A: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """For each reference row of ``Z`` the smallest clamped distance to ``A``."""
    A = np.asarray(A, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    out = np.empty(len(Z), dtype=np.float64)
    step = max(1, 2_000_000 // max(1, len(A) * A.shape[1]))
    for s in range(0, len(Z), step):
        diff = np.maximum(A[None, :, :] - Z[s : s + step, None, :], 0.0)
        out[s : s + step] = np.sqrt((diff * diff).sum(axis=2)).min(axis=1)
    return out
