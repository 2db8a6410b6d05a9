"""Quality indicators (HV, IGD+) and the rank-sum significance test."""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm, rankdata

from trust_taea import kernels
from trust_taea.core import ConfigurationError, UsageError

HV_REF = 1.1


def igd_plus(approx, reference) -> float:
    """Mean over reference points of the dominance-aware distance to ``approx``."""
    A = np.atleast_2d(np.asarray(approx, dtype=np.float64))
    Z = np.atleast_2d(np.asarray(reference, dtype=np.float64))
    if A.size == 0 or Z.size == 0:
        raise UsageError("IGD+ needs nonempty approximation and reference sets")
    if A.shape[1] != Z.shape[1]:
        raise UsageError(f"objective counts differ: {A.shape[1]} vs {Z.shape[1]}")
    return float(kernels.igd_plus_dists(A, Z).mean())


def hypervolume(approx, ref_point) -> float:
    """Exact dominated volume for two or three objectives."""
    A = np.atleast_2d(np.asarray(approx, dtype=np.float64))
    ref = np.asarray(ref_point, dtype=np.float64)
    if A.size == 0:
        return 0.0
    M = A.shape[1]
    if M != len(ref):
        raise UsageError("reference point length differs from objective count")
    if M == 2:
        return kernels.hv2d(A, ref)
    if M == 3:
        return kernels.hv3d(A, ref)
    raise ConfigurationError(f"hypervolume supports M in {{2, 3}}, got {M}")


def normalized_hv(approx, front: np.ndarray) -> float:
    """HV after scaling by the reference front's ideal/nadir, reference point 1.1."""
    ideal = front.min(axis=0)
    nadir = front.max(axis=0)
    span = np.where(nadir > ideal, nadir - ideal, 1.0)
    A = (np.atleast_2d(approx) - ideal) / span
    return hypervolume(A, np.full(front.shape[1], HV_REF))


def _exact_rank_sum_pvalue(ranks: np.ndarray, n1: int) -> float:
    """Two-sided permutation p-value of the first sample's rank sum.

    Midranks are doubled so every subset sum is an integer; a subset-sum
    count table then gives the full null distribution.
    """
    r2 = np.rint(2 * ranks).astype(np.int64)
    total = int(r2.sum())
    counts = np.zeros((n1 + 1, total + 1))
    counts[0, 0] = 1.0
    for v in r2:
        counts[1:, v:] += counts[:-1, : total + 1 - v]
    dist = counts[n1]
    sums = np.arange(total + 1)
    mean2 = n1 * (len(ranks) + 1)
    w2 = int(r2[:n1].sum())
    extreme = np.abs(sums - mean2) >= abs(w2 - mean2)
    return float(min(1.0, dist[extreme].sum() / dist.sum()))


def rank_sum_pvalue(a, b, method: str = "auto") -> float:
    """Two-sided p-value of the rank-sum statistic.

    ``method="normal"`` uses the tie-corrected normal approximation with a
    continuity correction; ``"exact"`` enumerates the permutation
    distribution. ``"auto"`` picks exact when both samples are small
    (min size < 10 and total < 20) and the normal approximation otherwise.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = len(a), len(b)
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    if method == "auto":
        method = "exact" if min(n1, n2) < 10 and n1 + n2 < 20 else "normal"
    if method == "exact":
        return _exact_rank_sum_pvalue(ranks, n1)
    if method != "normal":
        raise UsageError(f"unknown method {method!r}")
    w = ranks[:n1].sum()
    n = n1 + n2
    mean = n1 * (n + 1) / 2.0
    _, counts = np.unique(pooled, return_counts=True)
    tie = (counts**3 - counts).sum()
    var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0:
        return 1.0
    z = max(abs(w - mean) - 0.5, 0.0) / math.sqrt(var)
    return float(min(1.0, 2.0 * norm.sf(z)))


def wilcoxon_rank_sum(
    a, b, alpha: float = 0.05, lower_is_better: bool = True, method: str = "auto"
) -> tuple[str, float]:
    """Verdict for sample ``a`` relative to ``b``: ``+`` better, ``-`` worse, ``≈`` no difference."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 5 or len(b) < 5:
        raise UsageError("rank-sum test needs at least 5 values per sample")
    p = rank_sum_pvalue(a, b, method)
    if p >= alpha:
        return "approx", p
    a_better = np.median(a) < np.median(b) if lower_is_better else np.median(a) > np.median(b)
    return ("plus" if a_better else "minus"), p


VERDICT_SYMBOL = {"plus": "+", "minus": "-", "approx": "≈"}
