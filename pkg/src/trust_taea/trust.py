"""Archive trustworthiness and the search controls derived from it."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from trust_taea.core import ConfigurationError, Population, nondominated_mask, normalize_objectives

SEGMENT_GAP_FACTOR = 3.0


@dataclass
class TrustParams:
    tau_s: float = 0.1
    tau_e: float = 0.6
    mu: float = 0.5
    B: int | None = None  # None: derived from N and M
    kappa: float = 1.0
    alpha: float = 1 / 3
    beta: float = 1 / 3
    gamma: float = 1 / 3
    P_min: float = 0.1
    P_max: float = 0.9
    lambda_exp: float = 1.25
    K_min: int = 1
    K_max: int | None = None  # None: total group count
    rho_min: float = 0.1
    rho_max: float = 0.8

    def __post_init__(self) -> None:
        if not (0 <= self.tau_s < self.tau_e <= 1):
            raise ConfigurationError("need 0 <= tau_s < tau_e <= 1")
        if self.mu <= 0 or self.kappa <= 0 or self.lambda_exp <= 0:
            raise ConfigurationError("mu, kappa and lambda_exp must be positive")
        if self.B is not None and self.B < 1:
            raise ConfigurationError("B must be a positive integer")
        w = (self.alpha, self.beta, self.gamma)
        if min(w) < 0 or abs(sum(w) - 1) > 1e-9:
            raise ConfigurationError("alpha, beta, gamma must be nonnegative and sum to 1")
        if not (0 <= self.P_min < self.P_max <= 1):
            raise ConfigurationError("need 0 <= P_min < P_max <= 1")
        if not (0 <= self.rho_min < self.rho_max <= 1):
            raise ConfigurationError("need 0 <= rho_min < rho_max <= 1")
        if self.K_min < 1 or (self.K_max is not None and self.K_max < self.K_min):
            raise ConfigurationError("need 1 <= K_min <= K_max")

    def k_max(self, n_groups: int) -> int:
        k = n_groups if self.K_max is None else self.K_max
        if k > n_groups or self.K_min > k:
            raise ConfigurationError(f"K range [{self.K_min}, {k}] incompatible with {n_groups} groups")
        return k


@dataclass
class TrustState:
    p: float
    phi: float
    m_size: float
    m_cov: float
    m_shape: float
    maturity: float
    trust: float


@dataclass
class SearchControls:
    p_explore: float
    k_active: int
    rho: float


def compute_progress_stage(t: int, T: int, params: TrustParams) -> tuple[float, float]:
    if T < 2:
        raise ConfigurationError("T must be at least 2")
    if not 0 <= t < T:
        raise ConfigurationError(f"generation {t} outside [0, {T})")
    p = t / (T - 1)
    phi = min(max((p - params.tau_s) / (params.tau_e - params.tau_s), 0.0), 1.0)
    return p, phi


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


@lru_cache(maxsize=32)
def _simplex_lattice(M: int, H: int) -> np.ndarray:
    return np.array(list(_compositions(H, M)), dtype=np.float64) / H


@lru_cache(maxsize=32)
def reference_directions(M: int, B: int) -> np.ndarray:
    """``B`` evenly spread unit-simplex directions (M=2); lattice nearest ``B`` otherwise."""
    if M == 1:
        return np.ones((1, 1))
    if M == 2:
        if B == 1:
            return np.array([[0.5, 0.5]])
        w = np.linspace(0.0, 1.0, B)
        return np.column_stack([w, 1.0 - w])
    best_h, best_gap = 1, None
    for H in range(1, 200):
        count = math.comb(H + M - 1, M - 1)
        gap = abs(count - B)
        if best_gap is None or gap < best_gap:
            best_h, best_gap = H, gap
        if count > B:
            break
    W = _simplex_lattice(M, best_h)
    return W[np.lexsort(W.T[::-1])]


def default_bin_count(N: int, M: int) -> int:
    return N if M == 2 else len(reference_directions(M, N))


def assign_directions(Fn: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Index of the direction with maximal cosine similarity for each row."""
    Wu = W / np.linalg.norm(W, axis=1, keepdims=True)
    norms = np.linalg.norm(Fn, axis=1, keepdims=True)
    U = np.divide(Fn, norms, out=np.zeros_like(Fn), where=norms > 0)
    return np.argmax(U @ Wu.T, axis=1)


def coverage(Fn: np.ndarray, B: int) -> tuple[float, np.ndarray]:
    """Fraction of the ``B`` directions occupied by normalized points, plus the occupied ids."""
    if len(Fn) == 0:
        return 0.0, np.empty(0, dtype=np.int64)
    W = reference_directions(Fn.shape[1], B)
    occupied = np.unique(assign_directions(Fn, W))
    return len(occupied) / len(W), occupied


def count_segments(Fn: np.ndarray) -> int:
    """Number of front pieces separated by gaps wider than 3x the median spacing."""
    n = len(Fn)
    if n <= 2:
        return 1
    if Fn.shape[1] == 2:
        P = Fn[np.lexsort((Fn[:, 1], Fn[:, 0]))]
        gaps = np.linalg.norm(np.diff(P, axis=0), axis=1)
        cutoff = SEGMENT_GAP_FACTOR * np.median(gaps)
        if cutoff <= 0:
            return 1
        return 1 + int(np.count_nonzero(gaps > cutoff))
    tree = cKDTree(Fn)
    nn, _ = tree.query(Fn, k=2)
    cutoff = SEGMENT_GAP_FACTOR * np.median(nn[:, 1])
    if cutoff <= 0:
        return 1
    pairs = tree.query_pairs(cutoff, output_type="ndarray")
    graph = csr_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    k, _ = connected_components(graph, directed=False)
    return int(k)


def compute_maturity(
    C: Population, params: TrustParams, N: int, ideal, nadir
) -> tuple[float, float, float, float]:
    """Size, coverage and shape maturity of ND(C) and their weighted blend."""
    if len(C) == 0:
        return 0.0, 0.0, 0.0, 0.0
    mask = nondominated_mask(C.F, C.CV)
    nd = C.F[mask]
    m_size = min(len(nd) / (params.mu * N), 1.0)
    Fn = normalize_objectives(nd, ideal, nadir)
    B = params.B if params.B is not None else default_bin_count(N, C.F.shape[1])
    m_cov, _ = coverage(Fn, B)
    k_seg = count_segments(Fn)
    m_shape = 1.0 / (1.0 + params.kappa * (k_seg - 1))
    maturity = params.alpha * m_size + params.beta * m_cov + params.gamma * m_shape
    return m_size, m_cov, m_shape, min(max(maturity, 0.0), 1.0)


def compute_trust(phi: float, maturity: float) -> float:
    return phi * maturity


def derive_controls(trust: float, params: TrustParams, n_groups: int | None = None) -> SearchControls:
    k_hi = params.k_max(n_groups) if n_groups is not None else (params.K_max or params.K_min)
    p_explore = params.P_max - (params.P_max - params.P_min) * trust**params.lambda_exp
    # guard ceil against representation noise (1 + 5*0.6 must stay 4)
    k_active = math.ceil(params.K_min + (k_hi - params.K_min) * trust - 1e-9)
    k_active = min(max(k_active, params.K_min), k_hi)
    rho = params.rho_min + (params.rho_max - params.rho_min) * trust
    return SearchControls(p_explore=p_explore, k_active=k_active, rho=rho)


def assess(
    t: int, T: int, C: Population, params: TrustParams, N: int, ideal, nadir
) -> TrustState:
    """Progress, stage factor, maturity and trust for generation ``t``."""
    p, phi = compute_progress_stage(t, T, params)
    m_size, m_cov, m_shape, maturity = compute_maturity(C, params, N, ideal, nadir)
    return TrustState(p, phi, m_size, m_cov, m_shape, maturity, compute_trust(phi, maturity))
