"""Variable-grouping sparse search: group scoring, group sampling, dual-mode
mutation, sparse crossover and structural repair."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from trust_taea.core import (
    Bounds,
    ConfigurationError,
    Population,
    Solution,
    crowding_distance,
    nondominated_mask,
)
from trust_taea.structure import VariableStructure
from trust_taea.trust import SearchControls

logger = logging.getLogger(__name__)


@dataclass
class ReproductionParams:
    F: float = 0.5
    CR: float = 0.9
    lam: float = 0.5
    omega0: float = 0.2
    omega1: float = 0.3
    omega2: float = 0.5
    elite_fraction: float = 0.2

    def __post_init__(self) -> None:
        if self.F <= 0 or not 0 <= self.CR <= 1 or self.lam < 0:
            raise ConfigurationError("need F > 0, CR in [0, 1], lambda >= 0")
        w = (self.omega0, self.omega1, self.omega2)
        if min(w) < 0 or abs(sum(w) - 1) > 1e-9:
            raise ConfigurationError("omega weights must be nonnegative and sum to 1")
        if not 0 < self.elite_fraction <= 1:
            raise ConfigurationError("elite_fraction must lie in (0, 1]")


@dataclass
class GroupStats:
    spr: np.ndarray
    res: np.ndarray
    weight: np.ndarray | None = None
    prob: np.ndarray | None = None


def select_elite(C: Population, N: int, fraction: float = 0.2) -> np.ndarray:
    """Indices into ``C`` of the most spread-out nondominated members."""
    nd = np.flatnonzero(nondominated_mask(C.F, C.CV))
    size = math.ceil(fraction * N)
    if len(nd) <= size:
        return nd
    cd = crowding_distance(C.F[nd])
    order = np.argsort(-cd, kind="stable")
    return nd[np.sort(order[:size])]


def group_statistics(elite, structure: VariableStructure) -> GroupStats:
    """Per-group dispersion and mean structural residual over the elite set.

    The front group carries no structural target, so its residual is 0.
    """
    E = elite.X if isinstance(elite, Population) else np.atleast_2d(
        np.vstack([s.x for s in elite]) if isinstance(elite, list) else elite
    )
    K = structure.n_groups
    spr = np.zeros(K)
    res = np.zeros(K)
    if len(E) >= 2:
        rel_std = E.std(axis=0) / structure.bounds.span
        for k, g in enumerate(structure.groups):
            spr[k] = rel_std[g].mean()
    if len(E) >= 1:
        Z = structure.normalize(E)
        Zt = structure.normalize(structure.targets(E))
        for k, g in enumerate(structure.groups[1:], start=1):
            zk = Zt[:, g].mean(axis=1, keepdims=True)
            res[k] = np.abs(Z[:, g] - zk).mean()
    return GroupStats(spr=spr, res=res)


def _max_normalized(v: np.ndarray) -> np.ndarray:
    top = v.max() if len(v) else 0.0
    return v / top if top > 0 else np.zeros_like(v)


def group_probabilities(stats: GroupStats, params: ReproductionParams) -> GroupStats:
    w = params.omega0 + params.omega1 * _max_normalized(stats.spr) + params.omega2 * _max_normalized(stats.res)
    return GroupStats(stats.spr, stats.res, w, w / w.sum())


def group_sampling(
    stats: GroupStats, params: ReproductionParams, k_active: int, rng: np.random.Generator,
    structure: VariableStructure | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``k_active`` distinct groups proportionally to their weights.

    Returns the sorted active group ids and, when ``structure`` is given, the
    sorted active variable indices (otherwise an empty array).
    """
    if stats.prob is None:
        stats = group_probabilities(stats, params)
    K = len(stats.prob)
    if not 1 <= k_active <= K:
        raise ConfigurationError(f"k_active={k_active} outside [1, {K}]")
    active = np.sort(rng.choice(K, size=k_active, replace=False, p=stats.prob))
    if structure is None:
        return active, np.empty(0, dtype=np.int64)
    dims = np.sort(np.concatenate([structure.groups[k] for k in active]))
    return active, dims


def _distinct_triplets(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    idx = rng.integers(m, size=(n, 3))
    while True:
        bad = (idx[:, 0] == idx[:, 1]) | (idx[:, 0] == idx[:, 2]) | (idx[:, 1] == idx[:, 2])
        if not bad.any():
            return idx
        idx[bad] = rng.integers(m, size=(int(bad.sum()), 3))


def generate_mutants(
    X: np.ndarray,
    pool: np.ndarray,
    elite: np.ndarray,
    p_explore: float,
    params: ReproductionParams,
    rng: np.random.Generator,
    bounds: Bounds,
) -> np.ndarray:
    """Dual-mode DE mutants for every row of ``X`` (explore: rand/1, exploit: elite-guided)."""
    n = X.shape[0]
    if len(pool) < 3:
        logger.warning("mutation pool has %d members; using Gaussian perturbation", len(pool))
        return bounds.clip(X + rng.normal(0.0, 0.01, X.shape) * bounds.span)
    explore = rng.random(n) < p_explore
    abc = _distinct_triplets(len(pool), n, rng)
    g = elite[rng.integers(len(elite), size=n)]
    a, b, c = pool[abc[:, 0]], pool[abc[:, 1]], pool[abc[:, 2]]
    diff = params.F * (b - c)
    V = np.where(explore[:, None], a + diff, X + params.F * (g - X) + params.lam * diff)
    return bounds.clip(V)


def generate_mutant(
    parent: Solution, pool, elite, p_explore: float, params: ReproductionParams,
    rng: np.random.Generator, bounds: Bounds,
) -> np.ndarray:
    pool_X = pool.X if isinstance(pool, Population) else np.vstack([s.x for s in pool])
    elite_X = elite.X if isinstance(elite, Population) else np.vstack([s.x for s in elite])
    return generate_mutants(parent.x[None, :], pool_X, elite_X, p_explore, params, rng, bounds)[0]


def crossover_repair(
    X: np.ndarray,
    V: np.ndarray,
    active_dims: np.ndarray,
    rho: float,
    structure: VariableStructure,
    params: ReproductionParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sparse binomial crossover on ``active_dims`` followed by convex repair
    of the active convergence variables toward their targets."""
    active_dims = np.asarray(active_dims, dtype=np.int64)
    if len(active_dims) == 0:
        raise ConfigurationError("active dimension set is empty")
    n = X.shape[0]
    mask = rng.random((n, len(active_dims))) < params.CR
    mask[np.arange(n), rng.integers(len(active_dims), size=n)] = True
    U = X.copy()
    U[:, active_dims] = np.where(mask, V[:, active_dims], X[:, active_dims])
    repair = active_dims[structure.conv_mask[active_dims]]
    if len(repair) and rho > 0:
        target = structure.targets(U)
        U[:, repair] = (1.0 - rho) * U[:, repair] + rho * target[:, repair]
    # parents are in bounds, so clipping cannot touch inactive coordinates
    return structure.bounds.clip(U)


def sparse_crossover_repair(
    parent: Solution, mutant: np.ndarray, active_dims, rho: float, structure: VariableStructure,
    params: ReproductionParams, rng: np.random.Generator,
) -> Solution:
    u = crossover_repair(parent.x[None, :], np.asarray(mutant)[None, :], active_dims, rho, structure, params, rng)
    return Solution(x=u[0])


def sparse_search_offspring(
    P: Population,
    C: Population,
    A: Population,
    controls: SearchControls,
    structure: VariableStructure,
    params: ReproductionParams,
    rng: np.random.Generator,
    N: int | None = None,
    pool: np.ndarray | None = None,
) -> Population:
    """One trial per parent in ``P``; the active group set is shared by all parents."""
    if len(P) == 0:
        raise ConfigurationError("parent population is empty")
    N = N or len(P)
    elite_idx = select_elite(C, N, params.elite_fraction)
    elite = C.X[elite_idx]
    stats = group_probabilities(group_statistics(elite, structure), params)
    _, dims = group_sampling(stats, params, controls.k_active, rng, structure)
    if pool is None:
        from trust_taea.core import duplicate_free_indices

        allX = np.vstack([P.X, C.X, A.X]) if len(A) else np.vstack([P.X, C.X])
        pool = allX[duplicate_free_indices(allX)]
    V = generate_mutants(P.X, pool, elite, controls.p_explore, params, rng, structure.bounds)
    U = crossover_repair(P.X, V, dims, controls.rho, structure, params, rng)
    return Population(U, np.empty((len(U), 0)), np.zeros(len(U)))
