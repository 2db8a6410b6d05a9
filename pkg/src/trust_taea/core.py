"""Domain types and Pareto machinery shared by every other module.

Populations are stored column-wise (decision matrix, objective matrix and
violation vector) so selection operators can work on index arrays; the
``Solution`` record is the per-member view of one row.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from trust_taea import kernels

logger = logging.getLogger(__name__)

DUPLICATE_TOL = 1e-12


class UsageError(ValueError):
    """Invalid arguments passed to a library operation."""


class DataError(ValueError):
    """Non-finite or otherwise corrupt numerical input."""


class ConfigurationError(ValueError):
    """Invalid configuration or parameter combination."""


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=np.float64).ravel()
        upper = np.asarray(self.upper, dtype=np.float64).ravel()
        if lower.shape != upper.shape:
            raise ConfigurationError("lower and upper bounds differ in length")
        if not np.all(lower < upper):
            raise ConfigurationError("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.lower + rng.random((n, self.dim)) * self.span


@dataclass
class Solution:
    """One candidate: decision vector, objective vector and constraint violation."""

    x: np.ndarray
    f: np.ndarray = field(default_factory=lambda: np.empty(0))
    violation: float = 0.0

    @classmethod
    def create(cls, x, bounds: Bounds, f=None, violation: float = 0.0) -> "Solution":
        x = bounds.clip(np.asarray(x, dtype=np.float64))
        f = np.empty(0) if f is None else np.asarray(f, dtype=np.float64)
        if violation < 0:
            raise UsageError("violation must be nonnegative")
        return cls(x=x, f=f, violation=float(violation))


@dataclass
class Population:
    """Ordered member set stored as aligned arrays.

    ``X`` is (n, D), ``F`` is (n, M) and ``CV`` is (n,). ``F`` may have zero
    columns for members that have not been evaluated yet.
    """

    X: np.ndarray
    F: np.ndarray
    CV: np.ndarray | None = None
    capacity: int | None = None

    def __post_init__(self) -> None:
        self.X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        n = self.X.shape[0]
        F = np.asarray(self.F, dtype=np.float64)
        self.F = F.reshape(n, -1) if F.size or n else np.empty((0, 0))
        self.CV = np.zeros(n) if self.CV is None else np.asarray(self.CV, dtype=np.float64).reshape(n)
        if self.F.shape[0] != n:
            raise UsageError("objective rows do not match decision rows")

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def members(self) -> list[Solution]:
        return [Solution(self.X[i].copy(), self.F[i].copy(), float(self.CV[i])) for i in range(len(self))]

    @classmethod
    def from_solutions(cls, solutions: Sequence[Solution], capacity: int | None = None) -> "Population":
        if not solutions:
            return cls(np.empty((0, 0)), np.empty((0, 0)), np.empty(0), capacity)
        X = np.vstack([s.x for s in solutions])
        F = np.vstack([s.f for s in solutions])
        CV = np.array([s.violation for s in solutions], dtype=np.float64)
        return cls(X, F, CV, capacity)

    @classmethod
    def concat(cls, parts: Iterable["Population"], capacity: int | None = None) -> "Population":
        parts = [p for p in parts if len(p)]
        return cls(
            np.vstack([p.X for p in parts]),
            np.vstack([p.F for p in parts]),
            np.concatenate([p.CV for p in parts]),
            capacity,
        )

    def take(self, idx, capacity: int | None = None) -> "Population":
        idx = np.asarray(idx, dtype=np.int64)
        return Population(self.X[idx], self.F[idx], self.CV[idx], capacity if capacity is not None else self.capacity)

    def copy(self) -> "Population":
        return Population(self.X.copy(), self.F.copy(), self.CV.copy(), self.capacity)

    @property
    def feasible(self) -> np.ndarray:
        return self.CV <= 0.0


def _objectives(items) -> np.ndarray:
    if isinstance(items, Population):
        return items.F
    if isinstance(items, np.ndarray):
        return np.atleast_2d(items).astype(np.float64, copy=False)
    items = list(items)
    if items and isinstance(items[0], Solution):
        return np.vstack([s.f for s in items])
    return np.atleast_2d(np.asarray(items, dtype=np.float64))


def _decisions(items) -> np.ndarray:
    if isinstance(items, Population):
        return items.X
    if isinstance(items, np.ndarray):
        return np.atleast_2d(items)
    return np.vstack([s.x for s in items])


def dominates(a, b) -> bool:
    """True iff ``a`` Pareto-dominates ``b`` under minimization."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise UsageError(f"objective vectors differ in length: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def pareto_ranks(F: np.ndarray, CV: np.ndarray | None = None) -> np.ndarray:
    """Front index per row with feasibility-first ordering.

    Feasible rows are ranked by Pareto dominance. Infeasible rows follow the
    last feasible front, one rank per distinct violation level (smaller first).
    """
    F = np.asarray(F, dtype=np.float64)
    if CV is None or not np.any(CV > 0):
        return kernels.nd_ranks(F)
    ranks = np.empty(len(F), dtype=np.int64)
    feas = CV <= 0
    offset = 0
    if feas.any():
        ranks[feas] = kernels.nd_ranks(F[feas])
        offset = int(ranks[feas].max()) + 1
    infeas = np.flatnonzero(~feas)
    _, level = np.unique(CV[infeas], return_inverse=True)
    ranks[infeas] = offset + level
    return ranks


def nondominated_sort(items, violations: np.ndarray | None = None) -> list[list[int]]:
    """Partition ``items`` into fronts of indices; front 0 is the nondominated set."""
    F = _objectives(items)
    if F.shape[0] == 0:
        raise UsageError("cannot sort an empty set")
    if violations is None and isinstance(items, Population):
        violations = items.CV
    ranks = pareto_ranks(F, violations)
    return [np.flatnonzero(ranks == r).tolist() for r in range(int(ranks.max()) + 1)]


def nondominated_mask(F: np.ndarray, CV: np.ndarray | None = None) -> np.ndarray:
    return pareto_ranks(F, CV) == 0


def crowding_distance(front) -> np.ndarray:
    """NSGA-II crowding distance; extremes of every objective get +inf."""
    F = _objectives(front)
    if F.shape[0] == 0:
        raise UsageError("crowding distance of an empty front")
    return kernels.crowding(F)


def normalize_objectives(F, ideal, nadir, return_flags: bool = False):
    """Map objectives onto the ideal/nadir box; degenerate axes collapse to 0.

    Values outside [0, 1] are kept; ``return_flags`` adds a per-row boolean
    marking them.
    """
    F = _objectives(F)
    ideal = np.asarray(ideal, dtype=np.float64)
    nadir = np.asarray(nadir, dtype=np.float64)
    if not (np.all(np.isfinite(F)) and np.all(np.isfinite(ideal)) and np.all(np.isfinite(nadir))):
        raise DataError("non-finite value in normalization input")
    span = nadir - ideal
    if np.any(span < 0):
        raise UsageError("ideal must not exceed nadir")
    live = span > 0
    out = np.zeros_like(F)
    out[:, live] = (F[:, live] - ideal[live]) / span[live]
    if return_flags:
        return out, np.any((out < 0) | (out > 1), axis=1)
    return out


def ideal_nadir(F: np.ndarray, CV: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Ideal and nadir of the nondominated subset (feasible members preferred)."""
    F = np.asarray(F, dtype=np.float64)
    nd = F[nondominated_mask(F, CV)]
    if CV is not None:
        feas = CV[nondominated_mask(F, CV)] <= 0
        if feas.any():
            nd = nd[feas]
    return nd.min(axis=0), nd.max(axis=0)


def duplicate_free_indices(X: np.ndarray, tol: float = DUPLICATE_TOL) -> np.ndarray:
    """Indices kept by :func:`deduplicate` (first occurrence wins, order kept)."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n <= 1:
        return np.arange(n)
    # max-norm within tol implies the coordinate sums differ by at most D*tol
    proj = X.sum(axis=1)
    order = np.argsort(proj, kind="stable")
    sp = proj[order]
    slack = X.shape[1] * tol + 1e-12 * (1.0 + np.abs(sp))
    partners: dict[int, list[int]] = {}
    for a in range(n - 1):
        b = a + 1
        while b < n and sp[b] - sp[a] <= slack[a] + slack[b]:
            i, j = order[a], order[b]
            if np.max(np.abs(X[i] - X[j])) <= tol:
                partners.setdefault(int(i), []).append(int(j))
                partners.setdefault(int(j), []).append(int(i))
            b += 1
    if not partners:
        return np.arange(n)
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        for j in partners.get(i, ()):
            if j < i and keep[j]:
                keep[i] = False
                break
    return np.flatnonzero(keep)


def deduplicate(items, tol: float = DUPLICATE_TOL):
    """Drop solutions whose decision vector repeats an earlier one within ``tol``."""
    if isinstance(items, Population):
        return items.take(duplicate_free_indices(items.X, tol))
    items = list(items)
    if not items:
        return []
    keep = duplicate_free_indices(_decisions(items), tol)
    return [items[i] for i in keep]
