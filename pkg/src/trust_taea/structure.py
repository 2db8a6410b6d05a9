"""Variable structure: front/convergence grouping plus structure-induced targets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from trust_taea.core import Bounds, ConfigurationError

TargetProvider = Callable[[np.ndarray], np.ndarray]


def contiguous_groups(front_size: int, dim: int, n_conv: int) -> list[np.ndarray]:
    """``[G_f, G_1, ..., G_K]``: a leading front block and equal convergence blocks.

    The last convergence block absorbs the remainder.
    """
    if not 0 < front_size < dim:
        raise ConfigurationError("front block must be nonempty and leave convergence variables")
    n_conv = max(1, min(n_conv, dim - front_size))
    rest = dim - front_size
    size = rest // n_conv
    groups = [np.arange(front_size)]
    start = front_size
    for k in range(n_conv):
        stop = dim if k == n_conv - 1 else start + size
        groups.append(np.arange(start, stop))
        start = stop
    return groups


@dataclass
class VariableStructure:
    """Grouping ``[G_f, G_1^c, ...]`` with a vectorized target provider.

    ``target_provider`` maps a decision matrix (n, D) to the matrix of
    structure-induced targets x*; only convergence columns are consulted.
    When omitted, targets are the bound midpoints.
    """

    groups: list[np.ndarray]
    bounds: Bounds
    target_provider: TargetProvider | None = None
    conv_mask: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.groups = [np.asarray(g, dtype=np.int64) for g in self.groups]
        D = self.bounds.dim
        seen = np.concatenate(self.groups) if self.groups else np.empty(0, dtype=np.int64)
        if len(self.groups) < 2 or len(self.groups[0]) == 0:
            raise ConfigurationError("need a nonempty front group and at least one convergence group")
        if len(seen) != D or not np.array_equal(np.sort(seen), np.arange(D)):
            raise ConfigurationError("groups must partition the decision indices")
        self.conv_mask = np.ones(D, dtype=bool)
        self.conv_mask[self.groups[0]] = False

    @property
    def front(self) -> np.ndarray:
        return self.groups[0]

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def conv_indices(self) -> np.ndarray:
        return np.flatnonzero(self.conv_mask)

    def targets(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.target_provider is None:
            mid = 0.5 * (self.bounds.lower + self.bounds.upper)
            return np.broadcast_to(mid, X.shape).copy()
        return self.bounds.clip(self.target_provider(X))

    def normalize(self, X: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(X) - self.bounds.lower) / self.bounds.span

    def target(self, j: int, x: np.ndarray) -> float:
        return float(self.targets(x)[0, j])

    def transform(self, j: int, x: np.ndarray) -> float:
        return float(self.normalize(x)[0, j])

    def group_target(self, k: int, x: np.ndarray) -> float:
        """Mean normalized target over group ``k`` for solution ``x``."""
        zt = self.normalize(self.targets(x))[0]
        return float(zt[self.groups[k]].mean())
