"""LSMOP1-9 large-scale benchmark problems and their analytic Pareto fronts.

Variables ``x_1..x_{M-1}`` are position variables in [0, 1]; the remaining
``D-M+1`` distance variables live in [0, 10] and are linked to ``x_1`` either
linearly (LSMOP1-4) or through a cosine factor (LSMOP5-9). Each objective
owns ``nk=5`` subcomponents whose sizes follow a logistic-map chaos sequence.
"""

from __future__ import annotations

import math

import numpy as np

from trust_taea.core import Bounds, ConfigurationError, nondominated_mask
from trust_taea.problems.base import ProblemDef
from trust_taea.structure import VariableStructure, contiguous_groups
from trust_taea.trust import _simplex_lattice

NK = 5
LSMOP9_INTERVALS = (0.0, 0.251412, 0.631627, 0.859401)


def sphere(x):
    return np.sum(x * x, axis=1)


def griewank(x):
    idx = np.sqrt(np.arange(1, x.shape[1] + 1))
    return np.sum(x * x, axis=1) / 4000.0 - np.prod(np.cos(x / idx), axis=1) + 1.0


def schwefel(x):
    return np.max(np.abs(x), axis=1)


def rastrigin(x):
    return np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x) + 10.0, axis=1)


def rosenbrock(x):
    return np.sum(100.0 * (x[:, :-1] ** 2 - x[:, 1:]) ** 2 + (x[:, :-1] - 1.0) ** 2, axis=1)


def ackley(x):
    n = x.shape[1]
    return (
        20.0
        - 20.0 * np.exp(-0.2 * np.sqrt(np.sum(x * x, axis=1) / n))
        - np.exp(np.sum(np.cos(2.0 * np.pi * x), axis=1) / n)
        + np.e
    )


# (odd-objective function, even-objective function, nonlinear linkage, front type)
SUITE = {
    1: (sphere, sphere, False, "linear"),
    2: (griewank, schwefel, False, "linear"),
    3: (rastrigin, rosenbrock, False, "linear"),
    4: (ackley, griewank, False, "linear"),
    5: (sphere, sphere, True, "sphere"),
    6: (rosenbrock, schwefel, True, "sphere"),
    7: (ackley, rosenbrock, True, "sphere"),
    8: (griewank, sphere, True, "sphere"),
    9: (sphere, ackley, True, "disconnected"),
}


def subcomponent_sizes(M: int, D: int) -> np.ndarray:
    c = [3.8 * 0.1 * (1 - 0.1)]
    for _ in range(M - 1):
        c.append(3.8 * c[-1] * (1 - c[-1]))
    c = np.array(c)
    return np.floor(c / c.sum() * (D - M + 1) / NK).astype(np.int64)


class LSMOP:
    def __init__(self, pid: int, M: int, D: int):
        if pid not in SUITE:
            raise ConfigurationError(f"LSMOP id must be 1..9, got {pid}")
        if M < 2 or D < M:
            raise ConfigurationError(f"need M >= 2 and D >= M, got M={M}, D={D}")
        self.pid, self.M, self.D = pid, M, D
        self.f_odd, self.f_even, self.nonlinear, self.front_type = SUITE[pid]
        self.sublen = subcomponent_sizes(M, D)
        if self.sublen.sum() < 1:
            raise ConfigurationError(f"D={D} too small for M={M} subcomponents")
        self.offsets = np.concatenate([[0], np.cumsum(self.sublen * NK)])
        self.lower = np.zeros(D)
        self.upper = np.concatenate([np.ones(M - 1), 10.0 * np.ones(D - M + 1)])
        pos = np.arange(M, D + 1) / D
        self.link = 1.0 + (np.cos(0.5 * np.pi * pos) if self.nonlinear else pos)
        # distance-variable optimum after linkage: 1 for Rosenbrock slices, 0 otherwise
        self.opt_shift = np.zeros(D - M + 1)
        for i in range(M):
            if (self.f_odd if i % 2 == 0 else self.f_even) is rosenbrock:
                start = self.offsets[i]
                self.opt_shift[start : start + NK * self.sublen[i]] = 1.0

    def g_values(self, X: np.ndarray) -> np.ndarray:
        M = self.M
        Xs = self.link * X[:, M - 1 :] - 10.0 * X[:, :1]
        G = np.zeros((X.shape[0], M))
        for i in range(M):
            func = self.f_odd if i % 2 == 0 else self.f_even
            L = self.sublen[i]
            if L == 0:
                continue
            for j in range(NK):
                start = self.offsets[i] + j * L
                G[:, i] += func(Xs[:, start : start + L])
        # an empty subcomponent (tiny D) contributes g = 0
        return G / np.maximum(self.sublen, 1) / NK

    def evaluate(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        M = self.M
        G = self.g_values(X)
        pos = X[:, : M - 1]
        ones = np.ones((X.shape[0], 1))
        if self.front_type == "linear":
            F = (1.0 + G) * np.fliplr(np.cumprod(np.hstack([ones, pos]), axis=1)) * np.hstack(
                [ones, 1.0 - pos[:, ::-1]]
            )
        elif self.front_type == "sphere":
            shifted = np.hstack([G[:, 1:], np.zeros((X.shape[0], 1))])
            F = (1.0 + G + shifted) * np.fliplr(
                np.cumprod(np.hstack([ones, np.cos(0.5 * np.pi * pos)]), axis=1)
            ) * np.hstack([ones, np.sin(0.5 * np.pi * pos[:, ::-1])])
        else:
            g = 1.0 + G.sum(axis=1, keepdims=True)
            F = np.empty((X.shape[0], M))
            F[:, : M - 1] = pos
            F[:, M - 1] = ((1.0 + g) * (M - np.sum(pos / (1.0 + g) * (1.0 + np.sin(3.0 * np.pi * pos)), axis=1, keepdims=True)))[:, 0]
        return F, np.zeros(X.shape[0])

    def targets(self, X: np.ndarray) -> np.ndarray:
        """Distance variables that zero every subcomponent function for the given ``x_1``."""
        T = np.array(X, dtype=np.float64, copy=True)
        T[:, self.M - 1 :] = (self.opt_shift + 10.0 * X[:, :1]) / self.link
        return np.clip(T, self.lower, self.upper)

    def front(self, n: int) -> np.ndarray:
        return true_front_sample(self.pid, self.M, n)

    def problem(self, conv_groups: int = 5) -> ProblemDef:
        bounds = Bounds(self.lower, self.upper)
        structure = VariableStructure(contiguous_groups(self.M - 1, self.D, conv_groups), bounds, self.targets)
        return ProblemDef(
            name=f"LSMOP{self.pid}",
            M=self.M,
            D=self.D,
            bounds=bounds,
            evaluate=self.evaluate,
            structure=structure,
            front_sampler=self.front,
        )


def evaluate_lsmop(pid: int, M: int, D: int, x) -> np.ndarray:
    F, _ = LSMOP(pid, M, D).evaluate(np.atleast_2d(x))
    return F[0] if np.ndim(x) == 1 else F


def _simplex_points(M: int, n: int) -> np.ndarray:
    if M == 2:
        s = np.linspace(0.0, 1.0, max(n, 2))
        return np.column_stack([s, 1.0 - s])
    H = 1
    while math.comb(H + 1 + M - 1, M - 1) <= n:
        H += 1
    return _simplex_lattice(M, H)


def _grid(dim: int, n: int) -> np.ndarray:
    per = max(2, int(math.floor(n ** (1.0 / dim) + 1e-9)))
    axes = np.meshgrid(*[np.linspace(0.0, 1.0, per)] * dim, indexing="ij")
    return np.column_stack([a.ravel() for a in axes])


def true_front_sample(pid: int, M: int, n: int) -> np.ndarray:
    """Uniformly parameterized points on the analytic Pareto front.

    For M >= 3 the simplex lattice (or grid) with the most points not above
    ``n`` is used, so fewer than ``n`` points may be returned.
    """
    if pid not in SUITE:
        raise ConfigurationError(f"LSMOP id must be 1..9, got {pid}")
    if n < M:
        raise ConfigurationError("need at least M front samples")
    kind = SUITE[pid][3]
    if kind == "linear":
        return _simplex_points(M, n)
    if kind == "sphere":
        W = _simplex_points(M, n)
        return W / np.linalg.norm(W, axis=1, keepdims=True)
    a0, a1, b0, b1 = LSMOP9_INTERVALS
    cut = (a1 - a0) / (b1 - b0 + a1 - a0)
    X = _grid(M - 1, n) if M > 2 else np.linspace(0.0, 1.0, n)[:, None]
    X = np.where(X <= cut, X * (a1 - a0) / cut + a0, (X - cut) * (b1 - b0) / (1 - cut) + b0)
    R = np.column_stack([X, 2.0 * (M - np.sum(X / 2.0 * (1.0 + np.sin(3.0 * np.pi * X)), axis=1))])
    return R[nondominated_mask(R)]


def front_residual(pid: int, F: np.ndarray) -> np.ndarray:
    """Deviation of each row from the front manifold equation."""
    kind = SUITE[pid][3]
    F = np.atleast_2d(F)
    if kind == "linear":
        return np.abs(F.sum(axis=1) - 1.0)
    if kind == "sphere":
        return np.abs((F * F).sum(axis=1) - 1.0)
    M = F.shape[1]
    X = F[:, : M - 1]
    return np.abs(F[:, -1] - 2.0 * (M - np.sum(X / 2.0 * (1.0 + np.sin(3.0 * np.pi * X)), axis=1)))


def make_lsmop(pid: int, M: int, D: int, conv_groups: int = 5) -> ProblemDef:
    return LSMOP(pid, M, D).problem(conv_groups)
