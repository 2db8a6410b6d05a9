"""Anchor-probing compensatory search in the front-variable space."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from trust_taea.core import ConfigurationError, Population, Solution, nondominated_mask
from trust_taea.sparse_search import select_elite
from trust_taea.structure import VariableStructure
from trust_taea.trust import SearchControls

logger = logging.getLogger(__name__)

LATTICE_LEVELS = 11
MAX_ANCHORS = 200
CONV_NOISE = 0.05


@dataclass
class ProbeParams:
    p_start: float = 0.12
    delta0: float = 0.05
    delta1: float = 0.2
    delta2: float = 0.2
    delta_max: float = 0.5
    beta_low: float = 0.3
    beta_high: float = 0.8
    rho_probe: float | None = None  # fixed value; None defers to rho_probe_mode
    rho_probe_mode: str = "rho_max"  # "rho_max": top of the trust-driven range, "rho": current rho


    def __post_init__(self) -> None:
        if not 0 <= self.p_start < 1:
            raise ConfigurationError("p_start must lie in [0, 1)")
        if min(self.delta0, self.delta1, self.delta2) < 0 or not 0 <= self.delta_max <= 1:
            raise ConfigurationError("deltas must be nonnegative and delta_max in [0, 1]")
        if not 0 <= self.beta_low <= self.beta_high <= 1:
            raise ConfigurationError("beta range must lie within [0, 1]")
        if self.rho_probe is not None and not 0 <= self.rho_probe <= 1:
            raise ConfigurationError("rho_probe must lie in [0, 1]")
        if self.rho_probe_mode not in ("rho_max", "rho"):
            raise ConfigurationError("rho_probe_mode must be 'rho_max' or 'rho'")

    def resolve_rho(self, rho: float, rho_max: float | None = None) -> float:
        """Repair strength for probes given the current and maximal sparse-search rho."""
        if self.rho_probe is not None:
            return self.rho_probe
        if self.rho_probe_mode == "rho" or rho_max is None:
            return rho
        return rho_max


def compensation_intensity(
    trust: float, p: float, nd_ratio: float, N: int, params: ProbeParams
) -> tuple[float, int]:
    if p < params.p_start:
        return 0.0, 0
    raw = params.delta0 + params.delta1 * (1.0 - trust) + params.delta2 * (1.0 - nd_ratio)
    delta = min(max(raw, 0.0), params.delta_max)
    # 100 * 0.29 is 28.999999999999996; snap before ceil
    return delta, math.ceil(round(N * delta, 9))


def _anchor_candidates(lower: np.ndarray, upper: np.ndarray, count: int) -> np.ndarray:
    dim = len(lower)
    parts = []
    if dim <= 4:
        parts.append(np.array(list(itertools.product(*zip(lower, upper)))))
    if dim <= 2:
        levels = max(LATTICE_LEVELS, math.ceil(count ** (1 / dim)))
        axes = [np.linspace(lo, hi, levels) for lo, hi in zip(lower, upper)]
        parts.append(np.array(list(itertools.product(*axes))))
    else:
        # diagonal lattice: every front variable at the same relative level
        s = np.linspace(0.0, 1.0, max(LATTICE_LEVELS, count))
        parts.append(lower + s[:, None] * (upper - lower))
    cand = np.vstack(parts)
    _, first = np.unique(cand, axis=0, return_index=True)
    return cand[np.sort(first)]


def build_anchor_set(structure: VariableStructure, C: Population, count: int) -> np.ndarray:
    """Corners plus lattice in front-variable space, most isolated from ND(C) first.

    Isolation is the distance (in normalized front coordinates) to the nearest
    nondominated member of ``C``; ties keep the construction order.
    """
    if count < 1:
        raise ConfigurationError("anchor count must be positive")
    lo = structure.bounds.lower[structure.front]
    hi = structure.bounds.upper[structure.front]
    cand = _anchor_candidates(lo, hi, count)
    if len(C):
        nd = C.X[nondominated_mask(C.F, C.CV)][:, structure.front] if C.F.shape[1] else C.X[:, structure.front]
        span = hi - lo
        diff = (cand[:, None, :] - nd[None, :, :]) / span
        isolation = np.sqrt((diff * diff).sum(axis=2)).min(axis=1)
        order = np.argsort(-isolation, kind="stable")
        cand = cand[order]
    return cand[:MAX_ANCHORS] if len(cand) > max(MAX_ANCHORS, count) else cand


def generate_probes(
    elites: np.ndarray,
    anchors: np.ndarray,
    betas: np.ndarray,
    rho_probe: float,
    structure: VariableStructure,
    rng: np.random.Generator,
) -> np.ndarray:
    """Rows: elite front part blended toward its anchor, convergence part
    perturbed then pulled toward the target of the new front position."""
    front = structure.front
    conv = structure.conv_indices
    X = np.array(elites, dtype=np.float64, copy=True)
    betas = np.asarray(betas, dtype=np.float64).reshape(-1, 1)
    X[:, front] = (1.0 - betas) * X[:, front] + betas * anchors
    span = structure.bounds.span[conv]
    X[:, conv] = X[:, conv] + rng.normal(0.0, 1.0, (len(X), len(conv))) * CONV_NOISE * span
    X = structure.bounds.clip(X)
    if rho_probe > 0:
        target = structure.targets(X)
        X[:, conv] = (1.0 - rho_probe) * X[:, conv] + rho_probe * target[:, conv]
    return structure.bounds.clip(X)


def generate_probe(
    elite: Solution, anchor, beta: float, rho_probe: float, structure: VariableStructure,
    rng: np.random.Generator,
) -> Solution:
    if not (0 <= beta <= 1 and 0 <= rho_probe <= 1):
        raise ConfigurationError("beta and rho_probe must lie in [0, 1]")
    x = generate_probes(elite.x[None, :], np.atleast_2d(anchor), np.array([beta]), rho_probe, structure, rng)
    return Solution(x=x[0])


def anchor_count(N: int, params: ProbeParams, front_dim: int) -> int:
    demand = 2 * math.ceil(N * params.delta_max)
    corners = 2**front_dim if front_dim <= 4 else 0
    lattice = LATTICE_LEVELS**front_dim if front_dim <= 2 else LATTICE_LEVELS
    return min(max(demand, corners + lattice), MAX_ANCHORS)


def probe_offspring(
    C: Population,
    trust: float,
    p: float,
    controls: SearchControls,
    structure: VariableStructure,
    params: ProbeParams,
    N: int,
    rng: np.random.Generator,
    rho_max: float | None = None,
) -> Population:
    """The compensation offspring set; empty before ``p_start`` or when no probe is due.

    ``rho_max`` is the upper end of the sparse-search repair range, used by
    the default ``rho_probe_mode``; without it probes follow ``controls.rho``.
    """
    empty = Population(np.empty((0, structure.bounds.dim)), np.empty((0, 0)), np.empty(0))
    if p < params.p_start or len(C) == 0:
        return empty
    nd_mask = nondominated_mask(C.F, C.CV)
    nd_ratio = nd_mask.sum() / len(C)
    _, n_probe = compensation_intensity(trust, p, nd_ratio, N, params)
    if n_probe <= 0:
        return empty
    anchors = build_anchor_set(structure, C, anchor_count(N, params, len(structure.front)))
    elite_idx = select_elite(C, N)
    if len(elite_idx) == 0:
        logger.warning("no nondominated members; drawing probe bases from the whole archive")
        elite_idx = np.arange(len(C))
    bases = C.X[elite_idx[rng.integers(len(elite_idx), size=n_probe)]]
    chosen = anchors[np.arange(n_probe) % len(anchors)]
    betas = rng.uniform(params.beta_low, params.beta_high, size=n_probe)
    rho = params.resolve_rho(controls.rho, rho_max)
    X = generate_probes(bases, chosen, betas, rho, structure, rng)
    return Population(X, np.empty((n_probe, 0)), np.zeros(n_probe))
