"""Checkpoint-based stabilization of the convergence archive."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from trust_taea.core import ConfigurationError, Population, UsageError, nondominated_mask, normalize_objectives
from trust_taea.structure import VariableStructure
from trust_taea.trust import coverage

logger = logging.getLogger(__name__)


@dataclass
class CheckpointParams:
    lambda_d: float = 0.2
    lambda_c: float = 0.1
    lambda_n: float = 0.1
    eta_gamma: float = 0.95
    eta_r: float = 0.95
    tau_b: float = 0.6
    gamma_r: float = 1.2
    gamma_gamma: float = 1.1

    def __post_init__(self) -> None:
        if min(self.lambda_d, self.lambda_c, self.lambda_n) < 0:
            raise ConfigurationError("score weights must be nonnegative")
        if not (0 < self.eta_gamma < 1 and 0 < self.eta_r < 1):
            raise ConfigurationError("refresh thresholds must lie in (0, 1)")
        if not 0 <= self.tau_b < 1:
            raise ConfigurationError("tau_b must lie in [0, 1)")
        if self.gamma_r <= 1 or self.gamma_gamma <= 1:
            raise ConfigurationError("degradation thresholds must exceed 1")


@dataclass
class ArchiveScore:
    mean_residual: float
    obj_norm: float
    coverage: float
    nd_ratio: float
    gamma: float


@dataclass
class Checkpoint:
    archive: Population
    score: ArchiveScore
    ideal: np.ndarray
    nadir: np.ndarray


def residuals(X: np.ndarray, structure: VariableStructure) -> np.ndarray:
    """Mean absolute normalized distance of the convergence variables to their targets, per row."""
    conv = structure.conv_indices
    X = np.atleast_2d(X)
    if len(conv) == 0:
        logger.info("no convergence-related variables; residual is 0")
        return np.zeros(len(X))
    Z = structure.normalize(X)[:, conv]
    Zt = structure.normalize(structure.targets(X))[:, conv]
    return np.abs(Z - Zt).mean(axis=1)


def structural_residual(x, structure: VariableStructure) -> float:
    x = x.x if hasattr(x, "x") else x
    return float(residuals(np.asarray(x)[None, :], structure)[0])


def compose_score(r: float, d: float, chi: float, r_nd: float, params: CheckpointParams) -> ArchiveScore:
    gamma = r + params.lambda_d * d - params.lambda_c * chi - params.lambda_n * r_nd
    return ArchiveScore(r, d, chi, r_nd, gamma)


def archive_score(
    archive: Population, structure: VariableStructure, params: CheckpointParams, ideal, nadir, bins: int
) -> ArchiveScore:
    if len(archive) == 0:
        raise UsageError("cannot score an empty archive")
    r = float(residuals(archive.X, structure).mean())
    Fn = normalize_objectives(archive.F, ideal, nadir)
    d = float(np.linalg.norm(Fn, axis=1).mean())
    nd = nondominated_mask(archive.F, archive.CV)
    chi, _ = coverage(Fn[nd], bins)
    return compose_score(r, d, chi, float(nd.sum() / len(archive)), params)


def refresh_due(score: ArchiveScore, ref: ArchiveScore, params: CheckpointParams) -> bool:
    return score.gamma < params.eta_gamma * ref.gamma or score.mean_residual < params.eta_r * ref.mean_residual


def degraded(score: ArchiveScore, ref: ArchiveScore, p: float, params: CheckpointParams) -> bool:
    return (
        p > params.tau_b
        and score.mean_residual > params.gamma_r * ref.mean_residual
        and score.gamma > params.gamma_gamma * ref.gamma
    )


def seed_checkpoint(
    archive: Population, structure: VariableStructure, params: CheckpointParams, ideal, nadir, bins: int
) -> Checkpoint:
    score = archive_score(archive, structure, params, ideal, nadir, bins)
    return Checkpoint(archive.copy(), score, np.array(ideal, dtype=float), np.array(nadir, dtype=float))


def stabilize(
    intermediate: Population,
    ckpt: Checkpoint,
    p: float,
    structure: VariableStructure,
    params: CheckpointParams,
    ideal,
    nadir,
    bins: int,
) -> tuple[Population, Checkpoint, str]:
    """Refresh the checkpoint or roll back to it.

    Both tests compare against the checkpoint as it stood on entry, rescored
    under the current ideal/nadir. Returns the archive to keep, the
    checkpoint to carry forward and the event name.
    """
    score = archive_score(intermediate, structure, params, ideal, nadir, bins)
    ref = archive_score(ckpt.archive, structure, params, ideal, nadir, bins)
    entry = Checkpoint(ckpt.archive, ref, np.array(ideal, dtype=float), np.array(nadir, dtype=float))
    if score.gamma <= 0 or ref.gamma <= 0:
        logger.debug("non-positive archive score (current %.4g, checkpoint %.4g)", score.gamma, ref.gamma)
    if refresh_due(score, ref, params):
        new = Checkpoint(intermediate.copy(), score, entry.ideal, entry.nadir)
        # a refresh makes the degradation conjunction false, so no rollback here
        return intermediate, new, "refresh"
    if degraded(score, ref, p, params):
        return entry.archive.copy(), entry, "rollback"
    return intermediate, entry, "none"
