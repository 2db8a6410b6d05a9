import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trust_taea.checkpoint import (
    ArchiveScore,
    CheckpointParams,
    archive_score,
    compose_score,
    degraded,
    refresh_due,
    seed_checkpoint,
    stabilize,
    structural_residual,
)
from trust_taea.core import Bounds, ConfigurationError, Population, UsageError
from trust_taea.structure import VariableStructure

ZERO_W = CheckpointParams(lambda_d=0.0, lambda_c=0.0, lambda_n=0.0)


def structure(D=4):
    bounds = Bounds(np.zeros(D), np.ones(D))
    return VariableStructure([np.array([0]), np.arange(1, D)], bounds, lambda X: np.zeros_like(X))


def archive(residual, n=5, seed=0):
    """Archive whose members all have the given structural residual."""
    rng = np.random.default_rng(seed)
    X = np.full((n, 4), residual)
    X[:, 0] = rng.random(n)
    s = np.sort(rng.random(n))
    F = np.column_stack([s, 1 - s])
    return Population(X, F, np.zeros(n))


def test_residual_examples():
    s = structure(3)
    assert structural_residual(np.array([0.5, 0.0, 0.0]), s) == 0.0
    assert structural_residual(np.array([0.5, 0.2, 0.4]), s) == pytest.approx(0.3, abs=1e-12)
    assert structural_residual(np.array([0.5, 0.4, 0.2]), s) == structural_residual(np.array([0.5, 0.2, 0.4]), s)


def test_score_examples():
    sc = compose_score(0.1, 0.5, 0.8, 1.0, CheckpointParams(lambda_d=0.2, lambda_c=0.1, lambda_n=0.1))
    assert sc.gamma == pytest.approx(0.02, abs=1e-12)
    one = Population(np.zeros((1, 4)), np.zeros((1, 2)), np.zeros(1))
    s0 = archive_score(one, structure(), CheckpointParams(lambda_c=0.0, lambda_n=0.0), np.zeros(2), np.ones(2), 10)
    assert s0.gamma == 0.0
    a = archive(0.3)
    s1 = archive_score(a, structure(), ZERO_W, np.zeros(2), np.ones(2), 10)
    assert s1.gamma == pytest.approx(s1.mean_residual, abs=1e-12) == pytest.approx(0.3, abs=1e-12)
    with pytest.raises(UsageError):
        archive_score(a.take([]), structure(), ZERO_W, np.zeros(2), np.ones(2), 10)


def test_params_validation():
    with pytest.raises(ConfigurationError):
        CheckpointParams(eta_gamma=1.0)
    with pytest.raises(ConfigurationError):
        CheckpointParams(gamma_r=1.0)


def test_refresh_on_halved_score():
    s = structure()
    ck = seed_checkpoint(archive(0.4), s, ZERO_W, np.zeros(2), np.ones(2), 10)
    better = archive(0.2, seed=1)
    out, new, event = stabilize(better, ck, 0.9, s, ZERO_W, np.zeros(2), np.ones(2), 10)
    assert event == "refresh"
    assert out is better
    assert np.array_equal(new.archive.X, better.X)


def test_no_rollback_before_tau_b():
    s = structure()
    ck = seed_checkpoint(archive(0.1), s, ZERO_W, np.zeros(2), np.ones(2), 10)
    worse = archive(0.9, seed=2)
    out, _, event = stabilize(worse, ck, 0.6, s, ZERO_W, np.zeros(2), np.ones(2), 10)
    assert event == "none" and out is worse


def test_rollback_example_decision():
    params = CheckpointParams(eta_gamma=0.95, eta_r=0.95, tau_b=0.6, gamma_r=1.2, gamma_gamma=1.1)
    cur = ArchiveScore(0.30, 0.0, 0.0, 0.0, 0.40)
    ref = ArchiveScore(0.20, 0.0, 0.0, 0.0, 0.30)
    assert not refresh_due(cur, ref, params)
    assert degraded(cur, ref, 0.8, params)


def test_rollback_returns_snapshot():
    s = structure()
    saved = archive(0.2, seed=3)
    ck = seed_checkpoint(saved, s, ZERO_W, np.zeros(2), np.ones(2), 10)
    worse = archive(0.3, seed=4)
    out, kept, event = stabilize(worse, ck, 0.8, s, ZERO_W, np.zeros(2), np.ones(2), 10)
    assert event == "rollback"
    assert out.X.tobytes() == saved.X.tobytes()
    assert out.F.tobytes() == saved.F.tobytes()
    assert kept.archive is ck.archive


def test_signed_score_comparison_is_literal():
    params = CheckpointParams()
    ref = ArchiveScore(0.5, 0.0, 0.0, 0.0, -0.10)
    # with a negative checkpoint score eta*gamma_ckpt = -0.095 sits above it,
    # so a slightly worse score still passes the refresh bar
    slightly_worse = ArchiveScore(0.5, 0.0, 0.0, 0.0, -0.099)
    assert refresh_due(slightly_worse, ref, params)
    # and a clearly better one must beat the scaled threshold literally
    assert refresh_due(ArchiveScore(0.5, 0.0, 0.0, 0.0, -0.2), ref, params)
    assert not refresh_due(ArchiveScore(0.5, 0.0, 0.0, 0.0, -0.09), ref, params)


scores = st.tuples(st.floats(0, 2), st.floats(-1, 2))


@settings(max_examples=1000)
@given(scores, scores, st.floats(0, 1))
def test_refresh_excludes_degradation_for_positive_scores(cur, ref, p):
    params = CheckpointParams()
    a = ArchiveScore(cur[0], 0, 0, 0, cur[1])
    b = ArchiveScore(ref[0], 0, 0, 0, abs(ref[1]))
    if refresh_due(a, b, params):
        assert not degraded(a, b, p, params)


@settings(max_examples=1000)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.integers(0, 2**16))
def test_stabilize_properties(r_ck, r_new, p, seed):
    s = structure()
    params = CheckpointParams()
    ideal, nadir = np.zeros(2), np.ones(2)
    saved = archive(r_ck, seed=seed)
    ck = seed_checkpoint(saved, s, params, ideal, nadir, 10)
    inter = archive(r_new, seed=seed + 1)
    out, kept, event = stabilize(inter, ck, p, s, params, ideal, nadir, 10)
    assert event in ("none", "refresh", "rollback")
    if event == "rollback":
        assert out.X.tobytes() == saved.X.tobytes() and out.F.tobytes() == saved.F.tobytes()
    else:
        assert out is inter
    if event == "none":
        assert np.array_equal(kept.archive.X, saved.X)
    recomputed = archive_score(kept.archive, s, params, ideal, nadir, 10)
    assert abs(recomputed.gamma - kept.score.gamma) <= 1e-9
    assert abs(recomputed.mean_residual - kept.score.mean_residual) <= 1e-9
