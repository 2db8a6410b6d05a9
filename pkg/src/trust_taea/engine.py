"""Generation loop: two-archive cycle wired to trust, sparse search, anchor
probing and checkpoint stabilization, plus the vanilla two-archive baseline."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from trust_taea import metrics
from trust_taea.anchor_probe import compensation_intensity, probe_offspring
from trust_taea.checkpoint import Checkpoint, seed_checkpoint, stabilize
from trust_taea.config import RunConfig
from trust_taea.core import (
    DataError,
    Population,
    crowding_distance,
    duplicate_free_indices,
    ideal_nadir,
    nondominated_mask,
    normalize_objectives,
    pareto_ranks,
)
from trust_taea.problems.base import ProblemDef
from trust_taea.rng import stream
from trust_taea.sparse_search import sparse_search_offspring
from trust_taea.trust import (
    SearchControls,
    TrustState,
    assess,
    assign_directions,
    default_bin_count,
    derive_controls,
    reference_directions,
)

logger = logging.getLogger(__name__)

METRIC_COLUMNS = (
    "generation", "evaluations", "hv", "igd_plus", "trust", "phi", "maturity", "delta", "nd_ratio", "checkpoint_event",
)


@dataclass
class RunResult:
    config: RunConfig
    C: Population
    A: Population
    P: Population
    rows: list[dict] = field(default_factory=list)
    events: list[tuple[int, str]] = field(default_factory=list)
    seconds: float = 0.0
    evaluations: int = 0

    def final_front(self) -> Population:
        return self.C.take(np.flatnonzero(nondominated_mask(self.C.F, self.C.CV)))


def update_convergence_archive(U: Population, N: int) -> np.ndarray:
    """Indices of U kept by rank filling with crowding truncation of the split front."""
    n = len(U)
    if n <= N:
        return np.arange(n)
    ranks = pareto_ranks(U.F, U.CV)
    chosen: list[np.ndarray] = []
    room = N
    for r in range(int(ranks.max()) + 1):
        front = np.flatnonzero(ranks == r)
        if len(front) <= room:
            chosen.append(front)
            room -= len(front)
        else:
            cd = crowding_distance(U.F[front])
            chosen.append(np.sort(front[np.argsort(-cd, kind="stable")[:room]]))
            room = 0
        if room == 0:
            break
    return np.sort(np.concatenate(chosen))


def update_preference_archive(
    U: Population, in_c: np.ndarray, C_next: Population, N: int, ideal, nadir, bins: int
) -> np.ndarray:
    """Greedy fill of objective-space bins left empty by ``C_next``.

    Candidates are visited by (member of C_next, violation, normalized norm,
    input order). One candidate per still-empty bin is taken first; the rest of
    the capacity is filled in the same visiting order.
    """
    n = len(U)
    if n == 0:
        return np.arange(0)
    M = U.F.shape[1]
    W = reference_directions(M, bins)
    Fn = normalize_objectives(U.F, ideal, nadir)
    bin_of = assign_directions(Fn, W)
    taken_bins = np.zeros(len(W), dtype=bool)
    c_feas = C_next.CV <= 0
    if c_feas.any():
        taken_bins[assign_directions(normalize_objectives(C_next.F[c_feas], ideal, nadir), W)] = True
    norm = np.linalg.norm(Fn, axis=1)
    order = np.lexsort((np.arange(n), norm, U.CV, in_c.astype(np.int8)))
    picked = np.zeros(n, dtype=bool)
    count = 0
    for i in order:
        if count >= N:
            break
        if in_c[i] or U.CV[i] > 0 or taken_bins[bin_of[i]]:
            continue
        taken_bins[bin_of[i]] = True
        picked[i] = True
        count += 1
    if count < N:
        for i in order:
            if count >= N:
                break
            if not picked[i]:
                picked[i] = True
                count += 1
    return np.flatnonzero(picked)


def rebuild_population(C: Population, A: Population, N: int, rng: np.random.Generator) -> Population:
    """Half (rounded up) from C, the rest from A, falling back to C when A is short."""
    if len(C) == 0 and len(A) == 0:
        raise RuntimeError("both archives are empty")
    if len(C) == 0:
        C, A = A, C
    n_a = min(N // 2, len(A))
    n_c = N - n_a
    from_a = rng.choice(len(A), size=n_a, replace=False) if n_a else np.empty(0, dtype=np.int64)
    if len(C) >= n_c:
        from_c = rng.choice(len(C), size=n_c, replace=False)
    else:
        from_c = np.concatenate([rng.permutation(len(C)), rng.integers(len(C), size=n_c - len(C))])
    parts = [C.take(from_c)]
    if n_a:
        parts.append(A.take(from_a))
    return Population.concat(parts)


def _evaluate(problem: ProblemDef, X: np.ndarray) -> Population:
    F, CV = problem.evaluate(X)
    F = np.asarray(F, dtype=np.float64)
    bad = ~np.all(np.isfinite(F), axis=1)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DataError(f"non-finite objectives {F[i].tolist()} for solution #{i} x[:5]={X[i, :5].tolist()}")
    return Population(X, F, np.asarray(CV, dtype=np.float64))


def _row_keys(X: np.ndarray) -> list[bytes]:
    return [row.tobytes() for row in np.ascontiguousarray(X)]


class Engine:
    """Stateful generation loop; ``run`` drives it to completion."""

    def __init__(self, config: RunConfig, problem: ProblemDef):
        self.cfg = config
        self.problem = problem
        self.trusted = config.algorithm == "trust_taea"
        self.bins = config.trust.B or default_bin_count(config.N, problem.M)
        self.reference = None
        if problem.front_sampler is not None:
            self.reference = problem.front_sampler(config.reference_size)
        self.evaluations = 0
        self.rows: list[dict] = []
        self.events: list[tuple[int, str]] = []
        self._best = None

    def evaluate(self, X: np.ndarray) -> Population:
        pop = _evaluate(self.problem, X)
        self.evaluations += len(pop)
        return pop

    def initialize(self) -> None:
        cfg = self.cfg
        X0 = self.problem.bounds.uniform(cfg.N, stream(cfg.seed, 0, "init"))
        self.P = self.evaluate(X0)
        self.ideal, self.nadir = ideal_nadir(self.P.F, self.P.CV)
        self.C = self.P.take(update_convergence_archive(self.P, cfg.N), cfg.N)
        in_c = np.isin(np.arange(len(self.P)), update_convergence_archive(self.P, cfg.N))
        self.A = self.P.take(update_preference_archive(self.P, in_c, self.C, cfg.N, self.ideal, self.nadir, self.bins), cfg.N)
        self.ckpt: Checkpoint | None = None
        if self.trusted:
            self.ckpt = seed_checkpoint(self.C, self.problem.structure, cfg.ckpt, self.ideal, self.nadir, self.bins)

    def controls(self, t: int) -> tuple[TrustState, SearchControls]:
        cfg = self.cfg
        K = self.problem.structure.n_groups
        if self.trusted:
            state = assess(t, cfg.T, self.C, cfg.trust, cfg.N, self.ideal, self.nadir)
            return state, derive_controls(state.trust, cfg.trust, K)
        # baseline: exploration decays with progress alone, full-space variation, no repair
        p = t / (cfg.T - 1)
        tp = cfg.trust
        p_explore = tp.P_max - (tp.P_max - tp.P_min) * p**tp.lambda_exp
        return TrustState(p, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0), SearchControls(p_explore, K, 0.0)

    def step(self, t: int) -> None:
        cfg = self.cfg
        structure = self.problem.structure
        state, ctrl = self.controls(t)
        nd_ratio = float(nondominated_mask(self.C.F, self.C.CV).sum() / len(self.C))
        Qs = sparse_search_offspring(self.P, self.C, self.A, ctrl, structure, cfg.repro, stream(cfg.seed, t, "sgs"), cfg.N)
        delta = 0.0
        parts = [Qs.X]
        if self.trusted:
            delta, _ = compensation_intensity(state.trust, state.p, nd_ratio, cfg.N, cfg.probe)
            Qp = probe_offspring(
                self.C, state.trust, state.p, ctrl, structure, cfg.probe, cfg.N, stream(cfg.seed, t, "probe"),
                cfg.trust.rho_max,
            )
            if len(Qp):
                parts.append(Qp.X)
        Q = self.evaluate(np.vstack(parts))
        allpop = Population.concat([self.P, Q, self.C, self.A])
        U = allpop.take(duplicate_free_indices(allpop.X))
        self.ideal, self.nadir = ideal_nadir(U.F, U.CV)
        c_idx = update_convergence_archive(U, cfg.N)
        C_bar = U.take(c_idx, cfg.N)
        event = "none"
        if self.trusted:
            C_next, self.ckpt, event = stabilize(
                C_bar, self.ckpt, state.p, structure, cfg.ckpt, self.ideal, self.nadir, self.bins
            )
        else:
            C_next = C_bar
        if event == "rollback":
            keys = set(_row_keys(C_next.X))
            in_c = np.array([k in keys for k in _row_keys(U.X)])
        else:
            in_c = np.zeros(len(U), dtype=bool)
            in_c[c_idx] = True
        self.A = U.take(update_preference_archive(U, in_c, C_next, cfg.N, self.ideal, self.nadir, self.bins), cfg.N)
        self.C = C_next
        self.P = rebuild_population(self.C, self.A, cfg.N, stream(cfg.seed, t, "rebuild"))
        if event != "none":
            self.events.append((t, event))
        self._watch_extremes(t)
        if (t + 1) % cfg.metric_every == 0 or t == cfg.T - 1 or event != "none":
            self.rows.append(self._row(t, state, delta, nd_ratio, event))

    def _watch_extremes(self, t: int) -> None:
        pool = [self.C] + ([self.ckpt.archive] if self.ckpt is not None else [])
        F = np.vstack([p.F[p.CV <= 0] for p in pool if len(p)])
        if len(F) == 0:
            return
        best = F.min(axis=0)
        if self._best is not None and np.any(best > self._best + 1e-12):
            logger.warning("generation %d: best objective values worsened %s -> %s", t, self._best, best)
        self._best = np.minimum(best, self._best) if self._best is not None else best

    def _row(self, t: int, state: TrustState, delta: float, nd_ratio: float, event: str) -> dict:
        hv = igd = float("nan")
        if self.reference is not None:
            front = self.C.F[nondominated_mask(self.C.F, self.C.CV) & (self.C.CV <= 0)]
            if len(front):
                igd = metrics.igd_plus(front, self.reference)
                hv = metrics.normalized_hv(front, self.reference) if front.shape[1] <= 3 else float("nan")
        return {
            "generation": t + 1,
            "evaluations": self.evaluations,
            "hv": hv,
            "igd_plus": igd,
            "trust": state.trust,
            "phi": state.phi,
            "maturity": state.maturity,
            "delta": delta,
            "nd_ratio": nd_ratio,
            "checkpoint_event": event,
        }

    def run(self) -> RunResult:
        start = time.perf_counter()
        self.initialize()
        for t in range(self.cfg.T):
            if self.cfg.max_evals is not None and self.evaluations >= self.cfg.max_evals:
                if not self.rows or self.rows[-1]["generation"] != t:
                    state, _ = self.controls(t - 1) if t > 0 else self.controls(0)
                    self.rows.append(self._row(t - 1, state, 0.0, float("nan"), "none"))
                break
            self.step(t)
        return RunResult(
            self.cfg, self.C, self.A, self.P, self.rows, self.events, time.perf_counter() - start, self.evaluations
        )


def evaluation_budget(cfg: RunConfig) -> int:
    return cfg.N + cfg.T * (cfg.N + math.ceil(cfg.N * cfg.probe.delta_max))


def run(config: RunConfig, problem: ProblemDef) -> RunResult:
    return Engine(config, problem).run()
