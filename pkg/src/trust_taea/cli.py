"""Command-line entry point: ``run``, ``sweep``, ``microgrid`` and ``stats``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from trust_taea import io, metrics
from trust_taea.config import RunConfig, apply_overrides, load_config
from trust_taea.core import ConfigurationError, DataError, UsageError, nondominated_mask, normalize_objectives
from trust_taea.engine import run as run_engine
from trust_taea.problems import generate_scenario, make_microgrid, make_problem, read_scenario, write_scenario
from trust_taea.problems.microgrid import CONSTRAINTS, decode

logger = logging.getLogger("trust_taea")

SWEEP_DEFAULTS = {
    "lambda_exp": (0.75, 1.0, 1.25),
    "p_start": (0.05, 0.12, 0.30),
}
SWEEP_KEYS = {"lambda_exp": "trust.lambda_exp", "p_start": "anchor_probe.p_start"}
METRIC_ORIENTATION = {"igd_plus": True, "hv": False}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def load_scenario(spec: str | None):
    spec = spec or "synthetic:0"
    if spec.startswith("synthetic"):
        _, _, seed = spec.partition(":")
        return generate_scenario(seed=int(seed or 0))
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"scenario file not found: {spec}")
    return read_scenario(path)


def build_problem(cfg: RunConfig):
    if cfg.problem.lower() == "microgrid":
        return make_microgrid(load_scenario(cfg.scenario))
    return make_problem(cfg.problem, cfg.M, cfg.D, cfg.conv_groups)


def resolve_config(args) -> RunConfig:
    """Defaults, then the config file, then explicitly given flags."""
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    flags = {
        "problem": getattr(args, "problem", None),
        "M": getattr(args, "m", None),
        "D": getattr(args, "d", None),
        "N": args.pop,
        "T": args.gens,
        "seed": args.seed,
        "algorithm": args.algo.replace("-", "_") if args.algo else None,
        "metric_every": args.metric_every,
    }
    overrides = {k: v for k, v in flags.items() if v is not None}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        overrides[key.strip()] = value.strip()
    return apply_overrides(cfg, overrides)


def execute(cfg: RunConfig, out: Path, x_dump: bool = False, extra: dict | None = None):
    out.mkdir(parents=True, exist_ok=True)
    problem = build_problem(cfg)
    result = run_engine(cfg, problem)
    io.write_metrics(out / "metrics.csv", result.rows)
    C = result.C
    io.write_front(out / "front.csv", C.F, C.X if x_dump else None, C.CV if problem.constrained else None)
    io.write_manifest(out / "manifest.json", cfg, result, extra)
    return result, problem


def _sweep_job(job):
    cfg, out = job
    result, _ = execute(cfg, out)
    last = result.rows[-1]
    return last["igd_plus"], last["hv"]


def worker_count() -> int:
    raw = os.environ.get("TRUST_TAEA_THREADS", "0").strip() or "0"
    n = int(raw)
    return n if n > 0 else (os.cpu_count() or 1)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pop", type=int, help="population size (default 100)")
    p.add_argument("--gens", type=int, help="generations (default 500)")
    p.add_argument("--seed", type=int)
    p.add_argument("--algo", choices=("trust-taea", "vanilla-taea"))
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    p.add_argument("--metric-every", type=int)
    p.add_argument("--out", default="out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trust-taea", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="one optimization run")
    p.add_argument("--problem")
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--x-dump", action="store_true", help="include decision variables in the front CSV")
    _add_solver_flags(p)

    p = sub.add_parser("sweep", help="parameter sensitivity sweep")
    p.add_argument("--param", required=True, choices=tuple(SWEEP_DEFAULTS))
    p.add_argument("--values", help="comma list (default: the standard three values)")
    p.add_argument("--problems", default="LSMOP1", help="comma list of problem ids")
    p.add_argument("--seeds", type=int, default=5, help="number of seeds, starting at --seed")
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int)
    _add_solver_flags(p)

    p = sub.add_parser("microgrid", help="day-ahead microgrid dispatch")
    p.add_argument("--scenario", default="synthetic:0", help="scenario CSV or synthetic:SEED")
    p.add_argument("--max-evals", type=int, default=100_000)
    p.add_argument("--write-scenario", help="also save the scenario to this path")
    _add_solver_flags(p)

    p = sub.add_parser("stats", help="rank-sum comparison of two run sets")
    p.add_argument("dir_a")
    p.add_argument("dir_b")
    p.add_argument("--metric", default="igd_plus", choices=tuple(METRIC_ORIENTATION))
    p.add_argument("--alpha", type=float, default=0.05)
    return parser


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    out = Path(args.out)
    result, _ = execute(cfg, out, args.x_dump)
    last = result.rows[-1]
    print(f"{cfg.problem} {cfg.algorithm} seed={cfg.seed}: igd_plus={io.fmt(last['igd_plus'])} "
          f"hv={io.fmt(last['hv'])} evaluations={result.evaluations} ({result.seconds:.1f}s) -> {out}")
    return 0


def cmd_sweep(args) -> int:
    base = resolve_config(args)
    key = SWEEP_KEYS[args.param]
    if args.values:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    else:
        values = list(SWEEP_DEFAULTS[args.param])
    problems = [p.strip().upper() for p in args.problems.split(",") if p.strip()]
    if args.seeds < 1:
        raise UsageError("--seeds must be positive")
    seeds = [base.seed + i for i in range(args.seeds)]
    out = Path(args.out)
    jobs, cells = [], []
    for value in values:
        for prob in problems:
            cells.append((value, prob))
            for seed in seeds:
                cfg = apply_overrides(base, {key: value, "problem": prob, "seed": seed})
                jobs.append((cfg, out / f"{args.param}={io.fmt(value)}" / prob / f"seed{seed}"))
    for cfg, _ in jobs:  # fail on bad problem ids before spending time
        build_problem(cfg)
    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]
    rows = []
    per = len(seeds)
    for c, (value, prob) in enumerate(cells):
        chunk = np.array(results[c * per : (c + 1) * per], dtype=np.float64)
        ddof = 1 if per > 1 else 0
        igd, hv = chunk[:, 0], chunk[:, 1]
        rows.append([args.param, value, prob, per, igd.mean(), igd.std(ddof=ddof), float(np.median(igd)),
                     hv.mean(), hv.std(ddof=ddof), float(np.median(hv))])
    header = ["param", "value", "problem", "runs", "igd_plus_mean", "igd_plus_std", "igd_plus_median",
              "hv_mean", "hv_std", "hv_median"]
    io.write_rows(out / "aggregate.csv", header, rows)
    for r in rows:
        print(f"{r[0]}={io.fmt(r[1])} {r[2]}: IGD+ {r[4]:.4e} ± {r[5]:.2e}  HV {r[7]:.4f} ± {r[8]:.2e}")
    print(f"{len(jobs)} runs, {len(rows)} cells -> {out / 'aggregate.csv'}")
    return 0


def knee_index(F: np.ndarray) -> int:
    """Row of ``F`` with the smallest norm after min-max normalization."""
    ideal, nadir = F.min(axis=0), F.max(axis=0)
    return int(np.argmin(np.linalg.norm(normalize_objectives(F, ideal, nadir), axis=1)))


def cmd_microgrid(args) -> int:
    cfg = resolve_config(args)
    scenario = load_scenario(args.scenario)
    if args.write_scenario:
        write_scenario(scenario, args.write_scenario)
    gens = args.gens if args.gens is not None else max(2, (args.max_evals - cfg.N) // cfg.N)
    cfg = apply_overrides(cfg, {
        "problem": "microgrid", "M": 3, "D": 5 * scenario.T, "scenario": args.scenario, "T": gens,
        "max_evals": args.max_evals,
    })
    out = Path(args.out)
    result, problem = execute(cfg, out, x_dump=True, extra={"scenario_totals": scenario.totals()})
    C = result.C
    feasible = np.flatnonzero(C.CV <= 0)
    status = 0
    if len(feasible):
        front = feasible[nondominated_mask(C.F[feasible])]
        pick = int(front[knee_index(C.F[front])])
    else:
        logger.warning("no feasible solution found; reporting the least-violating one")
        pick = int(np.argmin(C.CV))
        status = 1
    d = decode(C.X[pick], scenario)
    T = scenario.T
    sched = np.column_stack([np.arange(1, T + 1), d.grid[0], d.gen[0], d.ch[0], d.dis[0], d.dr[0], d.cur[0], d.soc[0]])
    io.write_rows(out / "schedule.csv", ["t", "grid_kw", "gen_kw", "ch_kw", "dis_kw", "dr_kw", "cur_kw", "soc_kwh"],
                  [[int(r[0])] + list(r[1:]) for r in sched])
    report = [[c, float(d.violations[c][0])] for c in CONSTRAINTS]
    report.append(["total", float(d.violation[0])])
    io.write_rows(out / "feasibility.csv", ["constraint", "violation"], report)
    f = d.objectives[0]
    print(f"feasible solutions in archive: {len(feasible)}/{len(C)}  evaluations: {result.evaluations}")
    print(f"knee: cost={f[0]:.2f} emission={f[1]:.2f} ramp={f[2]:.3f}  E_T={d.soc[0, -1]:.2f} kWh")
    for name, v in report:
        print(f"  {name:<17} {io.fmt(v)}")
    return status


def collect_runs(directory, metric: str) -> dict[str, list[float]]:
    """Final ``metric`` value of every run below ``directory``, keyed by problem label."""
    root = Path(directory)
    if not root.is_dir():
        raise UsageError(f"not a directory: {directory}")
    out: dict[str, list[tuple[int, float]]] = {}
    for manifest in sorted(root.rglob("manifest.json")):
        cfg = io.config_from_manifest(manifest)
        table = io.read_table(manifest.parent / "metrics.csv")
        label = f"{cfg.problem}-M{cfg.M}-D{cfg.D}"
        out.setdefault(label, []).append((cfg.seed, float(table[metric][-1])))
    return {k: [v for _, v in sorted(vals)] for k, vals in sorted(out.items())}


def cmd_stats(args) -> int:
    a = collect_runs(args.dir_a, args.metric)
    b = collect_runs(args.dir_b, args.metric)
    if not a or set(a) != set(b):
        raise UsageError(f"problem sets differ: {sorted(a)} vs {sorted(b)}")
    lower = METRIC_ORIENTATION[args.metric]
    counts = {"plus": 0, "minus": 0, "approx": 0}
    print(f"{'problem':<22}{'median A':>14}{'median B':>14}{'p':>10}  verdict")
    for label in sorted(a):
        verdict, p = metrics.wilcoxon_rank_sum(a[label], b[label], args.alpha, lower_is_better=lower)
        counts[verdict] += 1
        print(f"{label:<22}{np.median(a[label]):>14.4e}{np.median(b[label]):>14.4e}{p:>10.4f}  "
              f"{metrics.VERDICT_SYMBOL[verdict]}")
    print(f"+/-/≈: {counts['plus']}/{counts['minus']}/{counts['approx']}")
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "microgrid": cmd_microgrid, "stats": cmd_stats}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
