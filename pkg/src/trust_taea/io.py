"""CSV and manifest persistence with byte-stable number formatting."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from trust_taea.config import RunConfig, apply_overrides
from trust_taea.engine import METRIC_COLUMNS, RunResult


def fmt(value) -> str:
    """Shortest decimal string that parses back to the same value."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(value)


def parse_cell(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_rows(path) -> tuple[list[str], list[list]]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [[parse_cell(c) for c in row] for row in r]


def read_table(path) -> dict[str, list]:
    header, rows = read_rows(path)
    return {h: [row[i] for row in rows] for i, h in enumerate(header)}


def write_metrics(path, rows: list[dict]) -> None:
    write_rows(path, METRIC_COLUMNS, ([r[c] for c in METRIC_COLUMNS] for r in rows))


def write_front(path, F: np.ndarray, X: np.ndarray | None = None, CV: np.ndarray | None = None) -> None:
    M = F.shape[1]
    header = [f"f{i + 1}" for i in range(M)]
    cols = [F]
    if CV is not None:
        header.append("violation")
        cols.append(CV[:, None])
    if X is not None:
        header += [f"x{j + 1}" for j in range(X.shape[1])]
        cols.append(X)
    write_rows(path, header, np.hstack(cols).tolist())


def write_manifest(path, cfg: RunConfig, result: RunResult | None = None, extra: dict | None = None) -> None:
    data = {
        "config": cfg.flat(),
        "seed": cfg.seed,
        "algorithm": cfg.algorithm,
        "config_hash": cfg.digest(),
    }
    if result is not None:
        data["evaluations"] = result.evaluations
        data["generations_run"] = result.rows[-1]["generation"] if result.rows else 0
        data["seconds"] = round(result.seconds, 3)
    if extra:
        data.update(extra)
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def config_from_manifest(path) -> RunConfig:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    values = {k: v for k, v in data["config"].items()}
    return apply_overrides(RunConfig(), {k: ("none" if v is None else str(v)) for k, v in values.items()})
