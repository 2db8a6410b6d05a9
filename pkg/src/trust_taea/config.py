"""Run configuration and the flat ``section.key=value`` config file format."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from trust_taea.anchor_probe import ProbeParams
from trust_taea.checkpoint import CheckpointParams
from trust_taea.core import ConfigurationError
from trust_taea.sparse_search import ReproductionParams
from trust_taea.trust import TrustParams

ALGORITHMS = ("trust_taea", "vanilla_taea")

SECTIONS = {
    "trust": "trust",
    "sparse_search": "repro",
    "sgs": "repro",
    "anchor_probe": "probe",
    "probe": "probe",
    "checkpoint": "ckpt",
}


@dataclass
class RunConfig:
    problem: str = "LSMOP1"
    M: int = 2
    D: int = 500
    N: int = 100
    T: int = 500
    seed: int = 0
    algorithm: str = "trust_taea"
    metric_every: int = 10
    conv_groups: int = 5
    max_evals: int | None = None
    reference_size: int = 10_000
    scenario: str | None = None
    trust: TrustParams = field(default_factory=TrustParams)
    repro: ReproductionParams = field(default_factory=ReproductionParams)
    probe: ProbeParams = field(default_factory=ProbeParams)
    ckpt: CheckpointParams = field(default_factory=CheckpointParams)

    def __post_init__(self) -> None:
        if self.N < 4:
            raise ConfigurationError("population size N must be at least 4")
        if self.T < 2:
            raise ConfigurationError("generation count T must be at least 2")
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"algorithm must be one of {ALGORITHMS}")
        if self.metric_every < 1:
            raise ConfigurationError("metric_every must be positive")

    def flat(self) -> dict[str, object]:
        """Resolved ``key -> value`` map using the config-file key names."""
        out: dict[str, object] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("trust", "repro", "probe", "ckpt"):
                prefix = {"trust": "trust", "repro": "sparse_search", "probe": "anchor_probe", "ckpt": "checkpoint"}[f.name]
                for k, v in asdict(value).items():
                    out[f"{prefix}.{k}"] = v
            else:
                out[f"run.{f.name}"] = value
        return out

    def digest(self) -> str:
        text = "\n".join(f"{k}={v!r}" for k, v in sorted(self.flat().items()))
        return hashlib.sha1(text.encode("utf-8")).hexdigest()


def _coerce(raw: str, current):
    raw = raw.strip()
    if raw.lower() in ("none", "null", ""):
        return None
    if isinstance(current, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(current, int):
        return int(float(raw)) if float(raw).is_integer() else float(raw)
    if isinstance(current, float) or current is None:
        try:
            return int(raw) if raw.lstrip("-").isdigit() and current is None else float(raw)
        except ValueError:
            return raw
    return raw


def apply_overrides(cfg: RunConfig, values: dict[str, str]) -> RunConfig:
    """Return a copy of ``cfg`` with dotted overrides applied and re-validated."""
    top: dict[str, object] = {}
    blocks: dict[str, dict[str, object]] = {}
    for key, raw in values.items():
        section, _, name = key.partition(".")
        if not name:
            section, name = "run", section
        if section == "run":
            if name not in {f.name for f in fields(RunConfig)} - {"trust", "repro", "probe", "ckpt"}:
                raise ConfigurationError(f"unknown config key {key!r}")
            top[name] = _coerce(raw, getattr(cfg, name)) if isinstance(raw, str) else raw
            continue
        attr = SECTIONS.get(section)
        if attr is None:
            raise ConfigurationError(f"unknown config section {section!r}")
        block = getattr(cfg, attr)
        if name not in {f.name for f in fields(block)}:
            raise ConfigurationError(f"unknown config key {key!r}")
        blocks.setdefault(attr, {})[name] = _coerce(raw, getattr(block, name)) if isinstance(raw, str) else raw
    for attr, changes in blocks.items():
        top[attr] = replace(getattr(cfg, attr), **changes)
    return replace(cfg, **top)


def parse_config_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    return apply_overrides(base or RunConfig(), parse_config_text(Path(path).read_text(encoding="utf-8")))


def dump_config(cfg: RunConfig) -> str:
    return "".join(f"{k}={v}\n" for k, v in cfg.flat().items())
