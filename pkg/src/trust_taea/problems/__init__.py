"""Benchmark and application problems."""

from __future__ import annotations

import re

from trust_taea.core import ConfigurationError
from trust_taea.problems.base import ProblemDef
from trust_taea.problems.lsmop import LSMOP, evaluate_lsmop, make_lsmop, true_front_sample
from trust_taea.problems.microgrid import (
    MicrogridScenario,
    ProfileParams,
    generate_scenario,
    make_microgrid,
    microgrid_evaluate,
    read_scenario,
    write_scenario,
)


def make_problem(name: str, M: int, D: int, conv_groups: int = 5) -> ProblemDef:
    m = re.fullmatch(r"LSMOP([1-9])", name.strip().upper())
    if m is None:
        raise ConfigurationError(f"unknown problem {name!r}")
    return make_lsmop(int(m.group(1)), M, D, conv_groups)


__all__ = [
    "LSMOP",
    "MicrogridScenario",
    "ProblemDef",
    "ProfileParams",
    "evaluate_lsmop",
    "generate_scenario",
    "make_lsmop",
    "make_microgrid",
    "make_problem",
    "microgrid_evaluate",
    "read_scenario",
    "true_front_sample",
    "write_scenario",
]
