"""Trust-guided two-archive evolutionary algorithm for large-scale
multi-objective optimization."""

from trust_taea.config import RunConfig, apply_overrides, load_config
from trust_taea.core import ConfigurationError, DataError, Population, UsageError
from trust_taea.engine import RunResult, run
from trust_taea.problems import make_problem

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DataError",
    "Population",
    "RunConfig",
    "RunResult",
    "UsageError",
    "apply_overrides",
    "load_config",
    "make_problem",
    "run",
]
