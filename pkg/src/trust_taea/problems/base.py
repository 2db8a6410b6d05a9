from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from trust_taea.core import Bounds
from trust_taea.structure import VariableStructure


@dataclass
class ProblemDef:
    """A minimization problem with batch evaluation.

    ``evaluate`` maps a decision matrix (n, D) to ``(F, CV)`` with F of shape
    (n, M) and CV the nonnegative violation per row.
    """

    name: str
    M: int
    D: int
    bounds: Bounds
    evaluate: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    structure: VariableStructure
    front_sampler: Callable[[int], np.ndarray] | None = None
    constrained: bool = False

    def evaluate_one(self, x) -> tuple[np.ndarray, float]:
        F, CV = self.evaluate(np.atleast_2d(np.asarray(x, dtype=np.float64)))
        return F[0], float(CV[0])
