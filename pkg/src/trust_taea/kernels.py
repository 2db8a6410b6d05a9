"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``TRUST_TAEA_PURE_PYTHON=1`` to force the numpy fallback.
"""

from __future__ import annotations

import logging
import os

from trust_taea import _kernels_py

logger = logging.getLogger(__name__)

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("TRUST_TAEA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from trust_taea import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on build
        logger.debug("compiled kernels unavailable, using numpy fallback")
    else:
        _impl = _compiled
        BACKEND = "cython"

nd_ranks = _impl.nd_ranks
crowding = _impl.crowding
hv2d = _impl.hv2d
hv3d = _impl.hv3d
igd_plus_dists = _impl.igd_plus_dists

__all__ = ["BACKEND", "nd_ranks", "crowding", "hv2d", "hv3d", "igd_plus_dists"]
