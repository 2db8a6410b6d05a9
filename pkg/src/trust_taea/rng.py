"""Counter-derived random streams.

Every consumer asks for ``stream(seed, generation, role, index)``; the stream
depends only on that key, never on call order, so work can be reordered or
fanned out without changing results.
"""

from __future__ import annotations

import zlib

import numpy as np

ROLES = ("init", "groups", "sgs", "probe", "rebuild", "anchors", "scenario")


def _role_id(role: str) -> int:
    return zlib.crc32(role.encode("ascii"))


def stream(seed: int, generation: int = 0, role: str = "init", index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(int(generation), _role_id(role), int(index)))
    return np.random.Generator(np.random.PCG64(ss))
