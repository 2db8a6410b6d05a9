"""Compare the compiled kernels with their numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from trust_taea import _kernels_py

try:
    from trust_taea import _kernels as _compiled
except ImportError:
    _compiled = None


def _front(rng, n, m):
    # points near a linear front plus a dominated tail, so sorting has several ranks
    w = rng.dirichlet(np.ones(m), size=n)
    return w * (1.0 + rng.exponential(0.3, size=(n, 1)))


def cases(rng):
    F2 = _front(rng, 300, 2)
    F3 = _front(rng, 300, 3)
    A2 = _front(rng, 100, 2)
    Z2 = rng.dirichlet(np.ones(2), size=10_000)
    ref2, ref3 = np.full(2, 1.1), np.full(3, 1.1)
    nd2 = np.sort(rng.dirichlet(np.ones(2), size=100), axis=0)
    nd3 = rng.dirichlet(np.ones(3), size=100)
    return {
        "nd_ranks (n=300, M=2)": ("nd_ranks", (F2,)),
        "nd_ranks (n=300, M=3)": ("nd_ranks", (F3,)),
        "crowding (n=300, M=3)": ("crowding", (F3,)),
        "hv2d (n=100)": ("hv2d", (nd2, ref2)),
        "hv3d (n=100)": ("hv3d", (nd3, ref3)),
        "igd_plus_dists (100 x 10000)": ("igd_plus_dists", (A2, Z2)),
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<32}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for label, (name, inputs) in cases(rng).items():
        py = getattr(_kernels_py, name)
        n = 3
        t_py = min(timeit.repeat(lambda: py(*inputs), number=n, repeat=args.repeat)) / n * 1e3
        if _compiled is None:
            print(f"{label:<32}{t_py:>12.3f}{'n/a':>13}{'':>9}")
            continue
        cy = getattr(_compiled, name)
        a, b = py(*inputs), cy(*inputs)
        assert np.allclose(a, b), f"{name}: backends disagree"
        t_cy = min(timeit.repeat(lambda: cy(*inputs), number=n, repeat=args.repeat)) / n * 1e3
        print(f"{label:<32}{t_py:>12.3f}{t_cy:>13.3f}{t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
