"""Time the numba kernels against their numpy/Python fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N] [--scale K]

Inputs are period-doubling data, so both backends see identical arrays.
Outputs are compared before timing.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from tbv import _kernels
from tbv.bratteli import bv_from_tower
from tbv.substitution import Substitution, fixed_point_prefix, tower_from_substitution
from tbv.vershik import min_prefix


def inputs(scale: int):
    pd = Substitution.parse("a=ab,b=aa")
    t = tower_from_substitution(pd, 10 + scale)
    periods = t.top_codes.astype(np.int64)
    word = fixed_point_prefix(pd, "a", 1024 << scale)
    window = np.array([0 if c == "a" else 1 for c in word], dtype=np.int64)
    depth = 12 + scale
    D = bv_from_tower(tower_from_substitution(pd, depth + 3), 2 ** (depth + 2), depth).diagram
    return periods, window, D


def orbit_args(D, steps):
    src, wlen, pre = D.encoded
    K = D.depth
    p = min_prefix(D, K)
    idx = [D.index(i) for i in range(K + 1)]
    verts = np.array([idx[i][v] for i, v in enumerate(p.vertices)], dtype=np.int64)
    edges = np.zeros(K + 1, dtype=np.int64)
    outs = [np.zeros(steps, dtype=np.int64) for _ in range(4)]
    return src, wlen, pre, verts, edges, 1, steps, *outs


def run_orbit(fn, D, steps):
    args = orbit_args(D, steps)
    fn(*args)
    return args[-4]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=int, default=0, help="doubles every input size per step")
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable or disabled; nothing to compare")
        return 1

    periods, window, D = inputs(args.scale)
    steps = D.heights[D.depth][min_prefix(D, D.depth).top]
    cases = [
        ("position_periods", _kernels.position_periods_numba, _kernels.position_periods_numpy,
         lambda f: f(periods)),
        ("window_cover", _kernels.window_cover_numba, _kernels.window_cover_numpy,
         lambda f: f(window, 64)),
        ("vershik_orbit", _kernels.vershik_orbit_numba, _kernels.vershik_orbit_python,
         lambda f: run_orbit(f, D, steps)),
    ]
    print(f"{'kernel':<18}{'size':>9}{'numba ms':>11}{'fallback ms':>13}{'speedup':>9}")
    for name, fast, slow, call in cases:
        a, b = call(fast), call(slow)  # also triggers compilation
        if not np.array_equal(a, b):
            raise SystemExit(f"{name}: backends disagree")
        t_fast = min(timeit.repeat(lambda: call(fast), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: call(slow), number=1, repeat=args.repeat))
        size = {"position_periods": periods.size, "window_cover": window.size}.get(name, steps)
        print(f"{name:<18}{size:>9}{t_fast * 1e3:>11.3f}{t_slow * 1e3:>13.3f}{t_slow / t_fast:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
