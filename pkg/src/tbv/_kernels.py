"""Integer kernels behind the hot loops.

Each kernel exists twice: a numba ``@njit`` version and a numpy (or plain
Python, for inherently sequential walks) fallback.  The numba path is used
when numba imports and ``TBV_DISABLE_NUMBA`` is unset or ``0``.

All kernels take symbol sequences already encoded as integer arrays, with
``-1`` marking a hole.
"""

from __future__ import annotations

import os

import numpy as np

HOLE = -1
_PAD = -2


def _numba_requested() -> bool:
    return os.environ.get("TBV_DISABLE_NUMBA", "").strip().lower() in ("", "0", "false", "no")


try:
    if not _numba_requested():
        raise ImportError("disabled by TBV_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised through the env flag
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def divisors(n: int) -> np.ndarray:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return np.array(small + large[::-1], dtype=np.int64)


# ---------------------------------------------------------------------------
# per-residue certified periods of a periodic partial word


def position_periods_numpy(codes: np.ndarray) -> np.ndarray:
    """Smallest divisor ``g`` of ``len(codes)`` making each residue's class constant.

    ``codes`` is one period of a periodic partial word.  Entry ``n`` of the
    result is the least ``g`` such that every cell ``j = n (mod g)`` holds the
    symbol at ``n``; it is 0 when cell ``n`` is a hole.
    """
    P = codes.shape[0]
    out = np.zeros(P, dtype=np.int64)
    idx = np.arange(P)
    for g in divisors(P):
        M = codes.reshape(P // g, g)
        mono = (M == M[0]).all(axis=0) & (M[0] >= 0)
        hit = (out == 0) & mono[idx % g]
        out[hit] = g
    return out


def window_cover_numpy(codes: np.ndarray, max_period: int) -> np.ndarray:
    """Positions lying on a monochromatic progression with at least two terms.

    The progression through ``j`` with difference ``d <= max_period`` is
    every position of the window congruent to ``j`` modulo ``d``.
    """
    N = codes.shape[0]
    covered = np.zeros(N, dtype=np.bool_)
    idx = np.arange(N)
    for d in range(1, min(max_period, N - 1) + 1):
        m = -(-N // d)
        padded = np.full(m * d, _PAD, dtype=codes.dtype)
        padded[:N] = codes
        M = padded.reshape(m, d)
        valid = M != _PAD
        mono = ((M == M[0]) | ~valid).all(axis=0) & (valid.sum(axis=0) >= 2)
        covered |= mono[idx % d]
    return covered


def vershik_orbit_python(src, wlen, pre, verts, edges, level, n_steps,
                         out_v, out_h, out_v1, out_e1):
    """Walk the Vershik successor from a finite path, recording truncations.

    ``src[i, v, j]`` is the source vertex of the ``j``-th edge into vertex
    ``v`` of level ``i``; ``pre[i, v, j]`` is the number of root paths
    entering ``v`` through edges before ``j``.  ``verts``/``edges`` hold the
    current path (index 0 is the root, ``edges[0]`` unused) and are updated
    in place.  Returns how many entries were written; fewer than
    ``n_steps`` means the walk reached the maximal path.
    """
    depth = verts.shape[0] - 1
    for n in range(n_steps):
        h = 0
        for i in range(1, level + 1):
            h += pre[i, verts[i], edges[i]]
        out_v[n] = verts[level]
        out_h[n] = h
        out_v1[n] = verts[1]
        out_e1[n] = edges[1]
        if n == n_steps - 1:
            return n_steps
        i = 1
        while i <= depth and edges[i] == wlen[i, verts[i]] - 1:
            i += 1
        if i > depth:
            return n + 1
        edges[i] += 1
        verts[i - 1] = src[i, verts[i], edges[i]]
        for j in range(i - 1, 0, -1):
            edges[j] = 0
            verts[j - 1] = src[j, verts[j], 0]
    return n_steps


if HAVE_NUMBA:

    @njit(cache=True)
    def position_periods_numba(codes):
        P = codes.shape[0]
        out = np.zeros(P, dtype=np.int64)
        todo = 0
        for n in range(P):
            if codes[n] >= 0:
                todo += 1
        mono = np.empty(P, dtype=np.bool_)
        for g in range(1, P + 1):
            if todo == 0:
                break
            if P % g:
                continue
            # one pass per divisor: is each residue class constant?
            for r in range(g):
                c = codes[r]
                ok = c >= 0
                j = r + g
                while ok and j < P:
                    ok = codes[j] == c
                    j += g
                mono[r] = ok
            for n in range(P):
                if out[n] == 0 and codes[n] >= 0 and mono[n % g]:
                    out[n] = g
                    todo -= 1
        return out

    @njit(cache=True)
    def window_cover_numba(codes, max_period):
        N = codes.shape[0]
        covered = np.zeros(N, dtype=np.bool_)
        dmax = min(max_period, N - 1)
        for d in range(1, dmax + 1):
            for r in range(d):
                if r + d >= N:
                    break
                c = codes[r]
                ok = True
                j = r + d
                while j < N:
                    if codes[j] != c:
                        ok = False
                        break
                    j += d
                if ok:
                    j = r
                    while j < N:
                        covered[j] = True
                        j += d
        return covered

    vershik_orbit_numba = njit(cache=True)(vershik_orbit_python)

    position_periods = position_periods_numba
    window_cover = window_cover_numba
    vershik_orbit = vershik_orbit_numba
else:
    position_periods = position_periods_numpy
    window_cover = window_cover_numpy
    vershik_orbit = vershik_orbit_python
