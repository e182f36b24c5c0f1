"""Vershik successor on finite path prefixes, orbits, letter reading and
truncation codes.

Infinite paths are never built.  A prefix of depth ``k`` is a root path to
some level-``k`` vertex; its *height* is its index among all root paths to
that vertex in the reverse-lexicographic edge order.  An orbit entry is the
pair ``(vertex, height)`` of the truncation to the requested level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .bratteli import OrderedBratteliDiagram
from .toeplitz import SkeletonTower, fill_prefix


class Improper(ValueError):
    """More than one candidate minimal (or maximal) prefix at some depth."""

    def __init__(self, k: int, candidates):
        super().__init__(f"depth {k}: {len(candidates)} candidate extremal prefixes")
        self.k = k
        self.candidates = tuple(candidates)


class Unlabeled(LookupError):
    pass


class _AtMaximum:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "AtMaximum"

    def __bool__(self) -> bool:
        return False


AtMaximum = _AtMaximum()


@dataclass(frozen=True)
class PathPrefix:
    """Root path of depth ``k``: ``vertices[i]`` on level ``i`` and
    ``edges[i-1]`` the edge-order index entering ``vertices[i]``."""

    diagram: OrderedBratteliDiagram = field(compare=False, repr=False)
    vertices: tuple[str, ...]
    edges: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(int(e) for e in self.edges))
        D = self.diagram
        k = len(self.edges)
        if k < 1 or len(self.vertices) != k + 1 or k > D.depth:
            raise ValueError(f"bad prefix shape: {len(self.vertices)} vertices, {k} edges")
        if self.vertices[0] != D.root:
            raise ValueError("a prefix starts at the root")
        for i in range(1, k + 1):
            w = D.word(i, self.vertices[i])
            e = self.edges[i - 1]
            if not 0 <= e < len(w) or w[e] != self.vertices[i - 1]:
                raise ValueError(f"edge {e} into {self.vertices[i]} does not come from {self.vertices[i - 1]}")

    @classmethod
    def from_edges(cls, D: OrderedBratteliDiagram, top: str, edges: Sequence[int]) -> "PathPrefix":
        """Descend from `top` along ``edges = (e_1, ..., e_k)``."""
        k = len(edges)
        verts = [top]
        for i in range(k, 0, -1):
            verts.append(D.word(i, verts[-1])[edges[i - 1]])
        return cls(D, tuple(reversed(verts)), tuple(edges))

    @property
    def depth(self) -> int:
        return len(self.edges)

    @property
    def top(self) -> str:
        return self.vertices[-1]

    @property
    def height(self) -> int:
        D = self.diagram
        h = 0
        for i in range(1, self.depth + 1):
            hb = D.heights[i - 1]
            h += sum(hb[u] for u in D.word(i, self.vertices[i])[:self.edges[i - 1]])
        return h

    def truncate(self, k: int) -> "PathPrefix":
        if not 1 <= k <= self.depth:
            raise IndexError(f"cannot truncate depth {self.depth} to {k}")
        return PathPrefix(self.diagram, self.vertices[:k + 1], self.edges[:k])

    def encoding(self) -> tuple[str, int]:
        return self.top, self.height


def _extremal(D: OrderedBratteliDiagram, k: int, last: bool, top: Optional[str]) -> PathPrefix:
    if not 1 <= k <= D.depth:
        raise IndexError(f"depth {k} outside 1..{D.depth}")
    if top is not None:
        tops = [top]
    elif D.min_path is not None and not last:
        tops = [D.min_path[k]]
    elif k < D.depth:
        # the extremal path continues through the first (last) source of every level above
        tops = list(dict.fromkeys(D.word(k + 1, v)[-1 if last else 0] for v in D.levels[k + 1]))
    else:
        tops = list(D.levels[k])
    cands = []
    for top in tops:
        edges = []
        v = top
        for i in range(k, 0, -1):
            w = D.word(i, v)
            edges.append(len(w) - 1 if last else 0)
            v = w[edges[-1]]
        cands.append(PathPrefix.from_edges(D, top, tuple(reversed(edges))))
    if len(cands) != 1:
        raise Improper(k, cands)
    return cands[0]


def min_prefix(D: OrderedBratteliDiagram, k: int, top: Optional[str] = None) -> PathPrefix:
    """All-first-edges prefix of depth `k`, ending at `top` when given.

    Without `top` the end vertex comes from the marked minimal path, else
    from the common first source on level ``k + 1``; :class:`Improper` if
    that leaves more than one candidate.
    """
    return _extremal(D, k, False, top)


def max_prefix(D: OrderedBratteliDiagram, k: int, top: Optional[str] = None) -> PathPrefix:
    return _extremal(D, k, True, top)


def successor(p: PathPrefix):
    """Increment the first non-maximal edge and reset the earlier ones to
    minimal; :data:`AtMaximum` when every edge is maximal."""
    D = p.diagram
    verts = list(p.vertices)
    edges = list(p.edges)
    i = 1
    while i <= p.depth and edges[i - 1] == len(D.word(i, verts[i])) - 1:
        i += 1
    if i > p.depth:
        return AtMaximum
    edges[i - 1] += 1
    verts[i - 1] = D.word(i, verts[i])[edges[i - 1]]
    for j in range(i - 1, 0, -1):
        edges[j - 1] = 0
        verts[j - 1] = D.word(j, verts[j])[0]
    return PathPrefix(D, tuple(verts), tuple(edges))


def all_prefixes(D: OrderedBratteliDiagram, k: int) -> list[PathPrefix]:
    """Every depth-`k` prefix, listed vertex by vertex in height order."""
    out: list[PathPrefix] = []

    def below(i: int, v: str):
        if i == 0:
            yield ()
            return
        for e, u in enumerate(D.word(i, v)):
            for rest in below(i - 1, u):
                yield rest + (e,)

    for top in D.levels[k]:
        for edges in below(k, top):
            out.append(PathPrefix.from_edges(D, top, edges))
    return out


@dataclass(frozen=True)
class OrbitWord:
    level: int
    entries: tuple[tuple[str, int], ...]
    origin: tuple[int, ...] = ()  # edges of the starting prefix

    def __len__(self) -> int:
        return len(self.entries)


class Truncated(Exception):
    """The orbit hit the maximal prefix after `n` entries."""

    def __init__(self, n: int, partial: OrbitWord):
        super().__init__(f"orbit reached the maximal prefix after {n} entries")
        self.n = n
        self.partial = partial


def _run_orbit(D: OrderedBratteliDiagram, start: PathPrefix, length: int, k: int):
    if not 1 <= k <= start.depth:
        raise IndexError(f"level {k} outside 1..{start.depth}")
    src, wlen, pre = D.encoded
    K = start.depth
    idx = [D.index(i) for i in range(K + 1)]
    verts = np.array([idx[i][v] for i, v in enumerate(start.vertices)], dtype=np.int64)
    edges = np.array((0,) + start.edges, dtype=np.int64)
    out_v = np.zeros(length, dtype=np.int64)
    out_h = np.zeros(length, dtype=np.int64)
    out_v1 = np.zeros(length, dtype=np.int64)
    out_e1 = np.zeros(length, dtype=np.int64)
    n = 0
    if length > 0:
        n = _kernels.vershik_orbit(src[:K + 1], wlen[:K + 1], pre[:K + 1], verts, edges, k, length,
                                   out_v, out_h, out_v1, out_e1)
    return int(n), out_v[:n], out_h[:n], out_v1[:n], out_e1[:n]


def orbit_word(D: OrderedBratteliDiagram, start: PathPrefix, length: int, k: int) -> OrbitWord:
    """Level-`k` encodings of ``start, T start, ..., T^(length-1) start``.

    Raises :class:`Truncated` (carrying what was produced) when the maximal
    prefix is reached before `length` entries.
    """
    n, ov, oh, _, _ = _run_orbit(D, start, length, k)
    names = D.levels[k]
    word = OrbitWord(k, tuple((names[v], int(h)) for v, h in zip(ov, oh)), start.edges)
    if n < length:
        raise Truncated(n, word)
    return word


def _level1_letter(D: OrderedBratteliDiagram, v: str, e: int) -> str:
    lab = D.labels.get(v)
    if lab is None:
        raise Unlabeled(f"vertex {v!r} carries no block label")
    if len(lab) != len(D.word(1, v)):
        raise Unlabeled(f"label of {v!r} does not match its tower height")
    return lab[e]


def read_letter(D: OrderedBratteliDiagram, p: PathPrefix) -> str:
    return _level1_letter(D, p.vertices[1], p.edges[0])


def orbit_letters(D: OrderedBratteliDiagram, start: PathPrefix, length: int) -> str:
    n, _, _, ov1, oe1 = _run_orbit(D, start, length, 1)
    names = D.levels[1]
    letters = "".join(_level1_letter(D, names[v], int(e)) for v, e in zip(ov1, oe1))
    if n < length:
        raise Truncated(n, OrbitWord(1, (), start.edges))
    return letters


def roundtrip(D: OrderedBratteliDiagram, t: SkeletonTower, L: int) -> tuple[bool, Optional[int]]:
    """Read `L` letters along the orbit of the minimal prefix and compare
    with the sequence prefix.  Returns ``(equal, first mismatch or None)``."""
    if L <= 0:
        return True, None
    k = next((k for k in range(1, D.depth + 1) if D.heights[k][min_prefix(D, k).top] >= L), None)
    if k is None:
        raise ValueError(f"diagram of depth {D.depth} is too shallow for {L} steps")
    got = orbit_letters(D, min_prefix(D, k), L)
    want = fill_prefix(t, L)
    for j, (a, b) in enumerate(zip(got, want)):
        if a != b:
            return False, j
    return True, None


def truncation_code(D: OrderedBratteliDiagram, k: int) -> dict[tuple[str, int], tuple[str, int]]:
    """Letterwise map from depth-``k+1`` encodings to depth-`k` encodings."""
    if not 1 <= k < D.depth:
        raise IndexError(f"level {k} outside 1..{D.depth - 1}")
    hb = D.heights[k]
    code = {}
    for v in D.levels[k + 1]:
        acc = 0
        for u in D.word(k + 1, v):
            for h in range(hb[u]):
                code[(v, acc + h)] = (u, h)
            acc += hb[u]
    return code
