"""Ordered Bratteli diagrams encoded by per-vertex ordered source words.

For a vertex ``v`` on level ``i >= 1`` the word ``theta[i-1][v]`` lists the
sources of the edges entering ``v``, in edge order.  Nothing else is stored:
adjacency matrices, heights, telescopings and the surgeries below are all
computed from these words.

Vertex names must be unique across the whole diagram.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .toeplitz import (
    IncompleteTower,
    SkeletonTower,
    constructive_structure,
    fill_prefix,
)

Word = tuple[str, ...]


class DiagramError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    level: int
    vertex: Optional[str] = None
    message: str = ""

    def __str__(self) -> str:
        where = f"level {self.level}" + (f", vertex {self.vertex}" if self.vertex is not None else "")
        return f"{self.kind}({where}){': ' + self.message if self.message else ''}"


@dataclass(frozen=True)
class OrderedBratteliDiagram:
    levels: tuple[tuple[str, ...], ...]
    theta: tuple[dict[str, Word], ...]
    labels: dict[str, str] = field(default_factory=dict)
    min_path: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        levels = tuple(tuple(lv) for lv in self.levels)
        theta = tuple({v: tuple(w) for v, w in th.items()} for th in self.theta)
        if not levels:
            raise DiagramError("a diagram has at least the root level")
        if len(theta) != len(levels) - 1:
            raise DiagramError(f"{len(levels)} levels need {len(levels) - 1} theta maps, got {len(theta)}")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "labels", dict(self.labels))
        if self.min_path is not None:
            mp = tuple(self.min_path)
            if len(mp) != len(levels):
                raise DiagramError("min_path needs one vertex per level")
            object.__setattr__(self, "min_path", mp)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def root(self) -> str:
        return self.levels[0][0]

    def word(self, i: int, v: str) -> Word:
        return self.theta[i - 1][v]

    def _check_level(self, i: int, lo: int = 1) -> None:
        if not lo <= i <= self.depth:
            raise IndexError(f"level {i} outside {lo}..{self.depth}")

    @cached_property
    def heights(self) -> tuple[dict[str, int], ...]:
        """Number of root paths ending at each vertex, level by level."""
        hs = [{v: 1 for v in self.levels[0]}]
        for i in range(1, self.depth + 1):
            prev = hs[-1]
            hs.append({v: sum(prev[u] for u in self.theta[i - 1].get(v, ())) for v in self.levels[i]})
        return tuple(hs)

    def total_paths(self, i: Optional[int] = None) -> int:
        i = self.depth if i is None else i
        return sum(self.heights[i].values())

    def index(self, i: int) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.levels[i])}

    @cached_property
    def encoded(self):
        """Dense integer arrays of all levels for the orbit kernel.

        Returns ``(src, wlen, pre)``: ``src[i, v, j]`` source index of edge
        ``j`` into vertex ``v`` of level ``i``, ``wlen[i, v]`` its in-degree,
        ``pre[i, v, j]`` the root paths entering through earlier edges.
        """
        K = self.depth
        vmax = max(len(lv) for lv in self.levels)
        lmax = max([len(w) for th in self.theta for w in th.values()] + [1])
        if max(max(h.values()) for h in self.heights) * lmax >= 2 ** 62:
            raise OverflowError("tower heights exceed the 64-bit orbit kernel")
        src = np.zeros((K + 1, vmax, lmax), dtype=np.int64)
        wlen = np.zeros((K + 1, vmax), dtype=np.int64)
        pre = np.zeros((K + 1, vmax, lmax), dtype=np.int64)
        for i in range(1, K + 1):
            below = self.index(i - 1)
            hb = self.heights[i - 1]
            for k, v in enumerate(self.levels[i]):
                w = self.theta[i - 1][v]
                wlen[i, k] = len(w)
                acc = 0
                for j, u in enumerate(w):
                    src[i, k, j] = below[u]
                    pre[i, k, j] = acc
                    acc += hb[u]
        return src, wlen, pre


@dataclass(frozen=True)
class LevelMorphism:
    """Images of the vertices on one level of a diagram as words over a
    level of another diagram."""

    source_level: int
    target_level: int
    images: dict[str, Word]

    def __post_init__(self):
        object.__setattr__(self, "images", {v: tuple(w) for v, w in self.images.items()})


def substitute(mapping: Mapping[str, Sequence[str]], word: Iterable[str]) -> Word:
    out: list[str] = []
    for a in word:
        out.extend(mapping[a])
    return tuple(out)


def validate(D: OrderedBratteliDiagram) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    if len(D.levels[0]) != 1:
        diags.append(Diagnostic("RootLevel", 0, None, "level 0 must hold exactly one vertex"))
    seen: dict[str, int] = {}
    for i, lv in enumerate(D.levels):
        for v in lv:
            if v in seen:
                diags.append(Diagnostic("DuplicateVertex", i, v, f"also on level {seen[v]}"))
            seen.setdefault(v, i)
    for i in range(1, D.depth + 1):
        th = D.theta[i - 1]
        below = set(D.levels[i - 1])
        used: set[str] = set()
        for v in D.levels[i]:
            w = th.get(v, ())
            if not w:
                diags.append(Diagnostic("EmptyRange", i, v, "no incoming edges"))
            for u in w:
                if u not in below:
                    diags.append(Diagnostic("UnknownSource", i, v, f"source {u!r} is not on level {i - 1}"))
            used.update(w)
        for v in th:
            if v not in D.levels[i]:
                diags.append(Diagnostic("UnknownVertex", i, v, "theta entry for a vertex not on this level"))
        for u in D.levels[i - 1]:
            if u not in used:
                diags.append(Diagnostic("DeadSource", i - 1, u, "no outgoing edges"))
    return diags


def adjacency_matrix(D: OrderedBratteliDiagram, i: int) -> np.ndarray:
    """Edge counts ``M[v, u]`` from level ``i-1`` vertex ``u`` to level ``i`` vertex ``v``."""
    D._check_level(i)
    col = D.index(i - 1)
    M = np.zeros((len(D.levels[i]), len(D.levels[i - 1])), dtype=np.int64)
    for r, v in enumerate(D.levels[i]):
        for u in D.word(i, v):
            M[r, col[u]] += 1
    return M


def is_ers(D: OrderedBratteliDiagram) -> tuple[bool, list[Optional[int]]]:
    """Equal row sums check; the list holds each level's common row sum or None."""
    sums: list[Optional[int]] = []
    for i in range(1, D.depth + 1):
        lens = {len(D.word(i, v)) for v in D.levels[i]}
        sums.append(lens.pop() if len(lens) == 1 else None)
    return all(s is not None for s in sums), sums


@dataclass(frozen=True)
class SimplicityReport:
    simple: bool
    windows: tuple[tuple[int, int], ...]
    shallow: bool
    depth: int

    def __bool__(self) -> bool:
        return self.simple


def is_simple(D: OrderedBratteliDiagram) -> SimplicityReport:
    """Greedy finite-depth simplicity check.

    Starting at level 1, extend a window until every vertex of its top
    level is reachable from every vertex of its bottom level, then start the
    next window there.  An unfinished last window shorter than the longest
    closed one is not held against the diagram (not enough depth to judge).
    The verdict only speaks for levels up to the diagram's depth.
    """
    K = D.depth
    if K <= 1:
        return SimplicityReport(True, (), True, K)
    windows: list[tuple[int, int]] = []
    s = 1
    reach = np.eye(len(D.levels[1]), dtype=bool)
    for t in range(2, K + 1):
        M = adjacency_matrix(D, t) > 0
        reach = (M.astype(np.int64) @ reach.astype(np.int64)) > 0
        if reach.all():
            windows.append((s, t))
            s = t
            reach = np.eye(len(D.levels[t]), dtype=bool)
    if not windows:
        return SimplicityReport(False, (), False, K)
    longest = max(b - a for a, b in windows)
    simple = (K - s) <= longest
    return SimplicityReport(simple, tuple(windows), False, K)


def compose(D: OrderedBratteliDiagram, i: int, j: int) -> dict[str, Word]:
    """The composed morphism from level `j` words down to level `i` words."""
    if not 0 <= i < j <= D.depth:
        raise IndexError(f"need 0 <= i < j <= {D.depth}, got i={i}, j={j}")
    out = {v: (v,) for v in D.levels[j]}
    for lv in range(j, i, -1):
        th = D.theta[lv - 1]
        out = {v: substitute(th, w) for v, w in out.items()}
    return out


def telescope(D: OrderedBratteliDiagram, cut_levels: Sequence[int]) -> OrderedBratteliDiagram:
    cuts = list(cut_levels)
    if not cuts:
        raise ValueError("telescoping needs at least one level")
    if any(b <= a for a, b in zip(cuts, cuts[1:])) or cuts[0] < 1 or cuts[-1] > D.depth:
        raise ValueError(f"cut levels must increase within 1..{D.depth}, got {cuts}")
    levels = [D.levels[0]]
    theta = []
    prev = 0
    for m in cuts:
        levels.append(D.levels[m])
        theta.append(compose(D, prev, m))
        prev = m
    kept = {v for lv in levels for v in lv}
    labels = {v: lab for v, lab in D.labels.items() if v in kept}
    mp = None if D.min_path is None else (D.min_path[0],) + tuple(D.min_path[m] for m in cuts)
    return OrderedBratteliDiagram(tuple(levels), tuple(theta), labels, mp)


def min_max_same_source(D: OrderedBratteliDiagram, i: int) -> tuple[bool, bool]:
    D._check_level(i)
    words = [D.word(i, v) for v in D.levels[i]]
    return len({w[0] for w in words}) == 1, len({w[-1] for w in words}) == 1


# ---------------------------------------------------------------------------
# diagrams read off a skeleton tower


@dataclass(frozen=True)
class TowerDiagram:
    diagram: OrderedBratteliDiagram
    periods: tuple[int, ...]
    window: int
    stable: bool
    warnings: tuple[str, ...] = ()


def _grid_levels(x: str, periods: Sequence[int]):
    """Distinct grid blocks per level in order of first appearance."""
    blocks = []
    for p in periods:
        seen: dict[str, None] = {}
        for m in range(len(x) // p):
            seen.setdefault(x[m * p:(m + 1) * p], None)
        blocks.append(list(seen))
    return blocks


def bv_from_tower(t: SkeletonTower, window: int, depth: Optional[int] = None,
                  periods: Optional[Sequence[int]] = None) -> TowerDiagram:
    """Ordered Bratteli diagram whose level-``n`` vertices are the grid blocks
    ``x[m p_n, (m+1) p_n)`` of the sequence, for a constructive structure ``p``.

    Each vertex's source word is its sequence of ``p_{n-1}``-sub-blocks, so
    row sums are ``p_n / p_{n-1}``; level 1 hangs from the root by ``p_1``
    edges.  Vertices are labelled by their block; the initial blocks form
    the marked minimal path.  Blocks are read from the prefix of length
    `window`, and the vertex sets are compared with those of the first half
    of the window; a difference is reported as an ``Unstable`` warning.
    """
    if periods is None:
        if depth is None:
            raise ValueError("give either depth or periods")
        periods = constructive_structure(t, depth).periods
    periods = tuple(periods)
    if depth is not None:
        periods = periods[:depth]
    if not periods:
        raise ValueError("need at least one level")
    top = periods[-1]
    if window <= 0 or window % top:
        raise ValueError(f"window {window} must be a positive multiple of {top}")
    x = fill_prefix(t, window)
    blocks = _grid_levels(x, periods)
    warnings: list[str] = []
    stable = True
    half = window // 2
    if half % top == 0 and half > 0:
        if _grid_levels(x[:half], periods) != blocks:
            stable = False
            warnings.append(f"Unstable({window}): vertex sets change between windows {half} and {window}")
    else:
        stable = False
        warnings.append(f"Unverified({window}): half window is not a multiple of {top}")
    root = "root"
    names: list[dict[str, str]] = []
    levels: list[tuple[str, ...]] = [(root,)]
    theta: list[dict[str, Word]] = []
    labels: dict[str, str] = {}
    for n, (p, bl) in enumerate(zip(periods, blocks), start=1):
        nm = {b: f"L{n}v{k}" for k, b in enumerate(bl)}
        names.append(nm)
        levels.append(tuple(nm.values()))
        th: dict[str, Word] = {}
        for b, v in nm.items():
            labels[v] = b
            if n == 1:
                th[v] = (root,) * p
            else:
                q = periods[n - 2]
                below = names[n - 2]
                try:
                    th[v] = tuple(below[b[j:j + q]] for j in range(0, p, q))
                except KeyError as exc:
                    raise DiagramError(f"sub-block {exc.args[0]!r} of level {n} missing on level {n - 1}") from None
        theta.append(th)
    min_path = (root,) + tuple(names[n][x[:p]] for n, p in enumerate(periods))
    D = OrderedBratteliDiagram(tuple(levels), tuple(theta), labels, min_path)
    return TowerDiagram(D, periods, window, stable, tuple(warnings))


def bv_auto(t: SkeletonTower, depth: int) -> TowerDiagram:
    """:func:`bv_from_tower` with the largest window the tower can fill, capped at 16 top blocks."""
    periods = constructive_structure(t, depth).periods
    top = periods[-1]
    filled = 0
    try:
        fill_prefix(t, 16 * top)
        filled = 16 * top
    except IncompleteTower as exc:
        filled = exc.position
    window = (filled // top) * top
    if window == 0:
        raise IncompleteTower(filled, t.depth)
    return bv_from_tower(t, window, periods=periods)


# ---------------------------------------------------------------------------
# surgeries


@dataclass(frozen=True)
class SplitResult:
    diagram: OrderedBratteliDiagram
    eta1: LevelMorphism
    provenance: dict[str, tuple[str, Word]]
    ell: int
    segment: int  # length of each word linked to a bottom split vertex


def symbol_split(B: OrderedBratteliDiagram, eta1: LevelMorphism, theta1_len: int,
                 ell: int) -> SplitResult:
    """Replace each vertex between levels `ell` and ``n1 - 1`` by one vertex
    per distinct word of ``eta1`` linked to the paths leaving it.

    ``eta1`` sends level ``n1 = eta1.source_level`` of `B` to words over the
    first level of a target diagram whose first level hangs from its root by
    `theta1_len` edges.  Requires equal row sums up to ``n1`` and that the
    number of root paths into a level-`ell` vertex is a multiple ``s`` of
    `theta1_len`.  The returned diagram has the split copies of level
    ``ell + i - 1`` on level ``i``, ``W_{n1}`` on level ``n1 - ell + 1`` and
    the remaining levels shifted accordingly; the returned morphism sends
    its first level to the linked words (length ``s``).
    """
    n1 = eta1.source_level
    if not 1 <= ell < n1 <= B.depth:
        raise PreconditionError(f"need 1 <= ell < n1 <= {B.depth}, got ell={ell}, n1={n1}")
    _, sums = is_ers(B)
    if any(s is None for s in sums[:n1]):
        raise PreconditionError(f"diagram does not have equal row sums up to level {n1}")
    xi_ell = math.prod(sums[:ell])
    xi_n1 = math.prod(sums[:n1])
    s, rem = divmod(xi_ell, theta1_len)
    if rem or s < 1:
        raise PreconditionError(f"{xi_ell} root paths at level {ell} is not a multiple of {theta1_len}")
    want = xi_n1 // theta1_len
    for w in B.levels[n1]:
        img = eta1.images.get(w)
        if img is None or len(img) != want:
            raise PreconditionError(f"image of {w} must have length {want}")

    seg = {j: s * math.prod(sums[ell:j]) for j in range(ell, n1 + 1)}
    # linked[j][u]: distinct words linked to u (level j), in order of first appearance
    linked: dict[int, dict[str, dict[Word, None]]] = {j: {u: {} for u in B.levels[j]} for j in range(ell, n1)}
    parents: list[tuple[str, Word]] = [(w, tuple(eta1.images[w])) for w in B.levels[n1]]
    for j in range(n1 - 1, ell - 1, -1):
        L = seg[j]
        for v, word in parents:
            for k, c in enumerate(B.word(j + 1, v)):
                linked[j][c].setdefault(word[k * L:(k + 1) * L], None)
        parents = [(u, wd) for u in B.levels[j] for wd in linked[j][u]]

    existing = {v for lv in B.levels for v in lv}
    name: dict[tuple[str, Word], str] = {}
    provenance: dict[str, tuple[str, Word]] = {}
    new_levels: list[tuple[str, ...]] = [B.levels[0]]
    for j in range(ell, n1):
        lv = []
        for u in B.levels[j]:
            for k, wd in enumerate(linked[j][u], start=1):
                nm = f"{u}.{k}"
                if nm in existing:
                    raise DiagramError(f"split name {nm!r} clashes with an existing vertex")
                name[(u, wd)] = nm
                provenance[nm] = (u, wd)
                lv.append(nm)
        new_levels.append(tuple(lv))

    root = B.root
    new_theta: list[dict[str, Word]] = []
    xi_root = (root,) * xi_ell
    new_theta.append({name[(u, wd)]: xi_root for u in B.levels[ell] for wd in linked[ell][u]})
    for j in range(ell + 1, n1):
        L = seg[j - 1]
        th = {}
        for u in B.levels[j]:
            for wd in linked[j][u]:
                th[name[(u, wd)]] = tuple(name[(c, wd[k * L:(k + 1) * L])]
                                          for k, c in enumerate(B.word(j, u)))
        new_theta.append(th)
    L = seg[n1 - 1]
    th = {}
    for w in B.levels[n1]:
        wd = eta1.images[w]
        th[w] = tuple(name[(c, wd[k * L:(k + 1) * L])] for k, c in enumerate(B.word(n1, w)))
    new_theta.append(th)
    new_levels.append(B.levels[n1])
    for j in range(n1 + 1, B.depth + 1):
        new_levels.append(B.levels[j])
        new_theta.append(dict(B.theta[j - 1]))

    labels = {v: lab for v, lab in B.labels.items() if v not in provenance}
    for nm, (u, _) in provenance.items():
        if u in B.labels:
            labels[nm] = B.labels[u]
    labels = {v: labels[v] for lv in new_levels for v in lv if v in labels}
    mp = None
    if B.min_path is not None:
        # the minimal path is the all-first-edges descent from the marked top vertex
        top = B.min_path[n1]
        chain = [top]
        cur, wd = top, tuple(eta1.images[top])
        for j in range(n1, ell, -1):
            c = B.word(j, cur)[0]
            wd = wd[:seg[j - 1]]
            cur = c
            chain.append(name[(c, wd)])
        mp = (root,) + tuple(reversed(chain[1:])) + (top,) + tuple(B.min_path[n1 + 1:])
    B2 = OrderedBratteliDiagram(tuple(new_levels), tuple(new_theta), labels, mp)

    shift = ell - 1
    for j in range(n1, B.depth + 1):
        if B2.heights[j - shift] != B.heights[j]:
            raise DiagramError(f"path counts into level {j} changed during splitting")
    eta_new = LevelMorphism(1, eta1.target_level,
                            {name[(u, wd)]: wd for u in B.levels[ell] for wd in linked[ell][u]})
    return SplitResult(B2, eta_new, provenance, ell, s)


def count_paths_between(D: OrderedBratteliDiagram, i: int, j: int) -> int:
    """Number of finite paths from level `i` up to level `j`."""
    return sum(len(w) for w in compose(D, i, j).values())


def insert_word_level(D: OrderedBratteliDiagram, i: int) -> tuple[OrderedBratteliDiagram, bool]:
    """Insert a level of distinct source words below level `i` when two
    vertices of level `i` share their source word.

    Returns the new diagram and True, or `D` itself and False when all
    source words on level `i` already differ.
    """
    if not 2 <= i <= D.depth:
        raise IndexError(f"level {i} outside 2..{D.depth}")
    reps: dict[Word, str] = {}
    owner: dict[Word, str] = {}
    for v in D.levels[i]:
        owner.setdefault(D.word(i, v), v)
    if len(owner) == len(D.levels[i]):
        return D, False
    existing = {v for lv in D.levels for v in lv}
    for k, w in enumerate(owner):
        nm = f"I{i}.{k}"
        while nm in existing:
            nm += "'"
        reps[w] = nm
    levels = list(D.levels[:i]) + [tuple(reps.values())] + list(D.levels[i:])
    theta = list(D.theta[:i - 1])
    theta.append({nm: w for w, nm in reps.items()})
    theta.append({v: (reps[D.word(i, v)],) for v in D.levels[i]})
    theta.extend(D.theta[i:])
    labels = dict(D.labels)
    for w, nm in reps.items():
        if owner[w] in D.labels:
            labels[nm] = D.labels[owner[w]]
    labels = {v: labels[v] for lv in levels for v in lv if v in labels}
    mp = None
    if D.min_path is not None:
        mp = D.min_path[:i] + (reps[D.word(i, D.min_path[i])],) + D.min_path[i:]
    return OrderedBratteliDiagram(tuple(levels), tuple(theta), labels, mp), True
