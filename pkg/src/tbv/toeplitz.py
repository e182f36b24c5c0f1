"""Toeplitz sequences stored exactly as towers of periodic partial words.

A :class:`SkeletonTower` lists stages ``(p_i, s_i)``: the partial word
``s_i`` of length ``p_i``, extended ``p_i``-periodically over the integers,
holds every symbol of the sequence known to repeat with period ``p_i``.
Deeper stages only fill holes.  Everything certified here is read off the
deepest stage, so answers are sound at any depth and complete only in the
limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from . import _kernels
from .words import Alphabet, PartialWord, lcm_all, min_period_partial


class IncompleteTower(Exception):
    """A position needed by the caller is still a hole at the deepest stage."""

    def __init__(self, position: int, depth: int):
        super().__init__(f"position {position} is not filled at depth {depth}; deepen the tower")
        self.position = position
        self.depth = depth


class StructureInvariantViolation(Exception):
    pass


class TowerError(ValueError):
    pass


@dataclass(frozen=True)
class Stage:
    p: int
    cells: PartialWord

    def __post_init__(self):
        if self.p < 1 or len(self.cells) != self.p:
            raise TowerError(f"stage period {self.p} does not match cell count {len(self.cells)}")


@dataclass(frozen=True)
class SkeletonTower:
    alphabet: Alphabet
    stages: tuple[Stage, ...] = ()

    def __post_init__(self):
        stages = tuple(self.stages)
        object.__setattr__(self, "stages", stages)
        if stages and stages[0].cells.is_all_holes:
            raise TowerError("stage 1 fills no residue class")
        for st in stages:
            for c in st.cells.cells:
                if c is not None and c not in self.alphabet:
                    raise TowerError(f"symbol {c!r} not in alphabet")
        for i, (lo, hi) in enumerate(zip(stages, stages[1:]), start=1):
            if hi.p <= lo.p or hi.p % lo.p:
                raise TowerError(f"stage {i + 1}: period {hi.p} is not a proper multiple of {lo.p}")
            old = self._codes_of(lo)[np.arange(hi.p) % lo.p]
            new = self._codes_of(hi)
            known = old >= 0
            if np.any(new[known] != old[known]):
                j = int(np.flatnonzero(known & (new != old))[0])
                raise TowerError(f"stage {i + 1} rewrites position {j}")
            if not np.any((new >= 0) & ~known):
                raise TowerError(f"stage {i + 1} fills no new residue class")

    def _codes_of(self, st: Stage) -> np.ndarray:
        lookup = {s: k for k, s in enumerate(self.alphabet.symbols)}
        return np.array([_kernels.HOLE if c is None else lookup[c] for c in st.cells.cells],
                        dtype=np.int32)

    @property
    def depth(self) -> int:
        return len(self.stages)

    @property
    def periods(self) -> tuple[int, ...]:
        return tuple(st.p for st in self.stages)

    @cached_property
    def top_codes(self) -> np.ndarray:
        """Integer codes of the deepest stage; a one-cell hole for the empty tower."""
        if not self.stages:
            return np.array([_kernels.HOLE], dtype=np.int32)
        return self._codes_of(self.stages[-1])

    @cached_property
    def _top_periods(self) -> np.ndarray:
        return _kernels.position_periods(self.top_codes)

    def symbol_at(self, n: int) -> Optional[str]:
        c = int(self.top_codes[n % len(self.top_codes)])
        return None if c < 0 else self.alphabet.symbols[c]

    def deepen(self, p: int, cells: PartialWord) -> "SkeletonTower":
        return SkeletonTower(self.alphabet, self.stages + (Stage(p, cells),))


@dataclass(frozen=True)
class PeriodStructure:
    periods: tuple[int, ...]
    constructive: bool = False

    def __post_init__(self):
        ps = tuple(self.periods)
        object.__setattr__(self, "periods", ps)
        for a, b in zip(ps, ps[1:]):
            if b <= a or b % a:
                raise StructureInvariantViolation(f"{b} is not a proper multiple of {a}")


@dataclass(frozen=True)
class PositionPeriod:
    position: int
    period: Optional[int] = None  # None: undetermined at this depth
    depth: int = field(default=0, compare=False)

    @property
    def determined(self) -> bool:
        return self.period is not None


def fill_prefix(t: SkeletonTower, L: int) -> str:
    if L <= 0:
        return ""
    codes = t.top_codes
    seg = codes[np.arange(L) % len(codes)]
    holes = np.flatnonzero(seg < 0)
    if holes.size:
        raise IncompleteTower(int(holes[0]), t.depth)
    syms = t.alphabet.symbols
    return "".join(syms[c] for c in seg)


def _class_constant(t: SkeletonTower, g: int) -> np.ndarray:
    """Per residue mod ``g`` (``g`` dividing the top period): the symbol code
    filling the whole class at the deepest stage, or -1."""
    codes = t.top_codes
    M = codes.reshape(len(codes) // g, g)
    mono = (M == M[0]).all(axis=0) & (M[0] >= 0)
    return np.where(mono, M[0], _kernels.HOLE)


def per_set(t: SkeletonTower, p: int, a: str) -> frozenset[int]:
    """Residues ``r`` mod `p` certified to carry `a` on all of ``r + pZ``.

    Under-reports when the tower is too shallow; never over-reports.
    """
    if p < 1:
        raise ValueError("p must be positive")
    if not t.stages:
        return frozenset()
    code = t.alphabet.index(a)
    g = math.gcd(p, len(t.top_codes))
    const = _class_constant(t, g)
    return frozenset(r for r in range(p) if const[r % g] == code)


def p_skeleton(t: SkeletonTower, p: int) -> PartialWord:
    if p < 1:
        raise ValueError("p must be positive")
    if not t.stages:
        return PartialWord.holes(p)
    g = math.gcd(p, len(t.top_codes))
    const = _class_constant(t, g)
    syms = t.alphabet.symbols
    return PartialWord(tuple(None if const[r % g] < 0 else syms[const[r % g]] for r in range(p)))


def is_essential_period(t: SkeletonTower, p: int) -> bool:
    skel = p_skeleton(t, p)
    return not skel.is_all_holes and min_period_partial(skel) == p


def position_period(t: SkeletonTower, n: int) -> PositionPeriod:
    """Least ``d`` with ``x_m = x_n`` for every ``m = n (mod d)``, as far as
    the deepest stage certifies it."""
    if not t.stages:
        return PositionPeriod(n, None, 0)
    d = int(t._top_periods[n % len(t.top_codes)])
    return PositionPeriod(n, d or None, t.depth)


def constructive_structure(t: SkeletonTower, k: int) -> PeriodStructure:
    """Periods ``p_1 | p_2 | ...`` where ``p_{i+1}`` is the essential period of
    the initial block ``x[0, p_i)``.

    The seed ``p_1`` is the period of position 0.  The essential period of a
    block is the lcm of the periods of its positions.
    """
    if k < 1:
        raise ValueError("k must be at least 1")

    def period_of(j: int) -> int:
        pp = position_period(t, j)
        if pp.period is None:
            raise IncompleteTower(j, t.depth)
        return pp.period

    periods = [period_of(0)]
    while len(periods) < k:
        prev = periods[-1]
        if prev > len(t.top_codes):
            # positions beyond one top period repeat the top stage's information
            raise IncompleteTower(len(t.top_codes), t.depth)
        nxt = lcm_all(period_of(j) for j in range(prev))
        if nxt == prev:
            raise StructureInvariantViolation(
                f"initial block of length {prev} is periodic with period {prev}; input is not Toeplitz")
        periods.append(nxt)
    for p in periods:
        if not is_essential_period(t, p):
            raise StructureInvariantViolation(f"{p} is not an essential period")
    return PeriodStructure(tuple(periods), constructive=True)


def window_uncovered(w: str, max_period: int) -> list[int]:
    """Positions of `w` lying on no monochromatic progression of at least
    two terms with difference at most `max_period`."""
    if not w:
        return []
    alphabet = Alphabet.from_word(w)
    codes = np.array([alphabet.index(c) for c in w], dtype=np.int32)
    covered = _kernels.window_cover(codes, max_period)
    return [int(j) for j in np.flatnonzero(~covered)]


def toeplitz_window_check(w: str, max_period: int) -> bool:
    """Finite-window evidence (never proof) that `w` comes from a Toeplitz sequence.

    Every position must lie on an arithmetic progression inside the window,
    with difference at most `max_period` and at least two terms, all of whose
    positions hold the same symbol.
    """
    return not window_uncovered(w, max_period)

