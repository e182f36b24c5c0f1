"""Alphabets, finite words, partial words and periodicity arithmetic.

Words over a symbol alphabet are plain ``str`` values (one character per
symbol).  A :class:`PartialWord` additionally allows holes, written ``*`` in
text form, which stand for positions not yet determined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

HOLE_CHAR = "*"


class AlphabetError(ValueError):
    """A symbol does not belong to the alphabet in use."""


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not symbols:
            raise AlphabetError("alphabet must be nonempty")
        if len(set(symbols)) != len(symbols):
            raise AlphabetError(f"duplicate symbols in alphabet {symbols!r}")
        for s in symbols:
            if not isinstance(s, str) or len(s) != 1 or s == HOLE_CHAR:
                raise AlphabetError(f"invalid symbol {s!r}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, s) -> bool:
        return s in self.symbols

    def index(self, s: str) -> int:
        try:
            return self.symbols.index(s)
        except ValueError:
            raise AlphabetError(f"symbol {s!r} not in alphabet {self.symbols!r}") from None

    def check(self, word: str) -> str:
        """Return `word` unchanged after checking every symbol is known."""
        allowed = set(self.symbols)
        for j, s in enumerate(word):
            if s not in allowed:
                raise AlphabetError(f"symbol {s!r} at position {j} not in alphabet")
        return word

    @classmethod
    def from_word(cls, word: Iterable[str]) -> "Alphabet":
        seen: dict[str, None] = {}
        for s in word:
            seen.setdefault(s, None)
        return cls(tuple(seen))


@dataclass(frozen=True)
class PartialWord:
    """A finite word with holes; ``None`` marks a hole."""

    cells: tuple[Optional[str], ...]

    def __post_init__(self):
        cells = tuple(self.cells)
        object.__setattr__(self, "cells", cells)
        if not cells:
            raise ValueError("a partial word has length at least 1")

    @classmethod
    def from_text(cls, text: str) -> "PartialWord":
        return cls(tuple(None if c == HOLE_CHAR else c for c in text))

    @classmethod
    def holes(cls, length: int) -> "PartialWord":
        return cls((None,) * length)

    def __len__(self) -> int:
        return len(self.cells)

    def __getitem__(self, j: int) -> Optional[str]:
        return self.cells[j % len(self.cells)]

    def __str__(self) -> str:
        return "".join(HOLE_CHAR if c is None else c for c in self.cells)

    @property
    def length(self) -> int:
        return len(self.cells)

    @property
    def is_all_holes(self) -> bool:
        return all(c is None for c in self.cells)

    def filled(self) -> list[int]:
        return [j for j, c in enumerate(self.cells) if c is not None]


def word_has_period(w: Sequence, d: int) -> bool:
    """True iff ``w[j] == w[j + d]`` for every valid ``j``."""
    if not 1 <= d <= len(w):
        raise IndexError(f"period {d} out of range for a word of length {len(w)}")
    return all(w[j] == w[j + d] for j in range(len(w) - d))


def partial_periodic(pw: PartialWord, d: int) -> bool:
    """Whether the periodic extension of `pw` over the integers has period `d`.

    Holes count as a symbol of their own, so a hole facing a filled cell
    breaks periodicity.
    """
    if d < 1:
        raise IndexError(f"period must be positive, got {d}")
    p = len(pw)
    cells = pw.cells
    window = math.lcm(d, p)
    return all(cells[n % p] == cells[(n + d) % p] for n in range(window))


def min_period_partial(pw: PartialWord) -> int:
    p = len(pw)
    for d in range(1, p + 1):
        if partial_periodic(pw, d):
            # periods of a Z-indexed sequence are closed under gcd, and p is one
            assert p % d == 0, f"minimal period {d} does not divide {p}"
            return d
    raise AssertionError("unreachable: the length is always a period")


def lcm_all(xs: Iterable[int]) -> int:
    xs = list(xs)
    if not xs:
        raise ValueError("lcm of an empty list")
    if any(x < 1 for x in xs):
        raise ValueError(f"lcm_all expects positive integers, got {xs}")
    return math.lcm(*xs)
