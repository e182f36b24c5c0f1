"""Constant-length substitutions: primitivity, coincidences, fixed points,
the exact skeleton towers they generate, and sliding block codes."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Optional

import numpy as np

from .toeplitz import SkeletonTower, Stage
from .words import Alphabet, AlphabetError, PartialWord


class NotToeplitz(ValueError):
    """The substitution has no coincidence, so its shift is not Toeplitz."""


class NotPrimitive(ValueError):
    pass


class SeedError(ValueError):
    pass


class PartialCodeError(KeyError):
    def __init__(self, window: str):
        super().__init__(f"block code has no entry for window {window!r}")
        self.window = window


@dataclass(frozen=True)
class Substitution:
    alphabet: Alphabet
    images: Mapping[str, str]

    def __post_init__(self):
        images = {a: self.images[a] for a in self.alphabet if a in self.images}
        missing = [a for a in self.alphabet if a not in self.images]
        extra = [a for a in self.images if a not in self.alphabet]
        if missing or extra:
            raise AlphabetError(f"images must cover the alphabet exactly (missing {missing}, extra {extra})")
        lengths = {len(w) for w in images.values()}
        if len(lengths) != 1:
            raise ValueError(f"images have different lengths {sorted(lengths)}")
        if lengths.pop() < 2:
            raise ValueError("image length must be at least 2")
        for w in images.values():
            self.alphabet.check(w)
        object.__setattr__(self, "images", images)

    @classmethod
    def parse(cls, text: str) -> "Substitution":
        """Parse the inline grammar ``a=ab,b=aa``."""
        images: dict[str, str] = {}
        for part in text.split(","):
            key, sep, img = part.strip().partition("=")
            if not sep or len(key) != 1:
                raise ValueError(f"cannot parse substitution rule {part!r}")
            images[key] = img
        return cls(Alphabet(tuple(images)), images)

    @property
    def length(self) -> int:
        return len(next(iter(self.images.values())))

    @cached_property
    def columns(self) -> np.ndarray:
        """``columns[c, a]`` is the index of the ``c``-th letter of the image of letter ``a``."""
        idx = self.alphabet.index
        syms = self.alphabet.symbols
        return np.array([[idx(self.images[a][c]) for a in syms] for c in range(self.length)],
                        dtype=np.int64)

    def power_table(self, n: int) -> np.ndarray:
        """Row ``j`` is the ``j``-th column function of the ``n``-th power."""
        T = np.arange(len(self.alphabet), dtype=np.int64)[None, :]
        C = self.columns
        for _ in range(n):
            # row j*l + c of the next power is column c composed after row j
            T = np.transpose(C[:, T], (1, 0, 2)).reshape(-1, T.shape[1])
        return T

    def incidence_matrix(self) -> np.ndarray:
        k = len(self.alphabet)
        M = np.zeros((k, k), dtype=np.int64)
        for j, a in enumerate(self.alphabet):
            for b in self.images[a]:
                M[self.alphabet.index(b), j] += 1
        return M

    def __str__(self) -> str:
        return ",".join(f"{a}={w}" for a, w in self.images.items())


def apply(theta: Substitution, w: str) -> str:
    theta.alphabet.check(w)
    return "".join(theta.images[a] for a in w)


def is_primitive(theta: Substitution) -> bool:
    k = len(theta.alphabet)
    M = theta.incidence_matrix() > 0
    P = M.copy()
    for _ in range((k - 1) ** 2 + 1):
        if P.all():
            return True
        P = (P.astype(np.int64) @ M.astype(np.int64)) > 0
    return bool(P.all())


def has_coincidence(theta: Substitution) -> tuple[bool, Optional[tuple[int, int]]]:
    """Decide whether some column of some power is a constant map.

    Breadth-first search over the finite semigroup generated by the column
    functions.  The witness ``(n, i)`` says column ``i`` of the ``n``-th
    power is constant; ``n`` is minimal.
    """
    C = [tuple(int(x) for x in row) for row in theta.columns]
    ell = theta.length
    seen: set[tuple[int, ...]] = set()
    queue: deque = deque()
    for c, f in enumerate(C):
        if f not in seen:
            seen.add(f)
            queue.append((f, 1, c))
    while queue:
        f, n, i = queue.popleft()
        if len(set(f)) == 1:
            return True, (n, i)
        for c, g in enumerate(C):
            h = tuple(g[x] for x in f)
            if h not in seen:
                seen.add(h)
                queue.append((h, n + 1, i * ell + c))
    return False, None


def fixed_point_prefix(theta: Substitution, a: str, L: int) -> str:
    if a not in theta.alphabet:
        raise AlphabetError(f"symbol {a!r} not in alphabet")
    if theta.images[a][0] != a:
        raise SeedError(f"image of {a!r} does not start with {a!r}")
    w = a
    while len(w) < L:
        w = apply(theta, w)
    return w[:max(L, 0)]


def tower_from_substitution(theta: Substitution, depth: int) -> SkeletonTower:
    """Exact tower of the fixed points: stage ``i`` has period ``l**i`` and
    cell ``j`` holds ``b`` iff column ``j`` of the ``i``-th power is constant ``b``.

    A stage that would fill nothing new is left out (possible when a
    coincidence needs more than one step to appear).
    """
    if not is_primitive(theta):
        raise NotPrimitive(f"substitution {theta} is not primitive")
    ok, _ = has_coincidence(theta)
    if not ok:
        raise NotToeplitz(f"substitution {theta} has no coincidence")
    syms = theta.alphabet.symbols
    stages: list[Stage] = []
    prev_filled = 0
    T = np.arange(len(syms), dtype=np.int64)[None, :]
    C = theta.columns
    for i in range(1, depth + 1):
        T = np.transpose(C[:, T], (1, 0, 2)).reshape(-1, T.shape[1])
        const = (T == T[:, :1]).all(axis=1)
        n_filled = int(const.sum())
        # a constant column stays constant under further composition, so
        # counting filled cells detects progress
        if n_filled == prev_filled * theta.length:
            prev_filled = n_filled
            continue
        prev_filled = n_filled
        cells = tuple(syms[T[j, 0]] if const[j] else None for j in range(T.shape[0]))
        stages.append(Stage(T.shape[0], PartialWord(cells)))
    return SkeletonTower(theta.alphabet, tuple(stages))


def coding(mapping: Mapping[str, str], w: str) -> str:
    """Letter-to-letter image of `w`."""
    try:
        return "".join(mapping[a] for a in w)
    except KeyError as exc:
        raise PartialCodeError(exc.args[0]) from None


def sliding_block_code(code: Mapping[str, str], w: str) -> str:
    """Apply the local rule `code`, keyed by windows of length ``2r + 1``."""
    if not code:
        raise ValueError("empty block code")
    widths = {len(k) for k in code}
    if len(widths) != 1 or widths.pop() % 2 == 0:
        raise ValueError("block code windows must share one odd length")
    width = len(next(iter(code)))
    out = []
    for j in range(len(w) - width + 1):
        win = w[j:j + width]
        try:
            out.append(code[win])
        except KeyError:
            raise PartialCodeError(win) from None
    return "".join(out)
