"""Morphism sequences between ordered Bratteli diagrams and the divisibility
obstructions to factor maps between Toeplitz shifts.

A :class:`MorphismSequence` from `B` to `C` holds levels
``0 = n_0 < n_1 < ... < n_m`` of `B` and maps ``eta_i`` sending each vertex
of ``W_{n_i}`` (level ``n_i`` of `B`) to a word over ``V_i`` (level ``i`` of
`C`).  It realizes a factor map when every square

    theta_(i, i+1] o eta_{i+1}  ==  eta_i o xi_(n_i, n_{i+1}]

commutes as word maps.  Everything here verifies or refutes; nothing
searches for factor maps, and a negative obstruction verdict never claims
that a factor exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

from .bratteli import (
    Diagnostic,
    LevelMorphism,
    OrderedBratteliDiagram,
    PreconditionError,
    compose,
    is_ers,
    substitute,
    symbol_split,
)
from .substitution import Substitution, has_coincidence, is_primitive

Word = tuple[str, ...]

DISCLAIMER = ("necessary conditions only: NotObstructed does not assert that a factor map exists, "
              "and horizon-bounded verdicts say nothing beyond the horizon")


@dataclass(frozen=True)
class MorphismSequence:
    source: OrderedBratteliDiagram
    target: OrderedBratteliDiagram
    levels: tuple[int, ...]
    maps: tuple[dict[str, Word], ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(n) for n in self.levels))
        object.__setattr__(self, "maps", tuple({w: tuple(img) for w, img in m.items()} for m in self.maps))
        if len(self.maps) != len(self.levels):
            raise ValueError(f"{len(self.levels)} levels need as many maps, got {len(self.maps)}")

    @property
    def m(self) -> int:
        return len(self.levels) - 1

    def morphism(self, i: int) -> LevelMorphism:
        return LevelMorphism(self.levels[i], i, self.maps[i])


def identity_realization(D: OrderedBratteliDiagram) -> MorphismSequence:
    """The sequence ``D -> D`` with ``n_i = i`` and every ``eta_i`` the identity."""
    maps = tuple({v: (v,) for v in lv} for lv in D.levels)
    return MorphismSequence(D, D, tuple(range(D.depth + 1)), maps)


# ---------------------------------------------------------------------------
# square verification


def _source_min(D: OrderedBratteliDiagram, n: int) -> Optional[str]:
    if D.min_path is not None:
        return D.min_path[n]
    if n < D.depth:
        firsts = {D.word(n + 1, v)[0] for v in D.levels[n + 1]}
        if len(firsts) == 1:
            return firsts.pop()
    return None


def _check_square(ms: MorphismSequence, i: int) -> list[Diagnostic]:
    B, C = ms.source, ms.target
    lo, hi = ms.levels[i], ms.levels[i + 1]
    xi = compose(B, lo, hi)
    th = C.theta[i]
    eta_lo, eta_hi = ms.maps[i], ms.maps[i + 1]
    out = []
    for w in B.levels[hi]:
        try:
            left = substitute(th, eta_hi[w])
            right = substitute(eta_lo, xi[w])
        except KeyError:
            continue  # reported as an undefined or foreign letter already
        if left != right:
            j = next((j for j, (a, b) in enumerate(zip(left, right)) if a != b), min(len(left), len(right)))
            out.append(Diagnostic("SquareMismatch", i + 1, w,
                                  f"words differ at position {j} (lengths {len(left)} and {len(right)})"))
    return out


def verify_squares(ms: MorphismSequence) -> list[Diagnostic]:
    """Every failed condition of the realization, empty when it verifies."""
    B, C = ms.source, ms.target
    lv = ms.levels
    if lv[0] != 0 or any(b <= a for a, b in zip(lv, lv[1:])) or lv[-1] > B.depth or ms.m > C.depth:
        return [Diagnostic("BadLevels", 0, None, f"levels {list(lv)} do not fit depths {B.depth} and {C.depth}")]
    diags: list[Diagnostic] = []
    if ms.maps[0] != {B.root: (C.root,)}:
        diags.append(Diagnostic("RootMap", 0, B.root, "root must map to the root"))
    for i in range(1, ms.m + 1):
        eta = ms.maps[i]
        targets = set(C.levels[i])
        used: set[str] = set()
        for w in B.levels[lv[i]]:
            img = eta.get(w)
            if img is None:
                diags.append(Diagnostic("Undefined", i, w, "no image"))
                continue
            if not img:
                diags.append(Diagnostic("Erasing", i, w, "empty image"))
            bad = [a for a in img if a not in targets]
            if bad:
                diags.append(Diagnostic("ForeignLetter", i, w, f"{bad[0]!r} is not on level {i} of the target"))
            used.update(img)
        for w in eta:
            if w not in B.levels[lv[i]]:
                diags.append(Diagnostic("UnknownVertex", i, w, f"not on level {lv[i]} of the source"))
        missing = [v for v in C.levels[i] if v not in used]
        if missing:
            diags.append(Diagnostic("NotSurjective", i, None, f"letters never used: {missing}"))
        wmin, vmin = _source_min(B, lv[i]), _source_min(C, i)
        if wmin is not None and vmin is not None and eta.get(wmin, (None,))[:1] != (vmin,):
            diags.append(Diagnostic("MinSource", i, wmin, f"image must start with {vmin!r}"))
    for i in range(ms.m):
        diags.extend(_check_square(ms, i))
    return diags


# ---------------------------------------------------------------------------
# levels and push-up


class Unreachable(ValueError):
    def __init__(self, i: int):
        super().__init__(f"divisibility for index {i} is not reached within the given depth")
        self.i = i


def optimal_levels(xi_sums: Sequence[int], theta_sums: Sequence[int], m: int) -> tuple[int, ...]:
    """Least ``n_i > n_{i-1}`` with ``|theta_(0,i]|`` dividing ``|xi_(0,n_i]|``, for ``i = 1..m``."""
    if m > len(theta_sums):
        raise ValueError(f"need {m} target row sums, got {len(theta_sums)}")
    if any(s < 1 for s in list(xi_sums) + list(theta_sums)):
        raise ValueError("row sums must be positive")
    out = []
    prev = 0
    big_theta = 1
    for i in range(1, m + 1):
        big_theta *= theta_sums[i - 1]
        big_xi = math.prod(xi_sums[:prev])
        n = prev
        while True:
            n += 1
            if n > len(xi_sums):
                raise Unreachable(i)
            big_xi *= xi_sums[n - 1]
            if big_xi % big_theta == 0:
                break
        out.append(n)
        prev = n
    return tuple(out)


class ClaimFailure(Exception):
    """Two segments linked to the same vertex differ (or do not align)."""

    def __init__(self, vertex: str, first, second, reason: str = "segments differ"):
        super().__init__(f"{reason} for {vertex}: {first} vs {second}")
        self.vertex = vertex
        self.first = first
        self.second = second


def _segments(letters: Word, heights: dict[str, int]) -> list[int]:
    cuts = [0]
    for a in letters:
        cuts.append(cuts[-1] + heights[a])
    return cuts


def push_up(ms: MorphismSequence, i: int, ell: int) -> MorphismSequence:
    """Move ``eta_{i+1}`` down from level ``n_{i+1}`` to ``ell``.

    Each vertex ``u`` on level `ell` receives the segment of
    ``eta_{i+1}(w)`` covering the root paths routed through an occurrence
    of ``u`` in the expansion of ``w``.  Raises :class:`ClaimFailure` when
    two occurrences give different segments or a segment boundary falls
    inside a letter.
    """
    B, C = ms.source, ms.target
    if not 0 <= i < ms.m:
        raise IndexError(f"index {i} outside 0..{ms.m - 1}")
    lo, hi = ms.levels[i], ms.levels[i + 1]
    if not lo < ell < hi:
        raise PreconditionError(f"level {ell} must lie strictly between {lo} and {hi}")
    images = [C.word(i + 1, v) for v in C.levels[i + 1]]
    # level 1 always hangs from the root by repeated words; distinctness matters above it
    if i >= 1 and len(set(images)) != len(images):
        raise PreconditionError(f"target level {i + 1} has repeated source words; insert a word level first")
    ers_b, xs = is_ers(B)
    ers_c, ts = is_ers(C)
    if ers_b and ers_c:
        need = math.prod(ts[:i + 1])
        have = math.prod(xs[:ell])
        if have % need:
            raise PreconditionError(f"{need} does not divide {have}")
    hb = B.heights[ell]
    hc = C.heights[i + 1]
    expand = compose(B, ell, hi)
    alpha: dict[str, Word] = {}
    where: dict[str, tuple[str, int]] = {}
    for w in B.levels[hi]:
        img = ms.maps[i + 1][w]
        cuts = _segments(img, hc)
        at = {c: k for k, c in enumerate(cuts)}
        pos = 0
        for k, u in enumerate(expand[w]):
            a, b = pos, pos + hb[u]
            pos = b
            if a not in at or b not in at:
                raise ClaimFailure(u, (w, k), (a, b), "segment boundary inside a letter")
            seg = img[at[a]:at[b]]
            if u in alpha and alpha[u] != seg:
                raise ClaimFailure(u, (where[u], "".join(alpha[u])), ((w, k), "".join(seg)))
            if u not in alpha:
                alpha[u] = seg
                where[u] = (w, k)
        if pos != cuts[-1]:
            raise ClaimFailure(w, pos, cuts[-1], "path counts disagree")
    missing = [u for u in B.levels[ell] if u not in alpha]
    if missing:
        raise PreconditionError(f"vertices {missing} on level {ell} never reach level {hi}")
    levels = ms.levels[:i + 1] + (ell,) + ms.levels[i + 2:]
    maps = ms.maps[:i + 1] + ({u: alpha[u] for u in B.levels[ell]},) + ms.maps[i + 2:]
    return MorphismSequence(B, C, levels, maps)


def split_sequence(ms: MorphismSequence, ell: int) -> MorphismSequence:
    """Symbol-split the source below ``n_1`` so that ``eta_1`` lives on level 1."""
    if ms.m < 1:
        raise ValueError("nothing to split")
    C = ms.target
    theta1_len = len(C.word(1, C.levels[1][0]))
    if any(len(C.word(1, v)) != theta1_len for v in C.levels[1]):
        raise PreconditionError("target level 1 must hang from the root by equally many edges")
    res = symbol_split(ms.source, ms.morphism(1), theta1_len, ell)
    shift = ell - 1
    levels = (0, 1) + tuple(n - shift for n in ms.levels[2:])
    maps = (ms.maps[0], res.eta1.images) + ms.maps[2:]
    return MorphismSequence(res.diagram, C, levels, maps)


@dataclass(frozen=True)
class SyncResult:
    i0: Optional[int]
    differences: tuple[int, ...]

    @property
    def found(self) -> bool:
        return self.i0 is not None


def eventual_sync_check(ms_or_levels: Union[MorphismSequence, Sequence[int]]) -> SyncResult:
    """Least index ``i0`` (1-based over ``n_1..n_m``) from which every step
    ``n_{i+1} - n_i`` equals 1; there must be at least one such step."""
    lv = list(ms_or_levels.levels[1:] if isinstance(ms_or_levels, MorphismSequence) else ms_or_levels)
    diffs = tuple(b - a for a, b in zip(lv, lv[1:]))
    i0 = None
    for start in range(len(diffs), 0, -1):
        if diffs[start - 1] == 1:
            i0 = start
        else:
            break
    return SyncResult(i0, diffs)


def induced_code(ms: MorphismSequence, i: int) -> dict[tuple[str, int], tuple[str, int]]:
    """Radius-0 code from level-``n_i`` encodings of the source to level-``i``
    encodings of the target, reading ``eta_i(w)`` as consecutive towers."""
    B, C = ms.source, ms.target
    n = ms.levels[i]
    hb, hc = B.heights[n], C.heights[i]
    code = {}
    for w in B.levels[n]:
        img = ms.maps[i][w]
        cuts = _segments(img, hc)
        if cuts[-1] != hb[w]:
            raise ValueError(f"image of {w} covers {cuts[-1]} paths, expected {hb[w]}")
        for k, v in enumerate(img):
            for h in range(hc[v]):
                code[(w, cuts[k] + h)] = (v, h)
    return code


# ---------------------------------------------------------------------------
# obstructions


class Verdict(str, Enum):
    NOT_OBSTRUCTED = "NotObstructed"
    OBSTRUCTED = "Obstructed"
    OBSTRUCTED_AT_HORIZON = "ObstructedAtHorizon"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ObstructionReport:
    verdict: Verdict
    witness: dict = field(default_factory=dict)
    horizon: Optional[int] = None
    conjugacy_compatible: Optional[bool] = None
    disclaimer: str = DISCLAIMER

    @property
    def label(self) -> str:
        if self.verdict is Verdict.OBSTRUCTED_AT_HORIZON:
            return f"{self.verdict.value}({self.horizon})"
        return self.verdict.value

    def to_dict(self) -> dict:
        return {
            "verdict": self.label,
            "witness": self.witness,
            "horizon": self.horizon,
            "conjugacy_compatible": self.conjugacy_compatible,
            "disclaimer": self.disclaimer,
        }


def theorem_main_check(p: int, q: int) -> ObstructionReport:
    """Structures ``(p^i)`` on the source and ``(q^i)`` on the factor: a
    factor map needs ``q | p``, a conjugacy needs ``p == q``."""
    if p < 2 or q < 2:
        raise ValueError("bases must be at least 2")
    ok = p % q == 0
    return ObstructionReport(
        Verdict.NOT_OBSTRUCTED if ok else Verdict.OBSTRUCTED,
        {"p": p, "q": q, "remainder": p % q},
        None,
        p == q,
    )


def general_obstruction_scan(ps: Sequence[int], qs: Sequence[int], horizon: int) -> ObstructionReport:
    """Search an offset ``i0 < horizon`` with ``q_i | p_{i0+i}`` for ``i = 1..horizon``."""
    H = horizon
    if H < 1:
        raise ValueError("horizon must be positive")
    if len(qs) < H or len(ps) < 2 * H - 1:
        raise ValueError(f"horizon {H} needs {H} factor periods and {2 * H - 1} source periods")
    failures = {}
    for i0 in range(H):
        bad = next((i for i in range(1, H + 1) if ps[i0 + i - 1] % qs[i - 1]), None)
        if bad is None:
            return ObstructionReport(Verdict.NOT_OBSTRUCTED, {"i0": i0}, H)
        failures[i0] = bad
    return ObstructionReport(Verdict.OBSTRUCTED_AT_HORIZON, {"first_failure": failures}, H)


def mult_independent(p: int, q: int) -> bool:
    """True iff ``p**m == q**n`` has no solution with ``m, n >= 1``.

    Dependent numbers are powers of a common base, so the smaller always
    divides the larger and the quotient stays dependent with it.
    """
    if p < 2 or q < 2:
        raise ValueError("need p, q >= 2")
    while p != q:
        if p < q:
            p, q = q, p
        if p % q:
            return True
        p //= q
    return False


@dataclass(frozen=True)
class CobhamReport:
    substitutions: tuple[dict, ...]
    independent: bool
    failed: tuple[str, ...]
    verdict: str

    @property
    def applies(self) -> bool:
        return not self.failed

    def to_dict(self) -> dict:
        return {"substitutions": list(self.substitutions), "independent": self.independent,
                "failed": list(self.failed), "applies": self.applies, "verdict": self.verdict}


def cobham_gate(theta_p: Substitution, theta_q: Substitution) -> CobhamReport:
    """Check the hypotheses under which a sequence automatic in two
    multiplicatively independent lengths can only generate a finite shift."""
    rows = []
    failed = []
    for tag, th in (("first", theta_p), ("second", theta_q)):
        prim = is_primitive(th)
        coinc, wit = has_coincidence(th)
        rows.append({"substitution": str(th), "length": th.length, "primitive": prim,
                     "coincidence": coinc, "witness": list(wit) if wit else None})
        if not prim:
            failed.append(f"{tag} substitution is not primitive")
        if not coinc:
            failed.append(f"{tag} substitution has no coincidence")
    indep = mult_independent(theta_p.length, theta_q.length)
    if not indep:
        failed.append(f"lengths {theta_p.length} and {theta_q.length} are multiplicatively dependent")
    verdict = ("Cobham gate passes: any sequence automatic for both must generate a finite shift"
               if not failed else "withheld: " + "; ".join(failed))
    return CobhamReport(tuple(rows), indep, tuple(failed), verdict)
