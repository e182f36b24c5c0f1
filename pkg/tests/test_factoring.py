import math

import pytest
import sympy
from hypothesis import assume, given, settings, strategies as st

from fixtures_data import (
    diagram,
    non_ers_example,
    pd_diagram,
    pushup_example,
    shift_realization,
    split_sequence_example,
)
from strategies import ers_diagrams
from tbv.bratteli import PreconditionError, compose, telescope, validate
from tbv.factoring import (
    ClaimFailure,
    MorphismSequence,
    Unreachable,
    Verdict,
    cobham_gate,
    eventual_sync_check,
    general_obstruction_scan,
    identity_realization,
    induced_code,
    mult_independent,
    optimal_levels,
    push_up,
    split_sequence,
    theorem_main_check,
    verify_squares,
)
from tbv.substitution import Substitution
from tbv.vershik import min_prefix, orbit_word


def pd_power_realization(depth, spare=0):
    """PD diagram of depth ``2*depth + spare`` onto PD of `depth` with n_i = 2i."""
    B = pd_diagram(2 * depth + spare)
    C = telescope(B, list(range(1, depth + 1)))
    maps = [{"root": ("root",)}] + [compose(B, i, 2 * i) for i in range(1, depth + 1)]
    return MorphismSequence(B, C, tuple(2 * i for i in range(depth + 1)), tuple(maps))


def test_verify_identity_and_examples():
    assert verify_squares(identity_realization(pd_diagram(5))) == []
    assert verify_squares(shift_realization(pd_diagram(6))) == []
    assert verify_squares(pushup_example()) == []
    assert verify_squares(pd_power_realization(3)) == []


def test_verify_reports_perturbation():
    ms = pushup_example()
    maps = [dict(m) for m in ms.maps]
    img = list(maps[2]["w''"])
    img[4] = "v1'"
    maps[2]["w''"] = tuple(img)
    diags = verify_squares(MorphismSequence(ms.source, ms.target, ms.levels, tuple(maps)))
    assert [(d.kind, d.vertex) for d in diags] == [("SquareMismatch", "w''")]


def test_verify_structural_diagnostics():
    ms = pushup_example()
    maps = [dict(m) for m in ms.maps]
    maps[0] = {"root": ("v1",)}
    maps[1] = {"u1": (), "u2": ("zz",)}
    kinds = {d.kind for d in verify_squares(MorphismSequence(ms.source, ms.target, ms.levels, tuple(maps)))}
    assert {"RootMap", "Erasing", "ForeignLetter", "NotSurjective"} <= kinds
    bad = MorphismSequence(ms.source, ms.target, (0, 3, 1), ms.maps)
    assert [d.kind for d in verify_squares(bad)] == ["BadLevels"]


def test_min_source_check():
    D = pd_diagram(4)
    ms = identity_realization(D)
    maps = [dict(m) for m in ms.maps]
    a, b = D.levels[2]
    maps[2] = {a: (b,), b: (a,)}
    kinds = [d.kind for d in verify_squares(MorphismSequence(D, D, ms.levels, tuple(maps)))]
    assert "MinSource" in kinds


def test_optimal_levels_examples():
    assert optimal_levels([2] * 10, [4] * 5, 5) == (2, 4, 6, 8, 10)
    assert optimal_levels([6] * 5, [4, 9], 2) == (2, 3)
    assert optimal_levels([3, 5, 7], [3, 5, 7], 3) == (1, 2, 3)
    with pytest.raises(Unreachable) as exc:
        optimal_levels([2] * 5, [3], 1)
    assert exc.value.i == 1


@settings(max_examples=150)
@given(st.lists(st.integers(1, 12), min_size=1, max_size=8), st.lists(st.integers(1, 6), min_size=1, max_size=4))
def test_optimal_levels_minimal_by_scan(xs, ts):
    m = len(ts)
    try:
        got = optimal_levels(xs, ts, m)
    except Unreachable as exc:
        got = None
        failing = exc.i
    # exhaustive scan over all increasing assignments
    import itertools
    valid = [c for c in itertools.combinations(range(1, len(xs) + 1), m)
             if all(math.prod(xs[:n]) % math.prod(ts[:i + 1]) == 0 for i, n in enumerate(c))]
    if got is None:
        assert not valid
        return
    assert got in valid
    assert all(all(g <= v for g, v in zip(got, c)) for c in valid)


def test_push_up_worked_example():
    ms = pushup_example()
    new = push_up(ms, 1, 2)
    assert new.levels == (0, 1, 2)
    assert new.maps[2] == {"w'1": ("v2'", "v2'", "v1'"), "w'2": ("v2'", "v1'", "v1'")}
    assert verify_squares(new) == []


def test_push_up_non_ers_claim_failure():
    ms = non_ers_example()
    assert verify_squares(ms) == []
    with pytest.raises(ClaimFailure) as exc:
        push_up(ms, 1, 2)
    assert exc.value.vertex == "w1"


def test_push_up_preconditions():
    ms = pushup_example()
    with pytest.raises(PreconditionError):
        push_up(ms, 1, 3)
    with pytest.raises(IndexError):
        push_up(ms, 2, 3)
    # repeated source words on the target level
    C = ms.target
    theta = [dict(th) for th in C.theta]
    theta[1]["v2'"] = theta[1]["v1'"]
    C2 = diagram(C.levels, theta)
    with pytest.raises(PreconditionError):
        push_up(MorphismSequence(ms.source, C2, ms.levels, ms.maps), 1, 2)


def test_push_up_power_realization_keeps_induced_orbits():
    ms = pd_power_realization(5, spare=1)
    B = ms.source
    start = min_prefix(B, B.depth)
    for i in range(ms.m):
        hi = ms.levels[i + 1]
        ell = hi - 1
        new = push_up(ms, i, ell)
        assert verify_squares(new) == []
        window = 2 * B.heights[hi][B.min_path[hi]]
        before = [induced_code(ms, i + 1)[e] for e in orbit_word(B, start, window, hi).entries]
        after = [induced_code(new, i + 1)[e] for e in orbit_word(B, start, window, ell).entries]
        assert before == after
        ms = new
    assert ms.levels == (0, 1, 3, 5, 7, 9)


def test_push_up_identity_semantics_unchanged():
    ms = pd_power_realization(3)
    new = push_up(ms, 1, 3)
    assert verify_squares(new) == []
    assert new.maps[:2] == ms.maps[:2] and new.maps[3:] == ms.maps[3:]


def test_eventual_sync_examples():
    assert eventual_sync_check([2, 4, 5, 6, 7]).i0 == 2
    assert not eventual_sync_check([2, 4, 6, 8]).found
    assert eventual_sync_check(identity_realization(pd_diagram(5))).i0 == 1
    assert eventual_sync_check(shift_realization(pd_diagram(6))).i0 == 1


def test_split_sequence_worked_example():
    new = split_sequence(split_sequence_example(), 1)
    assert new.levels == (0, 1)
    assert verify_squares(new) == []
    assert len(new.source.levels[1]) == 6


def test_theorem_main_check_examples():
    assert theorem_main_check(12, 6).verdict is Verdict.NOT_OBSTRUCTED
    assert theorem_main_check(6, 12).verdict is Verdict.OBSTRUCTED
    r = theorem_main_check(8, 8)
    assert r.verdict is Verdict.NOT_OBSTRUCTED and r.conjugacy_compatible
    assert r.disclaimer


@given(st.integers(2, 200), st.integers(2, 200))
def test_conjugacy_direction_consistency(p, q):
    both = (theorem_main_check(p, q).verdict is Verdict.NOT_OBSTRUCTED
            and theorem_main_check(q, p).verdict is Verdict.NOT_OBSTRUCTED)
    assert both == (p == q)


def test_general_scan_examples():
    pw = lambda b, n, s=0: [b ** (i + s) for i in range(1, n + 1)]  # noqa: E731
    r = general_obstruction_scan(pw(4, 19), pw(2, 10), 10)
    assert r.verdict is Verdict.NOT_OBSTRUCTED and r.witness["i0"] == 0
    r = general_obstruction_scan(pw(6, 19), pw(12, 10), 10)
    assert r.verdict is Verdict.OBSTRUCTED_AT_HORIZON and r.label == "ObstructedAtHorizon(10)"
    r = general_obstruction_scan(pw(2, 19, 3), pw(2, 10), 10)
    assert r.witness["i0"] == 0
    r = general_obstruction_scan(pw(2, 19), pw(2, 10, 2), 10)
    assert r.witness["i0"] == 2
    with pytest.raises(ValueError):
        general_obstruction_scan(pw(2, 5), pw(2, 10), 10)


def test_mult_independent_examples():
    assert mult_independent(2, 3)
    assert not mult_independent(4, 8)
    assert mult_independent(6, 12)
    assert not mult_independent(9, 9)
    with pytest.raises(ValueError):
        mult_independent(1, 4)


@given(st.integers(2, 5000), st.integers(2, 5000))
def test_mult_independent_matches_exponent_vectors(p, q):
    fp, fq = sympy.factorint(p), sympy.factorint(q)
    primes = sorted(set(fp) | set(fq))
    a = [fp.get(r, 0) for r in primes]
    b = [fq.get(r, 0) for r in primes]
    parallel = all(a[i] * b[j] == a[j] * b[i] for i in range(len(primes)) for j in range(len(primes)))
    assert mult_independent(p, q) == (not parallel)


@given(st.integers(2, 30), st.integers(1, 6), st.integers(1, 6))
def test_powers_of_common_base_are_dependent(r, m, n):
    assert not mult_independent(r**m, r**n)


def test_cobham_gate_examples():
    pd = Substitution.parse("a=ab,b=aa")
    rep = cobham_gate(pd, Substitution.parse("a=aab,b=bab"))
    assert rep.applies and rep.verdict.startswith("Cobham gate passes")
    rep = cobham_gate(Substitution.parse("a=ab,b=ba"), pd)
    assert not rep.applies and any("coincidence" in f for f in rep.failed)
    rep = cobham_gate(Substitution.parse("a=abaa,b=aaab"), Substitution.parse("a=abaaabab,b=aaaaaaab"))
    assert not rep.independent and not rep.applies


@settings(max_examples=60, deadline=None)
@given(ers_diagrams(min_depth=3, max_depth=5), st.data())
def test_squares_compose(B, data):
    assume(validate(B) == [])
    cuts = sorted(data.draw(st.sets(st.integers(1, B.depth), min_size=2)))
    C = telescope(B, cuts)
    maps = [{"root": ("root",)}] + [{w: (w,) for w in B.levels[c]} for c in cuts]
    ms = MorphismSequence(B, C, (0,) + tuple(cuts), tuple(maps))
    assert verify_squares(ms) == []
    # drop one intermediate level on both sides: the composed square must still commute
    k = data.draw(st.integers(1, len(cuts) - 1))
    C2 = telescope(C, [j for j in range(1, C.depth + 1) if j != k])
    ms2 = MorphismSequence(B, C2, ms.levels[:k] + ms.levels[k + 1:], ms.maps[:k] + ms.maps[k + 1:])
    assert verify_squares(ms2) == []
    # per-square sync: identity realizations always stabilise
    assert eventual_sync_check(identity_realization(B)).i0 == 1
