import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from fixtures_data import PD, diagram, non_ers_example, pd_diagram, pd_tower, pushup_example, split_example
from oracles import grid_blocks, image_closure, iterate_fixed_point
from strategies import ers_diagrams
from tbv.bratteli import (
    DiagramError,
    LevelMorphism,
    PreconditionError,
    adjacency_matrix,
    bv_auto,
    bv_from_tower,
    compose,
    count_paths_between,
    insert_word_level,
    is_ers,
    is_simple,
    min_max_same_source,
    symbol_split,
    telescope,
    validate,
)
from tbv.substitution import Substitution, tower_from_substitution
from tbv.toeplitz import StructureInvariantViolation, constructive_structure

TWO_LEVEL = diagram([["root"], ["a", "b"], ["c"]], [{"a": ["root"], "b": ["root", "root"]}, {"c": ["a", "b", "a"]}])


def kinds(D):
    return [(d.kind, d.level, d.vertex) for d in validate(D)]


def test_validate_examples():
    assert validate(TWO_LEVEL) == []
    D = diagram([["root"], ["a", "b"], ["c"]], [{"a": ["root"], "b": []}, {"c": ["a", "b"]}])
    assert kinds(D) == [("EmptyRange", 1, "b")]
    D = diagram([["root"], ["a", "b"], ["c"]], [{"a": ["root"], "b": ["root"]}, {"c": ["a"]}])
    assert kinds(D) == [("DeadSource", 1, "b")]
    D = diagram([["root"], ["a"]], [{"a": ["zz"]}])
    assert ("UnknownSource", 1, "a") in kinds(D)
    D = diagram([["root"], ["root"]], [{"root": ["root"]}])
    assert ("DuplicateVertex", 1, "root") in kinds(D)
    D = diagram([["r1", "r2"], ["a"]], [{"a": ["r1", "r2"]}])
    assert ("RootLevel", 0, None) in kinds(D)


def test_constructor_shape_errors():
    with pytest.raises(DiagramError):
        diagram([["root"], ["a"]], [])
    with pytest.raises(DiagramError):
        diagram([], [])


def test_adjacency_examples():
    D = diagram([["root"], ["w"], ["v"]], [{"w": ["root"]}, {"v": ["w", "w"]}])
    assert adjacency_matrix(D, 2).tolist() == [[2]]
    assert adjacency_matrix(TWO_LEVEL, 2).tolist() == [[2, 1]]
    B, _, _ = split_example()
    # two levels collapsed: four finite paths into each top vertex
    assert adjacency_matrix(telescope(B, [1, 3]), 2).sum(axis=1).tolist() == [4, 4]
    with pytest.raises(IndexError):
        adjacency_matrix(diagram([["root"]], []), 1)


def test_is_ers_examples():
    assert is_ers(pd_diagram(5)) == (True, [2, 2, 2, 2, 2])
    ers, sums = is_ers(non_ers_example().source)
    assert not ers and sums == [1, None, 2]
    chain = diagram([["root"], ["a"], ["b"]], [{"a": ["root"]}, {"b": ["a"]}])
    assert is_ers(chain) == (True, [1, 1])


def test_is_simple_examples():
    rep = is_simple(pd_diagram(6))
    assert rep and not rep.shallow and rep.windows
    chains = diagram([["root"], ["a", "b"], ["c", "d"], ["e", "f"]],
                     [{"a": ["root"], "b": ["root"]}, {"c": ["a"], "d": ["b"]}, {"e": ["c"], "f": ["d"]}])
    assert not is_simple(chains)
    shallow = is_simple(diagram([["root"], ["a"]], [{"a": ["root"]}]))
    assert shallow and shallow.shallow


def test_compose_examples():
    D = pd_diagram(4)
    assert compose(D, 1, 2) == D.theta[1]
    assert {len(w) for w in compose(D, 0, 3).values()} == {8}
    C = pushup_example().target
    assert compose(C, 1, 2)["v1'"] == ("v1", "v1", "v2")
    assert compose(C, 0, 2)["v2'"] == ("root",) * 3
    with pytest.raises(IndexError):
        compose(D, 2, 2)


def test_telescope_examples():
    D = pd_diagram(6)
    assert telescope(D, [1, 2, 3, 4, 5, 6]) == D
    T = telescope(D, [2, 4, 6])
    assert is_ers(T) == (True, [4, 4, 4])
    top = telescope(D, [6])
    assert is_ers(top) == (True, [64])
    assert top.heights[1] == D.heights[6]
    for bad in ([], [2, 2], [0, 1], [7]):
        with pytest.raises(ValueError):
            telescope(D, bad)


def test_min_max_same_source_examples():
    D = pd_diagram(6)
    assert all(min_max_same_source(D, i)[0] for i in range(2, 7))
    assert min_max_same_source(TWO_LEVEL, 2) == (True, True)
    D2 = diagram([["root"], ["a", "b"], ["c", "d"]],
                 [{"a": ["root"], "b": ["root"]}, {"c": ["a", "b"], "d": ["b", "a"]}])
    assert min_max_same_source(D2, 2) == (False, False)


def test_bv_from_tower_pd_depth3():
    res = bv_from_tower(pd_tower(8), 128, 3)
    D = res.diagram
    assert res.stable and res.warnings == ()
    assert [len(lv) for lv in D.levels] == [1, 2, 2, 2]
    assert is_ers(D) == (True, [2, 2, 2])
    assert {D.labels[v] for v in D.levels[1]} == {"ab", "aa"}
    assert [D.labels[v] for v in D.min_path[1:]] == ["ab", "abaa", "abaaabab"]
    # exact vertex sets: the n-th level holds the blocks theta^n(letter)
    for n in (1, 2, 3):
        assert {D.labels[v] for v in D.levels[n]} == image_closure(PD.images, n)
    assert validate(D) == []


def test_bv_from_tower_grid_blocks_oracle():
    x = iterate_fixed_point(PD.images, "a", 256)
    D = bv_from_tower(pd_tower(9), 256, 4).diagram
    for n, p in enumerate((2, 4, 8, 16), start=1):
        assert [D.labels[v] for v in D.levels[n]] == grid_blocks(x, p)


def test_bv_from_tower_depth1_and_warnings():
    D = bv_from_tower(pd_tower(6), 32, 1).diagram
    assert D.depth == 1 and D.word(1, D.levels[1][0]) == ("root", "root")
    res = bv_from_tower(pd_tower(6), 16, 3)
    assert not res.stable and res.warnings[0].startswith("Unstable(16)")
    with pytest.raises(ValueError):
        bv_from_tower(pd_tower(6), 12, 3)


def test_periodic_input_rejected_upstream():
    from tbv.toeplitz import SkeletonTower, Stage
    from tbv.words import Alphabet, PartialWord
    t = SkeletonTower(Alphabet(("a", "b")), (Stage(2, PartialWord.from_text("ab")),))
    with pytest.raises(StructureInvariantViolation):
        bv_from_tower(t, 8, 2)


@pytest.mark.parametrize("rules", ["a=ab,b=aa", "a=aba,b=abb", "a=abca,b=acba,c=abba"])
def test_bv_row_sums_are_period_ratios(rules):
    s = Substitution.parse(rules)
    t = tower_from_substitution(s, {2: 8, 3: 6, 4: 5}[s.length])
    ps = constructive_structure(t, 3).periods
    res = bv_auto(t, 3)
    assert res.window >= 2 * ps[-1]
    D = res.diagram
    ers, sums = is_ers(D)
    assert ers and sums == [ps[0]] + [b // a for a, b in zip(ps, ps[1:])]


def test_symbol_split_worked_example():
    B, _, eta1 = split_example()
    res = symbol_split(B, eta1, 1, 1)
    B2 = res.diagram
    assert validate(B2) == []
    by_origin = {}
    for nm, (u, word) in res.provenance.items():
        by_origin.setdefault(u, []).append(word)
    assert len(by_origin["w1"]) == 3 and len(by_origin["w2"]) == 3
    assert by_origin["dw1"] == [("v", "v'"), ("v'", "v")]
    assert by_origin["dw2"] == [("v", "v''"), ("v''", "v'")]
    assert B2.total_paths() == B.total_paths() == 8
    # one root edge per vertex, so the new first map is letter-to-letter
    assert all(len(w) == 1 for w in res.eta1.images.values())


def test_symbol_split_trivial_and_errors():
    B, _, _ = split_example()
    same = LevelMorphism(3, 1, {"ddw1": ("v",) * 4, "ddw2": ("v",) * 4})
    res = symbol_split(B, same, 1, 1)
    assert [len(lv) for lv in res.diagram.levels] == [len(lv) for lv in B.levels]
    with pytest.raises(PreconditionError):
        symbol_split(B, same, 3, 1)  # 1 root path is not a multiple of 3
    with pytest.raises(PreconditionError):
        symbol_split(B, LevelMorphism(3, 1, {"ddw1": ("v",), "ddw2": ("v",) * 4}), 1, 1)
    with pytest.raises(PreconditionError):
        symbol_split(non_ers_example().source, LevelMorphism(3, 1, {"z1": ("c",) * 11, "z2": ("c",) * 11}), 1, 1)


def test_insert_word_level_examples():
    D = diagram([["root"], ["a", "b"], ["c", "d", "e"]],
                [{"a": ["root"], "b": ["root"]}, {"c": ["a", "b"], "d": ["a", "b"], "e": ["b", "a"]}])
    D2, changed = insert_word_level(D, 2)
    assert changed and len(D2.levels[2]) == 2 and D2.depth == 3
    assert D2.heights[3] == D.heights[2]
    assert validate(D2) == []
    P = pd_diagram(5)
    assert all(insert_word_level(P, i) == (P, False) for i in range(2, 6))
    with pytest.raises(IndexError):
        insert_word_level(D, 1)


@settings(max_examples=80, deadline=None)
@given(ers_diagrams(), st.data())
def test_telescope_preserves_paths_and_ers(D, data):
    assume(validate(D) == [])
    cuts = sorted(data.draw(st.sets(st.integers(1, D.depth), min_size=1)))
    T = telescope(D, cuts)
    for k, m in enumerate(cuts, start=1):
        assert T.heights[k] == D.heights[m]
    _, sums = is_ers(D)
    bounds = [0] + cuts
    assert is_ers(T) == (True, [math.prod(sums[a:b]) for a, b in zip(bounds, bounds[1:])])


@settings(max_examples=80, deadline=None)
@given(ers_diagrams(min_depth=2), st.data())
def test_insert_word_level_preserves_paths(D, data):
    assume(validate(D) == [])
    i = data.draw(st.integers(2, D.depth))
    D2, changed = insert_word_level(D, i)
    assert validate(D2) == []
    assert D2.heights[-1] == D.heights[-1]
    words = {D.word(i, v) for v in D.levels[i]}
    assert changed == (len(words) < len(D.levels[i]))


def linked_words_by_path(B, eta, ell, n1):
    """Oracle: walk every path from level ell up to n1 and cut the image."""
    from tbv.bratteli import compose as comp
    out = []
    seg = {w: None for w in B.levels[n1]}
    exp = comp(B, ell, n1)
    for w in B.levels[n1]:
        img = eta[w]
        L = len(img) // len(exp[w])
        for k, u in enumerate(exp[w]):
            out.append((u, tuple(img[k * L:(k + 1) * L])))
    return out


@settings(max_examples=120, deadline=None)
@given(ers_diagrams(min_depth=2, max_depth=4), st.data())
def test_symbol_split_path_claim(B, data):
    assume(validate(B) == [])
    n1 = data.draw(st.integers(2, B.depth))
    ell = data.draw(st.integers(1, n1 - 1))
    _, sums = is_ers(B)
    xi_ell = math.prod(sums[:ell])
    t = data.draw(st.sampled_from([d for d in range(1, xi_ell + 1) if xi_ell % d == 0]))
    width = data.draw(st.integers(1, 3))
    letters = [f"c{k}" for k in range(width)]
    length = math.prod(sums[:n1]) // t
    eta = {w: tuple(data.draw(st.lists(st.sampled_from(letters), min_size=length, max_size=length)))
           for w in B.levels[n1]}
    res = symbol_split(B, LevelMorphism(n1, 1, eta), t, ell)
    B2 = res.diagram
    assert validate(B2) == []
    assert B2.heights[n1 - ell + 1] == B.heights[n1]
    pairs = linked_words_by_path(B, eta, ell, n1)
    n_paths = count_paths_between(B, ell, n1)
    assert len(pairs) == n_paths
    assert len(B2.levels[1]) == len(set(pairs)) <= n_paths
    assert (len(B2.levels[1]) == n_paths) == (len(set(pairs)) == len(pairs))
