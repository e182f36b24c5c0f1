"""Hypothesis strategies for random ordered diagrams."""

from hypothesis import strategies as st

from tbv.bratteli import OrderedBratteliDiagram


@st.composite
def ers_diagrams(draw, max_depth=4, max_width=3, max_row=3, min_depth=1):
    depth = draw(st.integers(min_depth, max_depth))
    levels = [("root",)]
    theta = []
    for i in range(1, depth + 1):
        width = draw(st.integers(1, max_width))
        names = tuple(f"n{i}_{k}" for k in range(width))
        below = levels[-1]
        r = draw(st.integers(max(1, -(-len(below) // width)), max(max_row, -(-len(below) // width))))
        words = []
        for _ in names:
            words.append(draw(st.lists(st.sampled_from(below), min_size=r, max_size=r)))
        # make every source used: overwrite positions round-robin
        for j, u in enumerate(below):
            words[j % width][j // width] = u
        theta.append({v: tuple(w) for v, w in zip(names, words)})
        levels.append(names)
    return OrderedBratteliDiagram(tuple(levels), tuple(theta))
