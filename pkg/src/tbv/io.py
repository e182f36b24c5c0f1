"""JSON, DOT and CSV serialization.

JSON is written with two-space indentation, keys in insertion order and a
trailing newline, so ``dumps(from_dict(loads(s))) == s`` for anything this
module wrote.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Optional

from .bratteli import OrderedBratteliDiagram
from .factoring import MorphismSequence
from .substitution import Substitution
from .toeplitz import SkeletonTower, Stage
from .vershik import OrbitWord
from .words import Alphabet, PartialWord


class SchemaError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def loads(text: str, source: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}:{exc.lineno}:{exc.colno}", exc.msg) from None


def read_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), path)


def _need(d: Any, key: str, kind, where: str):
    if not isinstance(d, dict):
        raise SchemaError(where, "expected an object")
    if key not in d:
        raise SchemaError(f"{where}.{key}", "missing field")
    val = d[key]
    if not isinstance(val, kind):
        raise SchemaError(f"{where}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return val


def _str_list(val: Any, where: str) -> list[str]:
    if not isinstance(val, list) or not all(isinstance(x, str) for x in val):
        raise SchemaError(where, "expected a list of strings")
    return val


# --- substitutions -----------------------------------------------------------

def substitution_to_dict(s: Substitution) -> dict:
    return {"alphabet": list(s.alphabet.symbols), "images": dict(s.images)}


def substitution_from_dict(d: Any, where: str = "$") -> Substitution:
    alpha = _str_list(_need(d, "alphabet", list, where), f"{where}.alphabet")
    images = _need(d, "images", dict, where)
    if not all(isinstance(v, str) for v in images.values()):
        raise SchemaError(f"{where}.images", "images must be strings")
    try:
        return Substitution(Alphabet(tuple(alpha)), images)
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None


# --- towers ------------------------------------------------------------------

def tower_to_dict(t: SkeletonTower) -> dict:
    return {"alphabet": list(t.alphabet.symbols),
            "stages": [{"p": st.p, "cells": str(st.cells)} for st in t.stages]}


def tower_from_dict(d: Any, where: str = "$") -> SkeletonTower:
    alpha = _str_list(_need(d, "alphabet", list, where), f"{where}.alphabet")
    stages = []
    for k, st in enumerate(_need(d, "stages", list, where)):
        w = f"{where}.stages[{k}]"
        p = _need(st, "p", int, w)
        cells = _need(st, "cells", str, w)
        try:
            stages.append(Stage(p, PartialWord.from_text(cells)))
        except ValueError as exc:
            raise SchemaError(w, str(exc)) from None
    try:
        return SkeletonTower(Alphabet(tuple(alpha)), tuple(stages))
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None


# --- diagrams ----------------------------------------------------------------

def diagram_to_dict(D: OrderedBratteliDiagram) -> dict:
    out: dict[str, Any] = {
        "levels": [list(lv) for lv in D.levels],
        "theta": [{v: list(th[v]) for v in lv if v in th} for lv, th in zip(D.levels[1:], D.theta)],
        "labels": dict(D.labels),
    }
    if D.min_path is not None:
        out["min_path"] = list(D.min_path)
    return out


def diagram_from_dict(d: Any, where: str = "$") -> OrderedBratteliDiagram:
    levels = [tuple(_str_list(lv, f"{where}.levels[{i}]"))
              for i, lv in enumerate(_need(d, "levels", list, where))]
    theta = []
    for i, th in enumerate(_need(d, "theta", list, where)):
        if not isinstance(th, dict):
            raise SchemaError(f"{where}.theta[{i}]", "expected an object")
        theta.append({v: tuple(_str_list(w, f"{where}.theta[{i}].{v}")) for v, w in th.items()})
    labels = d.get("labels", {})
    if not isinstance(labels, dict) or not all(isinstance(x, str) for x in labels.values()):
        raise SchemaError(f"{where}.labels", "expected an object of strings")
    mp = d.get("min_path")
    if mp is not None:
        mp = tuple(_str_list(mp, f"{where}.min_path"))
    try:
        return OrderedBratteliDiagram(tuple(levels), tuple(theta), labels, mp)
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None


# --- morphism sequences --------------------------------------------------------

def morphisms_to_dict(ms: MorphismSequence, embed: bool = True) -> dict:
    out: dict[str, Any] = {"levels": list(ms.levels),
                           "maps": [{w: list(img) for w, img in m.items()} for m in ms.maps]}
    if embed:
        out["source"] = diagram_to_dict(ms.source)
        out["target"] = diagram_to_dict(ms.target)
    return out


def morphisms_from_dict(d: Any, source: Optional[OrderedBratteliDiagram] = None,
                        target: Optional[OrderedBratteliDiagram] = None,
                        where: str = "$") -> MorphismSequence:
    levels = _need(d, "levels", list, where)
    if not all(isinstance(n, int) for n in levels):
        raise SchemaError(f"{where}.levels", "expected integers")
    maps = []
    for i, m in enumerate(_need(d, "maps", list, where)):
        if not isinstance(m, dict):
            raise SchemaError(f"{where}.maps[{i}]", "expected an object")
        maps.append({w: tuple(_str_list(img, f"{where}.maps[{i}].{w}")) for w, img in m.items()})
    if source is None:
        source = diagram_from_dict(_need(d, "source", dict, where), f"{where}.source")
    if target is None:
        target = diagram_from_dict(_need(d, "target", dict, where), f"{where}.target")
    try:
        return MorphismSequence(source, target, tuple(levels), tuple(maps))
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None


# --- DOT and CSV -----------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(D: OrderedBratteliDiagram, name: str = "bratteli") -> str:
    """Graphviz source: one rank per level, edges labelled by their order
    index, minimal edges bold and maximal edges dashed."""
    lines = [f"digraph {_q(name)} {{", "  rankdir=BT;", "  node [shape=circle];"]
    for i, lv in enumerate(D.levels):
        names = " ".join(_q(v) for v in lv)
        lines.append(f"  {{ rank=same; {names} }}")
        for v in lv:
            lab = D.labels.get(v)
            text = v if lab is None else f"{v}: {lab}"
            lines.append(f"  {_q(v)} [label={_q(text)}];")
    for i in range(1, D.depth + 1):
        for v in D.levels[i]:
            w = D.word(i, v)
            for e, u in enumerate(w):
                attrs = [f"label={_q(str(e))}"]
                if e == 0:
                    attrs.append("style=bold")
                elif e == len(w) - 1:
                    attrs.append("style=dashed")
                lines.append(f"  {_q(u)} -> {_q(v)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def orbit_csv(D: OrderedBratteliDiagram, orbit: OrbitWord) -> str:
    """Columns: step, vertex label (name when unlabeled), height, letter.

    For tower-built diagrams the letter is the block label read at the height.
    """
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["step", "vertex", "height", "letter"])
    for n, (v, h) in enumerate(orbit.entries):
        lab = D.labels.get(v)
        letter = lab[h] if lab is not None and h < len(lab) else ""
        wr.writerow([n, lab if lab is not None else v, h, letter])
    return buf.getvalue()
