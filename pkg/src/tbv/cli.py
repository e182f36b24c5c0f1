"""Command-line front end.

Exit status: 0 success, 1 the tool ran but the verdict is negative
(obstructed, squares failing, gate withheld), 2 bad input.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, io
from .bratteli import bv_from_tower, is_ers, is_simple, telescope, validate
from .factoring import (
    cobham_gate,
    general_obstruction_scan,
    mult_independent,
    split_sequence,
    theorem_main_check,
    verify_squares,
    Verdict,
)
from .substitution import (
    Substitution,
    has_coincidence,
    is_primitive,
    tower_from_substitution,
)
from .toeplitz import (
    IncompleteTower,
    SkeletonTower,
    StructureInvariantViolation,
    constructive_structure,
    fill_prefix,
    toeplitz_window_check,
)
from .vershik import Truncated, min_prefix, orbit_word

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2
MAX_CELLS = 1 << 22


class InputError(Exception):
    pass


def max_depth() -> int:
    raw = os.environ.get("TBV_MAX_DEPTH", "")
    try:
        return int(raw) if raw else 24
    except ValueError:
        raise InputError(f"TBV_MAX_DEPTH must be an integer, got {raw!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def load_substitution(arg: str) -> Substitution:
    if Path(arg).is_file():
        return io.substitution_from_dict(io.read_json(arg), arg)
    if "=" in arg:
        return Substitution.parse(arg)
    raise InputError(f"{arg!r} is neither a file nor an inline substitution like a=ab,b=aa")


def _check_depth(depth: int) -> int:
    if depth < 1:
        raise InputError("--depth must be at least 1")
    cap = max_depth()
    if depth > cap:
        raise InputError(f"--depth {depth} exceeds TBV_MAX_DEPTH={cap}")
    return depth


def tower_for(args, levels: int, window: int = 0) -> SkeletonTower:
    """The tower from --tower, or the shallowest substitution tower deep
    enough for `levels` structure levels and a filled prefix of `window`."""
    if args.tower:
        return io.tower_from_dict(io.read_json(args.tower), args.tower)
    if not args.subst:
        raise InputError("give --subst or --tower")
    theta = load_substitution(args.subst[0])
    cap = max_depth()
    last: Optional[Exception] = None
    for d in range(1, cap + 1):
        if theta.length ** d > MAX_CELLS:
            break
        t = tower_from_substitution(theta, d)
        if not t.stages:
            continue
        try:
            constructive_structure(t, levels)
            fill_prefix(t, window)
            return t
        except IncompleteTower as exc:
            last = exc
    raise InputError(f"tower depth limit reached before the request could be met ({last})")


def _structure_payload(t: SkeletonTower, depth: int) -> dict:
    ps = constructive_structure(t, depth)
    return {"periods": list(ps.periods), "constructive": ps.constructive,
            "row_sums": [ps.periods[0]] + [b // a for a, b in zip(ps.periods, ps.periods[1:])]}


def cmd_analyze(args) -> tuple[int, dict]:
    depth = _check_depth(args.depth)
    out: dict = {}
    if args.subst:
        theta = load_substitution(args.subst[0])
        ok, wit = has_coincidence(theta)
        out["substitution"] = {"rules": str(theta), "length": theta.length,
                               "primitive": is_primitive(theta), "coincidence": ok,
                               "witness": list(wit) if wit else None}
    t = tower_for(args, depth)
    out["tower"] = {"depth": t.depth, "periods": list(t.periods)}
    out["structure"] = _structure_payload(t, depth)
    top = out["structure"]["periods"][-1]
    window = args.window or 4 * top
    if args.subst and not args.tower:
        t = tower_for(args, depth, window)
    try:
        prefix = fill_prefix(t, window)
        out["window_check"] = {"window": window, "passes": toeplitz_window_check(prefix, window)}
    except IncompleteTower as exc:
        out["window_check"] = {"window": window, "passes": None, "note": str(exc)}
    return EXIT_OK, out


def _build(args):
    depth = _check_depth(args.depth)
    t = tower_for(args, depth)
    top = constructive_structure(t, depth).periods[-1]
    window = args.window or 8 * top
    if args.subst and not args.tower:
        t = tower_for(args, depth, window)
    return bv_from_tower(t, window, depth), t


def cmd_build_bv(args) -> tuple[int, dict]:
    res, _ = _build(args)
    D = res.diagram
    if args.dot:
        Path(args.dot).write_text(io.to_dot(D))
    if args.out:
        Path(args.out).write_text(io.dumps(io.diagram_to_dict(D)))
    ers, sums = is_ers(D)
    out = {"periods": list(res.periods), "window": res.window, "stable": res.stable,
           "warnings": list(res.warnings), "level_sizes": [len(lv) for lv in D.levels[1:]],
           "ers": ers, "row_sums": sums, "simple": bool(is_simple(D)),
           "diagram": io.diagram_to_dict(D)}
    return EXIT_OK, out


def _diagram_arg(args):
    if args.diagram:
        return io.diagram_from_dict(io.read_json(args.diagram), args.diagram)
    return _build(args)[0].diagram


def cmd_orbit(args) -> tuple[int, dict]:
    D = _diagram_arg(args)
    level = args.level
    if not 1 <= level <= D.depth:
        raise InputError(f"--level {level} outside 1..{D.depth}")
    start = min_prefix(D, D.depth)
    status = EXIT_OK
    try:
        orb = orbit_word(D, start, args.length, level)
        truncated = None
    except Truncated as exc:
        orb, truncated, status = exc.partial, exc.n, EXIT_NEGATIVE
    if args.csv:
        Path(args.csv).write_text(io.orbit_csv(D, orb))
    out = {"level": level, "length": len(orb), "truncated_at": truncated,
           "entries": [[v, h] for v, h in orb.entries]}
    return status, out


def cmd_telescope(args) -> tuple[int, dict]:
    D = _diagram_arg(args)
    if not args.levels:
        raise InputError("--levels is required")
    T = telescope(D, _int_list(args.levels))
    if args.out:
        Path(args.out).write_text(io.dumps(io.diagram_to_dict(T)))
    if args.dot:
        Path(args.dot).write_text(io.to_dot(T))
    return EXIT_OK, {"ers": is_ers(T)[0], "row_sums": is_ers(T)[1], "diagram": io.diagram_to_dict(T)}


def _morphisms(args):
    if not args.morphisms:
        raise InputError("--morphisms FILE is required")
    return io.morphisms_from_dict(io.read_json(args.morphisms), where=args.morphisms)


def cmd_verify_factor(args) -> tuple[int, dict]:
    ms = _morphisms(args)
    diags = [str(d) for d in validate(ms.source)] + [str(d) for d in validate(ms.target)]
    diags += [str(d) for d in verify_squares(ms)]
    return (EXIT_NEGATIVE if diags else EXIT_OK), {"levels": list(ms.levels), "verified": not diags,
                                                   "diagnostics": diags}


def cmd_split(args) -> tuple[int, dict]:
    ms = _morphisms(args)
    if args.ell is None:
        raise InputError("--ell is required")
    new = split_sequence(ms, args.ell)
    payload = io.morphisms_to_dict(new)
    if args.out:
        Path(args.out).write_text(io.dumps(payload))
    diags = [str(d) for d in verify_squares(new)]
    return (EXIT_NEGATIVE if diags else EXIT_OK), {"levels": list(new.levels),
                                                   "level_sizes": [len(lv) for lv in new.source.levels[1:]],
                                                   "diagnostics": diags, "sequence": payload}


def cmd_obstruct(args) -> tuple[int, dict]:
    if args.p is not None or args.q is not None:
        if args.p is None or args.q is None:
            raise InputError("give both --p and --q")
        rep = theorem_main_check(args.p, args.q)
        out = rep.to_dict()
        out["multiplicatively_independent"] = mult_independent(args.p, args.q)
    elif args.ps and args.qs:
        if not args.horizon:
            raise InputError("--horizon is required with --ps/--qs")
        rep = general_obstruction_scan(_int_list(args.ps), _int_list(args.qs), args.horizon)
        out = rep.to_dict()
    else:
        raise InputError("give --p/--q or --ps/--qs with --horizon")
    status = EXIT_OK if rep.verdict is Verdict.NOT_OBSTRUCTED else EXIT_NEGATIVE
    return status, out


def cmd_cobham(args) -> tuple[int, dict]:
    if not args.subst or len(args.subst) != 2:
        raise InputError("cobham needs exactly two --subst arguments")
    rep = cobham_gate(load_substitution(args.subst[0]), load_substitution(args.subst[1]))
    return (EXIT_OK if rep.applies else EXIT_NEGATIVE), rep.to_dict()


def cmd_export_dot(args) -> tuple[int, dict]:
    D = _diagram_arg(args)
    text = io.to_dot(D)
    if args.dot:
        Path(args.dot).write_text(text)
        return EXIT_OK, {"dot": args.dot, "levels": D.depth}
    return EXIT_OK, {"dot_source": text}


COMMANDS = {
    "analyze": cmd_analyze,
    "build-bv": cmd_build_bv,
    "orbit": cmd_orbit,
    "split": cmd_split,
    "telescope": cmd_telescope,
    "verify-factor": cmd_verify_factor,
    "obstruct": cmd_obstruct,
    "cobham": cmd_cobham,
    "export-dot": cmd_export_dot,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tbv", description="Toeplitz sequences, Bratteli-Vershik models and factor obstructions.")
    ap.add_argument("--version", action="version", version=f"tbv {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p, source=True):
        if source:
            p.add_argument("--subst", action="append", help="substitution JSON file or inline rules a=ab,b=aa")
            p.add_argument("--tower", help="skeleton tower JSON file")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    p = common(sub.add_parser("analyze", help="constructive period structure of a Toeplitz input"))
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--window", type=int, default=0)

    for verb, hlp in (("build-bv", "build the tower diagram"), ("export-dot", "write a diagram as DOT"),
                      ("orbit", "Vershik orbit from the minimal path"), ("telescope", "telescope a diagram")):
        p = common(sub.add_parser(verb, help=hlp))
        p.add_argument("--diagram", help="diagram JSON file (instead of --subst/--tower)")
        p.add_argument("--depth", type=int, default=3)
        p.add_argument("--window", type=int, default=0)
        p.add_argument("--dot", help="write DOT to this file")
        p.add_argument("--out", help="write the resulting JSON to this file")
        if verb == "orbit":
            p.add_argument("--length", type=int, default=16)
            p.add_argument("--level", type=int, default=1)
            p.add_argument("--csv", help="write the orbit trace as CSV")
        if verb == "telescope":
            p.add_argument("--levels", help="comma-separated cut levels")

    for verb, hlp in (("verify-factor", "verify the squares of a morphism sequence"),
                      ("split", "symbol-split the source of a morphism sequence")):
        p = common(sub.add_parser(verb, help=hlp), source=False)
        p.add_argument("--morphisms", help="morphism sequence JSON with embedded source and target")
        if verb == "split":
            p.add_argument("--ell", type=int)
            p.add_argument("--out")

    p = common(sub.add_parser("obstruct", help="divisibility obstructions"), source=False)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--ps", help="source periods, comma-separated")
    p.add_argument("--qs", help="factor periods, comma-separated")
    p.add_argument("--horizon", type=int)

    p = common(sub.add_parser("cobham", help="check the hypotheses of the two-base gate"))
    return ap


def _render(payload, indent: str = "") -> str:
    lines = []
    if isinstance(payload, dict):
        for k, v in payload.items():
            if isinstance(v, (dict, list)) and v and any(isinstance(x, (dict, list)) for x in
                                                          (v.values() if isinstance(v, dict) else v)):
                lines.append(f"{indent}{k}:")
                lines.append(_render(v, indent + "  "))
            else:
                lines.append(f"{indent}{k}: {v}")
    elif isinstance(payload, list):
        for v in payload:
            lines.append(f"{indent}- {v}")
    else:
        lines.append(f"{indent}{payload}")
    return "\n".join(lines)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        status, payload = COMMANDS[args.verb](args)
    except (InputError, ValueError, KeyError, IncompleteTower, StructureInvariantViolation,
            OSError, IndexError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
        if args.json:
            print(io.dumps({"tool": "tbv", "version": __version__, "command": args.verb,
                            "status": "error", "error": msg}), end="")
        print(f"tbv {args.verb}: {msg}", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        env = {"tool": "tbv", "version": __version__, "command": args.verb,
               "status": "ok" if status == EXIT_OK else "negative", "result": payload}
        print(io.dumps(env), end="")
    else:
        if args.verb == "export-dot" and "dot_source" in payload:
            print(payload["dot_source"], end="")
        else:
            print(_render({k: v for k, v in payload.items() if k not in ("diagram", "sequence")}))
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
