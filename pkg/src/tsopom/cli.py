"""Command-line front end.

Subcommands:

* ``litmus FILE``           — run a litmus test, exit 0 iff the verdict holds
* ``denote FILE``           — enumerate a program's pomset denotation
* ``check FILE ORDERFILE``  — check a candidate order against the TSO axioms
* ``harness DIR``           — soundness/completeness harness over a corpus dir
* ``dot FILE``              — emit DOT for a program's denotation

All JSON output validates against the schemas bundled under
``tsopom/schemas/``; all set-valued output is printed in a canonical
order so repeated runs are byte-identical for a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Optional

from . import bridge, lang, po_sem, tso_sem
from .axiom import AXIOMS, CandidateOrder, check_axioms
from .execution import (LitmusParseError, LitmusSpec, Verdict, bounds_for,
                        litmus_run, parse_litmus)
from .po_sem import Bounds
from .pomset import Pomset, SizeGuardError, to_dot
from .state_foot import State


# ---------------------------------------------------------------------------
# Shared plumbing


def _sorted_pomsets(ps) -> list[Pomset]:
    return sorted(ps, key=lambda P: (len(P.labels), P.canon()))


def _load_program(path: Path) -> tuple[lang.Program, Optional[LitmusSpec]]:
    """A .lit file contributes its program block; anything else is parsed
    as bare program text."""
    text = path.read_text()
    if path.suffix == ".lit":
        spec = parse_litmus(text, default_name=path.stem)
        return spec.program, spec
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    return lang.parse(text), None


def _apply_flag_bounds(B: Bounds, args) -> Bounds:
    if getattr(args, "values", None):
        B = Bounds(frozenset(args.values), B.unroll_max, B.lin_node_max)
    if getattr(args, "unroll", None) is not None:
        B = B.with_unroll(args.unroll)
    return B


def _bounds_json(B: Bounds) -> dict:
    return {"values": sorted(B.values), "unroll_max": B.unroll_max,
            "lin_node_max": B.lin_node_max}


def _state_json(s: State) -> dict:
    return {"globals": {k: v for k, v in s.globals_},
            "buffers": {k: [v, n] for k, (v, n) in s.buffers}}


def _pomset_json(P: Pomset) -> dict:
    return {"nodes": [repr(a) for a in P.labels],
            "order": [list(e) for e in sorted(P.covers())]}


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _values_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("value list must be nonempty")
    return vals


# ---------------------------------------------------------------------------
# litmus


def cmd_litmus(args) -> int:
    spec = parse_litmus(Path(args.file).read_text(),
                        default_name=Path(args.file).stem)
    B = _apply_flag_bounds(bounds_for(spec), args)
    verdict = litmus_run(spec, B, witness_cap=args.witnesses)
    mode = "reachable" if spec.reachable else "forbidden"
    query = lang._pp_bexpr(spec.query)

    if args.format == "json":
        _emit_json({
            "name": spec.name,
            "mode": mode,
            "query": query,
            "holds": verdict.holds,
            "bounds": _bounds_json(B),
            "stats": verdict.stats,
            "witnesses": [_witness_json(w) for w in verdict.witnesses],
        })
    elif args.format == "dot":
        for i, w in enumerate(verdict.witnesses):
            print(to_dot(w.pomset, name=f"{spec.name}_witness{i}"))
    else:
        word = "HOLDS" if verdict.holds else "FAILS"
        print(f"{spec.name}: {mode} {query} — {word}")
        print(f"  pomsets={verdict.stats['pomsets']}"
              f" pruned={verdict.stats['pomsets_pruned']}"
              f" write_orders={verdict.stats['write_orders']}"
              f" hits={verdict.stats['hits']}")
        for i, w in enumerate(verdict.witnesses):
            print(f"  witness {i}: {_env_str(w.env)}")
            print(f"    footstep {w.footstep[0]!r} -> {w.footstep[1]!r}")
            print(f"    final {w.final!r}")
    return 0 if verdict.holds else 1


def _env_str(env) -> str:
    return " ; ".join(
        f"{a!r}" if nid is not None else f"env:{a!r}" for nid, a in env)


def _witness_json(w) -> dict:
    return {"pomset": _pomset_json(w.pomset),
            "linearisation": [{"node": nid, "action": repr(a)}
                              for nid, a in w.env],
            "pre": _state_json(w.footstep[0]),
            "post": _state_json(w.footstep[1]),
            "final": _state_json(w.final)}


# ---------------------------------------------------------------------------
# denote / dot


def _parse_buffer(text: str):
    """Comma-separated pending writes, oldest first: ``x=3,y=2``."""
    from .pomset import gw as _gw
    out = []
    for item in text.split(","):
        loc, _, val = item.partition("=")
        out.append(_gw(loc.strip(), int(val)))
    return tuple(out)


def _file_buffer_directive(path: Path) -> Optional[str]:
    """A ``# buffer: x=3,y=2`` comment line inside a program file."""
    for line in path.read_text().splitlines():
        line = line.strip()
        if line.startswith("#") and "buffer:" in line:
            return line.split("buffer:", 1)[1].strip()
    return None


def cmd_denote(args) -> int:
    path = Path(args.file)
    if getattr(args, "buffer", None) is None and path.suffix != ".lit":
        args.buffer = _file_buffer_directive(path)
    if not getattr(args, "expr", False) and path.suffix == ".imp":
        # a bare expression file switches to read-triple mode
        body = "\n".join(line.split("#", 1)[0]
                         for line in path.read_text().splitlines())
        try:
            lang.parse(body)
        except lang.ParseError:
            args.expr = True
    if getattr(args, "expr", False):
        return _denote_expr(args)
    program, spec = _load_program(Path(args.file))
    B = bounds_for(spec) if spec else po_sem.default_bounds(program)
    B = _apply_flag_bounds(B, args)
    L = _parse_buffer(args.buffer) if getattr(args, "buffer", None) else ()
    denote = ((lambda p, b: tso_sem.tso_pomsets(p, b, L))
              if args.level == "tso" else po_sem.denote_program)
    pomsets = _sorted_pomsets(denote(program, B))

    if args.format == "json":
        _emit_json({"file": str(args.file), "level": args.level,
                    "bounds": _bounds_json(B), "count": len(pomsets),
                    "pomsets": [_pomset_json(P) for P in pomsets]})
    elif args.format == "dot":
        for i, P in enumerate(pomsets):
            print(to_dot(P, name=f"{args.level}_{i}"))
    else:
        print(f"{args.file}: {len(pomsets)} {args.level} pomset(s)")
        for i, P in enumerate(pomsets):
            covers = " ".join(f"{P.labels[a]!r}<{P.labels[b]!r}"
                              for a, b in sorted(P.covers()))
            print(f"  [{i}] nodes={[repr(a) for a in P.labels]}"
                  + (f" order: {covers}" if covers else ""))
    return 0


def _denote_expr(args) -> int:
    """Enumerate the read-level denotation of a bare expression under a
    pending-write buffer: triples of pomset, value and remaining buffer."""
    text = "\n".join(line.split("#", 1)[0]
                     for line in Path(args.file).read_text().splitlines())
    body = lang.parse(f"r0 := {text.strip()}").body
    expr = body.expr
    B = _apply_flag_bounds(Bounds(frozenset(args.values or (0, 1, 2, 3))),
                           args)
    L = _parse_buffer(args.buffer) if args.buffer else ()
    triples = sorted(tso_sem.TsoCtx(B).expr(expr, L),
                     key=lambda t: (len(t[0].labels), t[0].canon(), t[1]))

    if args.format == "json":
        _emit_json({"file": str(args.file), "level": "tso",
                    "bounds": _bounds_json(B), "count": len(triples),
                    "triples": [{"pomset": _pomset_json(P), "value": v,
                                 "pending": [repr(a) for a in Lf]}
                                for (P, v, Lf) in triples]})
    elif args.format == "dot":
        for i, (P, _, _) in enumerate(triples):
            print(to_dot(P, name=f"expr_{i}"))
    else:
        print(f"{args.file}: {len(triples)} read triple(s) under buffer"
              f" {[repr(a) for a in L]}")
        for (P, v, Lf) in triples:
            print(f"  P={[repr(a) for a in P.labels]}"
                  f" order={sorted(P.covers())} v={v}"
                  f" L'={[repr(a) for a in Lf]}")
    return 0


def cmd_dot(args) -> int:
    args.format = "dot"
    return cmd_denote(args)


# ---------------------------------------------------------------------------
# check


def _parse_order_file(text: str, P: Pomset) -> tuple[CandidateOrder, str]:
    """Permutation: whitespace/comma separated node indices.  Partial
    order: lines of the form ``a < b``.  '#' starts a comment."""
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    if "<" in body:
        pairs = set()
        for line in body.splitlines():
            line = line.strip()
            if not line:
                continue
            lhs, _, rhs = line.partition("<")
            pairs.add((int(lhs), int(rhs)))
        return CandidateOrder(P, frozenset(pairs)), "partial"
    seq = tuple(int(tok) for tok in body.replace(",", " ").split())
    return CandidateOrder.from_sequence(P, seq), "permutation"


def cmd_check(args) -> int:
    program, spec = _load_program(Path(args.file))
    B = bounds_for(spec) if spec else po_sem.default_bounds(program)
    B = _apply_flag_bounds(B, args)
    pomsets = _sorted_pomsets(po_sem.denote_program(program, B))
    if not 0 <= args.pomset < len(pomsets):
        print(f"error: pomset index {args.pomset} out of range"
              f" (denotation has {len(pomsets)})", file=sys.stderr)
        return 2
    P = pomsets[args.pomset]
    T, kind = _parse_order_file(Path(args.order_file).read_text(), P)
    sigma0 = dict(spec.initial) if spec else None
    if args.init:
        sigma0 = dict(sigma0 or {})
        for item in args.init.split(","):
            loc, _, val = item.partition("=")
            sigma0[loc.strip()] = int(val)
    rep = check_axioms(P, T, sigma0)

    if args.format == "json":
        _emit_json({
            "pomset": _pomset_json(P),
            "order": {"kind": kind, "pairs": [list(e) for e in sorted(T.rel)]},
            "total": T.is_total(),
            "consistent": rep.consistent,
            "axioms": {ax: {"passed": rep.passed[ax],
                            "counterexample":
                                [repr(x) for x in rep.counterexamples[ax]]
                                if ax in rep.counterexamples else None}
                       for ax in AXIOMS},
        })
    else:
        print(f"pomset: {[repr(a) for a in P.labels]}")
        print(f"order ({kind}, {'total' if T.is_total() else 'partial'}):"
              f" {sorted(T.rel)}")
        for ax in AXIOMS:
            if rep.passed[ax]:
                print(f"  {ax}: pass")
            else:
                cex = ", ".join(repr(x) for x in rep.counterexamples[ax])
                print(f"  {ax}: FAIL at {cex}")
        print("consistent" if rep.consistent else "inconsistent")
    return 0 if rep.consistent else 1


# ---------------------------------------------------------------------------
# harness


def cmd_harness(args) -> int:
    root = Path(args.dir)
    programs: dict[str, tuple] = {}
    for path in sorted(root.glob("*.lit")):
        spec = parse_litmus(path.read_text(), default_name=path.stem)
        B = _apply_flag_bounds(bounds_for(spec), args)
        programs[spec.name] = (spec.program, B, dict(spec.initial))
    rng = random.Random(args.seed)
    for i in range(args.random):
        p = bridge.random_program(rng)
        programs[f"random_{i:03d}"] = (p, po_sem.default_bounds(p), {})
    report = bridge.harness_report(programs, mutate=args.mutate)

    if args.format == "json":
        _emit_json(report)
    else:
        for e in report["programs"]:
            snd, cmp_ = e["soundness"], e["completeness"]
            print(f"{e['name']}: soundness"
                  f" {'pass' if snd['passed'] else 'FAIL'}"
                  f" ({snd['pomsets']} pomsets,"
                  f" {snd['orders_checked']} orders);"
                  f" completeness {'pass' if cmp_['passed'] else 'FAIL'}"
                  f" ({cmp_['orders_checked']} orders)")
            for rep in (snd, cmp_):
                if rep["first_failure"]:
                    print(f"    first failure: {rep['first_failure']}")
        if args.mutate:
            print(f"mutation {args.mutate}: "
                  + ("detected" if report["mutation_detected"]
                     else "NOT DETECTED"))
        print("all passed" if report["all_passed"] else "FAILURES")
    if args.mutate:
        return 0 if report["mutation_detected"] else 1
    return 0 if report["all_passed"] else 1


# ---------------------------------------------------------------------------
# Argument parsing


def _add_bounds_flags(sp) -> None:
    sp.add_argument("--unroll", type=int, default=None, metavar="N",
                    help="loop unrolling bound (default 2)")
    sp.add_argument("--values", type=_values_list, default=None,
                    metavar="a,b,c",
                    help="value universe (default: program constants and 0)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tsopom",
        description="Pomset denotations, footprint execution and axiomatic "
                    "consistency checking for TSO programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("litmus", help="run a litmus test file")
    sp.add_argument("file")
    _add_bounds_flags(sp)
    sp.add_argument("--format", choices=("human", "json", "dot"),
                    default="human")
    sp.add_argument("--witnesses", type=int, default=5, metavar="N")
    sp.set_defaults(func=cmd_litmus)

    sp = sub.add_parser("denote", help="enumerate a program's denotation")
    sp.add_argument("file")
    sp.add_argument("--level", choices=("po", "tso"), default="po")
    _add_bounds_flags(sp)
    sp.add_argument("--buffer", default=None, metavar="x=3,y=2",
                    help="initial pending writes (tso level only)")
    sp.add_argument("--expr", action="store_true",
                    help="treat the file as a bare expression and list "
                         "(pomset, value, buffer) read triples")
    sp.add_argument("--format", choices=("human", "json", "dot"),
                    default="human")
    sp.set_defaults(func=cmd_denote)

    sp = sub.add_parser("check", help="check an order against the axioms")
    sp.add_argument("file")
    sp.add_argument("order_file")
    sp.add_argument("--pomset", type=int, default=0, metavar="INDEX",
                    help="index into the canonically sorted denotation")
    sp.add_argument("--init", default=None, metavar="x=0,y=1",
                    help="initial globals for the value axioms")
    _add_bounds_flags(sp)
    sp.add_argument("--format", choices=("human", "json"), default="human")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("harness",
                        help="soundness/completeness harness over *.lit")
    sp.add_argument("dir")
    _add_bounds_flags(sp)
    sp.add_argument("--format", choices=("human", "json"), default="human")
    sp.add_argument("--mutate", choices=AXIOMS, default=None,
                    help="ignore one axiom to confirm the harness notices")
    sp.add_argument("--random", type=int, default=0, metavar="N",
                    help="add N random programs to the corpus")
    sp.add_argument("--seed", type=int, default=0, metavar="S")
    sp.set_defaults(func=cmd_harness)

    sp = sub.add_parser("dot", help="emit DOT for a program's denotation")
    sp.add_argument("file")
    sp.add_argument("--level", choices=("po", "tso"), default="po")
    _add_bounds_flags(sp)
    sp.set_defaults(func=cmd_dot)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LitmusParseError, lang.ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SizeGuardError as e:
        print(f"error: bounds exceeded: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
