"""Program-order (sequentially consistent) pomset semantics.

An expression denotes a set of (pomset, value) pairs; a command denotes a
set of pomsets over global-write, read, and delta actions.  All results
are delta-normalized, so the unit pomset is the singleton {d} and it only
survives when a command performs no memory action at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import lang
from .pomset import (DELTA_ACTION, Pomset, delta_normalize, gw, par, rd, seq)


@dataclass(frozen=True)
class Bounds:
    """Finite approximation knobs.

    values is the value universe for reads, unroll_max bounds loop
    unrolling, lin_node_max guards linearisation blowup downstream.
    """
    values: frozenset[int]
    unroll_max: int = 2
    lin_node_max: int = 12

    def with_unroll(self, k: int) -> "Bounds":
        return Bounds(self.values, k, self.lin_node_max)


def default_values(p: lang.Program | lang.Cmd,
                   initial: dict[str, int] | None = None) -> frozenset[int]:
    vals = set(lang.constants_of(p)) | {0}
    if initial:
        vals |= set(initial.values())
    return frozenset(vals)


def default_bounds(p: lang.Program | lang.Cmd,
                   initial: dict[str, int] | None = None,
                   unroll_max: int = 2,
                   lin_node_max: int = 12) -> Bounds:
    return Bounds(default_values(p, initial), unroll_max, lin_node_max)


UNIT = Pomset.single(DELTA_ACTION)


# ---------------------------------------------------------------------------
# Expressions

def denote_expr(e: lang.Expr, bounds: Bounds) -> frozenset[tuple[Pomset, int]]:
    if isinstance(e, lang.IntConst):
        return frozenset({(UNIT, e.value)})
    if isinstance(e, lang.ReadLoc):
        return frozenset({(Pomset.single(rd(e.loc, v)), v)
                          for v in bounds.values})
    if isinstance(e, lang.BinOp):
        left = denote_expr(e.lhs, bounds)
        right = denote_expr(e.rhs, bounds)
        out = set()
        for (P1, v1) in left:
            for (P2, v2) in right:
                out.add((delta_normalize(par(P1, P2)), _arith(e.op, v1, v2)))
        return frozenset(out)
    raise TypeError(f"unknown expression {e!r}")


def _arith(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    raise ValueError(f"unknown operator {op}")


# ---------------------------------------------------------------------------
# Boolean expressions

def denote_bexpr(b: lang.BExpr, bounds: Bounds) -> frozenset[tuple[Pomset, bool]]:
    if isinstance(b, lang.BoolConst):
        return frozenset({(UNIT, b.value)})
    if isinstance(b, lang.Not):
        return frozenset({(P, not t) for (P, t) in denote_bexpr(b.arg, bounds)})
    if isinstance(b, lang.Cmp):
        left = denote_expr(b.lhs, bounds)
        right = denote_expr(b.rhs, bounds)
        out = set()
        for (P1, v1) in left:
            for (P2, v2) in right:
                out.add((delta_normalize(par(P1, P2)), _cmp(b.op, v1, v2)))
        return frozenset(out)
    if isinstance(b, lang.Logic):
        left = denote_bexpr(b.lhs, bounds)
        right = denote_bexpr(b.rhs, bounds)
        out = set()
        for (P1, t1) in left:
            for (P2, t2) in right:
                t = (t1 and t2) if b.op == "and" else (t1 or t2)
                out.add((delta_normalize(par(P1, P2)), t))
        return frozenset(out)
    raise TypeError(f"unknown boolean expression {b!r}")


def _cmp(op: str, a: int, b: int) -> bool:
    if op == "=":
        return a == b
    if op == "<":
        return a < b
    raise ValueError(f"unknown comparison {op}")


def bexpr_true(b: lang.BExpr, bounds: Bounds) -> frozenset[Pomset]:
    return frozenset(P for (P, t) in denote_bexpr(b, bounds) if t)


def bexpr_false(b: lang.BExpr, bounds: Bounds) -> frozenset[Pomset]:
    return frozenset(P for (P, t) in denote_bexpr(b, bounds) if not t)


# ---------------------------------------------------------------------------
# Commands

def _seq_sets(A: frozenset[Pomset], B: frozenset[Pomset]) -> frozenset[Pomset]:
    return frozenset(delta_normalize(seq(P, Q)) for P in A for Q in B)


def _par_sets(A: frozenset[Pomset], B: frozenset[Pomset]) -> frozenset[Pomset]:
    return frozenset(delta_normalize(par(P, Q)) for P in A for Q in B)


def denote_po(c: lang.Cmd, bounds: Bounds) -> frozenset[Pomset]:
    if isinstance(c, lang.Skip):
        return frozenset({UNIT})
    if isinstance(c, lang.Fence):
        # order-theoretically inert without a buffer
        return frozenset({UNIT})
    if isinstance(c, lang.Assign):
        out = set()
        for (P, v) in denote_expr(c.expr, bounds):
            out.add(delta_normalize(seq(P, Pomset.single(gw(c.loc, v)))))
        return frozenset(out)
    if isinstance(c, lang.Seq):
        return _seq_sets(denote_po(c.first, bounds), denote_po(c.second, bounds))
    if isinstance(c, lang.Par):
        return _par_sets(denote_po(c.left, bounds), denote_po(c.right, bounds))
    if isinstance(c, lang.If):
        t = denote_bexpr(c.cond, bounds)
        then_set = denote_po(c.then, bounds)
        else_set = denote_po(c.other, bounds)
        out = set()
        for (P, truth) in t:
            for Q in (then_set if truth else else_set):
                out.add(delta_normalize(seq(P, Q)))
        return frozenset(out)
    if isinstance(c, lang.While):
        exits = bexpr_false(c.cond, bounds)
        enters = bexpr_true(c.cond, bounds)
        body = denote_po(c.body, bounds)
        one_iter = _seq_sets(enters, body)
        acc: frozenset[Pomset] = exits
        layer: frozenset[Pomset] = frozenset({UNIT})
        for _ in range(bounds.unroll_max):
            layer = _seq_sets(layer, one_iter)
            acc = acc | _seq_sets(layer, exits)
        return acc
    raise TypeError(f"unknown command {c!r}")


def denote_program(p: lang.Program, bounds: Bounds) -> frozenset[Pomset]:
    return denote_po(p.body, bounds)
