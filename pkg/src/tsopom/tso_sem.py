"""Buffered (TSO) pomset semantics.

Denotations are parametrized by a buffer list of pending global writes.
The basic clauses thread the buffer through each phrase; the full clauses
allow an arbitrary prefix of the buffer to flush into the pomset before
and after each phrase.  A program's TSO pomsets are those reachable from
an empty buffer that also end with an empty buffer.
"""

from __future__ import annotations

from . import lang
from .po_sem import Bounds, UNIT, _arith, _cmp
from .pomset import (Action, GW, Pomset, bw, delta_normalize, gw, par, rd, seq)

BufferList = tuple[Action, ...]

EMPTY: BufferList = ()


def buffer_view(L: BufferList) -> dict[str, int]:
    """Most recent buffered value per location (last write wins)."""
    view: dict[str, int] = {}
    for a in L:
        view[a.loc] = a.val
    return view


def split(L: BufferList) -> list[tuple[Pomset, BufferList]]:
    """All (flushed prefix, remaining suffix) decompositions of L."""
    return [(Pomset.chain(L[:i]), L[i:]) for i in range(len(L) + 1)]


def _pure_value(e) -> tuple | None:
    """(value,) if the expression reads no memory, else None."""
    if isinstance(e, lang.IntConst):
        return (e.value,)
    if isinstance(e, lang.BoolConst):
        return (e.value,)
    if isinstance(e, lang.Not):
        inner = _pure_value(e.arg)
        return None if inner is None else (not inner[0],)
    if isinstance(e, lang.BinOp):
        a, b = _pure_value(e.lhs), _pure_value(e.rhs)
        return None if a is None or b is None else (_arith(e.op, a[0], b[0]),)
    if isinstance(e, lang.Cmp):
        a, b = _pure_value(e.lhs), _pure_value(e.rhs)
        return None if a is None or b is None else (_cmp(e.op, a[0], b[0]),)
    if isinstance(e, lang.Logic):
        a, b = _pure_value(e.lhs), _pure_value(e.rhs)
        if a is None or b is None:
            return None
        return ((a[0] and b[0]) if e.op == "and" else (a[0] or b[0]),)
    return None


def _nseq(*parts: Pomset) -> Pomset:
    out = parts[0]
    for p in parts[1:]:
        out = seq(out, p)
    return delta_normalize(out)


class TsoCtx:
    """Memoizing evaluator for the buffered clauses."""

    def __init__(self, bounds: Bounds):
        self.bounds = bounds
        self._cmd: dict = {}
        self._expr: dict = {}
        self._bexpr: dict = {}
        self._while: dict = {}

    # -- expressions: sets of (pomset, value, buffer) ------------------------

    def expr(self, e: lang.Expr, L: BufferList) -> frozenset:
        key = (e, L)
        hit = self._expr.get(key)
        if hit is None:
            hit = frozenset(self._basic_then_split_expr(e, L))
            self._expr[key] = hit
        return hit

    def _basic_then_split_expr(self, e, L):
        for (F1, L1) in split(L):
            for (P, v, L2) in self._basic_expr(e, L1):
                for (F2, L3) in split(L2):
                    yield (_nseq(F1, P, F2), v, L3)

    def _basic_expr(self, e: lang.Expr, L: BufferList):
        if isinstance(e, lang.IntConst):
            return [(UNIT, e.value, L)]
        if isinstance(e, lang.ReadLoc):
            view = buffer_view(L)
            if e.loc in view:
                v = view[e.loc]
                return [(Pomset.single(rd(e.loc, v)), v, L)]
            return [(Pomset.single(rd(e.loc, v)), v, L)
                    for v in self.bounds.values]
        if isinstance(e, lang.BinOp):
            return self._binop(e.lhs, e.rhs, L,
                               lambda a, c: _arith(e.op, a, c))
        raise TypeError(f"unknown expression {e!r}")

    def _binop(self, e1, e2, L: BufferList, comb):
        """Binary operator evaluation.

        When both operands can touch memory they run as a fork: the buffer
        is flushed up front and both sides must finish with empty buffers.
        A pure operand has no actions, so no fork happens and the buffer
        threads through the other side untouched."""
        p1, p2 = _pure_value(e1), _pure_value(e2)
        if p1 is not None and p2 is not None:
            return [(UNIT, comb(p1[0], p2[0]), L)]
        if p2 is not None:
            return [(P, comb(v, p2[0]), L1)
                    for (P, v, L1) in self._operand(e1, L)]
        if p1 is not None:
            return [(P, comb(p1[0], v), L1)
                    for (P, v, L1) in self._operand(e2, L)]
        out = []
        for (P1, v1, L1) in self._operand_full(e1):
            for (P2, v2, L2) in self._operand_full(e2):
                out.append((_nseq(Pomset.chain(L), par(P1, P2)),
                            comb(v1, v2), EMPTY))
        return out

    def _operand(self, e, L: BufferList):
        if isinstance(e, (lang.IntConst, lang.ReadLoc, lang.BinOp)):
            return self._basic_expr(e, L)
        return self._basic_bexpr(e, L)

    def _operand_full(self, e):
        """Forked operand: empty buffer in, empty buffer out."""
        den = (self.expr if isinstance(e, (lang.IntConst, lang.ReadLoc,
                                           lang.BinOp)) else self.bexpr)
        return [(P, v, L1) for (P, v, L1) in den(e, EMPTY) if not L1]

    # -- booleans: sets of (pomset, truth, buffer) ---------------------------

    def bexpr(self, b: lang.BExpr, L: BufferList) -> frozenset:
        key = (b, L)
        hit = self._bexpr.get(key)
        if hit is None:
            hit = frozenset(
                (_nseq(F1, P, F2), t, L3)
                for (F1, L1) in split(L)
                for (P, t, L2) in self._basic_bexpr(b, L1)
                for (F2, L3) in split(L2))
            self._bexpr[key] = hit
        return hit

    def _basic_bexpr(self, b: lang.BExpr, L: BufferList):
        if isinstance(b, lang.BoolConst):
            return [(UNIT, b.value, L)]
        if isinstance(b, lang.Not):
            return [(P, not t, L1) for (P, t, L1) in self._basic_bexpr(b.arg, L)]
        if isinstance(b, lang.Cmp):
            return self._binop(b.lhs, b.rhs, L,
                               lambda a, c: _cmp(b.op, a, c))
        if isinstance(b, lang.Logic):
            comb = (lambda a, c: a and c) if b.op == "and" else (lambda a, c: a or c)
            return self._binop(b.lhs, b.rhs, L, comb)
        raise TypeError(f"unknown boolean expression {b!r}")

    def bexpr_cases(self, b: lang.BExpr, L: BufferList, want: bool):
        return [(P, L1) for (P, t, L1) in self.bexpr(b, L) if t is want]

    # -- commands: sets of (pomset, buffer) ----------------------------------

    def cmd(self, c: lang.Cmd, L: BufferList) -> frozenset:
        key = (c, L)
        hit = self._cmd.get(key)
        if hit is None:
            hit = frozenset(
                (_nseq(F1, P, F2), L3)
                for (F1, L1) in split(L)
                for (P, L2) in self._basic_cmd(c, L1)
                for (F2, L3) in split(L2))
            self._cmd[key] = hit
        return hit

    def _basic_cmd(self, c: lang.Cmd, L: BufferList):
        if isinstance(c, lang.Skip):
            return [(UNIT, L)]
        if isinstance(c, lang.Fence):
            # flush the whole buffer now
            return [(delta_normalize(seq(Pomset.chain(L), UNIT)), EMPTY)]
        if isinstance(c, lang.Assign):
            out = []
            for (P, v, L1) in self.expr(c.expr, L):
                out.append((_nseq(P, Pomset.single(bw(c.loc, v))),
                            L1 + (gw(c.loc, v),)))
            return out
        if isinstance(c, lang.Seq):
            out = []
            for (P1, L1) in self.cmd(c.first, L):
                for (P2, L2) in self.cmd(c.second, L1):
                    out.append((_nseq(P1, P2), L2))
            return out
        if isinstance(c, lang.Par):
            out = []
            for (P1, L1) in self.cmd(c.left, EMPTY):
                if L1:
                    continue
                for (P2, L2) in self.cmd(c.right, EMPTY):
                    if L2:
                        continue
                    out.append((_nseq(Pomset.chain(L), par(P1, P2)), EMPTY))
            return out
        if isinstance(c, lang.If):
            out = []
            for (Pb, L1) in self.bexpr_cases(c.cond, L, True):
                for (P, L2) in self.cmd(c.then, L1):
                    out.append((_nseq(Pb, P), L2))
            for (Pb, L1) in self.bexpr_cases(c.cond, L, False):
                for (P, L2) in self.cmd(c.other, L1):
                    out.append((_nseq(Pb, P), L2))
            return out
        if isinstance(c, lang.While):
            out = set()
            for n in range(self.bounds.unroll_max + 1):
                out |= self._iterate(c, L, n)
            return list(out)
        raise TypeError(f"unknown command {c!r}")

    def _iterate(self, c: lang.While, L: BufferList, n: int) -> frozenset:
        key = (c, L, n)
        hit = self._while.get(key)
        if hit is not None:
            return hit
        if n == 0:
            res = frozenset(self.bexpr_cases(c.cond, L, False))
        else:
            acc = set()
            for (Pb, L1) in self.bexpr_cases(c.cond, L, True):
                for (P, L2) in self.cmd(c.body, L1):
                    for (Pr, L3) in self._iterate(c, L2, n - 1):
                        acc.add((_nseq(Pb, P, Pr), L3))
            res = frozenset(acc)
        self._while[key] = res
        return res


def denote_tso(c: lang.Cmd, bounds: Bounds,
               L: BufferList = EMPTY) -> frozenset[tuple[Pomset, BufferList]]:
    return TsoCtx(bounds).cmd(c, L)


def tso_pomsets(p: lang.Program | lang.Cmd, bounds: Bounds,
                L: BufferList = EMPTY) -> frozenset[Pomset]:
    c = p.body if isinstance(p, lang.Program) else p
    return frozenset(P for (P, Lf) in denote_tso(c, bounds, L) if Lf == EMPTY)


def buffer_write_count(P: Pomset) -> int:
    return sum(1 for a in P.labels if a.kind == "bw")
