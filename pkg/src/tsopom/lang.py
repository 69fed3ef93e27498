"""AST, parser and pretty-printer for the small imperative language.

Concrete syntax:

    c ::= skip | fence | x := e | c ; c | c || c
        | if b then c else c | while b do c | ( c )
    e ::= n | x | e + e | e - e | e * e | ( e )
    b ::= true | false | ! b | e = e | e < e | b && b | b or b | ( b )

``;`` binds tighter than ``||`` and associates to the right.  Branch and
loop bodies are atomic commands; use parentheses to sequence inside them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class ReadLoc:
    loc: str


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    lhs: "Expr"
    rhs: "Expr"


Expr = Union[IntConst, ReadLoc, BinOp]


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "BExpr"


@dataclass(frozen=True)
class Cmp:
    op: str  # '=' or '<'
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Logic:
    op: str  # 'and' or 'or'
    lhs: "BExpr"
    rhs: "BExpr"


BExpr = Union[BoolConst, Not, Cmp, Logic]


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Fence:
    pass


@dataclass(frozen=True)
class Assign:
    loc: str
    expr: Expr


@dataclass(frozen=True)
class Seq:
    first: "Cmd"
    second: "Cmd"


@dataclass(frozen=True)
class Par:
    left: "Cmd"
    right: "Cmd"


@dataclass(frozen=True)
class If:
    cond: BExpr
    then: "Cmd"
    other: "Cmd"


@dataclass(frozen=True)
class While:
    cond: BExpr
    body: "Cmd"


Cmd = Union[Skip, Fence, Assign, Seq, Par, If, While]


@dataclass(frozen=True)
class Program:
    body: Cmd


# ---------------------------------------------------------------------------
# Tokenizer

_KEYWORDS = {"skip", "fence", "if", "then", "else", "while", "do", "true", "false", "or"}
_SYMBOLS = [":=", "||", "&&", ";", "=", "<", "!", "+", "-", "*", "(", ")"]


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'int', 'ident', 'kw', 'sym', 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":  # line comment
            while i < n and text[i] != "\n":
                i += 1
            continue
        matched = False
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(_Tok("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                matched = True
                break
        if matched:
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Tok("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            toks.append(_Tok("kw" if word in _KEYWORDS else "ident", word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def error(self, msg: str):
        t = self.peek()
        raise ParseError(msg + (f", got {t.text!r}" if t.kind != "eof" else ", got end of input"),
                         t.line, t.col)

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text or t.kind == "ident":
            self.error(f"expected {text!r}")
        return self.next()

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.text == text and t.kind in ("sym", "kw")

    # commands -------------------------------------------------------------

    def command(self) -> Cmd:
        left = self.seq_command()
        while self.at("||"):
            self.next()
            right = self.seq_command()
            left = Par(left, right)
        return left

    def seq_command(self) -> Cmd:
        first = self.atom_command()
        if self.at(";"):
            self.next()
            return Seq(first, self.seq_command())
        return first

    def atom_command(self) -> Cmd:
        t = self.peek()
        if self.at("skip"):
            self.next()
            return Skip()
        if self.at("fence"):
            self.next()
            return Fence()
        if self.at("if"):
            self.next()
            cond = self.bexpr()
            self.expect("then")
            then = self.atom_command()
            self.expect("else")
            other = self.atom_command()
            return If(cond, then, other)
        if self.at("while"):
            self.next()
            cond = self.bexpr()
            self.expect("do")
            return While(cond, self.atom_command())
        if self.at("("):
            self.next()
            c = self.command()
            self.expect(")")
            return c
        if t.kind == "ident":
            self.next()
            self.expect(":=")
            return Assign(t.text, self.expr())
        self.error("expected a command")

    # boolean expressions ----------------------------------------------------

    def bexpr(self) -> BExpr:
        left = self.band()
        while self.at("or"):
            self.next()
            left = Logic("or", left, self.band())
        return left

    def band(self) -> BExpr:
        left = self.bnot()
        while self.at("&&"):
            self.next()
            left = Logic("and", left, self.bnot())
        return left

    def bnot(self) -> BExpr:
        if self.at("!"):
            self.next()
            return Not(self.bnot())
        return self.batom()

    def batom(self) -> BExpr:
        if self.at("true"):
            self.next()
            return BoolConst(True)
        if self.at("false"):
            self.next()
            return BoolConst(False)
        if self.at("("):
            # Either a parenthesised boolean or the lhs of a comparison.
            save = self.pos
            self.next()
            try:
                b = self.bexpr()
                self.expect(")")
                return b
            except ParseError:
                self.pos = save
        lhs = self.expr()
        t = self.peek()
        if t.text in ("=", "<") and t.kind == "sym":
            self.next()
            return Cmp(t.text, lhs, self.expr())
        self.error("expected '=' or '<'")

    # integer expressions ----------------------------------------------------

    def expr(self) -> Expr:
        left = self.term()
        while self.peek().kind == "sym" and self.peek().text in ("+", "-"):
            op = self.next().text
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.at("*"):
            self.next()
            left = BinOp("*", left, self.factor())
        return left

    def factor(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntConst(int(t.text))
        if t.text == "-" and self.toks[self.pos + 1].kind == "int":
            self.next()
            return IntConst(-int(self.next().text))
        if t.kind == "ident":
            self.next()
            return ReadLoc(t.text)
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        self.error("expected an expression")


def parse(text: str) -> Program:
    p = _Parser(text)
    body = p.command()
    t = p.peek()
    if t.kind != "eof":
        raise ParseError(f"trailing input {t.text!r}", t.line, t.col)
    return Program(body)


def parse_bexpr(text: str) -> BExpr:
    """Parse a standalone boolean expression (used for litmus predicates)."""
    p = _Parser(text)
    b = p.bexpr()
    t = p.peek()
    if t.kind != "eof":
        raise ParseError(f"trailing input {t.text!r}", t.line, t.col)
    return b


# ---------------------------------------------------------------------------
# Pretty-printer


def _pp_expr(e: Expr) -> str:
    if isinstance(e, IntConst):
        return str(e.value)
    if isinstance(e, ReadLoc):
        return e.loc
    lhs, rhs = _pp_expr(e.lhs), _pp_expr(e.rhs)
    if isinstance(e.lhs, BinOp):
        lhs = f"({lhs})"
    if isinstance(e.rhs, BinOp):
        rhs = f"({rhs})"
    return f"{lhs} {e.op} {rhs}"


def _pp_bexpr(b: BExpr) -> str:
    if isinstance(b, BoolConst):
        return "true" if b.value else "false"
    if isinstance(b, Not):
        inner = _pp_bexpr(b.arg)
        if isinstance(b.arg, (Logic, Cmp)):
            inner = f"({inner})"
        return f"!{inner}"
    if isinstance(b, Cmp):
        return f"{_pp_expr(b.lhs)} {b.op} {_pp_expr(b.rhs)}"
    op = "&&" if b.op == "and" else "or"
    lhs, rhs = _pp_bexpr(b.lhs), _pp_bexpr(b.rhs)
    if isinstance(b.lhs, Logic):
        lhs = f"({lhs})"
    if isinstance(b.rhs, Logic):
        rhs = f"({rhs})"
    return f"{lhs} {op} {rhs}"


def _pp_atom(c: Cmd) -> str:
    s = _pp_cmd(c)
    if isinstance(c, (Seq, Par)):
        return f"({s})"
    return s


def _pp_cmd(c: Cmd) -> str:
    if isinstance(c, Skip):
        return "skip"
    if isinstance(c, Fence):
        return "fence"
    if isinstance(c, Assign):
        return f"{c.loc} := {_pp_expr(c.expr)}"
    if isinstance(c, Seq):
        second = _pp_cmd(c.second)
        if isinstance(c.second, Par):
            second = f"({second})"
        return f"{_pp_atom(c.first)}; {second}"
    if isinstance(c, Par):
        left = _pp_cmd(c.left)  # '||' is left-associative, Seq binds tighter
        right = _pp_cmd(c.right)
        if isinstance(c.right, Par):
            right = f"({right})"
        return f"{left} || {right}"
    if isinstance(c, If):
        return f"if {_pp_bexpr(c.cond)} then {_pp_atom(c.then)} else {_pp_atom(c.other)}"
    if isinstance(c, While):
        return f"while {_pp_bexpr(c.cond)} do {_pp_atom(c.body)}"
    raise TypeError(c)


def pretty(p: Program) -> str:
    return _pp_cmd(p.body)


# ---------------------------------------------------------------------------
# Syntactic queries


def locations_of(p: Program) -> set[str]:
    locs: set[str] = set()

    def expr(e):
        if isinstance(e, ReadLoc):
            locs.add(e.loc)
        elif isinstance(e, BinOp):
            expr(e.lhs)
            expr(e.rhs)

    def bexpr(b):
        if isinstance(b, Not):
            bexpr(b.arg)
        elif isinstance(b, Cmp):
            expr(b.lhs)
            expr(b.rhs)
        elif isinstance(b, Logic):
            bexpr(b.lhs)
            bexpr(b.rhs)

    def cmd(c):
        if isinstance(c, Assign):
            locs.add(c.loc)
            expr(c.expr)
        elif isinstance(c, (Seq,)):
            cmd(c.first)
            cmd(c.second)
        elif isinstance(c, Par):
            cmd(c.left)
            cmd(c.right)
        elif isinstance(c, If):
            bexpr(c.cond)
            cmd(c.then)
            cmd(c.other)
        elif isinstance(c, While):
            bexpr(c.cond)
            cmd(c.body)

    cmd(p.body if isinstance(p, Program) else p)
    return locs


def constants_of(p: Program) -> set[int]:
    consts: set[int] = set()

    def expr(e):
        if isinstance(e, IntConst):
            consts.add(e.value)
        elif isinstance(e, BinOp):
            expr(e.lhs)
            expr(e.rhs)

    def bexpr(b):
        if isinstance(b, Not):
            bexpr(b.arg)
        elif isinstance(b, Cmp):
            expr(b.lhs)
            expr(b.rhs)
        elif isinstance(b, Logic):
            bexpr(b.lhs)
            bexpr(b.rhs)

    def cmd(c):
        if isinstance(c, Assign):
            expr(c.expr)
        elif isinstance(c, Seq):
            cmd(c.first)
            cmd(c.second)
        elif isinstance(c, Par):
            cmd(c.left)
            cmd(c.right)
        elif isinstance(c, If):
            bexpr(c.cond)
            cmd(c.then)
            cmd(c.other)
        elif isinstance(c, While):
            bexpr(c.cond)
            cmd(c.body)

    cmd(p.body if isinstance(p, Program) else p)
    return consts


# ---------------------------------------------------------------------------
# Built-in corpus


DEKKER_SRC = ("(x := 1; if y = 0 then z := 1 else skip)"
              " || (y := 1; if x = 0 then w := 1 else skip)")

PETERSON_SRC = ("(x := 1; if x = 2 then l := 1 else skip)"
                " || (x := 2; if x = 1 then r := 1 else skip)")

IRIW_SRC = ("x := 1 || y := 1 || (w1 := x; w2 := y) || (z1 := y; z2 := x)")

SB_SRC = "(x := 1; r1 := y) || (y := 1; r2 := x)"

SB_FENCED_SRC = "(x := 1; fence; r1 := y) || (y := 1; fence; r2 := x)"

# Two writer/reader pairs on one location; its program order is the pomset
# (x:=2 < x=v) || (x:=3 < x=v') used when discussing non-linearisation
# consistent orders.
WRITE_READ_PAIR_SRC = ("(x := 2; if x = 0 then skip else skip)"
                       " || (x := 3; if x = 0 then skip else skip)")


def dekker() -> Program:
    return parse(DEKKER_SRC)


def peterson() -> Program:
    return parse(PETERSON_SRC)


def iriw() -> Program:
    return parse(IRIW_SRC)


def store_buffering() -> Program:
    return parse(SB_SRC)


def store_buffering_fenced() -> Program:
    return parse(SB_FENCED_SRC)


def write_read_pair() -> Program:
    return parse(WRITE_READ_PAIR_SRC)


CORPUS: dict[str, str] = {
    "dekker": DEKKER_SRC,
    "peterson": PETERSON_SRC,
    "iriw": IRIW_SRC,
    "sb": SB_SRC,
    "fence_sb": SB_FENCED_SRC,
    "write_read_pair": WRITE_READ_PAIR_SRC,
}
