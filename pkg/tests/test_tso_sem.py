"""Buffered (TSO) denotations: worked examples and the laws suite."""

import random
from pathlib import Path

import pytest

from tsopom import lang, po_sem, tso_sem
from tsopom.po_sem import Bounds
from tsopom.pomset import Pomset, bw, gw, par, rd
from tsopom.tso_sem import EMPTY, TsoCtx, buffer_view, split, tso_pomsets


B01 = Bounds(frozenset({0, 1}))
V4 = Bounds(frozenset({0, 1, 2, 3}))


def chain(*actions):
    return Pomset.chain(actions)


def test_buffer_view_most_recent_wins():
    L = (gw("x", 3), gw("y", 2))
    assert buffer_view(L) == {"x": 3, "y": 2}
    assert buffer_view(L + (gw("x", 5),))["x"] == 5
    assert buffer_view(EMPTY) == {}


def test_split_prefixes():
    L = (gw("x", 3), gw("y", 2))
    parts = split(L)
    assert len(parts) == 3
    assert parts[0] == (Pomset.chain(()), L)
    assert parts[2][1] == EMPTY


def test_read_families_under_buffer():
    """Reading x under the two pending writes <x:=3, y:=2> yields exactly
    six families of (pomset, value, remaining buffer) triples."""
    L = (gw("x", 3), gw("y", 2))
    got = TsoCtx(V4).expr(lang.ReadLoc("x"), L)
    V = sorted(V4.values)
    y2, x3 = gw("y", 2), gw("x", 3)
    expected = {(chain(rd("x", 3)), 3, L),
                (chain(rd("x", 3), x3), 3, (y2,)),
                (chain(rd("x", 3), x3, y2), 3, EMPTY)}
    for v in V:
        expected |= {(chain(x3, rd("x", v)), v, (y2,)),
                     (chain(x3, rd("x", v), y2), v, EMPTY),
                     (chain(x3, y2, rd("x", v)), v, EMPTY)}
    assert got == frozenset(expected)


def test_dekker_families_present():
    """The four characteristic buffered shapes of the mutual-exclusion
    example (10, 10, 8 and 6 nodes, reads of 1) are all denoted."""
    poms = tso_pomsets(lang.dekker(), B01)
    t1 = chain(bw("x", 1), gw("x", 1), rd("y", 0), bw("z", 1), gw("z", 1))
    t2 = chain(bw("y", 1), gw("y", 1), rd("x", 0), bw("w", 1), gw("w", 1))
    f1 = par(t1, t2)
    f2 = par(chain(bw("x", 1), rd("y", 0), gw("x", 1), bw("z", 1), gw("z", 1)),
             chain(bw("y", 1), rd("x", 0), gw("y", 1), bw("w", 1), gw("w", 1)))
    f3 = par(chain(bw("x", 1), gw("x", 1), rd("y", 1)), t2)
    f4 = par(chain(bw("x", 1), rd("y", 1), gw("x", 1)),
             chain(bw("y", 1), gw("y", 1), rd("x", 1)))
    for f in (f1, f2, f3, f4):
        assert f in poms


def test_tso_pomsets_end_with_empty_buffer():
    for (P, L) in tso_sem.denote_tso(lang.parse("x := 1; y := 2").body, B01):
        if L == EMPTY:
            grabbed = [a for a in P.labels if a.kind == "gw"]
            assert sorted((a.loc, a.val) for a in grabbed) \
                == [("x", 1), ("y", 2)]


# ---------------------------------------------------------------------------
# Laws suite


def _equiv(c1, c2, bounds1: Bounds, bounds2: Bounds, buffers) -> bool:
    return all(tso_sem.denote_tso(c1, bounds1, L)
               == tso_sem.denote_tso(c2, bounds2, L) for L in buffers)


def _buffers(rng: random.Random):
    """The empty buffer plus random buffers of lengths 1 and 2."""
    w = lambda: gw(rng.choice("xy"), rng.randrange(2))
    return [EMPTY, (w(),), (w(), w())]


def _random_cmd(rng: random.Random, depth: int = 1) -> lang.Cmd:
    kind = rng.randrange(5 if depth else 3)
    loc = rng.choice("xyr")
    if kind == 0:
        return lang.Skip()
    if kind == 1:
        return lang.Assign(loc, lang.IntConst(rng.randrange(2)))
    if kind == 2:
        return lang.Assign(loc, lang.ReadLoc(rng.choice("xy")))
    if kind == 3:
        return lang.If(lang.Cmp("=", lang.ReadLoc(loc),
                                lang.IntConst(rng.randrange(2))),
                       _random_cmd(rng, 0), _random_cmd(rng, 0))
    return lang.Seq(_random_cmd(rng, 0), _random_cmd(rng, 0))


def test_laws_on_random_triples():
    rng = random.Random(2024)
    skip = lang.Skip()
    for i in range(50):
        # compound operands for the parallel laws; atomic operands for the
        # sequential ones, whose buffers otherwise grow multiplicatively
        c1, c2, c3 = (_random_cmd(rng) for _ in range(3))
        a1, a2, a3 = (_random_cmd(rng, 0) for _ in range(3))
        bufs = _buffers(rng)
        assert _equiv(lang.Seq(skip, c1), c1, B01, B01, bufs)
        assert _equiv(lang.Seq(c1, skip), c1, B01, B01, bufs)
        assert _equiv(lang.Seq(lang.Seq(a1, a2), a3),
                      lang.Seq(a1, lang.Seq(a2, a3)), B01, B01, bufs)
        assert _equiv(lang.Par(c1, c2), lang.Par(c2, c1), B01, B01, bufs)
        assert _equiv(lang.Par(lang.Par(c1, c2), c3),
                      lang.Par(c1, lang.Par(c2, c3)), B01, B01, bufs)
        b = lang.Cmp("=", lang.ReadLoc(rng.choice("xy")),
                     lang.IntConst(rng.randrange(2)))
        assert _equiv(lang.Seq(lang.If(b, a1, a2), a3),
                      lang.If(b, lang.Seq(a1, a3), lang.Seq(a2, a3)),
                      B01, B01, bufs)


def test_while_unfolding_law():
    rng = random.Random(7)
    for _ in range(5):
        body = lang.Assign(rng.choice("xyr"), lang.IntConst(rng.randrange(2)))
        b = lang.Cmp("=", lang.ReadLoc(rng.choice("xy")),
                     lang.IntConst(rng.randrange(2)))
        w = lang.While(b, body)
        unfold = lang.If(b, lang.Seq(body, w), lang.Skip())
        # one textual unfolding consumes one unrolling step
        assert _equiv(w, unfold, B01.with_unroll(3), B01.with_unroll(2),
                      _buffers(rng))


def test_skip_par_is_not_a_unit():
    c = lang.parse("r := x").body
    L = (gw("x", 1),)
    lhs = tso_sem.denote_tso(lang.Par(lang.Skip(), c), B01, L)
    rhs = tso_sem.denote_tso(c, B01, L)
    assert lhs != rhs


# ---------------------------------------------------------------------------
# Bundled law fixtures


def _parse_law(text: str) -> dict:
    import re
    text = "\n".join(ln.split("#", 1)[0] for ln in text.splitlines())
    out = {"unroll": (2, 2)}
    out["name"] = re.search(r"\bname\s+(\S+)", text).group(1)
    out["expect"] = re.search(r"\bexpect\s+(equal|different)", text).group(1)
    m = re.search(r"\bunroll\s+lhs=(\d+)\s+rhs=(\d+)", text)
    if m:
        out["unroll"] = (int(m.group(1)), int(m.group(2)))
    for side in ("lhs", "rhs"):
        m = re.search(rf"\b{side}\s*\{{(.*?)\}}", text, re.S)
        out[side] = lang.parse(m.group(1)).body
    return out


def _law_files(corpus_dir: Path):
    return sorted((corpus_dir / "laws").glob("*.law"))


def test_law_fixtures(corpus_dir):
    files = _law_files(corpus_dir)
    assert len(files) >= 7
    rng = random.Random(99)
    for path in files:
        law = _parse_law(path.read_text())
        k1, k2 = law["unroll"]
        same = _equiv(law["lhs"], law["rhs"],
                      B01.with_unroll(k1), B01.with_unroll(k2),
                      _buffers(rng) + _buffers(rng))
        if law["expect"] == "equal":
            assert same, f"{law['name']}: sides differ"
        else:
            assert not same, f"{law['name']}: sides unexpectedly equal"
