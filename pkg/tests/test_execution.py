"""Executions of pomsets and programs, and the litmus harness."""

import random

import pytest

from tsopom import lang, po_sem
from tsopom.po_sem import Bounds, default_bounds
from tsopom.pomset import Pomset, bw, gw, par, rd, seq
from tsopom.state_foot import state, update, zeta, footprint, per_loc_n_max
from tsopom.execution import (BoundsExceeded, LitmusParseError, bounds_for,
                              eval_predicate, executions, executions_direct,
                              litmus_run, parse_litmus, program_executions,
                              run_from, write_orders)


B01 = Bounds(frozenset({0, 1}))


def chain(*actions):
    return Pomset.chain(actions)


def test_single_write_executes():
    P = chain(bw("x", 1), gw("x", 1))
    got = executions(P, B01)
    assert got
    for (s, t) in got:
        assert zeta(s) and zeta(t)
        assert t.gmap()["x"] == 1


def test_executions_match_direct_enumeration():
    rng = random.Random(17)
    acts = [lambda l, v: bw(l, v), lambda l, v: gw(l, v), lambda l, v: rd(l, v)]
    for _ in range(200):
        ps = [Pomset.single(rng.choice(acts)(rng.choice("xy"), rng.randrange(2)))
              for _ in range(rng.randint(1, 6))]
        while len(ps) > 1:
            b = ps.pop(rng.randrange(len(ps)))
            a = ps.pop(rng.randrange(len(ps)))
            ps.append(seq(a, b) if rng.random() < 0.5 else par(a, b))
        P = ps[0]
        assert executions(P, B01) == executions_direct(P, B01)


def test_write_orders_respect_pomset_order():
    P = par(chain(gw("x", 1), gw("x", 2)), Pomset.single(gw("y", 1)))
    orders = write_orders(P)
    assert len(orders) == 3
    assert all(o.index(0) < o.index(1) for o in orders)


def test_bounds_exceeded():
    P = chain(*[gw("x", i % 2) for i in range(30)])
    with pytest.raises(BoundsExceeded):
        executions(P, B01)


def test_iriw_pomset_is_not_executable():
    """The independent-reads shape where the two readers disagree on the
    order of the writes admits no execution at all."""
    P = par(par(chain(bw("x", 1), gw("x", 1)),
                chain(bw("y", 1), gw("y", 1))),
            par(chain(rd("x", 1), rd("y", 0)),
                chain(rd("y", 1), rd("x", 0))))
    assert executions(P, B01) == set()


def test_dekker_buffered_shape_executes_from_zeros():
    """The shape where both writes drain only after the other thread's
    read is executable from the all-zero state and sets both flags."""
    t1 = chain(bw("x", 1), rd("y", 0), gw("x", 1), bw("z", 1), gw("z", 1))
    t2 = chain(bw("y", 1), rd("x", 0), gw("y", 1), bw("w", 1), gw("w", 1))
    P = par(t1, t2)
    sigma0 = state({"x": 0, "y": 0, "z": 0, "w": 0})
    finals = run_from(P, sigma0, B01)
    assert finals
    assert all(s.gmap()["z"] == 1 and s.gmap()["w"] == 1 for s in finals)


def test_peterson_race_shape_is_not_executable():
    P = par(chain(bw("x", 1), gw("x", 1), rd("x", 2)),
            chain(bw("x", 2), gw("x", 2), rd("x", 1)))
    sigma0 = state({"x": 0, "l": 0, "r": 0})
    assert run_from(P, sigma0, Bounds(frozenset({0, 1, 2}))) == set()


# ---------------------------------------------------------------------------
# Litmus harness


def _spec(corpus_dir, name):
    return parse_litmus((corpus_dir / f"{name}.lit").read_text())


def test_litmus_parse_round_trip(corpus_dir):
    spec = _spec(corpus_dir, "dekker")
    assert spec.name == "dekker"
    assert spec.reachable
    assert dict(spec.initial) == {"x": 0, "y": 0, "z": 0, "w": 0}
    assert spec.program == lang.dekker()


def test_litmus_parse_errors():
    with pytest.raises(LitmusParseError):
        parse_litmus("init { x = 0 }\nreachable ( x = 0 )")
    with pytest.raises(LitmusParseError):
        parse_litmus("program { skip }\nreachable ( x = 0 )\n"
                     "forbidden ( x = 1 )")
    with pytest.raises(LitmusParseError):
        parse_litmus("program { skip }")


def test_bounds_for_overrides():
    spec = parse_litmus("program { x := 1 }\nreachable ( x = 1 )\n"
                        "bounds { unroll = 4; values = {0, 1, 7} }")
    B = bounds_for(spec)
    assert B.unroll_max == 4 and B.values == frozenset({0, 1, 7})


def test_eval_predicate():
    pred = lang.parse_bexpr("x = 1 && y < 2")
    assert eval_predicate(pred, {"x": 1, "y": 0})
    assert not eval_predicate(pred, {"x": 0, "y": 0})
    assert not eval_predicate(pred, {"x": 1, "y": 3})


def test_store_buffering_reachable_and_fenced_forbidden(corpus_dir):
    v = litmus_run(_spec(corpus_dir, "sb"), bounds_for(_spec(corpus_dir, "sb")))
    assert v.holds and v.reachable and v.witnesses
    spec_f = _spec(corpus_dir, "fence_sb")
    vf = litmus_run(spec_f, bounds_for(spec_f))
    assert vf.holds and not vf.reachable and not vf.witnesses


def test_dekker_witness_replays(corpus_dir):
    spec = _spec(corpus_dir, "dekker")
    v = litmus_run(spec, bounds_for(spec), witness_cap=2)
    assert v.holds and v.witnesses
    sigma0 = state({loc: 0 for loc in lang.locations_of(spec.program)})
    for w in v.witnesses:
        # the recorded linearisation regenerates the recorded footstep
        steps = footprint(w.pomset, w.env, bounds_for(spec),
                          per_loc_n_max(w.pomset))
        assert w.footstep in steps
        s, t = w.footstep
        assert zeta(s) and zeta(t)
        assert all(sigma0.gmap()[k] == val for k, val in s.globals_)
        final = update(sigma0, t)
        assert final == w.final
        assert eval_predicate(spec.query, final.gmap())


def test_peterson_and_iriw_forbidden(corpus_dir):
    for name in ("peterson", "iriw"):
        spec = _spec(corpus_dir, name)
        v = litmus_run(spec, bounds_for(spec))
        assert v.holds and not v.reachable, name


# ---------------------------------------------------------------------------
# Sequential-consistency degeneration


def _interp(c, g: dict) -> dict:
    """Reference interpreter for loop-free single-threaded commands."""
    def ev(e) -> int:
        if isinstance(e, lang.IntConst):
            return e.value
        if isinstance(e, lang.ReadLoc):
            return g[e.loc]
        raise TypeError(e)

    def bv(b) -> bool:
        if isinstance(b, lang.Cmp):
            a, c2 = ev(b.lhs), ev(b.rhs)
            return a == c2 if b.op == "=" else a < c2
        raise TypeError(b)

    if isinstance(c, (lang.Skip, lang.Fence)):
        return g
    if isinstance(c, lang.Assign):
        g = dict(g)
        g[c.loc] = ev(c.expr)
        return g
    if isinstance(c, lang.Seq):
        return _interp(c.second, _interp(c.first, g))
    if isinstance(c, lang.If):
        return _interp(c.then if bv(c.cond) else c.other, g)
    raise TypeError(c)


def _random_single_thread(rng: random.Random) -> lang.Cmd:
    def atom():
        k = rng.randrange(4)
        loc = rng.choice("xyz")
        if k == 0:
            return lang.Skip()
        if k == 1:
            return lang.Fence()
        if k == 2:
            return lang.Assign(loc, lang.IntConst(rng.randrange(2)))
        return lang.Assign(loc, lang.ReadLoc(rng.choice("xyz")))

    def stmt():
        if rng.random() < 0.3:
            return lang.If(lang.Cmp("=", lang.ReadLoc(rng.choice("xyz")),
                                    lang.IntConst(rng.randrange(2))),
                           atom(), atom())
        return atom()

    c = stmt()
    for _ in range(rng.randrange(3)):
        c = lang.Seq(c, stmt())
    return c


def test_single_threaded_programs_degenerate_to_sc():
    rng = random.Random(60)
    for i in range(100):
        c = _random_single_thread(rng)
        init = {loc: 0 for loc in "xyz"}
        sigma0 = state(init)
        got = {s.gmap() for s in
               program_executions(c, sigma0, default_bounds(c, init))}
        assert got == {_interp(c, init)}, f"iteration {i}: {lang._pp_cmd(c)}"
