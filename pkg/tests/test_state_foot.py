"""Buffered states, footsteps and pomset footprints."""

import random

import pytest

from tsopom.po_sem import Bounds
from tsopom.pomset import NotSeriesParallel, Pomset, bw, gw, par, rd, seq
from tsopom.state_foot import (EMPTY_STATE, State, action_footprint,
                               characteristic, compose, differential, entry,
                               env_footprint, env_of_linearisation, footprint,
                               footprint_oracle, footstep_par, footstep_seq,
                               per_loc_n_max, state, update, zeta)


B01 = Bounds(frozenset({0, 1}))
V4 = Bounds(frozenset({0, 1, 2, 3}))


def chain(*actions):
    return Pomset.chain(actions)


def test_entry_canonicalization():
    assert entry(5, 0) == entry(7, 0) == (None, 0)
    assert entry(5, 1) != entry(7, 1)
    assert State.make(buffers={"x": (5, 0)}) == State.make(buffers={"x": (7, 0)})


def test_zeta_examples():
    assert zeta(state())
    assert zeta(state({"x": 1}, {"y": (2, 0)}))
    assert not zeta(state({"x": 1}, {"x": (2, 5)}))
    assert not zeta(state(None, {"y": (1, 1)}))


def test_update_overrides_and_extends():
    s = state({"x": 0, "y": 1})
    t = state({"x": 3, "z": 2})
    u = update(s, t)
    assert u.gmap() == {"x": 3, "y": 1, "z": 2}


def test_compose_requires_matching_middle():
    f1 = (state({"x": 0}), state({"x": 1}))
    f2 = (state({"x": 1}), state({"x": 2}))
    f3 = (state({"x": 0}), state({"x": 2}))
    got = compose(f1, f2)
    assert got is not None and got[1].gmap()["x"] == 2
    assert compose(f1, f3) is None
    assert footstep_seq({f1}, {f2, f3}) == {compose(f1, f2)}


def test_footstep_par_requires_empty_buffers():
    clean = (state({"x": 0}), state({"x": 0}))
    dirty = (state(None, {"x": (1, 1)}), state())
    other = (state({"y": 1}), state({"y": 1}))
    assert footstep_par({dirty}, {other}) == set()
    got = footstep_par({clean}, {other})
    assert got == {(state({"x": 0, "y": 1}), state({"x": 0, "y": 1}))}
    # inconsistent overlapping pre-states do not merge
    clash = (state({"x": 1}), state({"x": 1}))
    assert footstep_par({clean}, {clash}) == set()


def test_action_footprints():
    # a buffered write pushes one entry
    steps = action_footprint(bw("x", 1), B01, 1)
    assert (state(None, {"x": (None, 0)}), state(None, {"x": (1, 1)})) in steps
    # a global write pops the oldest entry
    steps = action_footprint(gw("x", 1), B01, 1)
    assert (state({"x": 0}, {"x": (1, 1)}),
            state({"x": 1}, {"x": (None, 0)})) in steps
    # a read with an empty buffer reads memory, else the newest entry
    steps = action_footprint(rd("x", 1), B01, 1)
    assert (state({"x": 1}, {"x": (None, 0)}), EMPTY_STATE) in steps
    assert (state(None, {"x": (1, 1)}), EMPTY_STATE) in steps
    assert not any(s.gmap().get("x") == 0 and s.count("x") == 0
                   for (s, _) in steps)


def test_env_footprint_globals_only():
    steps = env_footprint((gw("x", 1), gw("x", 0)), B01)
    assert all(not s.buffers and not t.buffers for (s, t) in steps)
    assert all(t.gmap()["x"] == 0 for (_, t) in steps)


def test_characteristic_and_differential():
    P = chain(bw("x", 1), gw("x", 1), bw("x", 2))
    assert differential("x", P) == 1
    lo, final = characteristic("x", P)
    assert final == 1 and lo <= 0
    assert per_loc_n_max(P) == {"x": 2}


def test_footprint_requires_sp():
    N = Pomset((gw("x", 1), gw("y", 1), rd("x", 1), rd("y", 1)),
               {(0, 2), (1, 2), (1, 3)})
    env = env_of_linearisation(N, (0, 1, 2, 3))
    with pytest.raises(NotSeriesParallel):
        footprint(N, env, B01)


# ---------------------------------------------------------------------------
# Worked example: P1 = bx:=2 -> x:=2 -> x=3 and P2 = bx:=3 -> x=3 -> x:=3
# under a shared six-action environment.


def test_worked_example_p1():
    P1 = chain(bw("x", 2), gw("x", 2), rd("x", 3))
    env = (
        (0, bw("x", 2)),
        (1, gw("x", 2)),
        (None, gw("x", 3)),
        (2, rd("x", 3)),
    )
    got = footprint(P1, env, V4, n_max=2)
    # rows with a nonempty residual buffer cannot read 3: the buffered
    # value is 2, so only the empty-buffer rows survive
    expected = {(state({"x": v}, {"x": (None, 0)}),
                 state({"x": 3}, {"x": (None, 0)}))
                for v in V4.values}
    assert got == expected


def test_worked_example_p2():
    P2 = chain(bw("x", 3), rd("x", 3), gw("x", 3))
    env = (
        (0, bw("x", 3)),
        (None, gw("x", 2)),
        (1, rd("x", 3)),
        (2, gw("x", 3)),
    )
    got = footprint(P2, env, V4, n_max=2)
    expected = set()
    for v in V4.values:
        for n in range(3):
            for v2 in (V4.values if n else {None}):
                expected.add((state({"x": v}, {"x": (v2, n)}),
                              state({"x": 3}, {"x": (3, n) if n else (None, 0)})))
    assert got == expected


def test_worked_example_parallel():
    P1 = chain(bw("x", 2), gw("x", 2), rd("x", 3))
    P2 = chain(bw("x", 3), rd("x", 3), gw("x", 3))
    P = par(P1, P2)
    # shared environment: bx:=2, bx:=3, x:=2, x=3, x:=3, x=3
    lin = (0, 3, 1, 4, 5, 2)
    env = env_of_linearisation(P, lin)
    got = footprint(P, env, V4, n_max=2)
    expected = {(state({"x": v}, {"x": (None, 0)}),
                 state({"x": 3}, {"x": (None, 0)}))
                for v in V4.values}
    assert got == expected


# ---------------------------------------------------------------------------
# Oracle equivalence on random SP pomsets


def _random_sp(rng: random.Random, n: int) -> Pomset:
    acts = [rng.choice([gw, bw, rd])(rng.choice("xy"), rng.randrange(4))
            for _ in range(n)]
    ps = [Pomset.single(a) for a in acts]
    while len(ps) > 1:
        b = ps.pop(rng.randrange(len(ps)))
        a = ps.pop(rng.randrange(len(ps)))
        ps.append(seq(a, b) if rng.random() < 0.5 else par(a, b))
    return ps[0]


def _random_env(rng: random.Random, P: Pomset):
    lins = []
    order = list(P.nodes)
    while True:
        rng.shuffle(order)
        if all(not P.less(b, a)
               for i, a in enumerate(order) for b in order[i + 1:]):
            break
    foreign = [(rng.randint(0, len(order)),
                gw(rng.choice("xy"), rng.randrange(4)))
               for _ in range(rng.randrange(3))]
    return env_of_linearisation(P, tuple(order), foreign)


def test_footprint_matches_oracle_on_random_pomsets():
    rng = random.Random(424242)
    for i in range(1000):
        P = _random_sp(rng, rng.randint(1, 6))
        env = _random_env(rng, P)
        fast = footprint(P, env, V4)
        slow = footprint_oracle(P, env, V4)
        assert fast == slow, f"iteration {i}: {P!r} under {env}"
