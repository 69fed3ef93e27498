"""Pomset canonical forms, SP decomposition and linear extensions."""

import random

import pytest

from tsopom.pomset import (DELTA_ACTION, Leaf, NotSeriesParallel, ParNode,
                           Pomset, SeqNode, SizeGuardError, bw, delta_normalize,
                           find_iso, gw, linear_extensions_of_subset,
                           linearisations, par, rd, restrict, seq,
                           sp_components, sp_decompose, to_dot,
                           transitive_closure)


def chain(*actions):
    return Pomset.chain(actions)


def test_equality_up_to_isomorphism():
    # same shape, different node numbering
    P = Pomset((gw("x", 1), rd("y", 0)), {(0, 1)})
    Q = Pomset((rd("y", 0), gw("x", 1)), {(1, 0)})
    assert P == Q
    assert len({P, Q}) == 1
    iso = find_iso(P, Q)
    assert iso is not None
    assert all(Q.labels[iso[v]] == P.labels[v] for v in P.nodes)


def test_inequality_on_labels_and_order():
    P = chain(gw("x", 1), rd("y", 0))
    assert P != chain(gw("x", 1), rd("y", 1))
    assert P != par(Pomset.single(gw("x", 1)), Pomset.single(rd("y", 0)))


def test_transitive_closure_and_covers():
    rel = transitive_closure({(0, 1), (1, 2)}, 3)
    assert (0, 2) in rel
    P = chain(gw("x", 1), gw("x", 2), gw("x", 3))
    assert P.covers() == frozenset({(0, 1), (1, 2)})
    assert P.less(0, 2) and not P.less(2, 0)


def test_seq_par_composition_sizes():
    P = chain(gw("x", 1), rd("y", 0))
    Q = Pomset.single(gw("z", 2))
    assert len(seq(P, Q)) == 3
    S = seq(P, Q)
    assert all(S.less(a, 2) for a in (0, 1))
    R = par(P, Q)
    assert not any(R.less(a, b) or R.less(b, a)
                   for a in (0, 1) for b in (2,))


def test_delta_normalize():
    P = seq(Pomset.single(DELTA_ACTION), Pomset.single(gw("x", 1)))
    N = delta_normalize(P)
    assert N == Pomset.single(gw("x", 1))
    # a pomset of only deltas collapses to a single delta
    D = chain(DELTA_ACTION, DELTA_ACTION)
    assert delta_normalize(D) == Pomset.single(DELTA_ACTION)


def test_restrict():
    P = chain(bw("x", 1), gw("x", 1), rd("y", 0))
    W = restrict(P, lambda a: a.kind == "gw")
    assert W == Pomset.single(gw("x", 1))


def test_sp_decompose_chain_and_par():
    P = chain(gw("x", 1), rd("y", 0))
    t = sp_decompose(P)
    assert isinstance(t, Leaf) and tuple(t.nodes) == (0, 1)
    Q = par(chain(gw("x", 1), rd("y", 0)), chain(gw("y", 1), rd("x", 0)))
    t2 = sp_decompose(Q)
    assert isinstance(t2, ParNode)
    assert sorted(len(c) for c in sp_components(t2)) == [2, 2]


def test_sp_decompose_rejects_n_shape():
    # the N poset a<c, b<c, b<d is not series-parallel
    N = Pomset((gw("x", 1), gw("y", 1), rd("x", 1), rd("y", 1)),
               {(0, 2), (1, 2), (1, 3)})
    assert sp_decompose(N) is None


def test_linearisations_counts():
    P = par(chain(gw("x", 1), gw("x", 2)), Pomset.single(gw("y", 1)))
    lins = linearisations(P)
    assert len(lins) == 3
    for lin in lins:
        assert lin.index(0) < lin.index(1)
    with pytest.raises(SizeGuardError):
        linearisations(P, node_max=2)


def test_linear_extensions_of_subset():
    P = par(chain(gw("x", 1), gw("x", 2)), Pomset.single(gw("y", 1)))
    exts = linear_extensions_of_subset(P, [0, 1, 2])
    assert len(exts) == 3
    only_writes = linear_extensions_of_subset(P, [0, 1])
    assert only_writes == [(0, 1)]


def test_to_dot_is_transitive_reduction():
    P = chain(gw("x", 1), gw("x", 2), gw("x", 3))
    dot = to_dot(P)
    assert "n0 -> n1;" in dot and "n1 -> n2;" in dot
    assert "n0 -> n2" not in dot


def _random_sp(rng: random.Random, n: int) -> Pomset:
    actions = [rng.choice([gw, bw, rd])(rng.choice("xy"), rng.randrange(2))
               for _ in range(n)]
    ps = [Pomset.single(a) for a in actions]
    while len(ps) > 1:
        b = ps.pop(rng.randrange(len(ps)))
        a = ps.pop(rng.randrange(len(ps)))
        ps.append(seq(a, b) if rng.random() < 0.5 else par(a, b))
    return ps[0]


def test_sp_decompose_round_trip_random():
    from tsopom.pomset import sp_eval
    rng = random.Random(11)
    for _ in range(200):
        P = _random_sp(rng, rng.randint(1, 7))
        t = sp_decompose(P)
        assert t is not None
        assert sp_eval(t, P) == P


def test_canon_is_order_invariant():
    rng = random.Random(5)
    for _ in range(100):
        P = _random_sp(rng, rng.randint(1, 6))
        perm = list(P.nodes)
        rng.shuffle(perm)
        inv = {v: i for i, v in enumerate(perm)}
        Q = Pomset(tuple(P.labels[perm[i]] for i in range(len(P))),
                   {(inv[a], inv[b]) for a, b in P.lt}, closed=True)
        assert P == Q and hash(P) == hash(Q) and P.canon() == Q.canon()
