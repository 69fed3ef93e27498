"""Program-order denotations."""

from tsopom import lang, po_sem
from tsopom.po_sem import Bounds, UNIT, default_bounds, default_values
from tsopom.pomset import Pomset, gw, par, rd, seq


B01 = Bounds(frozenset({0, 1}))


def den(src: str, bounds: Bounds = B01):
    return po_sem.denote_program(lang.parse(src), bounds)


def test_default_values_and_bounds():
    p = lang.parse("x := 2; y := 3")
    assert default_values(p) == frozenset({0, 2, 3})
    assert default_values(p, {"z": 7}) == frozenset({0, 2, 3, 7})
    B = default_bounds(p)
    assert B.unroll_max == 2 and B.lin_node_max == 12


def test_skip_and_fence_are_unit():
    assert den("skip") == frozenset({UNIT})
    # a fence constrains buffers, which program order does not model
    assert den("fence") == frozenset({UNIT})
    assert den("x := 1; fence; r := y") == den("x := 1; r := y")


def test_assign_constant():
    assert den("x := 1") == frozenset({Pomset.single(gw("x", 1))})


def test_assign_read_ranges_over_values():
    expected = frozenset(
        Pomset.chain((rd("x", v), gw("r", v))) for v in (0, 1))
    assert den("r := x") == expected


def test_if_guard_selects_branch():
    got = den("if x = 0 then y := 1 else z := 1")
    expected = frozenset({
        Pomset.chain((rd("x", 0), gw("y", 1))),
        Pomset.chain((rd("x", 1), gw("z", 1))),
    })
    assert got == expected


def test_seq_and_par_compose_pointwise():
    X, Y = Pomset.single(gw("x", 1)), Pomset.single(gw("y", 1))
    assert den("x := 1; y := 1") == frozenset({seq(X, Y)})
    assert den("x := 1 || y := 1") == frozenset({par(X, Y)})


def test_while_unrolling():
    got = den("while x = 1 do y := 2", Bounds(frozenset({0, 1})))
    body = (rd("x", 1), gw("y", 2))
    expected = frozenset({
        Pomset.single(rd("x", 0)),
        Pomset.chain(body + (rd("x", 0),)),
        Pomset.chain(body + body + (rd("x", 0),)),
    })
    assert got == expected
    deeper = den("while x = 1 do y := 2",
                 Bounds(frozenset({0, 1}), unroll_max=3))
    assert got < deeper and len(deeper) == 4


def test_store_buffering_denotation():
    got = den(lang.SB_SRC)
    assert len(got) == 4
    reads = {tuple(sorted(a.val for a in P.labels if a.kind == "rd"))
             for P in got}
    assert reads == {(0, 0), (0, 1), (1, 1)} | {(0, 1)}


def test_if_seq_distribution_law_po():
    lhs = den("(if x = 1 then y := 1 else y := 2); z := 1")
    rhs = den("if x = 1 then (y := 1; z := 1) else (y := 2; z := 1)")
    assert lhs == rhs


def test_determinism():
    assert den(lang.DEKKER_SRC) == den(lang.DEKKER_SRC)
