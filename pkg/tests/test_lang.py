"""Parser, pretty-printer and program metadata."""

import pytest

from tsopom import lang


ROUND_TRIP_SOURCES = [
    "skip",
    "fence",
    "x := 1",
    "x := y + 1",
    "x := 1; y := 2",
    "x := 1 || y := 2",
    "if x = 0 then y := 1 else skip",
    "while x = 1 do x := x - 1",
    "(x := 1; if y = 0 then z := 1 else skip)"
    " || (y := 1; if x = 0 then w := 1 else skip)",
]


@pytest.mark.parametrize("src", ROUND_TRIP_SOURCES)
def test_parse_pretty_round_trip(src):
    p = lang.parse(src)
    assert lang.parse(lang.pretty(p)) == p


@pytest.mark.parametrize("name", sorted(lang.CORPUS))
def test_parse_total_on_corpus(name):
    p = lang.parse(lang.CORPUS[name])
    assert isinstance(p, lang.Program)
    assert lang.parse(lang.pretty(p)) == p


def test_builders_match_sources():
    assert lang.dekker() == lang.parse(lang.DEKKER_SRC)
    assert lang.peterson() == lang.parse(lang.PETERSON_SRC)
    assert lang.iriw() == lang.parse(lang.IRIW_SRC)
    assert lang.store_buffering() == lang.parse(lang.SB_SRC)
    assert lang.store_buffering_fenced() == lang.parse(lang.SB_FENCED_SRC)


def test_seq_binds_tighter_than_par():
    p = lang.parse("x := 1; y := 2 || z := 3")
    assert isinstance(p.body, lang.Par)
    assert isinstance(p.body.left, lang.Seq)


def test_locations_and_constants():
    p = lang.dekker()
    assert lang.locations_of(p) == {"x", "y", "z", "w"}
    assert lang.constants_of(p) == {0, 1}


def test_parse_bexpr():
    b = lang.parse_bexpr("x = 1 && y = 0")
    assert isinstance(b, lang.Logic) and b.op == "and"
    b2 = lang.parse_bexpr("x < 2 or !(y = 1)")
    assert isinstance(b2, lang.Logic) and b2.op == "or"


@pytest.mark.parametrize("bad", ["x :=", "if x then skip", "x := 1 |",
                                 "while do skip", "x = 1"])
def test_parse_errors(bad):
    with pytest.raises(lang.ParseError):
        lang.parse(bad)
