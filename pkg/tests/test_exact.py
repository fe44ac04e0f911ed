from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantor_forge.errors import InvalidParameter, SpecParseError
from cantor_forge.exact import Enclosure, Q, exact_sqrt, fmt, parse_rational, precision_bits, sqrt_bounds


def test_q_rejects_floats_and_bools():
    with pytest.raises(SpecParseError):
        Q(0.5)
    with pytest.raises(SpecParseError):
        Q(True)
    assert Q("3/4") == F(3, 4)
    assert Q(2) == F(2)


def test_parse_and_format_round_trip():
    for text in ("1/3", "-7/12", "5", "0"):
        assert fmt(parse_rational(text)) == text
    for bad in ("", "1/x", "a"):
        with pytest.raises(SpecParseError):
            parse_rational(bad)


def test_exact_sqrt_of_squares():
    assert exact_sqrt(F(9, 16)) == F(3, 4)
    assert exact_sqrt(F(2)) is None


@given(st.fractions(min_value=0, max_value=10**6, max_denominator=10**6), st.integers(16, 200))
def test_sqrt_bounds_enclose(q, bits):
    lo, hi = sqrt_bounds(q, bits)
    assert lo * lo <= q <= hi * hi
    assert hi - lo <= F(1, 2**bits)


def test_precision_env(monkeypatch):
    monkeypatch.delenv("CANTOR_FORGE_PRECISION", raising=False)
    assert precision_bits() == 128
    monkeypatch.setenv("CANTOR_FORGE_PRECISION", "200")
    assert precision_bits() == 200
    monkeypatch.setenv("CANTOR_FORGE_PRECISION", "lots")
    with pytest.raises(InvalidParameter):
        precision_bits()


@given(
    st.fractions(-10, 10, max_denominator=50),
    st.fractions(0, 5, max_denominator=50),
    st.fractions(-10, 10, max_denominator=50),
    st.fractions(0, 5, max_denominator=50),
)
def test_enclosure_arithmetic_contains_point_results(a, wa, b, wb):
    A, B = Enclosure(a, a + wa), Enclosure(b, b + wb)
    for x in (a, a + wa / 2, a + wa):
        for y in (b, b + wb):
            assert (A + B).contains(x + y)
            assert (A - B).contains(x - y)
            assert A.square().contains(x * x)
            assert A.abs().contains(abs(x))


def test_enclosure_json_round_trip():
    e = Enclosure(F(1, 3), F(5, 7))
    assert Enclosure.from_json(e.to_json()) == e
    with pytest.raises(InvalidParameter):
        Enclosure(F(1), F(0))
