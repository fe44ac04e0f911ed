"""Exact rationals and outward-rounded enclosures.

All coordinates in the library are :class:`fractions.Fraction`.  Irrational
quantities (square roots, logarithms) only ever appear as an
:class:`Enclosure` whose endpoints are rationals bracketing the true value.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Union

from .errors import InvalidParameter, SpecParseError

Rational = Union[Fraction, int]

#: Bits of absolute precision used when rounding square roots outward.
DEFAULT_PRECISION_BITS = 128


def precision_bits() -> int:
    raw = os.environ.get("CANTOR_FORGE_PRECISION")
    if not raw:
        return DEFAULT_PRECISION_BITS
    try:
        bits = int(raw)
    except ValueError as exc:
        raise InvalidParameter(f"CANTOR_FORGE_PRECISION must be an integer, got {raw!r}") from exc
    if bits < 16:
        raise InvalidParameter("CANTOR_FORGE_PRECISION must be at least 16 bits")
    return bits


def Q(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected: silently importing binary rounding error would
    defeat the point of exact arithmetic.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise SpecParseError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise SpecParseError(f"expected an exact rational, got {type(value).__name__} {value!r}")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise SpecParseError("empty rational")
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            if not num.strip().lstrip("+-").isdigit() or not den.strip().isdigit():
                raise ValueError(text)
            out = Fraction(int(num), int(den))
        else:
            out = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecParseError(f"not a rational: {text!r}") from exc
    return out


def fmt(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def exact_sqrt(q: Fraction) -> Fraction | None:
    """Return sqrt(q) if it is rational, else None."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def sqrt_bounds(q: Fraction, bits: int | None = None) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= sqrt(q) <= hi`` with ``hi - lo <= 2**-bits``."""
    if q < 0:
        raise InvalidParameter(f"square root of negative value {q}")
    r = exact_sqrt(q)
    if r is not None:
        return r, r
    if bits is None:
        bits = precision_bits()
    scale = 1 << bits
    s = isqrt(q.numerator * scale * scale // q.denominator)
    return Fraction(s, scale), Fraction(s + 1, scale)


def sqrt_lower(q: Fraction, bits: int | None = None) -> Fraction:
    return sqrt_bounds(q, bits)[0]


def sqrt_upper(q: Fraction, bits: int | None = None) -> Fraction:
    return sqrt_bounds(q, bits)[1]


@dataclass(frozen=True)
class Enclosure:
    """Closed rational interval known to contain a true value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise InvalidParameter(f"enclosure with lo > hi: [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: Rational) -> "Enclosure":
        x = Fraction(x)
        return cls(x, x)

    @classmethod
    def hull_of(cls, values: Iterable[Fraction]) -> "Enclosure":
        vals = list(values)
        return cls(min(vals), max(vals))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        if isinstance(x, Enclosure):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def overlaps(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "Enclosure") -> "Enclosure | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return None
        return Enclosure(lo, hi)

    def __add__(self, other) -> "Enclosure":
        if isinstance(other, Enclosure):
            return Enclosure(self.lo + other.lo, self.hi + other.hi)
        return Enclosure(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __sub__(self, other) -> "Enclosure":
        if isinstance(other, Enclosure):
            return Enclosure(self.lo - other.hi, self.hi - other.lo)
        return Enclosure(self.lo - other, self.hi - other)

    def __rsub__(self, other) -> "Enclosure":
        return Enclosure(other - self.hi, other - self.lo)

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def scale(self, c: Rational) -> "Enclosure":
        a, b = self.lo * c, self.hi * c
        return Enclosure(min(a, b), max(a, b))

    def abs(self) -> "Enclosure":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Enclosure(Fraction(0), max(-self.lo, self.hi))

    def square(self) -> "Enclosure":
        a = self.abs()
        return Enclosure(a.lo * a.lo, a.hi * a.hi)

    def sqrt(self, bits: int | None = None) -> "Enclosure":
        if self.lo < 0:
            raise InvalidParameter("square root of an enclosure reaching below zero")
        return Enclosure(sqrt_lower(self.lo, bits), sqrt_upper(self.hi, bits))

    def to_json(self) -> list[str]:
        return [fmt(self.lo), fmt(self.hi)]

    @classmethod
    def from_json(cls, data) -> "Enclosure":
        if isinstance(data, (list, tuple)) and len(data) == 2:
            return cls(Q(data[0]), Q(data[1]))
        return cls.point(Q(data))

    def __repr__(self) -> str:
        return f"Enclosure({fmt(self.lo)}, {fmt(self.hi)})"
