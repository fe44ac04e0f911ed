"""Exact self-similar Cantor sets on the line.

A :class:`CantorSpec` is a hull ``[a, b]`` together with ``k >= 2`` child
placements ``(offset, length)`` given relative to the unit interval.  The
set is the attractor of the maps ``u -> offset_i + length_i * u`` conjugated
onto the hull.  Every endpoint produced here is an exact rational.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from .errors import DepthExhausted, InvalidParameter, SpecParseError
from .exact import Q, fmt

MAX_PIECES = 1 << 20


@dataclass(frozen=True)
class CantorSpec:
    hull: tuple[Fraction, Fraction]
    children: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        a, b = (Q(v) for v in self.hull)
        kids = tuple((Q(o), Q(l)) for o, l in self.children)
        object.__setattr__(self, "hull", (a, b))
        object.__setattr__(self, "children", kids)
        if not a < b:
            raise InvalidParameter(f"hull must satisfy a < b, got [{a}, {b}]")
        if len(kids) < 2:
            raise InvalidParameter("a Cantor spec needs at least two children")
        if kids[0][0] != 0:
            raise InvalidParameter("first child must start at offset 0")
        if kids[-1][0] + kids[-1][1] != 1:
            raise InvalidParameter("last child must end at 1")
        for o, l in kids:
            if not 0 < l < 1:
                raise InvalidParameter(f"child length {l} outside (0, 1)")
        for (o1, l1), (o2, _) in zip(kids, kids[1:]):
            if not o1 + l1 < o2:
                raise InvalidParameter("children must be separated by positive gaps")

    # -- basic geometry -------------------------------------------------
    @property
    def k(self) -> int:
        return len(self.children)

    @property
    def lo(self) -> Fraction:
        return self.hull[0]

    @property
    def hi(self) -> Fraction:
        return self.hull[1]

    @property
    def span(self) -> Fraction:
        return self.hull[1] - self.hull[0]

    @cached_property
    def unit_gaps(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """Depth-one gaps in unit coordinates."""
        return tuple((o1 + l1, o2) for (o1, l1), (o2, _) in zip(self.children, self.children[1:]))

    @cached_property
    def max_gap(self) -> Fraction:
        return max(r - l for l, r in self.unit_gaps)

    @cached_property
    def max_ratio(self) -> Fraction:
        return max(l for _, l in self.children)

    @cached_property
    def min_ratio(self) -> Fraction:
        return min(l for _, l in self.children)

    @cached_property
    def is_uniform(self) -> bool:
        return len({l for _, l in self.children}) == 1

    def child(self, lo: Fraction, length: Fraction, i: int) -> tuple[Fraction, Fraction]:
        """(lo, length) of child ``i`` of the cylinder starting at ``lo``."""
        o, l = self.children[i]
        return lo + length * o, length * l

    def cylinder(self, address: Sequence[int]) -> tuple[Fraction, Fraction]:
        lo, length = self.lo, self.span
        for d in address:
            if not 0 <= d < self.k:
                raise InvalidParameter(f"digit {d} out of range for k={self.k}")
            lo, length = self.child(lo, length, d)
        return lo, lo + length

    def unlisted_gap_bound(self, depth: int) -> Fraction:
        """Upper bound on the length of any gap born strictly deeper than ``depth``."""
        return self.span * self.max_gap * self.max_ratio**depth

    def exactness_depth(self, length: Fraction, strict: bool = True) -> int:
        """Smallest depth D such that every gap born after D is shorter than ``length``.

        With ``strict=False`` the unlisted gaps are only required to be ``<= length``.
        """
        if length <= 0:
            raise InvalidParameter("exactness depth needs a positive length")
        d = 0
        while True:
            bound = self.unlisted_gap_bound(d)
            if bound < length or (not strict and bound <= length):
                return d
            d += 1

    # -- serialization ---------------------------------------------------
    def to_json(self) -> dict:
        return {
            "hull": [fmt(self.lo), fmt(self.hi)],
            "children": [[fmt(o), fmt(l)] for o, l in self.children],
        }

    @classmethod
    def from_json(cls, data) -> "CantorSpec":
        if isinstance(data, str):
            try:
                data = json.loads(data)
            except json.JSONDecodeError as exc:
                raise SpecParseError(f"spec is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise SpecParseError("spec must be a JSON object")
        try:
            if "middle_alpha" in data:
                return build_middle_alpha(Q(data["middle_alpha"]))
            hull = data["hull"]
            children = data["children"]
            if len(hull) != 2:
                raise SpecParseError("hull must have two endpoints")
            return cls((Q(hull[0]), Q(hull[1])), tuple((Q(o), Q(l)) for o, l in children))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SpecParseError):
                raise
            raise SpecParseError(f"malformed Cantor spec: {exc}") from exc

    def __repr__(self) -> str:
        kids = ", ".join(f"({fmt(o)}, {fmt(l)})" for o, l in self.children)
        return f"CantorSpec([{fmt(self.lo)}, {fmt(self.hi)}], [{kids}])"


def build_middle_alpha(alpha) -> CantorSpec:
    """The middle-``alpha`` Cantor set on [0, 1]."""
    alpha = Q(alpha)
    if not 0 < alpha < 1:
        raise InvalidParameter(f"alpha must lie in (0, 1), got {alpha}")
    beta = (1 - alpha) / 2
    return CantorSpec((Fraction(0), Fraction(1)), ((Fraction(0), beta), ((1 + alpha) / 2, beta)))


def affine_image(spec: CantorSpec, scale, shift) -> CantorSpec:
    """Spec of ``{scale * x + shift : x in K}``."""
    scale, shift = Q(scale), Q(shift)
    if scale == 0:
        raise InvalidParameter("affine scale must be non-zero")
    a, b = scale * spec.lo + shift, scale * spec.hi + shift
    if scale > 0:
        return CantorSpec((a, b), spec.children)
    kids = tuple((1 - o - l, l) for o, l in reversed(spec.children))
    return CantorSpec((b, a), kids)


# -- approximants and gaps -----------------------------------------------


@dataclass(frozen=True)
class Approximant:
    depth: int
    pieces: tuple[tuple[Fraction, Fraction], ...]

    def contains(self, x: Fraction) -> bool:
        return any(lo <= x <= hi for lo, hi in self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)


def refine(spec: CantorSpec, depth: int, max_pieces: int = MAX_PIECES) -> Approximant:
    if depth < 0:
        raise InvalidParameter("depth must be non-negative")
    if spec.k**depth > max_pieces:
        raise DepthExhausted(
            f"refining to depth {depth} would produce {spec.k}^{depth} pieces (limit {max_pieces})",
            required_depth=depth,
        )
    level = [(spec.lo, spec.span)]
    for _ in range(depth):
        level = [spec.child(lo, ln, i) for lo, ln in level for i in range(spec.k)]
    return Approximant(depth, tuple((lo, lo + ln) for lo, ln in level))


@dataclass(frozen=True, order=True)
class Gap:
    left: Fraction
    right: Fraction
    birth_depth: int = field(compare=False, default=0)

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    def to_json(self) -> list:
        return [fmt(self.left), fmt(self.right), self.birth_depth]


def iter_gaps(
    spec: CantorSpec,
    depth: int,
    lo: Fraction | None = None,
    hi: Fraction | None = None,
    min_length: Fraction = Fraction(0),
) -> Iterator[Gap]:
    """Gaps born at depth <= ``depth`` lying inside ``[lo, hi]`` with length >= min_length.

    Cylinders that cannot contain a long-enough gap are pruned, so a positive
    ``min_length`` keeps this cheap even for large ``depth``.
    """
    lo = spec.lo if lo is None else lo
    hi = spec.hi if hi is None else hi
    stack = [(spec.lo, spec.span, 0)]
    while stack:
        c_lo, c_len, d = stack.pop()
        if d >= depth or c_lo + c_len <= lo or c_lo >= hi:
            continue
        if c_len * spec.max_gap < min_length:
            continue
        for (g0, g1) in spec.unit_gaps:
            left, right = c_lo + c_len * g0, c_lo + c_len * g1
            if lo <= left and right <= hi and right - left >= min_length:
                yield Gap(left, right, d + 1)
        for i in range(spec.k):
            c_lo2, c_len2 = spec.child(c_lo, c_len, i)
            stack.append((c_lo2, c_len2, d + 1))


def gaps_up_to(spec, depth: int) -> list[Gap]:
    """All bounded gaps born at depth <= ``depth``, sorted by left endpoint.

    Accepts a :class:`CantorSpec` or a :class:`SubCantor` (gaps inside its window).
    """
    if depth < 1:
        raise InvalidParameter("gaps_up_to needs depth >= 1")
    if isinstance(spec, SubCantor):
        base, (lo, hi) = spec.base, spec.window
    else:
        base, lo, hi = spec, spec.lo, spec.hi
    count = sum(base.k**d for d in range(depth)) * (base.k - 1)
    if count > MAX_PIECES:
        raise DepthExhausted(f"{count} gaps requested at depth {depth}", required_depth=depth)
    return sorted(iter_gaps(base, depth, lo, hi))


# -- addresses and classification ----------------------------------------


@dataclass(frozen=True)
class Address:
    """Child-index digits (0-based).  ``period`` non-empty means the tail repeats forever."""

    prefix: tuple[int, ...]
    period: tuple[int, ...] = ()

    def is_eventually_boundary(self, k: int) -> bool | None:
        if not self.period:
            return None
        return self.period in ((0,), (k - 1,))

    def digits(self, n: int) -> tuple[int, ...]:
        out = list(self.prefix[:n])
        while len(out) < n and self.period:
            out.extend(self.period)
        return tuple(out[:n])

    def to_json(self) -> dict:
        data = {"prefix": encode_digits(self.prefix)}
        if self.period:
            data["period"] = encode_digits(self.period)
        return data

    @classmethod
    def from_json(cls, data) -> "Address":
        return cls(decode_digits(data.get("prefix", "")), decode_digits(data.get("period", "")))


def encode_digits(digits: Sequence[int]):
    if all(0 <= d < 10 for d in digits):
        return "".join(str(d) for d in digits)
    return list(digits)


def decode_digits(data) -> tuple[int, ...]:
    if isinstance(data, str):
        return tuple(int(c) for c in data)
    return tuple(int(d) for d in data)


def point_of_address(spec: CantorSpec, address: Address) -> Fraction:
    """Exact point named by an eventually periodic (or finite -> left end) address."""
    a, r = Fraction(0), Fraction(1)  # unit coordinate u -> a + r*u after the prefix
    for d in address.prefix:
        o, l = spec.children[d]
        a, r = a + r * o, r * l
    u = Fraction(0)
    if address.period:
        c, p = Fraction(0), Fraction(1)
        for d in address.period:
            o, l = spec.children[d]
            c, p = c + p * o, p * l
        u = c / (1 - p)
    return spec.lo + spec.span * (a + r * u)


@dataclass(frozen=True)
class Classification:
    status: str  # "inside" | "outside" | "undecided"
    address: Address | None = None
    gap_depth: int | None = None

    @property
    def member(self) -> bool:
        return self.status == "inside"

    def gap_endpoint(self, spec: CantorSpec, x: Fraction) -> bool | None:
        """True iff ``x`` is an endpoint of a *bounded* gap (hull ends excluded)."""
        if self.address is None or not self.address.period:
            return None
        if not self.address.is_eventually_boundary(spec.k):
            return False
        return x not in (spec.lo, spec.hi)


CYCLE_SEARCH_STEPS = 512


def classify(spec: CantorSpec, x, depth: int) -> Classification:
    """Locate ``x`` relative to the depth-``depth`` construction.

    ``outside`` iff ``x`` is outside the hull or in a gap born at depth <= ``depth``.
    ``inside`` means membership is proved: the expanding orbit of ``x`` was found to be
    eventually periodic, which also fixes the full address.  Otherwise ``undecided``.
    """
    x = Q(x)
    if depth < 0:
        raise InvalidParameter("depth must be non-negative")
    u = (x - spec.lo) / spec.span
    if u < 0 or u > 1:
        return Classification("outside", gap_depth=0)
    digits: list[int] = []
    seen = {u: 0}
    for step in range(max(depth, 0) + CYCLE_SEARCH_STEPS):
        for i, (o, l) in enumerate(spec.children):
            if o <= u <= o + l:
                break
        else:
            if step < depth:
                return Classification("outside", Address(tuple(digits)), gap_depth=step + 1)
            return Classification("undecided", Address(tuple(digits[:depth])))
        digits.append(i)
        u = (u - o) / l
        if u in seen:
            j = seen[u]
            return Classification("inside", Address(tuple(digits[:j]), tuple(digits[j:])))
        seen[u] = len(digits)
    return Classification("undecided", Address(tuple(digits[:depth])))


def cylinder_end_depth(spec: CantorSpec, x: Fraction, side: str) -> int | None:
    """Depth ``d`` such that ``x`` is the left (``side='left'``) or right end of a depth-d cylinder."""
    c = classify(spec, x, 0)
    if c.status != "inside":
        return None
    want = (0,) if side == "left" else (spec.k - 1,)
    if c.address.period != want:
        return None
    return len(c.address.prefix)


def adjacent_gap(spec: CantorSpec, x) -> tuple[Gap, str] | None:
    """The bounded gap having ``x`` as an endpoint, and the side of ``x`` it lies on.

    Returns ``(gap, "left")`` when the gap lies to the left of ``x``, ``(gap, "right")``
    when to the right, and None when ``x`` is not a bounded-gap endpoint.
    """
    x = Q(x)
    c = classify(spec, x, 0)
    if c.status != "inside" or not c.address.is_eventually_boundary(spec.k):
        return None
    edge = c.address.period[0]
    prefix = list(c.address.prefix)
    while prefix and prefix[-1] == edge:
        prefix.pop()
    if not prefix:
        return None
    j = prefix.pop()
    lo, hi = spec.cylinder(prefix)
    base_len = hi - lo
    if edge == 0:
        g0, g1 = spec.unit_gaps[j - 1]
        side = "left"
    else:
        g0, g1 = spec.unit_gaps[j]
        side = "right"
    return Gap(lo + base_len * g0, lo + base_len * g1, len(prefix) + 1), side


# -- restrictions -----------------------------------------------------------


@dataclass(frozen=True)
class SubCantor:
    """``K ∩ J`` for a window ``J`` whose ends are left/right cylinder ends of ``K``."""

    base: CantorSpec
    window: tuple[Fraction, Fraction]

    def __post_init__(self):
        lo, hi = (Q(v) for v in self.window)
        object.__setattr__(self, "window", (lo, hi))
        if not lo < hi:
            raise InvalidParameter("window must have lo < hi")
        if cylinder_end_depth(self.base, lo, "left") is None:
            raise InvalidParameter(f"window start {fmt(lo)} is not a left end of a cylinder")
        if cylinder_end_depth(self.base, hi, "right") is None:
            raise InvalidParameter(f"window end {fmt(hi)} is not a right end of a cylinder")

    @property
    def lo(self) -> Fraction:
        return self.window[0]

    @property
    def hi(self) -> Fraction:
        return self.window[1]

    @property
    def hull(self) -> tuple[Fraction, Fraction]:
        return self.window

    @cached_property
    def cover_depth(self) -> int:
        """Depth at which ``K ∩ J`` is a union of whole cylinders."""
        return max(
            cylinder_end_depth(self.base, self.lo, "left"),
            cylinder_end_depth(self.base, self.hi, "right"),
        )

    def cylinders(self, extra: int = 0) -> list[tuple[Fraction, Fraction]]:
        depth = self.cover_depth + extra
        out = []
        stack = [(self.base.lo, self.base.span, 0)]
        while stack:
            lo, ln, d = stack.pop()
            if lo + ln < self.lo or lo > self.hi:
                continue
            if d == depth:
                if self.lo <= lo and lo + ln <= self.hi:
                    out.append((lo, lo + ln))
                continue
            for i in range(self.base.k):
                stack.append((*self.base.child(lo, ln, i), d + 1))
            if len(out) + len(stack) > MAX_PIECES:
                raise DepthExhausted("sub-Cantor cover too large", required_depth=depth)
        return sorted(out)

    def is_cylinder(self) -> bool:
        return len(self.cylinders()) == 1

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "window": [fmt(self.lo), fmt(self.hi)]}

    @classmethod
    def from_json(cls, data) -> "SubCantor":
        return cls(CantorSpec.from_json(data["base"]), (Q(data["window"][0]), Q(data["window"][1])))


def load_spec(text: str):
    """Parse a CantorSpec or SubCantor from JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON: {exc}") from exc
    if isinstance(data, dict) and "base" in data and "window" in data:
        try:
            return SubCantor.from_json(data)
        except (KeyError, TypeError) as exc:
            raise SpecParseError(f"malformed sub-Cantor spec: {exc}") from exc
    return CantorSpec.from_json(data)
