"""Gaps, bridges, thickness and the thickness conditions.

Exact thickness of a self-similar set reduces to its depth-one gap
endpoints: the bridge at a deeper endpoint always contains the scaled copy of
the bridge at the corresponding top-level endpoint, so deeper local
thickness values can only be larger.  Each bridge itself is exact once every
unlisted gap is provably too short to terminate it.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .cantor import CantorSpec, Gap, SubCantor, iter_gaps
from .errors import DepthExhausted, InvalidParameter
from .exact import Enclosure, Q, fmt

DEFAULT_HAUSDORFF_PRECISION = Fraction(1, 10**9)


def _threshold(ref: Fraction, eps: Fraction) -> Fraction:
    return ref if eps == 0 else (1 - eps) * ref


def _qualifies(length: Fraction, ref: Fraction, eps: Fraction) -> bool:
    """Whether a competitor gap terminates the (epsilon-)bridge of a gap of length ``ref``."""
    if eps == 0:
        return length >= ref
    return length > (1 - eps) * ref


def _check_eps(eps) -> Fraction:
    eps = Q(eps)
    if not 0 <= eps < 1:
        raise InvalidParameter(f"epsilon must lie in [0, 1), got {eps}")
    return eps


def _check_side(side: str) -> str:
    if side not in ("left", "right"):
        raise InvalidParameter(f"side must be 'left' or 'right', got {side!r}")
    return side


@dataclass(frozen=True)
class Bridge:
    endpoint_u: Fraction
    far_end_a: Fraction
    side: str
    gap: Gap

    @property
    def length(self) -> Fraction:
        return abs(self.far_end_a - self.endpoint_u)

    @property
    def ratio(self) -> Fraction:
        return self.length / self.gap.length


@dataclass(frozen=True)
class GapList:
    """Bounded gaps of a set known to a given depth.

    ``unlisted_bound`` bounds the length of every gap missing from the list
    (zero for a finite union of intervals, where the list is complete).
    """

    hull: tuple[Fraction, Fraction]
    gaps: tuple[Gap, ...]
    unlisted_bound: Fraction
    depth: int | None = None

    @classmethod
    def from_spec(cls, source, depth: int) -> "GapList":
        if isinstance(source, SubCantor):
            base, hull = source.base, source.window
        else:
            base, hull = source, source.hull
        gaps = tuple(sorted(iter_gaps(base, depth, hull[0], hull[1])))
        return cls(hull, gaps, base.unlisted_gap_bound(depth), depth)

    @classmethod
    def from_pieces(cls, pieces: Sequence[tuple[Fraction, Fraction]]) -> "GapList":
        pieces = sorted(pieces)
        if not pieces:
            raise InvalidParameter("a finite union needs at least one piece")
        gaps = tuple(Gap(a[1], b[0], 0) for a, b in zip(pieces, pieces[1:]) if a[1] < b[0])
        return cls((pieces[0][0], pieces[-1][1]), gaps, Fraction(0), None)

    def find(self, u: Fraction, side: str) -> Gap:
        """The listed gap whose endpoint ``u`` faces the bridge on ``side``."""
        lefts = [g.left for g in self.gaps]
        if side == "right":
            for g in self.gaps:
                if g.right == u:
                    return g
        else:
            i = bisect_left(lefts, u)
            if i < len(self.gaps) and self.gaps[i].left == u:
                return self.gaps[i]
        raise InvalidParameter(f"{fmt(u)} is not the {'right' if side == 'right' else 'left'} endpoint of a listed gap")

    def exact_for(self, gap: Gap, eps: Fraction = Fraction(0)) -> bool:
        thr = _threshold(gap.length, eps)
        return self.unlisted_bound < thr if eps == 0 else self.unlisted_bound <= thr


def _scan_bridge(gaps: GapList, gap: Gap, side: str, eps: Fraction, hull) -> Bridge:
    ref = gap.length
    if side == "right":
        u = gap.right
        far = hull[1]
        for h in gaps.gaps:
            if h.left >= u and h.right <= hull[1] and _qualifies(h.length, ref, eps):
                far = h.left
                break
    else:
        u = gap.left
        far = hull[0]
        for h in reversed(gaps.gaps):
            if h.right <= u and h.left >= hull[0] and _qualifies(h.length, ref, eps):
                far = h.right
                break
    return Bridge(u, far, side, gap)


def _required_depth(gaps: GapList, gap: Gap, eps: Fraction) -> int | None:
    """Best-effort depth hint when a gap list is too shallow (needs geometric decay info)."""
    if gaps.depth is None or gaps.unlisted_bound == 0:
        return None
    thr = _threshold(gap.length, eps)
    ratio = gaps.unlisted_bound / thr
    d = gaps.depth
    # unlisted bounds decay at least geometrically; report the next depth as a floor
    return d + 1 if ratio > 0 else d


def eps_bridge_at(gaps: GapList, u, side: str, epsilon=Fraction(0), hull=None) -> Bridge:
    side = _check_side(side)
    eps = _check_eps(epsilon)
    u = Q(u)
    hull = gaps.hull if hull is None else (Q(hull[0]), Q(hull[1]))
    gap = gaps.find(u, side)
    if not gaps.exact_for(gap, eps):
        raise DepthExhausted(
            f"gap list to depth {gaps.depth} cannot fix the bridge at {fmt(u)}: "
            f"unlisted gaps may reach {fmt(gaps.unlisted_bound)}",
            required_depth=_required_depth(gaps, gap, eps),
        )
    return _scan_bridge(gaps, gap, side, eps, hull)


def bridge_at(gaps: GapList, hull, u, side: str) -> Bridge:
    """Bridge at gap endpoint ``u``; ``side`` is the direction the bridge extends from ``u``."""
    return eps_bridge_at(gaps, u, side, Fraction(0), hull)


def local_thickness(gaps: GapList, hull, u, side: str) -> Fraction:
    return bridge_at(gaps, hull, u, side).ratio


def eps_thickness(gaps: GapList, epsilon=Fraction(0), hull=None) -> Fraction:
    """Infimum of epsilon-thickness over listed endpoints whose epsilon-bridge the list fixes."""
    eps = _check_eps(epsilon)
    hull = gaps.hull if hull is None else (Q(hull[0]), Q(hull[1]))
    best = None
    for g in gaps.gaps:
        if not gaps.exact_for(g, eps):
            continue
        for side in ("left", "right"):
            r = _scan_bridge(gaps, g, side, eps, hull).ratio
            if best is None or r < best:
                best = r
    if best is None:
        raise DepthExhausted("no listed gap has an exactly determined bridge")
    return best


# -- exact bridges on self-similar sets -------------------------------------


def spec_bridge(base: CantorSpec, window, gap: Gap, side: str, eps=Fraction(0)) -> Bridge:
    """Exact (epsilon-)bridge of ``gap`` inside ``K ∩ window`` by pruned gap search."""
    ref = gap.length
    thr = _threshold(ref, eps)
    depth = base.exactness_depth(thr, strict=(eps == 0))
    lo, hi = window
    if side == "right":
        u = gap.right
        far = hi
        for h in iter_gaps(base, depth, u, hi, thr):
            if h.left < far and _qualifies(h.length, ref, eps):
                far = h.left
    else:
        u = gap.left
        far = lo
        for h in iter_gaps(base, depth, lo, u, thr):
            if h.right > far and _qualifies(h.length, ref, eps):
                far = h.right
    return Bridge(u, far, side, gap)


@dataclass(frozen=True)
class ThicknessReport:
    mode: str  # "exact" | "bounds"
    lower: Fraction
    upper: Fraction
    witness_endpoint: Fraction
    witness_side: str
    witness_depth: int
    depth_used: int
    epsilon: Fraction = Fraction(0)

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    @property
    def value(self) -> Fraction:
        if not self.exact:
            raise InvalidParameter("thickness is only known up to bounds")
        return self.lower

    def to_json(self) -> dict:
        out: dict = {"mode": self.mode}
        if self.exact:
            out["thickness"] = fmt(self.lower)
        else:
            out["lower"] = fmt(self.lower)
            out["upper"] = fmt(self.upper)
        if self.epsilon:
            out["epsilon"] = fmt(self.epsilon)
        out["witness"] = {
            "endpoint": fmt(self.witness_endpoint),
            "side": self.witness_side,
            "birth_depth": self.witness_depth,
        }
        out["depth"] = self.depth_used
        return out


def _top_level_values(spec: CantorSpec, eps: Fraction):
    """(value, bridge) for every endpoint of a depth-one gap, in position order."""
    out = []
    L = spec.span
    for g0, g1 in spec.unit_gaps:
        gap = Gap(spec.lo + L * g0, spec.lo + L * g1, 1)
        for side in ("left", "right"):
            b = spec_bridge(spec, spec.hull, gap, side, eps)
            out.append((b.ratio, b))
    return out


def _spec_thickness(spec: CantorSpec, eps: Fraction) -> ThicknessReport:
    values = _top_level_values(spec, eps)
    value, bridge = min(values, key=lambda vb: vb[0])
    depth = max(spec.exactness_depth(_threshold(b.gap.length, eps), strict=(eps == 0)) for _, b in values)
    return ThicknessReport("exact", value, value, bridge.endpoint_u, bridge.side, 1, depth, eps)


SUB_SEARCH_LEVELS = 8
SUB_SEARCH_CYLINDERS = 4096


def _sub_thickness(sub: SubCantor, eps: Fraction) -> ThicknessReport:
    base = sub.base
    top = _spec_thickness(base, eps)
    tau = top.lower
    D = sub.cover_depth
    best = None
    # endpoints of gaps separating the cover cylinders: examined exactly
    for g in iter_gaps(base, D, sub.lo, sub.hi):
        for side in ("left", "right"):
            b = spec_bridge(base, sub.window, g, side, eps)
            if best is None or b.ratio < best[0]:
                best = (b.ratio, b)
    if best is not None and best[0] <= tau:
        b = best[1]
        return ThicknessReport("exact", best[0], best[0], b.endpoint_u, b.side, b.gap.birth_depth, D, eps)
    lower = tau
    # every other endpoint lies inside a cover cylinder and has value >= tau;
    # look for one realizing tau to close the gap between the bounds
    witnesses = [b for v, b in _top_level_values(base, eps) if v == tau]
    L = base.span
    for extra in range(SUB_SEARCH_LEVELS + 1):
        cyls = sub.cylinders(extra)
        if len(cyls) > SUB_SEARCH_CYLINDERS:
            break
        for c_lo, c_hi in cyls:
            scale = (c_hi - c_lo) / L
            for w in witnesses:
                g = Gap(
                    c_lo + (w.gap.left - base.lo) * scale,
                    c_lo + (w.gap.right - base.lo) * scale,
                    D + extra + 1,
                )
                b = spec_bridge(base, sub.window, g, w.side, eps)
                if best is None or b.ratio < best[0]:
                    best = (b.ratio, b)
                if b.ratio == tau:
                    return ThicknessReport("exact", tau, tau, b.endpoint_u, b.side, g.birth_depth, D + extra, eps)
    if best is None:
        raise DepthExhausted("no endpoint examined within budget", required_depth=D + SUB_SEARCH_LEVELS)
    b = best[1]
    return ThicknessReport("bounds", lower, best[0], b.endpoint_u, b.side, b.gap.birth_depth, D + SUB_SEARCH_LEVELS, eps)


def thickness(source, epsilon=Fraction(0)) -> ThicknessReport:
    """Thickness (or epsilon-thickness) of a CantorSpec or SubCantor."""
    eps = _check_eps(epsilon)
    if isinstance(source, SubCantor):
        return _sub_thickness(source, eps)
    if isinstance(source, CantorSpec):
        return _spec_thickness(source, eps)
    if isinstance(source, GapList):
        v = eps_thickness(source, eps)
        return ThicknessReport("bounds", Fraction(0), v, Fraction(0), "left", 0, source.depth or 0, eps)
    raise InvalidParameter(f"cannot compute thickness of {type(source).__name__}")


def thickness_value(source, epsilon=Fraction(0)) -> Fraction:
    """Exact thickness, or its certified lower bound when only bounds are known."""
    return thickness(source, epsilon).lower


# -- conditions -------------------------------------------------------------


def _positive(*values) -> tuple[Fraction, ...]:
    out = tuple(Q(v) for v in values)
    for v in out:
        if v <= 0:
            raise InvalidParameter(f"thickness values must be positive, got {v}")
    return out


def check_newhouse(t1, t2) -> bool:
    t1, t2 = _positive(t1, t2)
    return t1 * t2 > 1


HKY_NAMES = ("tau1 >= tau2", "tau1 > (tau2^2 + 3 tau2 + 1) / tau2^2", "tau2 > (2 tau1 + 1)^2 / tau1^3")


def hky_residuals(a: Fraction, b: Fraction) -> tuple[Fraction, Fraction, Fraction]:
    """Residuals of the three inequalities for the ordered pair (a, b)."""
    return (
        a - b,
        a - (b * b + 3 * b + 1) / (b * b),
        b - (2 * a + 1) ** 2 / a**3,
    )


def _ordered_ok(res) -> bool:
    return res[0] >= 0 and res[1] > 0 and res[2] > 0


@dataclass(frozen=True)
class HKYResult:
    satisfied: bool
    ordering: tuple[Fraction, Fraction]
    residuals: tuple[Fraction, Fraction, Fraction]

    @property
    def failing(self) -> str | None:
        if self.satisfied:
            return None
        r = self.residuals
        if r[0] < 0:
            return HKY_NAMES[0]
        if r[1] <= 0:
            return HKY_NAMES[1]
        return HKY_NAMES[2]

    def to_json(self) -> dict:
        out = {
            "satisfied": self.satisfied,
            "ordering": [fmt(self.ordering[0]), fmt(self.ordering[1])],
            "residuals": [fmt(r) for r in self.residuals],
        }
        if not self.satisfied:
            out["failing"] = self.failing
        return out


def check_hky(t1, t2) -> HKYResult:
    t1, t2 = _positive(t1, t2)
    orderings = [(t1, t2), (t2, t1)] if t1 >= t2 else [(t2, t1), (t1, t2)]
    for a, b in orderings:
        res = hky_residuals(a, b)
        if _ordered_ok(res):
            return HKYResult(True, (a, b), res)
    a, b = orderings[0]
    return HKYResult(False, (a, b), hky_residuals(a, b))


def hky_ordered(a, b) -> bool:
    a, b = _positive(a, b)
    return _ordered_ok(hky_residuals(a, b))


def hky_robust(l1, l2) -> bool:
    """HKY for every thickness pair bounded below by (l1, l2).

    Whichever true thickness is larger is at least ``max(l1, l2)``, so by
    monotonicity it suffices that both base pairs (M, l1) and (M, l2) pass.
    """
    l1, l2 = _positive(l1, l2)
    m = max(l1, l2)
    return hky_ordered(m, l1) and hky_ordered(m, l2)


def newhouse_robust(l1, l2) -> bool:
    return check_newhouse(l1, l2)


def hky_min_partner(t: Fraction, lo: Fraction = Fraction(1, 10**6), steps: int = 80) -> Fraction:
    """A rational L close above the least value with hky_robust(L, t)."""
    t = Q(t)
    hi = t
    if not hky_robust(hi, t):
        raise InvalidParameter(f"thickness {fmt(t)} paired with itself fails HKY")
    lo = Q(lo)
    for _ in range(steps):
        mid = (lo + hi) / 2
        mid = Fraction(round(mid * 2**40), 2**40) if mid.denominator > 2**40 else mid
        if mid <= lo or mid >= hi:
            break
        if hky_robust(mid, t):
            hi = mid
        else:
            lo = mid
    return hi


# -- Hausdorff dimension ----------------------------------------------------


def _raw_to_fraction(raw) -> Fraction:
    p, q = mpmath.libmp.to_rational(raw)
    return Fraction(p, q)


def hausdorff_lower_bound(t, precision=DEFAULT_HAUSDORFF_PRECISION) -> Enclosure:
    """Certified enclosure of log 2 / log(2 + 1/t)."""
    (t,) = _positive(t)
    precision = Q(precision) if not isinstance(precision, float) else Fraction(precision).limit_denominator(10**30)
    if precision <= 0:
        raise InvalidParameter("precision must be positive")
    x = 2 + 1 / t
    if x.denominator == 1:
        n = x.numerator
        if n & (n - 1) == 0:
            k = n.bit_length() - 1
            return Enclosure.point(Fraction(1, k))
    dps = 30
    while True:
        iv = mpmath.iv
        saved = iv.dps
        try:
            iv.dps = dps
            xi = iv.mpf(x.numerator) / iv.mpf(x.denominator)
            val = iv.log(2) / iv.log(xi)
            a, b = val._mpi_
            lo, hi = _raw_to_fraction(a), _raw_to_fraction(b)
        finally:
            iv.dps = saved
        if hi - lo <= precision:
            return Enclosure(lo, hi)
        dps *= 2
        if dps > 10_000:
            raise DepthExhausted("Hausdorff bound precision unreachable")


def examined_thickness_values(values: Iterable[Fraction]) -> Fraction:
    return min(values)
