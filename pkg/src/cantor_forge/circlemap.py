"""Circle maps g(s) = y2 -/+ sqrt(t^2 - (s - y1)^2) and window selection.

The center may be known only as a box (it is itself a certified vertex of a
tree), so every evaluation here is an enclosure valid for every center in
the box.  ``t`` is carried through its exact square.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cantor import CantorSpec, SubCantor, adjacent_gap, classify, iter_gaps
from .errors import DepthExhausted, InvalidParameter
from .exact import Enclosure, Q, exact_sqrt, fmt, precision_bits, sqrt_bounds, sqrt_upper
from .thickness import thickness


@dataclass(frozen=True)
class CircleMap:
    y1: Enclosure
    y2: Enclosure
    t_sq: Fraction
    branch: str  # "lower" | "upper"

    def __post_init__(self):
        if self.branch not in ("lower", "upper"):
            raise InvalidParameter(f"branch must be 'lower' or 'upper', got {self.branch!r}")
        if self.t_sq <= 0:
            raise InvalidParameter("radius must be positive")

    @classmethod
    def make(cls, center, t=None, *, t_sq=None, branch: str = "lower") -> "CircleMap":
        y1, y2 = (c if isinstance(c, Enclosure) else Enclosure.point(Q(c)) for c in center)
        if (t is None) == (t_sq is None):
            raise InvalidParameter("give exactly one of t and t_sq")
        if t is not None:
            t = Q(t)
            if t <= 0:
                raise InvalidParameter("radius must be positive")
            t_sq = t * t
        return cls(y1, y2, Q(t_sq), branch)

    @classmethod
    def through(cls, center: tuple[Enclosure, Enclosure], known: tuple[Enclosure, Enclosure], t_sq) -> "CircleMap":
        """The branch containing a known circle point, chosen by which side of the center it lies on."""
        y1, y2 = center
        x1, x2 = known
        if x2.overlaps(y2) or x1.overlaps(y1):
            raise InvalidParameter("known point must not share a coordinate with the center")
        return cls(y1, y2, Q(t_sq), "lower" if x2.hi < y2.lo else "upper")

    @property
    def sign(self) -> int:
        return -1 if self.branch == "lower" else 1

    def side_of(self, lo: Fraction, hi: Fraction) -> str:
        if hi < self.y1.lo:
            return "left"
        if lo > self.y1.hi:
            return "right"
        raise InvalidParameter("interval meets the critical point of the circle map")

    def increasing_on(self, side: str) -> bool:
        # lower branch: g rises as |s - y1| grows
        return (side == "right") == (self.branch == "lower")

    def in_domain(self, lo: Fraction, hi: Fraction) -> bool:
        d_hi = max(abs(hi - self.y1.lo), abs(hi - self.y1.hi), abs(lo - self.y1.lo), abs(lo - self.y1.hi))
        return d_hi * d_hi < self.t_sq

    def to_json(self) -> dict:
        return {"y1": self.y1.to_json(), "y2": self.y2.to_json(), "t_sq": fmt(self.t_sq), "branch": self.branch}


def eval_circle(cmap: CircleMap, s, bits: int | None = None) -> Enclosure:
    """Outward enclosure of g(s) over every center in the map's box."""
    s = s if isinstance(s, Enclosure) else Enclosure.point(Q(s))
    d = (s - cmap.y1).square()
    inner_lo, inner_hi = cmap.t_sq - d.hi, cmap.t_sq - d.lo
    if inner_lo < 0:
        raise InvalidParameter("argument outside the domain of the circle map")
    bits = precision_bits() if bits is None else bits
    r_lo = sqrt_bounds(inner_lo, bits)[0]
    r_hi = sqrt_bounds(inner_hi, bits)[1]
    if cmap.branch == "lower":
        return Enclosure(cmap.y2.lo - r_hi, cmap.y2.hi - r_lo)
    return Enclosure(cmap.y2.lo + r_lo, cmap.y2.hi + r_hi)


def derivative_sq_bounds(cmap: CircleMap, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Bounds on |g'|^2 = d^2 / (t^2 - d^2) over s in [lo, hi], d = |s - y1|."""
    side = cmap.side_of(lo, hi)
    if side == "right":
        d_min, d_max = lo - cmap.y1.hi, hi - cmap.y1.lo
    else:
        d_min, d_max = cmap.y1.lo - hi, cmap.y1.hi - lo
    if d_max * d_max >= cmap.t_sq:
        raise InvalidParameter("window reaches the end of the circle map's domain")
    f = lambda d: d * d / (cmap.t_sq - d * d)
    return f(d_min), f(d_max)


def distortion_bound(cmap: CircleMap, J, bits: int | None = None) -> Fraction:
    """Rational upper bound on sup | |g'(x)| / |g'(x')| - 1 | over x, x' in J."""
    lo, hi = (Q(v) for v in J)
    if lo > hi:
        raise InvalidParameter("window with lo > hi")
    m, M = derivative_sq_bounds(cmap, lo, hi)
    if m == 0:
        raise InvalidParameter("window touches the critical point")
    ratio_sq = M / m
    r = exact_sqrt(ratio_sq)
    if r is None:
        r = sqrt_upper(ratio_sq, precision_bits() if bits is None else bits)
    return r - 1


def map_pieces(cmap: CircleMap, pieces: Sequence[tuple[Fraction, Fraction]]) -> list[Enclosure]:
    """Images of monotone pieces, returned in ascending position.

    Each image is the hull of the two endpoint enclosures.
    """
    if not pieces:
        return []
    lo0, hi0 = min(p[0] for p in pieces), max(p[1] for p in pieces)
    side = cmap.side_of(lo0, hi0)
    inc = cmap.increasing_on(side)
    out = []
    for lo, hi in pieces:
        a, b = eval_circle(cmap, lo), eval_circle(cmap, hi)
        first, last = (a, b) if inc else (b, a)
        out.append(Enclosure(first.lo, last.hi))
    return out if inc else out[::-1]


@dataclass(frozen=True)
class CircleImage:
    """A circle map restricted to a K1 window on one monotone side, with cached evaluation."""

    cmap: CircleMap
    spec: CantorSpec
    window_address: tuple[int, ...]
    side: str
    increasing: bool
    epsilon: Fraction
    tau_lb: Fraction
    bits: int

    def __post_init__(self):
        object.__setattr__(self, "_cache", {})

    def g(self, s: Fraction) -> tuple[Fraction, Fraction]:
        cache = self._cache
        v = cache.get(s)
        if v is None:
            e = eval_circle(self.cmap, s, self.bits)
            v = (e.lo, e.hi)
            cache[s] = v
        return v


# -- windows ------------------------------------------------------------------


@dataclass(frozen=True)
class WindowCertificate:
    window: tuple[Fraction, Fraction]
    distortion_eps: Fraction
    margin_c: Fraction
    image_thickness_lb: Fraction
    eps_thickness: Fraction
    base_thickness: Fraction

    def to_json(self) -> dict:
        return {
            "window": [fmt(self.window[0]), fmt(self.window[1])],
            "epsilon": fmt(self.distortion_eps),
            "c": fmt(self.margin_c),
            "eps_thickness": fmt(self.eps_thickness),
            "image_thickness_lb": fmt(self.image_thickness_lb),
            "base_thickness": fmt(self.base_thickness),
        }


def _base_and_window(K):
    if isinstance(K, SubCantor):
        return K.base, K.window
    if isinstance(K, CantorSpec):
        return K, K.hull
    raise InvalidParameter(f"expected a CantorSpec or SubCantor, got {type(K).__name__}")


def _largest_gap(base: CantorSpec, lo: Fraction, hi: Fraction, prefer: str):
    """Largest gap contained in [lo, hi]; ties go to the one nearest ``prefer`` ('left'/'right')."""
    if hi <= lo:
        return None
    m = hi - lo
    for _ in range(200):
        depth = base.exactness_depth(m, strict=False)
        found = list(iter_gaps(base, depth, lo, hi, m))
        if found:
            best = max(g.length for g in found)
            cands = [g for g in found if g.length == best]
            return max(cands) if prefer == "right" else min(cands)
        m /= 2
    return None


def _gaps_at_least(base: CantorSpec, lo: Fraction, hi: Fraction, length: Fraction):
    depth = base.exactness_depth(length, strict=False)
    return [g for g in iter_gaps(base, depth, lo, hi, length) if g.length >= length]


def bubble_window(K, x, I) -> SubCantor:
    """A window J inside the open interval I around x with thickness(K ∩ J) >= thickness(K).

    Gap endpoints stay gap endpoints; non-endpoints stay interior.  Only gaps
    contained in I are used to place the ends of J.
    """
    base, (w_lo, w_hi) = _base_and_window(K)
    x = Q(x)
    i_lo, i_hi = (Q(v) for v in I)
    if not i_lo < x < i_hi:
        raise InvalidParameter("x must lie inside the open interval I")
    c = classify(base, x, 0)
    if c.status != "inside" and classify(base, x, 64).status == "outside":
        raise InvalidParameter(f"{fmt(x)} is not a point of the set")
    if not w_lo <= x <= w_hi:
        raise InvalidParameter(f"{fmt(x)} is outside the window")
    if i_lo < w_lo and w_hi < i_hi:
        return SubCantor(base, (w_lo, w_hi))
    lo_b, hi_b = max(i_lo, w_lo), min(i_hi, w_hi)
    adj = adjacent_gap(base, x) if x not in (w_lo, w_hi) else None
    if adj is not None and not (w_lo <= adj[0].left and adj[0].right <= w_hi):
        adj = None
    if adj is not None:
        gap, gside = adj
        if gside == "left":
            # x is a right gap endpoint: the window grows to the right of x
            cands = [g for g in _gaps_at_least(base, x, hi_b, gap.length) if g.right < i_hi]
            if cands:
                end = min(cands).left
            else:
                g2 = _largest_gap(base, x, hi_b, "left")
                if g2 is None:
                    raise DepthExhausted("no gap to the right of x inside I")
                end = g2.left
            return SubCantor(base, (x, end))
        cands = [g for g in _gaps_at_least(base, lo_b, x, gap.length) if g.left > i_lo]
        if cands:
            end = max(cands).right
        else:
            g2 = _largest_gap(base, lo_b, x, "right")
            if g2 is None:
                raise DepthExhausted("no gap to the left of x inside I")
            end = g2.right
        return SubCantor(base, (end, x))
    # x is not a bounded gap endpoint
    gl = _largest_gap(base, lo_b, x, "right") if x > w_lo else None
    gr = _largest_gap(base, x, hi_b, "left") if x < w_hi else None
    if gl is not None and not i_lo < gl.left:
        gl = None
    if gr is not None and not gr.right < i_hi:
        gr = None
    if gl is None and gr is None:
        if x == w_lo or x == w_hi:
            raise DepthExhausted("I holds no gap on the open side of x")
        raise DepthExhausted("I holds no gap on either side of x")
    if (gl is None and x != w_lo) or (gr is None and x != w_hi):
        raise DepthExhausted("I holds no gap on one side of x")
    ell = min(g.length for g in (gl, gr) if g is not None)
    if gl is not None:
        near = [g for g in _gaps_at_least(base, gl.left, x, ell)]
        u = max(near).right if near else gl.right
    else:
        u = w_lo
    if gr is not None:
        near = [g for g in _gaps_at_least(base, x, gr.right, ell)]
        v = min(near).left if near else gr.left
    else:
        v = w_hi
    return SubCantor(base, (u, v))


def eps_for_margin(K: CantorSpec, c: Fraction, target: Fraction | None = None) -> Fraction:
    """A largest-found dyadic epsilon with (1 - eps) * tau_eps(K) >= c * tau(K) (or >= target)."""
    tau = thickness(K).lower
    need = c * tau if target is None else target
    if need > tau:
        raise InvalidParameter("margin cannot exceed the thickness itself")
    lo, hi = Fraction(0), Fraction(1, 2)
    ok = lambda e: (1 - e) * thickness(K, e).lower >= need
    if ok(hi):
        return hi
    for _ in range(40):
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def choose_window(K: CantorSpec, x1, cmap: CircleMap, c, *, max_steps: int = 64) -> WindowCertificate:
    """Shrink a bubble window around x1 until the distortion keeps the thickness above c * tau(K)."""
    c = Q(c)
    if not 0 < c < 1:
        raise InvalidParameter("c must lie in (0, 1)")
    x1 = Q(x1)
    if cmap.y1.contains(x1):
        raise InvalidParameter("x1 sits at the critical point of the circle map")
    tau = thickness(K).lower
    side = "right" if x1 > cmap.y1.hi else "left"
    if side == "right":
        h = x1 - cmap.y1.hi
    else:
        h = cmap.y1.lo - x1
    reach = h
    # stay inside the domain as well as on one monotone side
    t_lo = sqrt_bounds(cmap.t_sq, 64)[0]
    edge = (cmap.y1.lo + t_lo - x1) if side == "right" else (x1 - (cmap.y1.hi - t_lo))
    if edge <= 0:
        raise InvalidParameter("x1 lies outside the domain of the circle map")
    reach = min(h, edge)
    last = None
    for n in range(max_steps):
        r = reach / 2 ** (n + 1)
        try:
            sub = bubble_window(K, x1, (x1 - r, x1 + r))
        except DepthExhausted:
            continue
        eps = distortion_bound(cmap, sub.window)
        if eps >= 1:
            continue
        t_eps = thickness(sub, eps).lower
        lb = (1 - eps) * t_eps
        last = eps
        if lb >= c * tau:
            return WindowCertificate(sub.window, eps, c, lb, t_eps, tau)
    raise DepthExhausted(
        f"no window certified after {max_steps} shrink steps (last epsilon {fmt(last) if last is not None else 'n/a'})",
        required_depth=max_steps,
        achieved=last,
    )
