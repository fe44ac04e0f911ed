"""Naive exact oracles used to derive and cross-check expected values.

These deliberately share no code with the package: cylinders are enumerated
level by level and every bridge is found by a linear scan of an explicit
finite gap list.
"""

from __future__ import annotations

from fractions import Fraction as F


def cylinders(lo, hi, kids, depth):
    out = [(F(lo), F(hi))]
    for _ in range(depth):
        out = [(a + (b - a) * o, a + (b - a) * (o + l)) for a, b in out for o, l in kids]
    return out


def spec_cylinders(spec, depth):
    return cylinders(spec.lo, spec.hi, spec.children, depth)


def clip(intervals, lo, hi):
    """Pieces lying inside [lo, hi] (window ends must be piece ends at this depth)."""
    return [(a, b) for a, b in intervals if lo <= a and b <= hi]


def gaps_of(intervals):
    return [(a[1], b[0]) for a, b in zip(intervals, intervals[1:]) if a[1] < b[0]]


def finite_bridge(intervals, u, side, eps=F(0), ref=None):
    """Bridge length from gap endpoint u in the finite union ``intervals``."""
    gaps = gaps_of(intervals)
    lo, hi = intervals[0][0], intervals[-1][1]
    if ref is None:
        ref = next(b - a for a, b in gaps if u in (a, b))

    def ok(g):
        return g >= ref if eps == 0 else g > (1 - eps) * ref

    if side == "right":
        ends = [a for a, b in gaps if a >= u and ok(b - a)]
        return (min(ends) if ends else hi) - u
    ends = [b for a, b in gaps if b <= u and ok(b - a)]
    return u - (max(ends) if ends else lo)


def finite_thickness(intervals, eps=F(0)):
    best = None
    for a, b in gaps_of(intervals):
        g = b - a
        for v in (finite_bridge(intervals, b, "right", eps, g) / g, finite_bridge(intervals, a, "left", eps, g) / g):
            best = v if best is None or v < best else best
    return best


def member_at_depth(spec, x, depth):
    return any(a <= x <= b for a, b in spec_cylinders(spec, depth))


def intersect_lists(A, B):
    out = []
    i = j = 0
    while i < len(A) and j < len(B):
        lo, hi = max(A[i][0], B[j][0]), min(A[i][1], B[j][1])
        if lo <= hi:
            out.append((lo, hi))
        if A[i][1] < B[j][1]:
            i += 1
        else:
            j += 1
    return out
