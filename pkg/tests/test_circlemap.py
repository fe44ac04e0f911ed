from __future__ import annotations

from fractions import Fraction as F

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantor_forge.cantor import SubCantor, build_middle_alpha, classify
from cantor_forge.circlemap import (
    CircleMap,
    bubble_window,
    choose_window,
    distortion_bound,
    eps_for_margin,
    eval_circle,
    map_pieces,
)
from cantor_forge.errors import InvalidParameter
from cantor_forge.exact import Enclosure
from cantor_forge.kernels import union_thickness
from cantor_forge.thickness import thickness
from oracles import clip, finite_thickness, spec_cylinders
from strategies import circle_window_cases, window_cases

K3 = build_middle_alpha("1/3")
K6 = build_middle_alpha("1/6")
UNIT = CircleMap.make((0, 0), 1, branch="lower")


def test_eval_examples():
    e = eval_circle(CircleMap.make((1, 1), 1, branch="lower"), 1)
    assert e.lo == e.hi == 0
    e = eval_circle(UNIT, F(3, 5))
    assert e.lo == e.hi == F(-4, 5)
    e = eval_circle(UNIT, Enclosure(F(1, 2) - F(1, 10**30), F(1, 2) + F(1, 10**30)))
    mpmath.mp.dps = 50
    assert e.lo <= F(str(-mpmath.sqrt(3) / 2)) <= e.hi
    assert abs(float(e.mid) + 0.866025) < 1e-6
    assert eval_circle(CircleMap.make((0, 0), 1, branch="upper"), F(3, 5)).lo == F(4, 5)
    with pytest.raises(InvalidParameter):
        eval_circle(UNIT, 2)


def test_distortion_examples():
    assert distortion_bound(UNIT, (F(3, 5), F(4, 5))) == F(7, 9)
    assert distortion_bound(UNIT, (F(7, 10), F(7, 10))) == 0
    assert distortion_bound(UNIT, (F(13, 20), F(3, 4))) <= F(7, 9)
    with pytest.raises(InvalidParameter):
        distortion_bound(UNIT, (F(-1, 10), F(1, 10)))


def test_map_pieces_examples():
    (img,) = map_pieces(UNIT, [(F(3, 5), F(4, 5))])
    assert (img.lo, img.hi) == (F(-4, 5), F(-3, 5))
    assert map_pieces(UNIT, []) == []
    # on the right half of the lower branch g increases; upper branch reverses the order
    up = CircleMap.make((0, 0), 1, branch="upper")
    a, b = map_pieces(up, [(F(3, 5), F(13, 20)), (F(7, 10), F(4, 5))])
    assert a.hi < b.lo
    assert a.contains(F(3, 5)) and b.lo <= F(4, 5) <= b.hi
    assert b.contains(eval_circle(up, F(3, 5)).lo)


def test_bubble_window_examples():
    sub = bubble_window(K3, F(1, 3), (F(1, 5), F(2, 5)))
    assert sub.window == (F(8, 27), F(1, 3))
    assert finite_thickness(clip(spec_cylinders(K3, 8), F(8, 27), F(1, 3))) == 1
    sub = bubble_window(K3, F(1, 4), (F(1, 5), F(3, 10)))
    assert sub.window == (F(20, 81), F(7, 27))
    assert sub.lo < F(1, 4) < sub.hi
    assert thickness(sub).lower >= 1
    assert finite_thickness(clip(spec_cylinders(K3, 8), *sub.window)) >= 1
    assert bubble_window(K3, F(1, 4), (F(-1), F(2))).window == (0, 1)


def test_choose_window_examples():
    m = CircleMap.make((F(-1), F(0)), t_sq=F(4), branch="lower")
    weak = choose_window(K6, F(7, 12), m, F(1, 100))
    assert weak.image_thickness_lb >= F(1, 100) * F(5, 2)
    cert = choose_window(K6, F(7, 12), m, F(9, 10))
    assert (1 - cert.distortion_eps) * cert.eps_thickness >= F(9, 10) * F(5, 2)
    assert cert.distortion_eps == distortion_bound(m, cert.window)
    # the stated eps-thickness is a lower bound for the finite-union value
    pieces = clip(spec_cylinders(K6, 9), *cert.window)
    assert finite_thickness(pieces, cert.distortion_eps) >= cert.eps_thickness
    with pytest.raises(InvalidParameter):
        choose_window(K6, F(-1), m, F(1, 2))


def test_eps_for_margin():
    eps = eps_for_margin(K6, F(9, 10))
    assert (1 - eps) * thickness(K6, eps).lower >= F(9, 4)
    assert abs(float(eps) - 0.1) < 1e-3


# -- properties ------------------------------------------------------------------


@given(st.integers(1, 40), st.integers(1, 40), st.fractions(F(1, 4), 4, max_denominator=9),
       st.sampled_from(["lower", "upper"]))
def test_enclosure_sound_at_pythagorean_points(m, n, t, branch):
    if m == n:
        return
    c = F(m * m - n * n, m * m + n * n)
    s_rel, g_rel = t * c, t * F(2 * m * n, m * m + n * n)
    cm = CircleMap.make((F(1, 3), F(-2, 7)), t, branch=branch)
    e = eval_circle(cm, F(1, 3) + s_rel)
    truth = F(-2, 7) + (g_rel if branch == "upper" else -g_rel)
    assert e.lo <= truth <= e.hi


def _abs_deriv_sq(cm: CircleMap, s: F) -> F:
    d = s - cm.y1.lo
    return d * d / (cm.t_sq - d * d)


@given(circle_window_cases(), st.integers(0, 100), st.integers(0, 100))
def test_distortion_bound_sound(case, i, j):
    spec, cm, x, I = case
    J = bubble_window(spec, x, I).window
    eps = distortion_bound(cm, J)
    a = J[0] + (J[1] - J[0]) * F(i, 100)
    b = J[0] + (J[1] - J[0]) * F(j, 100)
    r_sq = _abs_deriv_sq(cm, a) / _abs_deriv_sq(cm, b)
    assert r_sq <= (1 + eps) ** 2
    if eps < 1:
        assert r_sq >= (1 - eps) ** 2


@given(circle_window_cases(), st.integers(1, 99))
def test_derivative_matches_finite_difference(case, i):
    _, cm, x, I = case
    s = I[0] + (I[1] - I[0]) * F(i, 100)
    h = F(1, 10**12)
    fwd, bwd = eval_circle(cm, s + h), eval_circle(cm, s - h)
    fd = float((fwd.mid - bwd.mid) / (2 * h))
    d = float(s - cm.y1.lo)
    closed = d / np.sqrt(float(cm.t_sq) - d * d) * (1 if cm.branch == "lower" else -1)
    assert abs(fd - closed) <= 1e-6 * max(1.0, abs(closed))


@settings(max_examples=40)
@given(window_cases())
def test_bubble_window_keeps_thickness_and_status(case):
    spec, x, I = case
    sub = bubble_window(spec, x, I)
    assert I[0] < sub.lo and sub.hi < I[1] or sub.window == spec.hull
    assert sub.lo <= x <= sub.hi
    assert thickness(sub).lower >= thickness(spec).upper
    c = classify(spec, x, 0)
    if c.gap_endpoint(spec, x):
        assert x in sub.window
    elif x not in spec.hull:
        assert sub.lo < x < sub.hi


def mapped_thickness(spec, cm, sub: SubCantor, depth: int) -> float:
    pieces = sub.cylinders(depth)
    imgs = map_pieces(cm, pieces)
    # shift exactly before rounding so tiny windows keep their relative precision
    base, scale = imgs[0].lo, imgs[-1].hi - imgs[0].lo
    arr = np.array([[float((e.lo - base) / scale), float((e.hi - base) / scale)] for e in imgs])
    return union_thickness(arr)


@settings(max_examples=10)
@given(circle_window_cases())
def test_image_thickness_lower_bound(case):
    spec, cm, x, I = case
    sub = bubble_window(spec, x, I)
    eps = distortion_bound(cm, sub.window)
    if eps >= 1 or sub.is_cylinder() and len(sub.cylinders(1)) < 2:
        return
    lb = (1 - eps) * thickness(sub, eps).lower
    depth = 6 if spec.k > 2 else 8
    assert mapped_thickness(spec, cm, sub, depth) >= float(lb) - 1e-6
