from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantor_forge import kernels
from cantor_forge.cantor import build_middle_alpha
from oracles import finite_thickness, intersect_lists, spec_cylinders
from strategies import cantor_specs, dyadic_specs

K6 = build_middle_alpha("1/6")
needs_numba = pytest.mark.skipif(not kernels.numba_enabled(), reason="numba unavailable")


def test_env_flag(monkeypatch):
    monkeypatch.setenv(kernels.DISABLE_ENV, "1")
    assert not kernels.numba_enabled()
    monkeypatch.setenv(kernels.DISABLE_ENV, "0")
    pytest.importorskip("numba")
    assert kernels.numba_enabled()


@settings(max_examples=25)
@given(cantor_specs(), st.integers(0, 5))
def test_approximant_matches_exact_cylinders(spec, depth):
    exact = spec_cylinders(spec, depth)
    got = kernels.approximant_intervals(spec, depth, use_numba=False)
    assert got.shape == (len(exact), 2)
    assert np.allclose(got, np.array([[float(a), float(b)] for a, b in exact]), atol=1e-12)


@needs_numba
@settings(max_examples=25)
@given(cantor_specs(), st.integers(0, 5))
def test_approximant_numba_agrees(spec, depth):
    a = kernels.approximant_intervals(spec, depth, use_numba=False)
    b = kernels.approximant_intervals(spec, depth, use_numba=True)
    assert np.allclose(a, b, atol=1e-12)


@settings(max_examples=25)
@given(dyadic_specs(), st.integers(1, 4), st.sampled_from([F(0), F(1, 4), F(1, 2)]))
def test_union_thickness_matches_exact_oracle(spec, depth, eps):
    # dyadic inputs keep float64 exact, so gap-length ties compare the same way as in the oracle
    exact = spec_cylinders(spec, depth)
    want = finite_thickness(exact, eps)
    arr = np.array([[float(a), float(b)] for a, b in exact])
    for flag in (False, True) if kernels.numba_enabled() else (False,):
        got = kernels.union_thickness(arr, float(eps), use_numba=flag)
        if want is None:
            assert got == np.inf
        else:
            assert got == float(want)


def test_union_thickness_middle_sixth():
    arr = kernels.approximant_intervals(K6, 8)
    for flag in (False, True) if kernels.numba_enabled() else (False,):
        assert kernels.union_thickness(arr, use_numba=flag) == pytest.approx(2.5)


@settings(max_examples=25)
@given(cantor_specs(), cantor_specs(), st.integers(1, 4))
def test_intersect_matches_exact_oracle(s1, s2, depth):
    A, B = spec_cylinders(s1, depth), spec_cylinders(s2, depth)
    want = [(a, b) for a, b in intersect_lists(A, B) if float(a) < float(b)]
    fa = np.array([[float(a), float(b)] for a, b in A])
    fb = np.array([[float(a), float(b)] for a, b in B])
    for flag in (False, True) if kernels.numba_enabled() else (False,):
        got = kernels.intersect_intervals(fa, fb, use_numba=flag)
        got = got[got[:, 0] < got[:, 1]]
        assert np.allclose(got, np.array([[float(a), float(b)] for a, b in want]).reshape(-1, 2))


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.01, 3),
       st.lists(st.tuples(st.floats(-2, 2), st.floats(0, 1), st.floats(-2, 2), st.floats(0, 1)), min_size=1, max_size=8))
def test_circle_hits(cx, cy, t, raw):
    rects = np.array([[x, x + w, y, y + h] for x, w, y, h in raw])
    base = kernels.circle_rect_hits((cx, cy), t, rects, use_numba=False)
    if kernels.numba_enabled():
        assert (base == kernels.circle_rect_hits((cx, cy), t, rects, use_numba=True)).all()
    # a dense sample of the circle must hit only rectangles flagged as met
    th = np.linspace(0, 2 * np.pi, 4001)
    px, py = cx + t * np.cos(th), cy + t * np.sin(th)
    for r, hit in zip(rects, base):
        inside = (px >= r[0]) & (px <= r[1]) & (py >= r[2]) & (py <= r[3])
        if inside.any():
            assert hit
