from __future__ import annotations

from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from cantor_forge.cantor import CantorSpec, SubCantor, affine_image, build_middle_alpha
from cantor_forge.errors import DepthExhausted, InvalidParameter
from cantor_forge.thickness import (
    GapList,
    bridge_at,
    check_hky,
    check_newhouse,
    eps_thickness,
    hausdorff_lower_bound,
    hky_residuals,
    hky_robust,
    local_thickness,
    thickness,
)
from oracles import clip, finite_bridge, finite_thickness, spec_cylinders
from strategies import cantor_specs

K3 = build_middle_alpha("1/3")
K6 = build_middle_alpha("1/6")
RESTRICTED = SubCantor(K3, (F(2, 9), F(7, 9)))
# non-uniform specs; expected values come from the finite-union oracle at depths 4 to 6
THREE_CHILD = CantorSpec((0, 1), ((0, F(1, 5)), (F(2, 5), F(1, 10)), (F(3, 5), F(2, 5))))
UNEVEN = CantorSpec((0, 1), ((0, F(2, 5)), (F(1, 2), F(1, 2))))


@pytest.mark.parametrize("alpha", ["1/3", "1/4", "1/6", "1/10"])
def test_middle_alpha_closed_form(alpha):
    a = F(alpha)
    rep = thickness(build_middle_alpha(a))
    assert rep.exact and rep.lower == rep.upper == (1 - a) / (2 * a)


def test_bridges_middle_third():
    gl = GapList.from_spec(K3, 6)
    b = bridge_at(gl, K3.hull, F(2, 3), "right")
    assert (b.endpoint_u, b.far_end_a, b.length) == (F(2, 3), F(1), F(1, 3))
    assert local_thickness(gl, K3.hull, F(2, 3), "right") == 1
    b = bridge_at(gl, K3.hull, F(8, 27), "right")
    assert (b.far_end_a, b.length) == (F(1, 3), F(1, 27))
    assert b.length == finite_bridge(spec_cylinders(K3, 6), F(8, 27), "right")


def test_bridge_in_restriction():
    gl = GapList.from_spec(RESTRICTED, 6)
    b = bridge_at(gl, RESTRICTED.window, F(1, 3), "left")
    assert (b.far_end_a, b.length) == (F(2, 9), F(1, 9))
    assert local_thickness(gl, RESTRICTED.window, F(1, 3), "left") == F(1, 3)
    pieces = clip(spec_cylinders(K3, 6), F(2, 9), F(7, 9))
    assert finite_bridge(pieces, F(1, 3), "left") == F(1, 9)


def test_local_thickness_middle_sixth():
    gl = GapList.from_spec(K6, 3)
    assert local_thickness(gl, K6.hull, F(7, 12), "right") == F(5, 2)


def test_restriction_thickness():
    rep = thickness(RESTRICTED)
    assert rep.exact and rep.value == F(1, 3)
    assert finite_thickness(clip(spec_cylinders(K3, 8), F(2, 9), F(7, 9))) == F(1, 3)


def test_non_uniform_frozen_values():
    assert thickness(THREE_CHILD).value == 1
    assert thickness(THREE_CHILD, F(1, 4)).value == F(4, 5)
    assert thickness(UNEVEN).value == 4
    assert finite_thickness(spec_cylinders(THREE_CHILD, 5), F(1, 4)) == F(4, 5)


def test_bridge_rejects_shallow_list():
    # depth-2 gaps (up to 17/400) outgrow the top gap (11/20, 23/40) of length 1/40
    spec = CantorSpec((0, 1), ((0, F(2, 5)), (F(1, 2), F(1, 20)), (F(23, 40), F(17, 40))))
    gl = GapList.from_spec(spec, 1)
    with pytest.raises(DepthExhausted):
        bridge_at(gl, spec.hull, F(23, 40), "right")
    deep = GapList.from_spec(spec, spec.exactness_depth(F(1, 40)))
    assert bridge_at(deep, spec.hull, F(23, 40), "right").length == finite_bridge(
        spec_cylinders(spec, 6), F(23, 40), "right")
    with pytest.raises(InvalidParameter):
        bridge_at(GapList.from_spec(K3, 2), K3.hull, F(1, 2), "right")


def test_eps_thickness_middle_third():
    gl = GapList.from_spec(K3, 6)
    assert eps_thickness(gl, 0) == 1
    assert eps_thickness(gl, F(1, 10)) == 1
    assert finite_thickness(spec_cylinders(K3, 6), F(1, 10)) == 1
    assert thickness(K3, F(1, 10)).value == 1
    with pytest.raises(InvalidParameter):
        eps_thickness(gl, 1)


def test_finite_union_gap_list_matches_oracle():
    pieces = [(F(0), F(1, 10)), (F(1, 5), F(3, 10)), (F(1, 2), F(7, 10)), (F(9, 10), F(1))]
    assert eps_thickness(GapList.from_pieces(pieces)) == finite_thickness(pieces)


def test_report_json():
    assert thickness(K3).to_json()["thickness"] == "1"
    assert thickness(K6).to_json()["thickness"] == "5/2"


def test_newhouse_examples():
    assert check_newhouse(F(3, 2), F(3, 2))
    assert not check_newhouse(1, 1)
    assert check_newhouse(F(5, 2), F(5, 2))


def test_hky_examples():
    res = check_hky(F(5, 2), F(5, 2))
    assert res.satisfied and res.residuals == (0, F(7, 50), F(49, 250))
    res = check_hky(F(3, 2), F(3, 2))
    assert not res.satisfied
    assert res.residuals[1] == F(3, 2) - F(31, 9)
    assert not check_hky(1, 1).satisfied
    assert res.to_json()["failing"]


def test_hausdorff_examples():
    e = hausdorff_lower_bound(1)
    assert abs(float(e.mid) - 0.630930) < 1e-6
    mpmath.mp.dps = 40
    assert e.lo <= F(str(mpmath.log(2) / mpmath.log(3))) <= e.hi
    assert hausdorff_lower_bound(F(1, 2)).lo == hausdorff_lower_bound(F(1, 2)).hi == F(1, 2)
    big = hausdorff_lower_bound(10**6)
    assert big.hi < 1 and hausdorff_lower_bound(10**5).hi < big.lo


# -- properties ------------------------------------------------------------------

pos = st.fractions(min_value=F(1, 10), max_value=20, max_denominator=40)


@given(pos, pos, pos, pos)
def test_hky_monotone(t1, t2, d1, d2):
    assume(check_hky(t1, t2).satisfied)
    a, b = max(t1, t2) + d1, min(t1, t2) + d2
    assume(a >= b)
    assert check_hky(a, b).satisfied


@given(pos, pos)
def test_hky_implies_product_above_five(t1, t2):
    if check_hky(t1, t2).satisfied:
        assert t1 * t2 > 5


@given(st.fractions(min_value=F(2415, 1000), max_value=50, max_denominator=1000),
       st.fractions(min_value=0, max_value=50, max_denominator=1000))
def test_hky_above_one_plus_sqrt_two(t2, d):
    assert check_hky(t2 + d, t2).satisfied


def test_hky_residual_formula_by_hand():
    a, b = F(7), F(3)
    assert hky_residuals(a, b) == (F(4), a - F(19, 9), b - F(225, 343))
    assert hky_robust(F(5, 2), F(5, 2)) and not hky_robust(F(3, 2), F(3, 2))


def _oracle_depth(spec: CantorSpec) -> int:
    L, gmax = spec.span, spec.max_gap
    rho = max(l for _, l in spec.children)
    g_top = min(b - a for a, b in spec.unit_gaps) * L
    d = 1
    while L * gmax * rho**d >= g_top:
        d += 1
    return d


@given(cantor_specs(max_den=6))
def test_thickness_matches_oracle(spec):
    d = _oracle_depth(spec)
    assume(spec.k**d <= 800)
    assert thickness(spec).value == finite_thickness(spec_cylinders(spec, d))


@given(cantor_specs(max_den=6), st.fractions(-3, 3, max_denominator=5).filter(lambda s: s != 0),
       st.fractions(-2, 2, max_denominator=5))
def test_thickness_affine_invariant(spec, s, t):
    assert thickness(affine_image(spec, s, t)).value == thickness(spec).value


@given(cantor_specs(max_den=6), st.fractions(0, F(9, 10), max_denominator=20),
       st.fractions(0, F(9, 10), max_denominator=20))
def test_eps_thickness_monotone(spec, e1, e2):
    lo, hi = sorted((e1, e2))
    t0 = thickness(spec).value
    t_lo, t_hi = thickness(spec, lo).lower, thickness(spec, hi).lower
    assert t_hi <= t_lo <= t0
    if lo == 0:
        assert t_lo == t0
