from __future__ import annotations

import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantor_forge.cantor import affine_image, build_middle_alpha
from cantor_forge.errors import ConditionViolation, InvalidParameter
from cantor_forge.exact import Enclosure
from cantor_forge.intersect import gap_lemma_point, interleaved, translated_self_intersection
from cantor_forge.replay import replay
from cantor_forge.tree import special_pair_for_distance
from oracles import intersect_lists, spec_cylinders

K3 = build_middle_alpha("1/3")
K4 = build_middle_alpha("1/4")
K6 = build_middle_alpha("1/6")


def meets(box: Enclosure, pieces) -> bool:
    return any(lo <= box.hi and box.lo <= hi for lo, hi in pieces)


def test_interleaved_examples():
    ok, wit = interleaved(K4, affine_image(K4, 1, F(1, 5)))
    assert ok and wit is not None
    assert interleaved(K3, affine_image(K3, 1, 2))[0] is False
    assert interleaved(K3, affine_image(K3, 1, 1))[0] is False


def test_gap_lemma_point_translate():
    B = affine_image(K4, 1, F(1, 5))
    res = gap_lemma_point(K4, B, F(1, 10**6))
    assert res.box.width <= F(1, 10**6)
    assert res.mode == "newhouse"
    assert replay(json.loads(json.dumps(res.to_json()))).kind == "intersection"
    both = intersect_lists(spec_cylinders(K4, 12), spec_cylinders(B, 12))
    assert both and meets(res.box, both)


def test_gap_lemma_point_needs_newhouse():
    with pytest.raises(ConditionViolation):
        gap_lemma_point(K3, affine_image(K3, 1, F(1, 5)), F(1, 1000))


def test_self_intersection_box_holds_a_member():
    res = gap_lemma_point(K6, K6, F(1, 10**4))
    assert res.mode == "hky"
    assert meets(res.box, spec_cylinders(K6, 10))


def test_translated_self_intersection_identity_shift():
    (pair,) = translated_self_intersection(K6, 0, 1, F(1, 10**8))
    assert pair.x1p == pair.y1p


def test_translated_self_intersection_two_pairs():
    r = F(59, 144)
    pairs = translated_self_intersection(K6, r, 2, F(1, 10**8))
    assert len(pairs) == 2
    both = intersect_lists(spec_cylinders(K6, 10), spec_cylinders(affine_image(K6, 1, r), 10))
    for p in pairs:
        assert p.x1p.lo - p.y1p.lo == r and p.x1p.hi - p.y1p.hi == r
        assert meets(p.x1p, both)
    assert not pairs[0].x1p.overlaps(pairs[1].x1p)
    with pytest.raises(ConditionViolation):
        translated_self_intersection(K3, F(1, 5), 1)


def test_special_pair_examples():
    x, y = (F(25, 144), F(25, 144)), (F(7, 12), F(7, 12))
    xp, yp = special_pair_for_distance(K6, K6, x, y)
    assert xp.box1.lo - yp.box1.lo == F(-59, 144) and xp.box1.hi - yp.box1.hi == F(-59, 144)
    assert xp.box2 == Enclosure.point(F(25, 144)) and yp.box2 == Enclosure.point(F(7, 12))
    assert xp.special.reason == "uncountable-intersection"
    with pytest.raises(InvalidParameter):
        special_pair_for_distance(K6, K6, x, x)
    with pytest.raises(InvalidParameter):
        special_pair_for_distance(K6, K6, (F(25, 144), F(0)), y)


# -- properties ------------------------------------------------------------------


@settings(max_examples=15)
@given(st.sampled_from(["1/4", "1/5", "1/6", "1/8"]), st.integers(1, 80), st.integers(4, 12))
def test_certificates_replay_and_meet_brute_force(alpha, shift, exp):
    K = build_middle_alpha(alpha)
    B = affine_image(K, 1, F(shift, 100))
    res = gap_lemma_point(K, B, F(1, 2**exp))
    assert res.box.width <= F(1, 2**exp)
    replay(res.to_json())
    assert meets(res.box, intersect_lists(spec_cylinders(K, 10), spec_cylinders(B, 10)))


@settings(max_examples=10)
@given(st.lists(st.tuples(st.integers(0, 99), st.integers(1, 5)), min_size=1, max_size=4))
def test_avoid_boxes_respected(raw):
    avoid = [Enclosure(F(a, 100), F(a, 100) + F(w, 1000)) for a, w in raw]
    res = gap_lemma_point(K6, K6, F(1, 10**6), avoid)
    assert all(not res.box.overlaps(b) for b in avoid)


@settings(max_examples=5)
@given(st.integers(1, 3), st.sampled_from([F(1, 7), F(59, 144), F(-1, 3)]))
def test_translated_pairs_distinct(count, r):
    pairs = translated_self_intersection(K6, r, count, F(1, 10**8))
    boxes = [p.x1p for p in pairs]
    for i, a in enumerate(boxes):
        for b in boxes[i + 1:]:
            assert not a.overlaps(b)
