from __future__ import annotations

import copy
import json
from fractions import Fraction as F

import pytest

from cantor_forge.cantor import affine_image, build_middle_alpha
from cantor_forge.circlemap import CircleMap, choose_window
from cantor_forge.errors import CertificateInvalid, SpecParseError
from cantor_forge.exact import precision_bits
from cantor_forge.intersect import gap_lemma_point
from cantor_forge.replay import replay
from cantor_forge.tree import TreeSpec, build_tree

K4 = build_middle_alpha("1/4")
K6 = build_middle_alpha("1/6")
SRC = ((F(25, 144), F(25, 144)), (F(7, 12), F(7, 12)))


@pytest.fixture(scope="module")
def intersection_cert():
    return gap_lemma_point(K4, affine_image(K4, 1, F(1, 5)), F(1, 10**6)).to_json()


@pytest.fixture(scope="module")
def tree_cert():
    return build_tree(K6, K6, TreeSpec.chain(4), SRC, F(1, 10**9)).to_json()


@pytest.fixture(scope="module")
def window_cert():
    cmap = CircleMap.make((F(25, 144), F(25, 144)), t_sq=F(3481, 10368), branch="lower")
    cert = choose_window(K6, F(7, 12), cmap, F(1, 2))
    return {"kind": "window", "K": K6.to_json(), "map": cmap.to_json(),
            "precision_bits": precision_bits(), **cert.to_json()}


def test_fresh_certificates_replay(intersection_cert, tree_cert, window_cert):
    assert replay(intersection_cert).kind == "intersection"
    assert replay(json.dumps(tree_cert)).kind == "tree"
    assert replay(window_cert).kind == "window"
    assert replay(intersection_cert).levels_checked == len(intersection_cert["levels"])


def test_widened_interval_is_reported_with_level(intersection_cert):
    bad = copy.deepcopy(intersection_cert)
    lo, hi = bad["levels"][3]["a"]["interval"]
    bad["levels"][3]["a"]["interval"] = [lo, str(F(hi) + F(1, 1000))]
    with pytest.raises(CertificateInvalid) as exc:
        replay(bad)
    assert exc.value.level == 3


def test_broken_nesting_is_reported(intersection_cert):
    bad = copy.deepcopy(intersection_cert)
    bad["levels"][2] = copy.deepcopy(bad["levels"][5])
    with pytest.raises(CertificateInvalid) as exc:
        replay(bad)
    assert exc.value.level == 3


def test_overstated_thickness_rejected(intersection_cert):
    bad = copy.deepcopy(intersection_cert)
    bad["tau"] = ["3", "3"]
    with pytest.raises(CertificateInvalid):
        replay(bad)


def test_moved_tree_vertex_rejected(tree_cert):
    bad = copy.deepcopy(tree_cert)
    v = bad["vertices"][-1]
    v["box1"] = [str(F(x) + F(1, 10**6)) for x in v["box1"]]
    with pytest.raises(CertificateInvalid):
        replay(bad)


def test_understated_distortion_rejected(window_cert):
    bad = dict(window_cert, epsilon="1/1000")
    with pytest.raises(CertificateInvalid):
        replay(bad)


def test_malformed_input():
    with pytest.raises(SpecParseError):
        replay("")
    with pytest.raises(SpecParseError):
        replay("{not json")
    with pytest.raises(SpecParseError):
        replay({"kind": "nonsense"})
    with pytest.raises(CertificateInvalid):
        replay({"kind": "intersection"})
