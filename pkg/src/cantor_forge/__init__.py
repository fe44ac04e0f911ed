"""Exact thickness, certified intersections and tree embeddings for Cantor sets."""

from __future__ import annotations

from .cantor import CantorSpec, SubCantor, affine_image, build_middle_alpha, classify, load_spec, refine
from .circlemap import CircleMap, bubble_window, choose_window, distortion_bound, eval_circle
from .errors import (
    CantorForgeError,
    CertificateInvalid,
    ConditionViolation,
    DepthExhausted,
    InvalidParameter,
    SpecParseError,
)
from .exact import Enclosure
from .intersect import gap_lemma_point, interleaved, translated_self_intersection
from .replay import replay
from .thickness import check_hky, check_newhouse, hausdorff_lower_bound, thickness
from .tree import TreeSpec, build_tree, diagonal_window, pinned_point, stream_vertices, verify_tree

__version__ = "0.1.0"

__all__ = [
    "CantorForgeError", "CantorSpec", "CertificateInvalid", "CircleMap", "ConditionViolation",
    "DepthExhausted", "Enclosure", "InvalidParameter", "SpecParseError", "SubCantor", "TreeSpec",
    "affine_image", "bubble_window", "build_middle_alpha", "build_tree", "check_hky",
    "check_newhouse", "choose_window", "classify", "diagonal_window", "distortion_bound",
    "eval_circle", "gap_lemma_point", "hausdorff_lower_bound", "interleaved", "load_spec",
    "pinned_point", "refine", "replay", "stream_vertices", "thickness",
    "translated_self_intersection", "verify_tree",
]
