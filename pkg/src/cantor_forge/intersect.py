"""Certified location of points in the intersection of two thick Cantor sets.

A search state is a pair of *pieces*: sub-Cantor sets with enclosed hull
endpoints, children, and a thickness lower bound.  A pair is certified at
a level when each piece has a member strictly inside the other's hull and
the thickness lower bounds satisfy the Hunt-Kan-Yorke (or, in existence-only
mode, Newhouse) condition for every pair of true thicknesses above them.
Then the intersection theorem guarantees a common point, which lies in
the overlap of the two hulls.  Nesting these levels drives the overlap to
zero width.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .cantor import Address, CantorSpec, affine_image, classify, encode_digits
from .circlemap import CircleImage
from .errors import ConditionViolation, DepthExhausted, InvalidParameter
from .exact import Enclosure, Q, fmt
from .thickness import check_hky, check_newhouse, hky_robust, thickness

log = logging.getLogger(__name__)

DEFAULT_DEPTH_BUDGET = 64
MEMBER_NODE_LIMIT = 400
MEMBER_DEPTH_LIMIT = 24


# -- pieces -----------------------------------------------------------------


class LinePiece:
    """``K ∩ C`` for an exact cylinder C of a self-similar spec."""

    __slots__ = ("spec", "address", "lo", "length", "tau_lb")
    kind = "line"

    def __init__(self, spec: CantorSpec, address: tuple[int, ...], lo: Fraction, length: Fraction, tau_lb: Fraction):
        self.spec = spec
        self.address = address
        self.lo = lo
        self.length = length
        self.tau_lb = tau_lb

    @classmethod
    def root(cls, spec: CantorSpec, tau_lb: Fraction | None = None) -> "LinePiece":
        if tau_lb is None:
            tau_lb = thickness(spec).lower
        return cls(spec, (), spec.lo, spec.span, tau_lb)

    @property
    def a_lo(self):
        return self.lo

    a_hi = a_lo

    @property
    def b_lo(self):
        return self.lo + self.length

    b_hi = b_lo

    @property
    def width(self) -> Fraction:
        return self.length

    @property
    def depth(self) -> int:
        return len(self.address)

    def children(self) -> list["LinePiece"]:
        out = []
        for i in range(self.spec.k):
            lo, ln = self.spec.child(self.lo, self.length, i)
            out.append(LinePiece(self.spec, self.address + (i,), lo, ln, self.tau_lb))
        return out

    def interval(self) -> tuple[Fraction, Fraction]:
        return self.lo, self.lo + self.length


class ImagePiece:
    """Image under a circle map of ``K1 ∩ C`` for a cylinder C inside a certified window."""

    __slots__ = ("image", "address", "s_lo", "s_len", "a_lo", "a_hi", "b_lo", "b_hi")
    kind = "image"

    def __init__(self, image: CircleImage, address: tuple[int, ...], s_lo: Fraction, s_len: Fraction):
        self.image = image
        self.address = address
        self.s_lo = s_lo
        self.s_len = s_len
        ea = image.g(s_lo)
        eb = image.g(s_lo + s_len)
        if not image.increasing:
            ea, eb = eb, ea
        self.a_lo, self.a_hi = ea
        self.b_lo, self.b_hi = eb

    @classmethod
    def root(cls, image: CircleImage) -> "ImagePiece":
        lo, hi = image.spec.cylinder(image.window_address)
        return cls(image, image.window_address, lo, hi - lo)

    @property
    def tau_lb(self) -> Fraction:
        return self.image.tau_lb

    @property
    def width(self) -> Fraction:
        return self.b_hi - self.a_lo

    @property
    def depth(self) -> int:
        return len(self.address)

    @property
    def spec(self) -> CantorSpec:
        return self.image.spec

    def children(self) -> list["ImagePiece"]:
        spec = self.image.spec
        out = [
            ImagePiece(self.image, self.address + (i,), *spec.child(self.s_lo, self.s_len, i))
            for i in range(spec.k)
        ]
        return out if self.image.increasing else out[::-1]

    def interval(self) -> tuple[Fraction, Fraction]:
        return self.s_lo, self.s_lo + self.s_len


# -- member search and level checks ---------------------------------------


@dataclass(frozen=True)
class Member:
    """A cylinder endpoint of a piece, certified to lie strictly inside a target interval."""

    address: tuple[int, ...]
    end: str  # "lo" | "hi": the end of the set piece (min or max) it is
    enclosure: tuple[Fraction, Fraction]

    def to_json(self) -> dict:
        return {"address": encode_digits(self.address), "end": self.end}


def find_member(piece, lo: Fraction, hi: Fraction, node_limit: int = MEMBER_NODE_LIMIT,
                depth_limit: int = MEMBER_DEPTH_LIMIT) -> Member | None:
    if hi <= lo:
        return None
    stack = [piece]
    base_depth = piece.depth
    nodes = 0
    while stack:
        p = stack.pop()
        nodes += 1
        if nodes > node_limit:
            return None
        if p.a_lo > lo and p.a_hi < hi:
            return Member(p.address, "lo", (p.a_lo, p.a_hi))
        if p.b_lo > lo and p.b_hi < hi:
            return Member(p.address, "hi", (p.b_lo, p.b_hi))
        if p.depth - base_depth >= depth_limit:
            continue
        kids = [c for c in p.children() if c.b_hi > lo and c.a_lo < hi]
        # visit the child nearest the middle of the target first
        mid = (lo + hi) / 2
        kids.sort(key=lambda c: -abs((c.a_lo + c.b_hi) / 2 - mid))
        stack.extend(kids)
    return None


@dataclass
class Level:
    p: object
    q: object
    q_in_p: Member
    p_in_q: Member

    @property
    def box(self) -> tuple[Fraction, Fraction]:
        return max(self.p.a_lo, self.q.a_lo), min(self.p.b_hi, self.q.b_hi)


def interleave_pair(p, q) -> Level | None:
    """Certified interleaving of two pieces, or None."""
    if not (p.a_hi < p.b_lo and q.a_hi < q.b_lo):
        return None
    if p.b_hi <= q.a_lo or q.b_hi <= p.a_lo:
        return None
    w1 = find_member(q, p.a_hi, p.b_lo)
    if w1 is None:
        return None
    w2 = find_member(p, q.a_hi, q.b_lo)
    if w2 is None:
        return None
    return Level(p, q, w1, w2)


def condition_mode(t1: Fraction, t2: Fraction, mode: str = "auto") -> str:
    """Resolve the search mode for thickness lower bounds t1, t2, or raise."""
    if mode not in ("auto", "hky", "newhouse"):
        raise InvalidParameter(f"unknown mode {mode!r}")
    if mode in ("auto", "hky") and hky_robust(t1, t2):
        return "hky"
    if mode == "hky":
        res = check_hky(t1, t2)
        failing = res.failing or "robust ordering " + "tau1 >= tau2"
        raise ConditionViolation(f"Hunt-Kan-Yorke condition fails: {failing}", failing=failing)
    if check_newhouse(t1, t2):
        return "newhouse"
    raise ConditionViolation(
        f"Newhouse condition fails: {fmt(t1)} * {fmt(t2)} = {fmt(t1 * t2)} is not > 1",
        failing="newhouse",
    )


def _extreme_run_penalty(address: tuple[int, ...], k: int) -> int:
    if len(address) < 2:
        return 0
    d = address[-1]
    return 1 if d in (0, k - 1) and address[-2] == d else 0


AvoidFn = Callable[[Level], str]  # "inside" | "overlap" | "disjoint"


def descend(
    root: Level,
    *,
    target_width: Fraction,
    depth_budget: int = DEFAULT_DEPTH_BUDGET,
    avoid: AvoidFn | None = None,
    accept: Callable[[list[Level]], bool] | None = None,
    accept_floor: bool = False,
    node_budget: int = 4000,
) -> list[Level] | None:
    """Depth-first nested refinement from a certified level.

    Stops at the first chain whose final box is narrower than ``target_width``,
    disjoint from everything ``avoid`` flags and accepted by ``accept``.  With
    ``accept_floor`` a chain that cannot be refined further (depth budget or
    enclosure resolution) is also final.
    """
    avoid = avoid or (lambda lvl: "disjoint")
    accept = accept or (lambda chain: True)
    path = [root]
    pending: list = [None]
    nodes = 0
    while path:
        lvl = path[-1]
        if pending[-1] is None:
            state = avoid(lvl)
            lo, hi = lvl.box
            if state == "disjoint" and hi - lo <= target_width and accept(path):
                return list(path)
            cands = _expand(lvl, depth_budget, avoid)
            if not cands:
                if accept_floor and state == "disjoint" and accept(path):
                    return list(path)
                path.pop()
                pending.pop()
                continue
            pending[-1] = iter(cands)
        nxt = next(pending[-1], None)
        if nxt is None:
            path.pop()
            pending.pop()
            continue
        nodes += 1
        if nodes > node_budget:
            raise DepthExhausted(f"search exceeded {node_budget} nodes", achieved=len(path))
        path.append(nxt)
        pending.append(None)
    return None


def _expand(lvl: Level, depth_budget: int, avoid: AvoidFn) -> list[Level]:
    p, q = lvl.p, lvl.q
    order = [("p", p), ("q", q)] if p.width >= q.width else [("q", q), ("p", p)]
    for which, piece in order:
        if piece.depth - _base_depth(piece) >= depth_budget:
            continue
        scored = []
        for pos, child in enumerate(piece.children()):
            pair = interleave_pair(child, q) if which == "p" else interleave_pair(p, child)
            if pair is None:
                continue
            if avoid(pair) == "inside":
                continue
            k = child.spec.k
            key = (-min(pair.p.width, pair.q.width), _extreme_run_penalty(child.address, k), pos)
            scored.append((key, pair))
        if scored:
            scored.sort(key=lambda kv: kv[0])
            return [pair for _, pair in scored]
    return []


def _base_depth(piece) -> int:
    if isinstance(piece, ImagePiece):
        return len(piece.image.window_address)
    return 0


# -- public operations --------------------------------------------------------


@dataclass(frozen=True)
class InterleaveWitness:
    point_of_A_in_hullinterior_of_B: Fraction
    point_of_B_in_hullinterior_of_A: Fraction


def _as_spec(x) -> CantorSpec:
    if isinstance(x, CantorSpec):
        return x
    raise InvalidParameter(f"expected a CantorSpec, got {type(x).__name__}")


def interleaved(A, B) -> tuple[bool, InterleaveWitness | None]:
    """Whether each set meets the interior of the other's hull, with member witnesses."""
    A, B = _as_spec(A), _as_spec(B)
    pa = LinePiece(A, (), A.lo, A.span, Fraction(0))
    pb = LinePiece(B, (), B.lo, B.span, Fraction(0))
    wb = find_member(pb, A.lo, A.hi)
    wa = find_member(pa, B.lo, B.hi)
    if wa is None or wb is None:
        return False, None
    return True, InterleaveWitness(wa.enclosure[0], wb.enclosure[0])


@dataclass
class IntersectionEnclosure:
    box: Enclosure
    levels: list[Level]
    mode: str
    tau: tuple[Fraction, Fraction]
    A: CantorSpec
    B: CantorSpec

    @property
    def robust(self) -> bool:
        return self.mode == "hky"

    @property
    def addresses(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        last = self.levels[-1]
        return last.p.address, last.q.address

    def uncountable(self) -> bool:
        return self.mode == "hky"

    def to_json(self) -> dict:
        return {
            "kind": "intersection",
            "mode": self.mode,
            "robust": self.robust,
            "A": self.A.to_json(),
            "B": self.B.to_json(),
            "tau": [fmt(self.tau[0]), fmt(self.tau[1])],
            "levels": [level_to_json(l) for l in self.levels],
            "box": self.box.to_json(),
        }


def level_to_json(lvl: Level) -> dict:
    def side(piece):
        lo, hi = piece.interval()
        return {"address": encode_digits(piece.address), "interval": [fmt(lo), fmt(hi)]}

    return {
        "a": side(lvl.p),
        "b": side(lvl.q),
        "b_in_a": lvl.q_in_p.to_json(),
        "a_in_b": lvl.p_in_q.to_json(),
    }


def box_avoid_1d(avoid: Sequence[Enclosure]) -> AvoidFn:
    boxes = [(Q(a.lo), Q(a.hi)) for a in avoid]

    def check(lvl: Level) -> str:
        lo, hi = lvl.box
        state = "disjoint"
        for a_lo, a_hi in boxes:
            if a_lo <= lo and hi <= a_hi:
                return "inside"
            if lo <= a_hi and a_lo <= hi:
                state = "overlap"
        return state

    return check


def gap_lemma_point(
    A: CantorSpec,
    B: CantorSpec,
    target_width,
    avoid: Sequence[Enclosure] = (),
    *,
    mode: str = "auto",
    depth_budget: int = DEFAULT_DEPTH_BUDGET,
    node_budget: int = 20000,
    accept: Callable[[list[Level]], bool] | None = None,
    accept_floor: bool = False,
) -> IntersectionEnclosure:
    """A certified box of width <= target_width containing a point of A ∩ B.

    With ``accept_floor`` the search may instead stop at the depth budget,
    returning the narrowest box it reached.
    """
    A, B = _as_spec(A), _as_spec(B)
    target_width = Q(target_width) if not isinstance(target_width, float) else Fraction(target_width)
    if target_width <= 0:
        raise InvalidParameter("target width must be positive")
    ta, tb = thickness(A).lower, thickness(B).lower
    resolved = condition_mode(ta, tb, mode)
    root = interleave_pair(LinePiece.root(A, ta), LinePiece.root(B, tb))
    if root is None:
        raise ConditionViolation("the two sets are not interleaved", failing="interleaved")
    chain = descend(
        root,
        target_width=target_width,
        depth_budget=depth_budget,
        avoid=box_avoid_1d(avoid),
        accept=accept,
        accept_floor=accept_floor,
        node_budget=node_budget,
    )
    if chain is None:
        raise DepthExhausted(
            f"no certified box of width {fmt(target_width)} within depth {depth_budget}",
            required_depth=depth_budget,
        )
    lo, hi = chain[-1].box
    return IntersectionEnclosure(Enclosure(lo, hi), chain, resolved, (ta, tb), A, B)


@dataclass(frozen=True)
class SpecialPointCertificate:
    """Why the first coordinate is not a gap endpoint and the second is not extreme.

    ``reason`` is ``"uncountable-intersection"`` when the final level of a
    robust chain guarantees uncountably many candidates in the box (all but
    countably many of which are non-endpoints), or ``"address"`` when the
    first coordinate is an exact point with a non-boundary periodic address.
    """

    reason: str
    address_x1: Address
    coordinate2_interior: bool

    def to_json(self) -> dict:
        return {
            "reason": self.reason,
            "address_x1": self.address_x1.to_json(),
            "coordinate2_interior": self.coordinate2_interior,
        }

    @classmethod
    def from_json(cls, data) -> "SpecialPointCertificate":
        return cls(data["reason"], Address.from_json(data["address_x1"]), bool(data["coordinate2_interior"]))


@dataclass(frozen=True)
class LinePair:
    """Two line points x1p = y1p + r known through a shared certified chain."""

    x1p: Enclosure
    y1p: Enclosure
    address: tuple[int, ...]
    chain: IntersectionEnclosure


def not_extreme_address(address: Sequence[int], k: int) -> bool:
    """A cylinder whose address has a non-zero and a non-maximal digit misses both hull ends."""
    return any(d != 0 for d in address) and any(d != k - 1 for d in address)


def translated_self_intersection(
    K: CantorSpec,
    r,
    count: int,
    target_width=Fraction(1, 10**12),
    *,
    avoid: Sequence[Enclosure] = (),
    depth_budget: int = DEFAULT_DEPTH_BUDGET,
    accept_floor: bool = False,
) -> list[LinePair]:
    """``count`` disjoint certified pairs (x, x - r) with both coordinates in K."""
    K = _as_spec(K)
    r = Q(r)
    if count < 0:
        raise InvalidParameter("count must be non-negative")
    if abs(r) >= K.span:
        raise InvalidParameter("|r| must be smaller than the diameter of the hull")
    tau = thickness(K).lower
    if not hky_robust(tau, tau):
        failing = check_hky(tau, tau).failing
        raise ConditionViolation(f"Hunt-Kan-Yorke fails for the set with itself: {failing}", failing=failing)
    B = affine_image(K, 1, r)
    used = list(avoid)
    out = []

    def accept(chain):
        p_addr, q_addr = chain[-1].p.address, chain[-1].q.address
        return not_extreme_address(p_addr, K.k) and not_extreme_address(q_addr, K.k)

    for _ in range(count):
        res = gap_lemma_point(K, B, target_width, used, mode="hky", depth_budget=depth_budget, accept=accept,
                              accept_floor=accept_floor)
        box = res.box
        out.append(LinePair(box, box - r, res.addresses[0], res))
        used.append(box)
        used.append(box - r)
        used.append(box + r)
    return out
