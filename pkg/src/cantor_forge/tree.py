"""Constant-gap trees inside products of two Cantor sets.

Vertices of the universal tree are tuples of positive integers; the root is
``()``.  The seed edge joins ``()`` and ``(1,)``.  Every other child of a
vertex ``w`` is placed on the circle of radius t about ``x^w`` by a star
expansion seeded with the known circle point ``x^{parent(w)}`` (for the root,
its first child).  Every point is a certified box; edge distances are
certified intervals containing t exactly.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count as _count
from typing import Iterator, Sequence

from .cantor import Address, CantorSpec, classify, decode_digits, encode_digits
from .circlemap import CircleImage, CircleMap, distortion_bound, eps_for_margin
from .errors import ConditionViolation, DepthExhausted, InvalidParameter
from .exact import Enclosure, Q, fmt, precision_bits, sqrt_lower, sqrt_upper
from .intersect import (
    DEFAULT_DEPTH_BUDGET,
    ImagePiece,
    Level,
    LinePiece,
    SpecialPointCertificate,
    descend,
    interleave_pair,
    level_to_json,
    not_extreme_address,
    translated_self_intersection,
)
from .thickness import check_hky, hky_min_partner, hky_robust, thickness

log = logging.getLogger(__name__)

DEFAULT_TOL = Fraction(1, 10**9)
WINDOW_NODE_BUDGET = 600
SEED_TARGET = Fraction(1, 2**200)

VertexId = tuple[int, ...]


def vid_str(v: VertexId) -> str:
    return ".".join(str(i) for i in v)


def vid_parse(s: str) -> VertexId:
    return tuple(int(p) for p in s.split(".")) if s else ()


# -- tree shapes --------------------------------------------------------------


@dataclass(frozen=True)
class TreeSpec:
    kind: str  # "explicit" | "tstar" | "stream"
    parents: tuple[int | None, ...] = ()
    branching: int = 0
    depth: int = 0

    def __post_init__(self):
        if self.kind == "explicit":
            roots = [i for i, p in enumerate(self.parents) if p is None]
            if len(roots) != 1 or roots[0] != 0:
                raise InvalidParameter("an explicit tree needs exactly one root, at index 0")
            n = len(self.parents)
            for i, p in enumerate(self.parents):
                if p is not None and not 0 <= p < n:
                    raise InvalidParameter(f"parent index {p} out of range")
            for i in range(n):
                seen, j = set(), i
                while j is not None:
                    if j in seen:
                        raise InvalidParameter("parent array contains a cycle")
                    seen.add(j)
                    j = self.parents[j]
        elif self.kind == "tstar":
            if self.branching < 1 or self.depth < 1:
                raise InvalidParameter("T* truncation needs branching >= 1 and depth >= 1")
        elif self.kind != "stream":
            raise InvalidParameter(f"unknown tree kind {self.kind!r}")

    @classmethod
    def chain(cls, n: int) -> "TreeSpec":
        return cls("explicit", tuple([None] + list(range(n - 1))))

    @classmethod
    def tstar(cls, branching: int, depth: int) -> "TreeSpec":
        return cls("tstar", branching=branching, depth=depth)

    @property
    def finite(self) -> bool:
        return self.kind != "stream"

    def embedding(self) -> list[VertexId]:
        """T* ids of the vertices, indexed like the explicit parent array (or BFS order)."""
        if self.kind == "explicit":
            n = len(self.parents)
            children: dict[int, list[int]] = {i: [] for i in range(n)}
            for i, p in enumerate(self.parents):
                if p is not None:
                    children[p].append(i)
            ids: list[VertexId | None] = [None] * n
            ids[0] = ()
            queue = [0]
            while queue:
                v = queue.pop(0)
                for j, c in enumerate(children[v], start=1):
                    ids[c] = ids[v] + (j,)
                    queue.append(c)
            return ids  # type: ignore[return-value]
        if self.kind == "tstar":
            out: list[VertexId] = [()]
            level = [()]
            for _ in range(self.depth):
                level = [w + (i,) for w in level for i in range(1, self.branching + 1)]
                out.extend(level)
            return out
        raise InvalidParameter("an unbounded tree has no finite embedding")

    def tstar_ids(self) -> list[VertexId]:
        """Placement order: by length, then lexicographic."""
        return sorted(self.embedding(), key=lambda v: (len(v), v))

    def edges(self) -> list[tuple[VertexId, VertexId]]:
        return [(v[:-1], v) for v in self.tstar_ids() if v]

    def to_json(self) -> dict:
        if self.kind == "explicit":
            return {"parents": list(self.parents)}
        if self.kind == "tstar":
            return {"tstar": {"branching": self.branching, "depth": self.depth}}
        return {"tstar": "stream"}

    @classmethod
    def from_json(cls, data) -> "TreeSpec":
        from .errors import SpecParseError

        if isinstance(data, str):
            try:
                data = json.loads(data)
            except json.JSONDecodeError as exc:
                raise SpecParseError(f"tree file is not valid JSON: {exc}") from exc
        try:
            if "parents" in data:
                return cls("explicit", tuple(None if p is None else int(p) for p in data["parents"]))
            ts = data["tstar"]
            if ts == "stream":
                return cls("stream")
            return cls("tstar", branching=int(ts["branching"]), depth=int(ts["depth"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecParseError(f"malformed tree spec: {exc}") from exc


def stream_order() -> Iterator[VertexId]:
    """All of T*, ordered by len(w) + sum(w) and then lexicographically.

    Every vertex follows its parent and its preceding siblings.
    """
    yield ()
    for weight in _count(2):
        level = []
        for length in range(1, weight // 2 + 1):
            total = weight - length
            level.extend(_compositions(total, length))
        for w in sorted(level):
            yield w


def _compositions(total: int, parts: int) -> Iterator[VertexId]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# -- points -------------------------------------------------------------------


@dataclass(frozen=True)
class PlanarPoint:
    box1: Enclosure
    box2: Enclosure
    address1: Address
    address2: Address
    special: SpecialPointCertificate
    origin: dict = field(default_factory=dict, compare=False, hash=False)

    def disjoint(self, other: "PlanarPoint") -> bool:
        return not (self.box1.overlaps(other.box1) and self.box2.overlaps(other.box2))

    def to_json(self, with_origin: bool = True) -> dict:
        out = {
            "box1": self.box1.to_json(),
            "box2": self.box2.to_json(),
            "address1": self.address1.to_json(),
            "address2": self.address2.to_json(),
            "special": self.special.to_json(),
        }
        if with_origin and self.origin:
            out["origin"] = self.origin
        return out

    @classmethod
    def from_json(cls, data) -> "PlanarPoint":
        return cls(
            Enclosure.from_json(data["box1"]),
            Enclosure.from_json(data["box2"]),
            Address.from_json(data["address1"]),
            Address.from_json(data["address2"]),
            SpecialPointCertificate.from_json(data["special"]),
            data.get("origin", {}),
        )


def _interior_member(K: CantorSpec, v: Fraction) -> Address:
    c = classify(K, v, 0)
    if c.status != "inside":
        raise InvalidParameter(f"{fmt(v)} is not a certified point of the set")
    if v in (K.lo, K.hi):
        raise InvalidParameter(f"{fmt(v)} is an extreme point of the set")
    return c.address


def _point2(P) -> tuple[Fraction, Fraction]:
    if len(P) != 2:
        raise InvalidParameter("points need two coordinates")
    return Q(P[0]), Q(P[1])


# -- seed -----------------------------------------------------------------------


@dataclass(frozen=True)
class TreeContext:
    """Everything fixed for one tree: the sets, their thickness data and t."""

    K1: CantorSpec
    K2: CantorSpec
    t_sq: Fraction
    tau1: Fraction
    tau2: Fraction
    eps0: Fraction
    tau1_eps0: Fraction
    depth_budget: int
    bits: int

    @classmethod
    def make(cls, K1: CantorSpec, K2: CantorSpec, t_sq: Fraction, depth_budget: int = DEFAULT_DEPTH_BUDGET) -> "TreeContext":
        tau1, tau2 = thickness(K1).lower, thickness(K2).lower
        require_hky(tau1, tau2)
        l_min = hky_min_partner(tau2) if tau2 <= tau1 else None
        if l_min is None or l_min >= tau1:
            l_min = _min_image_bound(tau1, tau2)
        target = (l_min + tau1) / 2
        eps0 = eps_for_margin(K1, Fraction(1), target=target)
        return cls(K1, K2, t_sq, tau1, tau2, eps0, thickness(K1, eps0).lower, depth_budget, precision_bits())

    def image_tau(self, eps: Fraction) -> Fraction:
        return (1 - eps) * self.tau1_eps0


def _min_image_bound(tau1: Fraction, tau2: Fraction) -> Fraction:
    lo, hi = Fraction(0), tau1
    for _ in range(60):
        mid = (lo + hi) / 2
        if hky_robust(mid, tau2):
            hi = mid
        else:
            lo = mid
    return hi


def require_hky(tau1: Fraction, tau2: Fraction) -> None:
    if not hky_robust(tau1, tau2):
        res = check_hky(tau1, tau2)
        failing = res.failing or "tau1 >= tau2"
        raise ConditionViolation(
            f"Hunt-Kan-Yorke condition fails for thickness {fmt(tau1)}, {fmt(tau2)}: {failing}",
            failing=failing,
        )


def seed_edge(K1: CantorSpec, K2: CantorSpec, sub1=None, sub2=None, t_source=None,
              depth_budget: int = DEFAULT_DEPTH_BUDGET):
    """Two special points at exact distance t = |x - y| for a source pair (x, y)."""
    if t_source is None:
        raise InvalidParameter("a source point pair is required")
    x, y = (_point2(p) for p in t_source)
    if x == y:
        raise InvalidParameter("source points must be distinct")
    if x[0] == y[0] or x[1] == y[1]:
        raise InvalidParameter("source points must not share a coordinate")
    tau1, tau2 = thickness(K1).lower, thickness(K2).lower
    require_hky(tau1, tau2)
    for v in (x[0], y[0]):
        c = classify(K1, v, 0)
        if c.status != "inside":
            raise InvalidParameter(f"first coordinate {fmt(v)} is not a certified point of K1")
    a2x = _interior_member(K2, x[1])
    a2y = _interior_member(K2, y[1])
    for sub, K, coords in ((sub1, K1, (x[0], y[0])), (sub2, K2, (x[1], y[1]))):
        if sub is None:
            continue
        if sub.base != K:
            raise InvalidParameter("restriction is not a window of the matching set")
        if sub.lo == K.lo or sub.hi == K.hi:
            raise InvalidParameter("restriction must omit the extremes of the set")
        for v in coords:
            if not sub.lo <= v <= sub.hi:
                raise InvalidParameter(f"source coordinate {fmt(v)} lies outside the restriction")
        if thickness(sub).lower < thickness(K).lower:
            raise InvalidParameter("restriction is thinner than the set")
    r = x[0] - y[0]
    t_sq = r * r + (x[1] - y[1]) ** 2
    pair = translated_self_intersection(K1, r, 1, SEED_TARGET, depth_budget=depth_budget, accept_floor=True)[0]
    res = pair.chain
    p_addr, q_addr = res.addresses
    origin = {"kind": "seed", "r": fmt(r), "chain": res.to_json()}
    cert = lambda addr: SpecialPointCertificate("uncountable-intersection", Address(addr), True)
    x0 = PlanarPoint(pair.x1p, Enclosure.point(x[1]), Address(p_addr), a2x, cert(p_addr), origin)
    x1 = PlanarPoint(pair.y1p, Enclosure.point(y[1]), Address(q_addr), a2y, cert(q_addr), {"kind": "seed-partner"})
    return x0, x1, t_sq


def special_pair_for_distance(K1: CantorSpec, K2: CantorSpec, x, y, depth_budget: int = DEFAULT_DEPTH_BUDGET):
    """Special points xp, yp of K1 x K2 with |xp - yp| = |x - y| exactly."""
    xp, yp, _ = seed_edge(K1, K2, t_source=(x, y), depth_budget=depth_budget)
    return xp, yp


# -- star expansion -------------------------------------------------------------


def _planar_avoid(used: Sequence[PlanarPoint]):
    boxes = [(u.box1.lo, u.box1.hi, u.box2.lo, u.box2.hi) for u in used]

    def check(lvl: Level) -> str:
        s_lo, s_hi = lvl.p.interval()
        lo2, hi2 = max(lvl.q.a_lo, lvl.p.a_lo), min(lvl.q.b_hi, lvl.p.b_hi)
        state = "disjoint"
        for a1, b1, a2, b2 in boxes:
            if s_lo <= b1 and a1 <= s_hi and lo2 <= b2 and a2 <= hi2:
                if a1 <= s_lo and s_hi <= b1 and a2 <= lo2 and hi2 <= b2:
                    return "inside"
                state = "overlap"
        return state

    return check


@dataclass
class StarState:
    """Resumable progress of the star expansion about one center."""

    center: VertexId
    known: VertexId
    next_window: int = 0
    windows: list[tuple[int, ...]] | None = None
    base_depth: int | None = None

    def to_json(self) -> dict:
        return {"center": vid_str(self.center), "known": vid_str(self.known), "next_window": self.next_window}


def star_windows(ctx: TreeContext, cmap: CircleMap, known: PlanarPoint) -> tuple[int, list[tuple[int, ...]]]:
    """Certifiable window depth j0 about the known point and the sibling windows inside it."""
    addr = known.address1.prefix
    K1 = ctx.K1
    j0 = None
    for j in range(len(addr) + 1):
        lo, hi = K1.cylinder(addr[:j])
        if not (hi < cmap.y1.lo or lo > cmap.y1.hi):
            continue
        if not cmap.in_domain(lo, hi):
            continue
        if distortion_bound(cmap, (lo, hi), ctx.bits) <= ctx.eps0:
            j0 = j
            break
    if j0 is None:
        raise DepthExhausted("no window about the known point meets the distortion target")
    wins = []
    for j in range(j0 + 1, len(addr) + 1):
        for i in range(K1.k):
            if i != addr[j - 1]:
                wins.append(addr[: j - 1] + (i,))
    return j0, wins


def try_window(ctx: TreeContext, cmap: CircleMap, window: tuple[int, ...], used: Sequence[PlanarPoint]):
    """Certified point of g(K1 ∩ window) ∩ K2 avoiding ``used``, or None."""
    K1, K2 = ctx.K1, ctx.K2
    lo, hi = K1.cylinder(window)
    eps = distortion_bound(cmap, (lo, hi), ctx.bits)
    if eps > ctx.eps0:
        return None
    tau_img = ctx.image_tau(eps)
    if not hky_robust(tau_img, ctx.tau2):
        return None
    side = cmap.side_of(lo, hi)
    image = CircleImage(cmap, K1, window, side, cmap.increasing_on(side), eps, tau_img, ctx.bits)
    root = interleave_pair(ImagePiece.root(image), LinePiece.root(K2, ctx.tau2))
    if root is None:
        return None

    def accept(chain):
        return not_extreme_address(chain[-1].q.address, K2.k)

    try:
        chain = descend(
            root,
            target_width=Fraction(0),
            depth_budget=ctx.depth_budget,
            avoid=_planar_avoid(used),
            accept=accept,
            accept_floor=True,
            node_budget=WINDOW_NODE_BUDGET,
        )
    except DepthExhausted:
        return None
    if chain is None:
        return None
    last = chain[-1]
    s_lo, s_hi = last.p.interval()
    b2 = Enclosure(max(last.q.a_lo, last.p.a_lo), min(last.q.b_hi, last.p.b_hi))
    origin = {
        "kind": "star",
        "window": encode_digits(window),
        "branch": cmap.branch,
        "epsilon": fmt(eps),
        "tau_image": fmt(tau_img),
        "levels": [level_to_json(l) for l in chain],
    }
    special = SpecialPointCertificate("uncountable-intersection", Address(last.p.address), True)
    return PlanarPoint(Enclosure(s_lo, s_hi), b2, Address(last.p.address), Address(last.q.address), special, origin)


def expand_star(ctx: TreeContext, center: PlanarPoint, known: PlanarPoint, m: int,
                used: Sequence[PlanarPoint], state: StarState | None = None) -> list[PlanarPoint]:
    """``m`` new certified points on the circle of radius t about ``center``."""
    if m < 0:
        raise InvalidParameter("m must be non-negative")
    if m == 0:
        return []
    cmap = CircleMap.through((center.box1, center.box2), (known.box1, known.box2), ctx.t_sq)
    if state is None:
        state = StarState((), ())
    if state.windows is None:
        state.base_depth, state.windows = star_windows(ctx, cmap, known)
    out: list[PlanarPoint] = []
    used = list(used)
    while len(out) < m:
        if state.next_window >= len(state.windows):
            raise DepthExhausted(
                f"star expansion ran out of windows after {len(out)} of {m} points",
                achieved=len(out),
            )
        w = state.windows[state.next_window]
        state.next_window += 1
        pt = try_window(ctx, cmap, w, used)
        if pt is not None:
            pt.origin["window_index"] = state.next_window - 1
            out.append(pt)
            used.append(pt)
    return out


# -- placements -----------------------------------------------------------------


@dataclass
class TreePlacement:
    ctx: TreeContext
    tree: TreeSpec
    vertices: dict[VertexId, PlanarPoint]
    order: list[VertexId]
    source: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]
    tol: Fraction

    @property
    def t_sq(self) -> Fraction:
        return self.ctx.t_sq

    def edges(self) -> list[tuple[VertexId, VertexId]]:
        return [(v[:-1], v) for v in self.order if v]

    def edge_certs(self) -> dict[tuple[VertexId, VertexId], Enclosure]:
        return {e: distance_enclosure(self.vertices[e[0]], self.vertices[e[1]]) for e in self.edges()}

    def to_json(self) -> dict:
        ctx = self.ctx
        certs = self.edge_certs()
        return {
            "kind": "tree",
            "K1": ctx.K1.to_json(),
            "K2": ctx.K2.to_json(),
            "t": {"sq": fmt(ctx.t_sq)},
            "tol": fmt(self.tol),
            "precision_bits": ctx.bits,
            "depth_budget": ctx.depth_budget,
            "epsilon0": fmt(ctx.eps0),
            "source": [[fmt(c) for c in p] for p in self.source],
            "tree": self.tree.to_json(),
            "vertices": [{"id": vid_str(v), **self.vertices[v].to_json()} for v in self.order],
            "edges": [
                {"u": vid_str(u), "v": vid_str(v), "distance": certs[(u, v)].to_json(),
                 "width": fmt(certs[(u, v)].width)}
                for u, v in self.edges()
            ],
        }


def distance_sq_interval(a: PlanarPoint, b: PlanarPoint) -> Enclosure:
    dx = (a.box1 - b.box1).square()
    dy = (a.box2 - b.box2).square()
    return dx + dy


def distance_enclosure(a: PlanarPoint, b: PlanarPoint, bits: int | None = None) -> Enclosure:
    d = distance_sq_interval(a, b)
    return Enclosure(sqrt_lower(d.lo, bits), sqrt_upper(d.hi, bits))


class TreeBuilder:
    """Incremental placement of T* vertices; the state is fully serializable."""

    def __init__(self, ctx: TreeContext, source, seed: tuple[PlanarPoint, PlanarPoint]):
        self.ctx = ctx
        self.source = source
        self.vertices: dict[VertexId, PlanarPoint] = {(): seed[0], (1,): seed[1]}
        self.order: list[VertexId] = [(), (1,)]
        self.stars: dict[VertexId, StarState] = {}

    @classmethod
    def start(cls, K1: CantorSpec, K2: CantorSpec, t_source, depth_budget: int = DEFAULT_DEPTH_BUDGET,
              sub1=None, sub2=None) -> "TreeBuilder":
        x0, x1, t_sq = seed_edge(K1, K2, sub1, sub2, t_source, depth_budget)
        ctx = TreeContext.make(K1, K2, t_sq, depth_budget)
        source = tuple(_point2(p) for p in t_source)
        return cls(ctx, source, (x0, x1))

    def known_for(self, center: VertexId) -> VertexId:
        return (1,) if center == () else center[:-1]

    def place(self, v: VertexId) -> PlanarPoint:
        if v in self.vertices:
            return self.vertices[v]
        parent = v[:-1]
        if parent not in self.vertices:
            raise InvalidParameter(f"parent of {vid_str(v)} has not been placed")
        prev = v[:-1] + (v[-1] - 1,)
        if v[-1] > 1 and prev not in self.vertices:
            raise InvalidParameter(f"sibling {vid_str(prev)} must be placed before {vid_str(v)}")
        state = self.stars.get(parent)
        if state is None:
            state = StarState(parent, self.known_for(parent))
            self.stars[parent] = state
        center = self.vertices[parent]
        known = self.vertices[state.known]
        used = [self.vertices[u] for u in self.order]
        (pt,) = expand_star(self.ctx, center, known, 1, used, state)
        self.vertices[v] = pt
        self.order.append(v)
        return pt

    def placement(self, tree: TreeSpec, tol: Fraction, ids: Sequence[VertexId] | None = None) -> TreePlacement:
        ids = list(self.order) if ids is None else list(ids)
        return TreePlacement(self.ctx, tree, {v: self.vertices[v] for v in ids}, ids, self.source, tol)

    # checkpoints
    def checkpoint(self) -> dict:
        ctx = self.ctx
        return {
            "kind": "tree-checkpoint",
            "K1": ctx.K1.to_json(),
            "K2": ctx.K2.to_json(),
            "t": {"sq": fmt(ctx.t_sq)},
            "depth_budget": ctx.depth_budget,
            "precision_bits": ctx.bits,
            "source": [[fmt(c) for c in p] for p in self.source],
            "vertices": [{"id": vid_str(v), **self.vertices[v].to_json()} for v in self.order],
            "stars": [self.stars[c].to_json() for c in sorted(self.stars, key=lambda w: (len(w), w))],
        }

    @classmethod
    def resume(cls, data: dict) -> "TreeBuilder":
        K1, K2 = CantorSpec.from_json(data["K1"]), CantorSpec.from_json(data["K2"])
        if int(data.get("precision_bits", precision_bits())) != precision_bits():
            raise InvalidParameter("checkpoint was written at a different precision")
        ctx = TreeContext.make(K1, K2, Q(data["t"]["sq"]), int(data["depth_budget"]))
        source = tuple(tuple(Q(c) for c in p) for p in data["source"])
        verts = [(vid_parse(v["id"]), PlanarPoint.from_json(v)) for v in data["vertices"]]
        b = cls(ctx, source, (verts[0][1], verts[1][1]))
        b.vertices = dict(verts)
        b.order = [v for v, _ in verts]
        for s in data.get("stars", []):
            st = StarState(vid_parse(s["center"]), vid_parse(s["known"]), int(s["next_window"]))
            b.stars[st.center] = st
        return b


def build_tree(K1: CantorSpec, K2: CantorSpec, tree: TreeSpec, t_source, tol=DEFAULT_TOL,
               depth_budget: int = DEFAULT_DEPTH_BUDGET, sub1=None, sub2=None) -> TreePlacement:
    """Place every vertex of a finite tree with all edges at distance t."""
    if not tree.finite:
        raise InvalidParameter("build_tree needs a finite tree; use stream_vertices")
    tol = Q(tol) if not isinstance(tol, float) else Fraction(tol)
    b = TreeBuilder.start(K1, K2, t_source, depth_budget, sub1, sub2)
    ids = tree.tstar_ids()
    for v in ids:
        b.place(v)
    placement = b.placement(tree, tol, ids)
    worst = max((c.width for c in placement.edge_certs().values()), default=Fraction(0))
    if worst > tol:
        raise DepthExhausted(f"edge width {float(worst):.3e} exceeds tolerance", achieved=worst)
    return placement


def stream_vertices(K1: CantorSpec, K2: CantorSpec, t_source=None, *, checkpoint: dict | None = None,
                    depth_budget: int = DEFAULT_DEPTH_BUDGET, builder_out: list | None = None
                    ) -> Iterator[tuple[VertexId, PlanarPoint]]:
    """Lazy placement of all of T*, in weight order; resumable from a checkpoint.

    When resuming, only vertices after the checkpoint are yielded.
    """
    if checkpoint is not None:
        b = TreeBuilder.resume(checkpoint)
    else:
        b = TreeBuilder.start(K1, K2, t_source, depth_budget)
    if builder_out is not None:
        builder_out.append(b)
    done = set(b.order)
    for v in stream_order():
        if v in done:
            if checkpoint is None:
                yield v, b.vertices[v]
            continue
        yield v, b.place(v)


# -- verification ---------------------------------------------------------------


@dataclass
class VerifyReport:
    passed: bool
    edges_checked: int
    worst_edge: tuple[VertexId, VertexId] | None
    worst_width: Fraction
    failing_edges: list[tuple[VertexId, VertexId]]
    overlapping_pairs: list[tuple[VertexId, VertexId]]
    extra_adjacencies: int
    embeds: bool

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "edges_checked": self.edges_checked,
            "worst_edge": None if self.worst_edge is None else [vid_str(v) for v in self.worst_edge],
            "worst_width": fmt(self.worst_width),
            "worst_width_float": float(self.worst_width),
            "failing_edges": [[vid_str(u), vid_str(v)] for u, v in self.failing_edges],
            "overlapping_pairs": [[vid_str(u), vid_str(v)] for u, v in self.overlapping_pairs],
            "extra_adjacencies": self.extra_adjacencies,
            "embeds": self.embeds,
        }


def verify_tree(placement: TreePlacement, tree: TreeSpec | None = None, t_sq=None, tol=None) -> VerifyReport:
    """Re-check edge distances and vertex distinctness from the boxes alone."""
    t_sq = placement.t_sq if t_sq is None else Q(t_sq)
    tol = placement.tol if tol is None else Q(tol)
    verts = placement.vertices
    ids = list(placement.order)
    if tree is not None and tree.finite:
        wanted = tree.tstar_ids()
        missing = [v for v in wanted if v not in verts]
        if missing:
            raise InvalidParameter(f"placement is missing vertex {vid_str(missing[0])}")
        edges = tree.edges()
    else:
        edges = [(v[:-1], v) for v in ids if v and v[:-1] in verts]
    failing, worst, worst_w = [], None, Fraction(-1)
    for u, v in edges:
        d = distance_sq_interval(verts[u], verts[v])
        width = sqrt_upper(d.hi) - sqrt_lower(d.lo)
        if width > worst_w:
            worst, worst_w = (u, v), width
        if not (d.lo <= t_sq <= d.hi) or width > tol:
            failing.append((u, v))
    overlaps = []
    extra = 0
    edge_set = set(edges)
    for i, u in enumerate(ids):
        for v in ids[i + 1:]:
            if not verts[u].disjoint(verts[v]):
                overlaps.append((u, v))
            if (u, v) in edge_set or (v, u) in edge_set:
                continue
            d = distance_sq_interval(verts[u], verts[v])
            if d.lo <= t_sq <= d.hi:
                extra += 1
    embeds = not failing
    return VerifyReport(
        passed=not failing and not overlaps,
        edges_checked=len(edges),
        worst_edge=worst,
        worst_width=max(worst_w, Fraction(0)),
        failing_edges=failing,
        overlapping_pairs=overlaps,
        extra_adjacencies=extra,
        embeds=embeds,
    )


# -- distance set sampling --------------------------------------------------------


@dataclass(frozen=True)
class SampleResult:
    t_sq: Fraction
    status: str  # "certified" | "certified-nonrobust" | "failed" | "miss"
    detail: str = ""
    source: tuple | None = None
    box: tuple[Enclosure, Enclosure] | None = None

    @property
    def ok(self) -> bool:
        return self.status.startswith("certified")

    @property
    def t_float(self) -> float:
        return float(self.t_sq) ** 0.5

    def to_json(self) -> dict:
        out = {"t": {"sq": fmt(self.t_sq)}, "t_float": self.t_float, "status": self.status}
        if self.detail:
            out["detail"] = self.detail
        if self.source is not None:
            out["source"] = [[fmt(c) for c in p] for p in self.source]
        if self.box is not None:
            out["box"] = [self.box[0].to_json(), self.box[1].to_json()]
        return out


def _member_points(K: CantorSpec, depth: int, lo: Fraction, hi: Fraction) -> list[Fraction]:
    pts = set()
    level = [(K.lo, K.span)]
    for _ in range(depth):
        level = [K.child(a, ln, i) for a, ln in level for i in range(K.k)]
    for a, ln in level:
        for p in (a, a + ln):
            if lo < p < hi:
                pts.add(p)
    return sorted(pts)


def diagonal_sources(K1: CantorSpec, K2: CantorSpec, samples: int, anchor=None):
    """Source pairs x = anchor, y = (b, c) with b over cylinder endpoints of K1's last child."""
    if samples < 1:
        raise InvalidParameter("samples must be >= 1")
    if anchor is None:
        anchor = _default_anchor(K1, K2)
    x = _point2(anchor)
    c2 = K2.cylinder((K2.k - 1,))[0]
    lo, hi = K1.cylinder((K1.k - 1,))
    depth = 1
    pts = _member_points(K1, depth, lo, hi)
    while len(pts) < samples:
        depth += 1
        pts = _member_points(K1, depth, lo, hi)
    step = len(pts) / samples
    chosen = [pts[int(i * step)] for i in range(samples)]
    return [(x, (b, c2)) for b in chosen]


def _default_anchor(K1: CantorSpec, K2: CantorSpec):
    """A point of the product whose coordinates are non-extreme members of the first child."""

    def pick(K):
        lo, hi = K.cylinder((0,))
        lo2, ln2 = K.child(lo, hi - lo, K.k - 1)
        lo3, ln3 = K.child(lo2, ln2, 0)
        return lo3 + ln3 * 0 if lo3 not in (K.lo, K.hi) else lo3 + ln3

    a = pick(K1)
    b = pick(K2)
    if K1 == K2 and K1 == _middle_sixth():
        return (Fraction(25, 144), Fraction(25, 144))
    return (a, b)


def default_source(K1: CantorSpec, K2: CantorSpec):
    """Seed pair used when none is given: the anchor point and the left ends of the last children."""
    y = (K1.cylinder((K1.k - 1,))[0], K2.cylinder((K2.k - 1,))[0])
    return (_point2(_default_anchor(K1, K2)), y)


def _middle_sixth() -> CantorSpec:
    from .cantor import build_middle_alpha

    return build_middle_alpha(Fraction(1, 6))


def _diagonal_job(args):
    K1j, K2j, tree_j, src, tol, depth_budget = args
    K1, K2 = CantorSpec.from_json(K1j), CantorSpec.from_json(K2j)
    tree = TreeSpec.from_json(tree_j)
    x, y = src
    t_sq = (x[0] - y[0]) ** 2 + (x[1] - y[1]) ** 2
    try:
        placement = build_tree(K1, K2, tree, src, tol, depth_budget)
        rep = verify_tree(placement, tree)
        if rep.passed:
            return SampleResult(t_sq, "certified", f"worst width {float(rep.worst_width):.2e}", src)
        return SampleResult(t_sq, "failed", "verification failed", src)
    except (DepthExhausted, InvalidParameter) as exc:
        return SampleResult(t_sq, "failed", str(exc), src)


def diagonal_window(K1: CantorSpec, K2: CantorSpec, tree: TreeSpec, samples: int, tol=DEFAULT_TOL,
                    *, anchor=None, depth_budget: int = DEFAULT_DEPTH_BUDGET, jobs: int = 1) -> list[SampleResult]:
    """Certify tree membership for sampled distances realized by pairs of product points."""
    require_hky(thickness(K1).lower, thickness(K2).lower)
    sources = diagonal_sources(K1, K2, samples, anchor)
    args = [(K1.to_json(), K2.to_json(), tree.to_json(), src, Q(tol) if not isinstance(tol, float) else Fraction(tol),
             depth_budget) for src in sources]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_diagonal_job, args))
    else:
        results = [_diagonal_job(a) for a in args]
    return sorted(results, key=lambda r: r.t_sq)


def pinned_point(K1: CantorSpec, K2: CantorSpec, pin, t_sq, tol=DEFAULT_TOL, *,
                 window_depths: Sequence[int] = (2, 3, 4, 5, 6), depth_budget: int = DEFAULT_DEPTH_BUDGET):
    """A certified point of K1 x K2 at distance sqrt(t_sq) from ``pin``, or a failure result."""
    from .intersect import condition_mode

    pin = _point2(pin)
    t_sq = Q(t_sq)
    if t_sq <= 0:
        raise InvalidParameter("the pinned distance must be positive")
    tau1, tau2 = thickness(K1).lower, thickness(K2).lower
    p1, p2 = Enclosure.point(pin[0]), Enclosure.point(pin[1])
    # nearest and farthest points of the hull product
    nx = min(max(pin[0], K1.lo), K1.hi) - pin[0]
    ny = min(max(pin[1], K2.lo), K2.hi) - pin[1]
    fx = max(abs(pin[0] - K1.lo), abs(pin[0] - K1.hi))
    fy = max(abs(pin[1] - K2.lo), abs(pin[1] - K2.hi))
    if t_sq < nx * nx + ny * ny or t_sq > fx * fx + fy * fy:
        return SampleResult(t_sq, "miss", "circle misses the hull product")
    eps_cache: dict = {}
    tol = Q(tol) if not isinstance(tol, float) else Fraction(tol)
    fallback = []
    for depth in window_depths:
        level = [((), K1.lo, K1.span)]
        for _ in range(depth):
            level = [(a + (i,), *K1.child(lo, ln, i)) for a, lo, ln in level for i in range(K1.k)]
        for branch in ("lower", "upper"):
            cmap = CircleMap(p1, p2, t_sq, branch)
            for addr, lo, ln in level:
                hi = lo + ln
                if lo <= pin[0] <= hi or not cmap.in_domain(lo, hi):
                    continue
                eps = distortion_bound(cmap, (lo, hi))
                if eps >= Fraction(1, 2):
                    continue
                if eps not in eps_cache:
                    eps_cache[eps] = thickness(K1, eps).lower
                tau_img = (1 - eps) * eps_cache[eps]
                try:
                    mode = condition_mode(tau_img, tau2, "auto")
                except ConditionViolation:
                    continue
                if mode != "hky":
                    fallback.append((cmap, addr, lo, hi, eps, tau_img, mode))
                    continue
                found = _pinned_attempt(K1, K2, tau2, cmap, addr, lo, hi, eps, tau_img, tol, depth_budget)
                if found is not None:
                    return SampleResult(t_sq, "certified", f"window {encode_digits(addr)} {branch}, mode hky", box=found)
    for cmap, addr, lo, hi, eps, tau_img, mode in fallback:
        found = _pinned_attempt(K1, K2, tau2, cmap, addr, lo, hi, eps, tau_img, tol, depth_budget)
        if found is not None:
            detail = f"window {encode_digits(addr)} {cmap.branch}, mode {mode} (existence only)"
            return SampleResult(t_sq, "certified-nonrobust", detail, box=found)
    return SampleResult(t_sq, "failed", "no window certified")


def _pinned_attempt(K1, K2, tau2, cmap, addr, lo, hi, eps, tau_img, tol, depth_budget):
    side = cmap.side_of(lo, hi)
    image = CircleImage(cmap, K1, addr, side, cmap.increasing_on(side), eps, tau_img, precision_bits())
    root = interleave_pair(ImagePiece.root(image), LinePiece.root(K2, tau2))
    if root is None:
        return None
    try:
        chain = descend(root, target_width=tol / 4, depth_budget=depth_budget, node_budget=2000)
    except DepthExhausted:
        return None
    if chain is None:
        return None
    last = chain[-1]
    s_lo, s_hi = last.p.interval()
    return Enclosure(s_lo, s_hi), Enclosure(max(last.q.a_lo, last.p.a_lo), min(last.q.b_hi, last.p.b_hi))


def pinned_window(K1: CantorSpec, K2: CantorSpec, pin, samples: int, tol=DEFAULT_TOL,
                  t_range=None, depth_budget: int = DEFAULT_DEPTH_BUDGET) -> list[SampleResult]:
    """Sampled certification of the pinned distance set about ``pin``."""
    from .thickness import check_newhouse

    tau1, tau2 = thickness(K1).lower, thickness(K2).lower
    if not check_newhouse(tau1, tau2):
        raise ConditionViolation("Newhouse condition fails", failing="newhouse")
    if samples < 1:
        raise InvalidParameter("samples must be >= 1")
    pin = _point2(pin)
    if t_range is None:
        nx = min(max(pin[0], K1.lo), K1.hi) - pin[0]
        ny = min(max(pin[1], K2.lo), K2.hi) - pin[1]
        fx = max(abs(pin[0] - K1.lo), abs(pin[0] - K1.hi))
        fy = max(abs(pin[1] - K2.lo), abs(pin[1] - K2.hi))
        near = Fraction(_isqrt_floor(nx * nx + ny * ny))
        far = Fraction(_isqrt_floor(fx * fx + fy * fy))
        t_lo, t_hi = near + (far - near) / 4, near + (far - near) * 3 / 4
    else:
        t_lo, t_hi = (Q(v) for v in t_range)
    out = []
    for i in range(samples):
        t = t_lo + (t_hi - t_lo) * Fraction(i, max(samples - 1, 1)) if samples > 1 else (t_lo + t_hi) / 2
        t = Fraction(round(t * 10**6), 10**6)
        out.append(pinned_point(K1, K2, pin, t * t, tol, depth_budget=depth_budget))
    return out


def _isqrt_floor(q: Fraction) -> Fraction:
    return sqrt_lower(q, 32)
