"""Stand-alone checker for intersection, window and tree certificates.

Nothing here reuses the search code: cylinders, square-root enclosures,
thickness (by brute-force gap enumeration) and the thickness conditions are
recomputed from the certificate's own data.  Any mismatch raises
:class:`CertificateInvalid` naming the first failing level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .errors import CertificateInvalid, SpecParseError

BRUTE_GAP_LIMIT = 200_000


def _q(v) -> Fraction:
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise CertificateInvalid(f"bad rational {v!r}")
    try:
        return Fraction(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise CertificateInvalid(f"bad rational {v!r}") from exc


def _digits(v) -> tuple[int, ...]:
    if isinstance(v, str):
        return tuple(int(c) for c in v)
    return tuple(int(d) for d in v)


@dataclass(frozen=True)
class _Spec:
    lo: Fraction
    hi: Fraction
    kids: tuple[tuple[Fraction, Fraction], ...]

    @property
    def k(self) -> int:
        return len(self.kids)

    def cyl(self, addr) -> tuple[Fraction, Fraction]:
        lo, ln = self.lo, self.hi - self.lo
        for d in addr:
            if not 0 <= d < self.k:
                raise CertificateInvalid(f"digit {d} out of range")
            o, l = self.kids[d]
            lo, ln = lo + ln * o, ln * l
        return lo, lo + ln


def _spec(data) -> _Spec:
    if "middle_alpha" in data:
        a = _q(data["middle_alpha"])
        b = (1 - a) / 2
        return _Spec(Fraction(0), Fraction(1), ((Fraction(0), b), ((1 + a) / 2, b)))
    lo, hi = (_q(v) for v in data["hull"])
    kids = tuple((_q(o), _q(l)) for o, l in data["children"])
    if lo >= hi or len(kids) < 2 or kids[0][0] != 0 or kids[-1][0] + kids[-1][1] != 1:
        raise CertificateInvalid("malformed Cantor spec in certificate")
    for (o1, l1), (o2, _) in zip(kids, kids[1:]):
        if not o1 + l1 < o2:
            raise CertificateInvalid("malformed Cantor spec in certificate")
    return _Spec(lo, hi, kids)


# -- independent numerics ------------------------------------------------------


def _sqrt_lo(q: Fraction, bits: int) -> Fraction:
    if q < 0:
        raise CertificateInvalid("square root of a negative quantity")
    n, d = q.numerator, q.denominator
    if isqrt(n) ** 2 == n and isqrt(d) ** 2 == d:
        return Fraction(isqrt(n), isqrt(d))
    s = 1 << bits
    return Fraction(isqrt(n * s * s // d), s)


def _sqrt_hi(q: Fraction, bits: int) -> Fraction:
    n, d = q.numerator, q.denominator
    if isqrt(n) ** 2 == n and isqrt(d) ** 2 == d:
        return Fraction(isqrt(n), isqrt(d))
    s = 1 << bits
    return Fraction(isqrt(n * s * s // d) + 1, s)


def _hky_ordered(a: Fraction, b: Fraction) -> bool:
    return a >= b and a > (b * b + 3 * b + 1) / (b * b) and b > (2 * a + 1) ** 2 / a**3


def _hky_robust(l1: Fraction, l2: Fraction) -> bool:
    m = max(l1, l2)
    return _hky_ordered(m, l1) and _hky_ordered(m, l2)


def _all_gaps(s: _Spec, depth: int) -> list[tuple[Fraction, Fraction]]:
    out = []
    level = [(s.lo, s.hi - s.lo)]
    for _ in range(depth):
        nxt = []
        for lo, ln in level:
            kids = [(lo + ln * o, ln * l) for o, l in s.kids]
            for (a, la), (b, _) in zip(kids, kids[1:]):
                out.append((a + la, b))
            nxt.extend(kids)
        level = nxt
        if len(out) > BRUTE_GAP_LIMIT:
            raise CertificateInvalid("thickness recomputation exceeds the brute-force limit")
    return sorted(out)


def _tau(s: _Spec, eps: Fraction = Fraction(0)) -> Fraction:
    """Thickness (or epsilon-thickness) from the depth-one endpoints, by brute-force scan."""
    L = s.hi - s.lo
    gmax = max(b - (a + la) for (a, la), (b, _) in zip(s.kids, s.kids[1:]))
    rho = max(l for _, l in s.kids)
    top = [(s.lo + L * (o + l), s.lo + L * o2) for (o, l), (o2, _) in zip(s.kids, s.kids[1:])]
    thr = min(b - a for a, b in top) * (1 - eps)
    depth = 1
    while True:
        bound = L * gmax * rho**depth
        if bound < thr or (eps > 0 and bound <= thr):
            break
        depth += 1
    gaps = _all_gaps(s, depth)
    best = None
    for a, b in top:
        g = b - a
        ok = (lambda h: h >= g) if eps == 0 else (lambda h: h > (1 - eps) * g)
        right = [h0 for h0, h1 in gaps if h0 >= b and ok(h1 - h0)]
        left = [h1 for h0, h1 in gaps if h1 <= a and ok(h1 - h0)]
        vr = ((min(right) if right else s.hi) - b) / g
        vl = (a - (max(left) if left else s.lo)) / g
        for v in (vr, vl):
            if best is None or v < best:
                best = v
    return best


def _window_gaps(s: _Spec, lo: Fraction, hi: Fraction, depth: int) -> list[tuple[Fraction, Fraction, int]]:
    """All gaps inside [lo, hi] born at depth <= ``depth``, with their birth depth."""
    out = []
    level = [(s.lo, s.hi - s.lo)]
    for d in range(1, depth + 1):
        nxt = []
        for c_lo, ln in level:
            kids = [(c_lo + ln * o, ln * l) for o, l in s.kids]
            for (a, la), (b, _) in zip(kids, kids[1:]):
                if lo <= a + la and b <= hi:
                    out.append((a + la, b, d))
            nxt.extend(k for k in kids if k[0] < hi and k[0] + k[1] > lo)
        level = nxt
        if len(out) > BRUTE_GAP_LIMIT:
            raise CertificateInvalid("thickness recomputation exceeds the brute-force limit")
    return sorted(out)


def _cover_depth(s: _Spec, lo: Fraction, hi: Fraction, limit: int = 64) -> int:
    level = [(s.lo, s.hi - s.lo)]
    for d in range(limit + 1):
        meet = [c for c in level if c[0] < hi and c[0] + c[1] > lo]
        if all(lo <= c[0] and c[0] + c[1] <= hi for c in meet):
            return d
        level = [(c0 + ln * o, ln * l) for c0, ln in meet for o, l in s.kids]
    raise CertificateInvalid("window is not a union of cylinders")


def _tau_window(s: _Spec, lo: Fraction, hi: Fraction, eps: Fraction) -> Fraction:
    """Lower bound for the epsilon-thickness of the set restricted to a cylinder-union window.

    Gaps born below the cover depth sit in a whole cylinder of the window and
    inherit at least the thickness of the full set.
    """
    base = _tau(s, eps)
    c = _cover_depth(s, lo, hi)
    top = [(a, b) for a, b, d in _window_gaps(s, lo, hi, c)]
    if not top:
        return base
    L = s.hi - s.lo
    gmax = max(b - (a + la) for (a, la), (b, _) in zip(s.kids, s.kids[1:]))
    rho = max(l for _, l in s.kids)
    thr = min(b - a for a, b in top) * (1 - eps)
    depth = c
    while not (L * gmax * rho**depth < thr or (eps > 0 and L * gmax * rho**depth <= thr)):
        depth += 1
    gaps = [(a, b) for a, b, _ in _window_gaps(s, lo, hi, depth)]
    best = base
    for a, b in top:
        g = b - a
        ok = (lambda h: h >= g) if eps == 0 else (lambda h: h > (1 - eps) * g)
        right = [h0 for h0, h1 in gaps if h0 >= b and ok(h1 - h0)]
        left = [h1 for h0, h1 in gaps if h1 <= a and ok(h1 - h0)]
        vr = ((min(right) if right else hi) - b) / g
        vl = (a - (max(left) if left else lo)) / g
        best = min(best, vr, vl)
    return best


def _member_interior(s: _Spec, x: Fraction) -> bool:
    """x is a point of the set other than its two extremes (orbit is eventually periodic)."""
    if not s.lo < x < s.hi:
        return False
    u = (x - s.lo) / (s.hi - s.lo)
    seen = set()
    for _ in range(4096):
        if u in seen:
            return True
        seen.add(u)
        for o, l in s.kids:
            if o <= u <= o + l:
                u = (u - o) / l
                break
        else:
            return False
    return False


def _not_extreme(addr, k: int) -> bool:
    return any(d != 0 for d in addr) and any(d != k - 1 for d in addr)


# -- circle evaluation ----------------------------------------------------------


@dataclass(frozen=True)
class _Circle:
    y1: tuple[Fraction, Fraction]
    y2: tuple[Fraction, Fraction]
    t_sq: Fraction
    lower: bool
    bits: int

    def g(self, s: Fraction) -> tuple[Fraction, Fraction]:
        d1, d2 = s - self.y1[1], s - self.y1[0]
        if d1 <= 0 <= d2:
            dmin, dmax = Fraction(0), max(-d1, d2)
        else:
            dmin, dmax = min(abs(d1), abs(d2)), max(abs(d1), abs(d2))
        lo_in, hi_in = self.t_sq - dmax * dmax, self.t_sq - dmin * dmin
        if lo_in < 0:
            raise CertificateInvalid("circle evaluated outside its domain")
        r_lo, r_hi = _sqrt_lo(lo_in, self.bits), _sqrt_hi(hi_in, self.bits)
        if self.lower:
            return self.y2[0] - r_hi, self.y2[1] - r_lo
        return self.y2[0] + r_lo, self.y2[1] + r_hi

    def distortion(self, lo: Fraction, hi: Fraction) -> Fraction:
        if hi < self.y1[0]:
            dmin, dmax = self.y1[0] - hi, self.y1[1] - lo
        elif lo > self.y1[1]:
            dmin, dmax = lo - self.y1[1], hi - self.y1[0]
        else:
            raise CertificateInvalid("window meets the critical point")
        if dmax * dmax >= self.t_sq or dmin <= 0:
            raise CertificateInvalid("window leaves the domain of the circle map")
        f = lambda d: d * d / (self.t_sq - d * d)
        return _sqrt_hi(f(dmax) / f(dmin), self.bits) - 1


# -- chain checking -----------------------------------------------------------------


class _LineSide:
    def __init__(self, s: _Spec):
        self.s = s

    def hull(self, addr):
        lo, hi = self.s.cyl(addr)
        return (lo, lo), (hi, hi)


class _ImageSide:
    def __init__(self, s: _Spec, circ: _Circle, increasing: bool):
        self.s, self.circ, self.inc = s, circ, increasing

    def hull(self, addr):
        lo, hi = self.s.cyl(addr)
        a, b = self.circ.g(lo), self.circ.g(hi)
        return (a, b) if self.inc else (b, a)


def _member_enclosure(side, addr, end: str):
    lo_e, hi_e = side.hull(addr)
    if end == "lo":
        return lo_e
    if end == "hi":
        return hi_e
    raise CertificateInvalid(f"bad witness end {end!r}")


def _check_chain(levels, side_a, side_b, spec_a: _Spec, spec_b: _Spec, base_a=(), base_b=(), offset: int = 0):
    prev = None
    last = None
    for i, lvl in enumerate(levels):
        n = i + offset
        try:
            a_addr = _digits(lvl["a"]["address"])
            b_addr = _digits(lvl["b"]["address"])
            a_int = tuple(_q(v) for v in lvl["a"]["interval"])
            b_int = tuple(_q(v) for v in lvl["b"]["interval"])
            w_ba, w_ab = lvl["b_in_a"], lvl["a_in_b"]
        except (KeyError, TypeError) as exc:
            raise CertificateInvalid(f"level {n}: malformed entry ({exc})", level=n) from exc
        if spec_a.cyl(a_addr) != a_int:
            raise CertificateInvalid(f"level {n}: first interval does not match its address", level=n)
        if spec_b.cyl(b_addr) != b_int:
            raise CertificateInvalid(f"level {n}: second interval does not match its address", level=n)
        if a_addr[: len(base_a)] != tuple(base_a) or b_addr[: len(base_b)] != tuple(base_b):
            raise CertificateInvalid(f"level {n}: address leaves its window", level=n)
        if prev is not None:
            pa, pb, pai, pbi = prev
            if a_addr[: len(pa)] != pa or b_addr[: len(pb)] != pb:
                raise CertificateInvalid(f"level {n}: addresses do not extend the previous level", level=n)
            if not (pai[0] <= a_int[0] and a_int[1] <= pai[1] and pbi[0] <= b_int[0] and b_int[1] <= pbi[1]):
                raise CertificateInvalid(f"level {n}: interval is not nested in its parent", level=n)
        (a_lo, a_lo2), (a_hi1, a_hi) = side_a.hull(a_addr)
        (b_lo, b_lo2), (b_hi1, b_hi) = side_b.hull(b_addr)
        wb_addr = _digits(w_ba["address"])
        wa_addr = _digits(w_ab["address"])
        if wb_addr[: len(b_addr)] != b_addr or wa_addr[: len(a_addr)] != a_addr:
            raise CertificateInvalid(f"level {n}: witness is not inside its piece", level=n)
        wb = _member_enclosure(side_b, wb_addr, w_ba["end"])
        wa = _member_enclosure(side_a, wa_addr, w_ab["end"])
        if not (a_lo2 < wb[0] and wb[1] < a_hi1):
            raise CertificateInvalid(f"level {n}: witness of the second set is not inside the first hull", level=n)
        if not (b_lo2 < wa[0] and wa[1] < b_hi1):
            raise CertificateInvalid(f"level {n}: witness of the first set is not inside the second hull", level=n)
        prev = (a_addr, b_addr, a_int, b_int)
        last = (a_addr, b_addr, (a_lo, a_hi), (b_lo, b_hi), a_int, b_int)
    if last is None:
        raise CertificateInvalid("certificate has no levels", level=offset)
    return last


def _condition(mode: str, t1: Fraction, t2: Fraction, level: int = 0):
    if mode == "hky":
        if not _hky_robust(t1, t2):
            raise CertificateInvalid("Hunt-Kan-Yorke condition does not hold for the stated bounds", level=level)
    elif mode == "newhouse":
        if not t1 * t2 > 1:
            raise CertificateInvalid("Newhouse condition does not hold", level=level)
    else:
        raise CertificateInvalid(f"unknown mode {mode!r}", level=level)


@dataclass
class ReplayResult:
    kind: str
    levels_checked: int
    details: dict

    def to_json(self) -> dict:
        return {"valid": True, "kind": self.kind, "levels_checked": self.levels_checked, **self.details}


def replay_intersection(cert: dict) -> ReplayResult:
    A, B = _spec(cert["A"]), _spec(cert["B"])
    ta, tb = _tau(A), _tau(B)
    claimed = [_q(v) for v in cert.get("tau", [ta, tb])]
    if claimed[0] > ta or claimed[1] > tb:
        raise CertificateInvalid("stated thickness exceeds the recomputed value", level=0)
    mode = cert["mode"]
    _condition(mode, ta, tb)
    levels = cert["levels"]
    last = _check_chain(levels, _LineSide(A), _LineSide(B), A, B)
    (a_lo, a_hi), (b_lo, b_hi) = last[4], last[5]
    box = (max(a_lo, b_lo), min(a_hi, b_hi))
    stated = tuple(_q(v) for v in cert["box"])
    if stated != box:
        raise CertificateInvalid("final box does not match the last level", level=len(levels) - 1)
    return ReplayResult("intersection", len(levels), {"mode": mode, "box_width": float(box[1] - box[0])})


def replay_window(cert: dict) -> ReplayResult:
    K = _spec(cert["K"])
    circ_d = cert["map"]
    bits = int(cert.get("precision_bits", 128))
    circ = _Circle(
        tuple(_q(v) for v in circ_d["y1"]), tuple(_q(v) for v in circ_d["y2"]),
        _q(circ_d["t_sq"]), circ_d["branch"] == "lower", bits,
    )
    lo, hi = (_q(v) for v in cert["window"])
    eps = _q(cert["epsilon"])
    if circ.distortion(lo, hi) > eps:
        raise CertificateInvalid("stated distortion is below the recomputed bound")
    c = _q(cert["c"])
    lb = _q(cert["image_thickness_lb"])
    t_eps = _q(cert["eps_thickness"])
    if t_eps > _tau_window(K, lo, hi, eps):
        raise CertificateInvalid("stated epsilon-thickness exceeds the recomputed bound")
    if lb > (1 - eps) * t_eps or lb < c * _tau(K):
        raise CertificateInvalid("image thickness bound does not follow from the stated values")
    return ReplayResult("window", 1, {"epsilon": float(eps)})


def _box(v) -> tuple[Fraction, Fraction]:
    lo, hi = (_q(x) for x in v)
    if lo > hi:
        raise CertificateInvalid("box with lo > hi")
    return lo, hi


def _overlap(a, b) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def replay_tree(cert: dict) -> ReplayResult:
    K1, K2 = _spec(cert["K1"]), _spec(cert["K2"])
    t_sq = _q(cert["t"]["sq"])
    tol = _q(cert["tol"])
    bits = int(cert["precision_bits"])
    eps0 = _q(cert["epsilon0"])
    tau1, tau2 = _tau(K1), _tau(K2)
    if not _hky_robust(tau1, tau2):
        raise CertificateInvalid("Hunt-Kan-Yorke fails for the two sets", level=0)
    tau1_eps0 = _tau(K1, eps0)
    verts = {}
    order = []
    for v in cert["vertices"]:
        vid = v["id"]
        verts[vid] = v
        order.append(vid)
    if not order or order[0] != "" or (len(order) > 1 and order[1] != "1"):
        raise CertificateInvalid("tree must start with the seed edge", level=0)
    boxes = {vid: (_box(verts[vid]["box1"]), _box(verts[vid]["box2"])) for vid in order}
    levels_checked = 0

    # seed edge
    root = verts[""]
    origin = root.get("origin", {})
    if origin.get("kind") != "seed":
        raise CertificateInvalid("root vertex lacks its seed certificate", level=0)
    r = _q(origin["r"])
    chain = origin["chain"]
    B = _spec(chain["B"])
    if _spec(chain["A"]) != K1 or B != _Spec(K1.lo + r, K1.hi + r, K1.kids):
        raise CertificateInvalid("seed chain is not for the set and its translate", level=0)
    if chain["mode"] != "hky" or not _hky_robust(tau1, tau1):
        raise CertificateInvalid("seed chain is not robust", level=0)
    last = _check_chain(chain["levels"], _LineSide(K1), _LineSide(B), K1, B)
    levels_checked += len(chain["levels"])
    box = (max(last[4][0], last[5][0]), min(last[4][1], last[5][1]))
    src = [[_q(c) for c in p] for p in cert["source"]]
    (x1, x2), (y1, y2) = src
    if x1 - y1 != r or r * r + (x2 - y2) ** 2 != t_sq:
        raise CertificateInvalid("seed distance does not match the source pair", level=0)
    if not (_member_interior(K2, x2) and _member_interior(K2, y2)):
        raise CertificateInvalid("seed second coordinates are not interior points of K2", level=0)
    if not (_not_extreme(last[0], K1.k) and _not_extreme(last[1], K1.k)):
        raise CertificateInvalid("seed chain ends at an extreme cylinder", level=0)
    if boxes[""] != (box, (x2, x2)) or boxes["1"] != ((box[0] - r, box[1] - r), (y2, y2)):
        raise CertificateInvalid("seed vertex boxes do not match the chain", level=0)

    # star vertices
    for n, vid in enumerate(order[2:], start=2):
        v = verts[vid]
        o = v.get("origin", {})
        parts = vid.split(".")
        center = ".".join(parts[:-1])
        known = "1" if center == "" else ".".join(parts[:-2])
        if center not in boxes or known not in boxes or order.index(center) > n:
            raise CertificateInvalid(f"vertex {vid}: center placed after it", level=n)
        if o.get("kind") != "star":
            raise CertificateInvalid(f"vertex {vid}: missing star certificate", level=n)
        (c1, c2), (k1, k2) = boxes[center], boxes[known]
        if _overlap(c1, k1) or _overlap(c2, k2):
            raise CertificateInvalid(f"vertex {vid}: known point shares a coordinate with the center", level=n)
        lower = k2[1] < c2[0]
        if (o["branch"] == "lower") != lower:
            raise CertificateInvalid(f"vertex {vid}: wrong branch of the circle", level=n)
        circ = _Circle(c1, c2, t_sq, lower, bits)
        waddr = _digits(o["window"])
        w_lo, w_hi = K1.cyl(waddr)
        eps = _q(o["epsilon"])
        if eps > eps0 or circ.distortion(w_lo, w_hi) > eps:
            raise CertificateInvalid(f"vertex {vid}: window distortion not certified", level=n)
        tau_img = _q(o["tau_image"])
        if tau_img > (1 - eps) * tau1_eps0 or not _hky_robust(tau_img, tau2):
            raise CertificateInvalid(f"vertex {vid}: thickness condition fails on the image", level=n)
        right = w_lo > c1[1]
        increasing = right == lower
        last = _check_chain(o["levels"], _ImageSide(K1, circ, increasing), _LineSide(K2), K1, K2, waddr, ())
        levels_checked += len(o["levels"])
        a_addr, b_addr, img_hull, _, s_int, q_int = last
        want1 = s_int
        want2 = (max(q_int[0], img_hull[0]), min(q_int[1], img_hull[1]))
        if boxes[vid] != (want1, want2):
            raise CertificateInvalid(f"vertex {vid}: box does not match its final level", level=n)
        if not _not_extreme(b_addr, K2.k):
            raise CertificateInvalid(f"vertex {vid}: second coordinate may be extreme", level=n)

    # edges and distinctness
    for n, vid in enumerate(order[1:], start=1):
        parent = ".".join(vid.split(".")[:-1])
        (a1, a2), (b1, b2) = boxes[vid], boxes[parent]
        dx = _sq_range(a1[0] - b1[1], a1[1] - b1[0])
        dy = _sq_range(a2[0] - b2[1], a2[1] - b2[0])
        d_lo, d_hi = dx[0] + dy[0], dx[1] + dy[1]
        if not d_lo <= t_sq <= d_hi:
            raise CertificateInvalid(f"edge {parent}-{vid}: distance interval misses t", level=n)
        if _sqrt_hi(d_hi, bits) - _sqrt_lo(d_lo, bits) > tol:
            raise CertificateInvalid(f"edge {parent}-{vid}: distance interval wider than tol", level=n)
    for i, u in enumerate(order):
        for w in order[i + 1:]:
            if _overlap(boxes[u][0], boxes[w][0]) and _overlap(boxes[u][1], boxes[w][1]):
                raise CertificateInvalid(f"vertices {u} and {w} overlap", level=order.index(w))
    return ReplayResult("tree", levels_checked, {"vertices": len(order)})


def _sq_range(lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    if lo >= 0:
        return lo * lo, hi * hi
    if hi <= 0:
        return hi * hi, lo * lo
    return Fraction(0), max(lo * lo, hi * hi)


def replay(cert) -> ReplayResult:
    """Validate a certificate given as a dict or JSON text."""
    if isinstance(cert, (str, bytes)):
        if not cert.strip():
            raise SpecParseError("empty certificate")
        try:
            cert = json.loads(cert)
        except json.JSONDecodeError as exc:
            raise SpecParseError(f"certificate is not valid JSON: {exc}") from exc
    if not isinstance(cert, dict):
        raise SpecParseError("certificate must be a JSON object")
    kind = cert.get("kind")
    try:
        if kind == "intersection":
            return replay_intersection(cert)
        if kind == "tree":
            return replay_tree(cert)
        if kind == "window":
            return replay_window(cert)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CertificateInvalid):
            raise
        raise CertificateInvalid(f"malformed certificate: {exc!r}", level=0) from exc
    raise SpecParseError(f"unknown certificate kind {kind!r}")
