"""Float64 kernels for brute-force oracles and rendering.

Nothing here is used to certify anything; these are fast numerical cross-checks
(approximant intervals, finite-union thickness, interval-list intersection,
circle/rectangle hits).  Each kernel has a numba ``@njit`` version and a plain
numpy version; set ``CANTOR_FORGE_DISABLE_NUMBA=1`` to use numpy only.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_ENV = "CANTOR_FORGE_DISABLE_NUMBA"


def numba_enabled() -> bool:
    if os.environ.get(DISABLE_ENV, "") not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


# -- numpy versions ---------------------------------------------------------------


def _approximant_np(lo, hi, offsets, lengths, depth):
    starts = np.array([lo], dtype=np.float64)
    widths = np.array([hi - lo], dtype=np.float64)
    for _ in range(depth):
        starts = (starts[:, None] + widths[:, None] * offsets[None, :]).ravel()
        widths = (widths[:, None] * lengths[None, :]).ravel()
    return np.stack([starts, starts + widths], axis=1)


def _thickness_np(iv, eps):
    if iv.shape[0] < 2:
        return np.inf
    gl, gr = iv[:-1, 1], iv[1:, 0]
    g = gr - gl
    lo, hi = iv[0, 0], iv[-1, 1]
    best = np.inf
    for i in range(g.shape[0]):
        thr = g[i] * (1.0 - eps)
        ok = g >= thr if eps == 0.0 else g > thr
        right = np.flatnonzero(ok[i + 1:])
        r_end = gl[i + 1 + right[0]] if right.size else hi
        left = np.flatnonzero(ok[:i])
        l_end = gr[left[-1]] if left.size else lo
        best = min(best, (r_end - gr[i]) / g[i], (gl[i] - l_end) / g[i])
    return best


def _intersect_np(a, b):
    # b-intervals overlapping a[i] form the index range [first[i], last[i])
    first = np.searchsorted(b[:, 1], a[:, 0], side="left")
    last = np.searchsorted(b[:, 0], a[:, 1], side="right")
    counts = np.maximum(last - first, 0)
    ia = np.repeat(np.arange(a.shape[0]), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    ib = np.repeat(first, counts) + offs
    lo = np.maximum(a[ia, 0], b[ib, 0])
    hi = np.minimum(a[ia, 1], b[ib, 1])
    return np.stack([lo, hi], axis=1)


def _circle_hits_np(cx, cy, t, rects):
    # nearest and farthest distance from the center to each rectangle
    dx_near = np.maximum(np.maximum(rects[:, 0] - cx, cx - rects[:, 1]), 0.0)
    dy_near = np.maximum(np.maximum(rects[:, 2] - cy, cy - rects[:, 3]), 0.0)
    dx_far = np.maximum(np.abs(rects[:, 0] - cx), np.abs(rects[:, 1] - cx))
    dy_far = np.maximum(np.abs(rects[:, 2] - cy), np.abs(rects[:, 3] - cy))
    near = np.hypot(dx_near, dy_near)
    far = np.hypot(dx_far, dy_far)
    return (near <= t) & (t <= far)


# -- numba versions ---------------------------------------------------------------

_JIT = {}


def _build_jit():
    from numba import njit

    @njit(cache=True)
    def approximant(lo, hi, offsets, lengths, depth):
        k = offsets.shape[0]
        n = k**depth
        out = np.empty((n, 2))
        for idx in range(n):
            a, w, rest = lo, hi - lo, idx
            div = n
            for _ in range(depth):
                div //= k
                d = rest // div
                rest -= d * div
                a += w * offsets[d]
                w *= lengths[d]
            out[idx, 0] = a
            out[idx, 1] = a + w
        return out

    @njit(cache=True)
    def thickness(iv, eps):
        n = iv.shape[0]
        if n < 2:
            return np.inf
        lo, hi = iv[0, 0], iv[n - 1, 1]
        best = np.inf
        for i in range(n - 1):
            gl, gr = iv[i, 1], iv[i + 1, 0]
            g = gr - gl
            thr = g * (1.0 - eps)
            r_end = hi
            for j in range(i + 1, n - 1):
                h = iv[j + 1, 0] - iv[j, 1]
                if (eps == 0.0 and h >= thr) or (eps > 0.0 and h > thr):
                    r_end = iv[j, 1]
                    break
            l_end = lo
            for j in range(i - 1, -1, -1):
                h = iv[j + 1, 0] - iv[j, 1]
                if (eps == 0.0 and h >= thr) or (eps > 0.0 and h > thr):
                    l_end = iv[j + 1, 0]
                    break
            v = min((r_end - gr) / g, (gl - l_end) / g)
            if v < best:
                best = v
        return best

    @njit(cache=True)
    def intersect(a, b):
        out = np.empty((a.shape[0] + b.shape[0], 2))
        i = j = m = 0
        while i < a.shape[0] and j < b.shape[0]:
            lo = max(a[i, 0], b[j, 0])
            hi = min(a[i, 1], b[j, 1])
            if lo <= hi:
                out[m, 0] = lo
                out[m, 1] = hi
                m += 1
            if a[i, 1] < b[j, 1]:
                i += 1
            else:
                j += 1
        return out[:m]

    @njit(cache=True)
    def circle_hits(cx, cy, t, rects):
        out = np.zeros(rects.shape[0], dtype=np.bool_)
        for r in range(rects.shape[0]):
            x0, x1, y0, y1 = rects[r, 0], rects[r, 1], rects[r, 2], rects[r, 3]
            dxn = max(max(x0 - cx, cx - x1), 0.0)
            dyn = max(max(y0 - cy, cy - y1), 0.0)
            dxf = max(abs(x0 - cx), abs(x1 - cx))
            dyf = max(abs(y0 - cy), abs(y1 - cy))
            out[r] = np.sqrt(dxn * dxn + dyn * dyn) <= t <= np.sqrt(dxf * dxf + dyf * dyf)
        return out

    _JIT.update(approximant=approximant, thickness=thickness, intersect=intersect, circle_hits=circle_hits)


def _jit(name):
    if not _JIT:
        _build_jit()
    return _JIT[name]


# -- public entry points -------------------------------------------------------------


def _spec_arrays(spec):
    offsets = np.array([float(o) for o, _ in spec.children])
    lengths = np.array([float(l) for _, l in spec.children])
    return float(spec.lo), float(spec.hi), offsets, lengths


def approximant_intervals(spec, depth: int, *, use_numba: bool | None = None) -> np.ndarray:
    """Sorted (n, 2) array of the depth-``depth`` cylinders of ``spec``."""
    lo, hi, offsets, lengths = _spec_arrays(spec)
    if (numba_enabled() if use_numba is None else use_numba):
        return _jit("approximant")(lo, hi, offsets, lengths, int(depth))
    return _approximant_np(lo, hi, offsets, lengths, int(depth))


def union_thickness(intervals, epsilon: float = 0.0, *, use_numba: bool | None = None) -> float:
    """Thickness (or epsilon-thickness) of a finite union of sorted disjoint intervals."""
    iv = np.ascontiguousarray(intervals, dtype=np.float64)
    if (numba_enabled() if use_numba is None else use_numba):
        return float(_jit("thickness")(iv, float(epsilon)))
    return float(_thickness_np(iv, float(epsilon)))


def intersect_intervals(a, b, *, use_numba: bool | None = None) -> np.ndarray:
    """Pairwise intersections of two sorted lists of disjoint closed intervals."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if (numba_enabled() if use_numba is None else use_numba):
        return _jit("intersect")(a, b)
    return _intersect_np(a, b)


def circle_rect_hits(center, t: float, rects, *, use_numba: bool | None = None) -> np.ndarray:
    """Mask of rectangles (x0, x1, y0, y1) met by the circle of radius t about ``center``."""
    rects = np.ascontiguousarray(rects, dtype=np.float64)
    cx, cy = float(center[0]), float(center[1])
    if (numba_enabled() if use_numba is None else use_numba):
        return _jit("circle_hits")(cx, cy, float(t), rects)
    return _circle_hits_np(cx, cy, float(t), rects)
