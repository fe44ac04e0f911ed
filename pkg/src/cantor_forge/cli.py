"""Command-line interface.

Exit codes: 0 success, 2 parse/parameter error, 3 depth or budget exhausted,
4 thickness condition violated, 5 certificate invalid.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from itertools import islice
from pathlib import Path

from .cantor import CantorSpec, SubCantor, build_middle_alpha, load_spec
from .circlemap import CircleMap, choose_window
from .errors import CantorForgeError, CertificateInvalid, DepthExhausted, InvalidParameter, SpecParseError
from .exact import fmt, parse_rational, precision_bits
from .intersect import gap_lemma_point
from .replay import replay
from .svg import MAX_RENDER_DEPTH, render_placement
from .thickness import check_hky, check_newhouse, hausdorff_lower_bound, thickness
from .tree import (
    DEFAULT_DEPTH_BUDGET,
    TreeBuilder,
    TreeSpec,
    build_tree,
    default_source,
    diagonal_window,
    pinned_point,
    pinned_window,
    stream_vertices,
    verify_tree,
    vid_str,
)


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise SpecParseError(f"not a rational number: {text!r}") from exc


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise SpecParseError(f"cannot read {path}: {exc}") from exc


def read_spec(arg: str):
    """A spec file path, or the shorthand ``middle-<alpha>`` (e.g. ``middle-1/6``)."""
    if arg.startswith("middle-") and not Path(arg).exists():
        return build_middle_alpha(_rational(arg[len("middle-"):]))
    text = _read(arg)
    if not text.strip():
        raise SpecParseError(f"{arg} is empty")
    return load_spec(text)


def _full_spec(arg: str) -> CantorSpec:
    spec = read_spec(arg)
    if isinstance(spec, SubCantor):
        raise InvalidParameter("this command needs a full Cantor spec, not a restriction")
    return spec


def _point(text: str) -> tuple[Fraction, Fraction]:
    parts = text.split(",")
    if len(parts) != 2:
        raise SpecParseError(f"expected a point 'x,y', got {text!r}")
    return _rational(parts[0]), _rational(parts[1])


def _source(text: str | None, K1, K2):
    if text is None:
        return default_source(K1, K2)
    parts = text.split(":")
    if len(parts) != 2:
        raise SpecParseError("seed points must look like 'x1,x2:y1,y2'")
    return _point(parts[0]), _point(parts[1])


def _tree_spec(args) -> TreeSpec:
    if args.tree_file:
        return TreeSpec.from_json(_read(args.tree_file))
    if args.chain:
        return TreeSpec.chain(args.chain)
    b, d = (int(v) for v in args.tstar.split(","))
    return TreeSpec.tstar(b, d)


def _emit(obj, out: str | None = None) -> None:
    text = json.dumps(obj, indent=None if out is None else 1, sort_keys=False)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# -- commands ------------------------------------------------------------------------


def cmd_thickness(args) -> int:
    spec = read_spec(args.spec)
    rep = thickness(spec, _rational(args.epsilon))
    _emit(rep.to_json())
    return 0 if rep.exact else DepthExhausted.exit_code


def cmd_check(args) -> int:
    out = {}
    taus = []
    for name, arg in (("A", args.spec_a), ("B", args.spec_b)):
        rep = thickness(read_spec(arg))
        taus.append(rep.lower)
        h = hausdorff_lower_bound(rep.lower)
        out[name] = {"thickness": rep.to_json(), "hausdorff_lower_bound": float(h.lo)}
    out["newhouse"] = check_newhouse(*taus)
    out["hky"] = check_hky(*taus).to_json()
    _emit(out)
    return 0


def cmd_intersect(args) -> int:
    A, B = _full_spec(args.spec_a), _full_spec(args.spec_b)
    res = gap_lemma_point(A, B, _rational(args.tol), mode=args.mode, depth_budget=args.depth)
    _emit(res.to_json(), args.out)
    if args.out:
        _emit({"box": res.box.to_json(), "width": float(res.box.width), "mode": res.mode, "out": args.out})
    return 0


def cmd_window(args) -> int:
    K = _full_spec(args.spec)
    cmap = CircleMap.make(_point(args.center), t_sq=_rational(args.t_sq), branch=args.branch)
    cert = choose_window(K, _rational(args.x1), cmap, _rational(args.c))
    data = {"kind": "window", "K": K.to_json(), "map": cmap.to_json(), "precision_bits": precision_bits(),
            **cert.to_json()}
    _emit(data, args.out)
    return 0


def cmd_tree(args) -> int:
    K1, K2 = _full_spec(args.spec_a), _full_spec(args.spec_b)
    tol = _rational(args.tol)
    if args.stream is not None:
        return _stream(args, K1, K2, tol)
    tree = _tree_spec(args)
    placement = build_tree(K1, K2, tree, _source(args.seed, K1, K2), tol, args.depth)
    rep = verify_tree(placement, tree)
    data = placement.to_json()
    data["verify"] = rep.to_json()
    _emit(data, args.out)
    if args.svg:
        Path(args.svg).write_text(render_placement(data, depth=args.render_depth))
    if args.out:
        _emit(rep.to_json())
    return 0 if rep.passed else CertificateInvalid.exit_code


def _stream(args, K1, K2, tol) -> int:
    builders: list[TreeBuilder] = []
    checkpoint = json.loads(_read(args.resume)) if args.resume else None
    src = None if checkpoint else _source(args.seed, K1, K2)
    it = stream_vertices(K1, K2, src, checkpoint=checkpoint, depth_budget=args.depth, builder_out=builders)
    for vid, pt in islice(it, args.stream):
        print(json.dumps({"id": vid_str(vid), **pt.to_json(with_origin=False)}))
        sys.stdout.flush()
    b = builders[0]
    if args.checkpoint:
        Path(args.checkpoint).write_text(json.dumps(b.checkpoint()) + "\n")
    placement = b.placement(TreeSpec("stream"), tol)
    rep = verify_tree(placement)
    print(json.dumps({"verify": rep.to_json()}), file=sys.stderr)
    if args.svg:
        Path(args.svg).write_text(render_placement(placement.to_json(), depth=args.render_depth))
    return 0 if rep.passed else CertificateInvalid.exit_code


def cmd_diagonal(args) -> int:
    K1, K2 = _full_spec(args.spec_a), _full_spec(args.spec_b)
    tree = _tree_spec(args)
    anchor = _point(args.anchor) if args.anchor else None
    results = diagonal_window(K1, K2, tree, args.samples, _rational(args.tol), anchor=anchor,
                              depth_budget=args.depth, jobs=args.jobs)
    for r in results:
        print(json.dumps(r.to_json()))
    ok = sum(r.ok for r in results)
    print(json.dumps({"certified": ok, "samples": len(results)}), file=sys.stderr)
    return 0 if ok == len(results) else DepthExhausted.exit_code


def cmd_pinned(args) -> int:
    K1, K2 = _full_spec(args.spec_a), _full_spec(args.spec_b)
    pin = _point(args.pin)
    tol = _rational(args.tol)
    if args.t_sq:
        results = [pinned_point(K1, K2, pin, _rational(args.t_sq), tol, depth_budget=args.depth)]
    else:
        results = pinned_window(K1, K2, pin, args.samples, tol, depth_budget=args.depth)
    for r in results:
        print(json.dumps(r.to_json()))
    return 0 if all(r.ok for r in results) else DepthExhausted.exit_code


def cmd_replay(args) -> int:
    text = _read(args.certificate)
    try:
        res = replay(text)
    except CertificateInvalid as exc:
        _emit({"valid": False, "level": exc.level, "error": str(exc)})
        return exc.exit_code
    _emit(res.to_json())
    return 0


def cmd_render(args) -> int:
    text = _read(args.placement)
    if not text.strip():
        raise SpecParseError("placement file is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"placement is not valid JSON: {exc}") from exc
    if data.get("kind") != "tree":
        raise SpecParseError("render needs a tree placement")
    svg = render_placement(data, depth=args.depth)
    if args.out:
        Path(args.out).write_text(svg)
    else:
        sys.stdout.write(svg)
    return 0


# -- parser ----------------------------------------------------------------------------


def _add_tree_shape(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tree-file", help="JSON tree: {'parents': [...]} or {'tstar': {'branching': b, 'depth': d}}")
    g.add_argument("--tstar", default="3,2", help="truncated T* as 'b,d' (default 3,2)")
    g.add_argument("--chain", type=int, help="path with this many vertices")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cantor-forge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thickness", help="exact thickness of a spec or restriction")
    p.add_argument("spec")
    p.add_argument("--epsilon", default="0")
    p.set_defaults(func=cmd_thickness)

    p = sub.add_parser("check", help="Newhouse and Hunt-Kan-Yorke conditions for two specs")
    p.add_argument("spec_a")
    p.add_argument("spec_b")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("intersect", help="certified point of A ∩ B")
    p.add_argument("spec_a")
    p.add_argument("spec_b")
    p.add_argument("--tol", default="1/1000000", help="target box width")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH_BUDGET)
    p.add_argument("--mode", choices=("auto", "hky", "newhouse"), default="auto")
    p.add_argument("--out")
    p.set_defaults(func=cmd_intersect)

    p = sub.add_parser("window", help="certified distortion window for a circle map")
    p.add_argument("spec")
    p.add_argument("--center", required=True, help="circle center 'y1,y2'")
    p.add_argument("--t-sq", required=True, help="squared radius")
    p.add_argument("--x1", required=True, help="point of the set to window around")
    p.add_argument("--c", default="9/10", help="thickness margin in (0, 1)")
    p.add_argument("--branch", choices=("lower", "upper"), default="lower")
    p.add_argument("--out")
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("tree", help="place a tree with all edges at one distance")
    p.add_argument("spec_a")
    p.add_argument("spec_b")
    _add_tree_shape(p)
    p.add_argument("--seed", help="seed pair 'x1,x2:y1,y2' (its distance is t)")
    p.add_argument("--tol", default="1/1000000000")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH_BUDGET)
    p.add_argument("--stream", type=int, metavar="N", help="stream the first N vertices of T* as JSON lines")
    p.add_argument("--checkpoint", help="write a resumable checkpoint after streaming")
    p.add_argument("--resume", help="resume streaming from a checkpoint")
    p.add_argument("--svg", help="also write an SVG figure")
    p.add_argument("--render-depth", type=int, default=4, choices=range(MAX_RENDER_DEPTH + 1))
    p.add_argument("--out")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("diagonal", help="sampled certification of the tree distance set")
    p.add_argument("spec_a")
    p.add_argument("spec_b")
    _add_tree_shape(p)
    p.add_argument("--samples", type=int, default=25)
    p.add_argument("--anchor", help="fixed source point 'x1,x2'")
    p.add_argument("--tol", default="1/1000000000")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH_BUDGET)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_diagonal)

    p = sub.add_parser("pinned", help="sampled certification of the pinned distance set")
    p.add_argument("spec_a")
    p.add_argument("spec_b")
    p.add_argument("--pin", required=True, help="pin point 'x,y'")
    p.add_argument("--t-sq", help="a single squared distance instead of a sweep")
    p.add_argument("--samples", type=int, default=9)
    p.add_argument("--tol", default="1/1000000000")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH_BUDGET)
    p.set_defaults(func=cmd_pinned)

    p = sub.add_parser("replay", help="independently re-check a certificate")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("render", help="SVG of a tree placement over the product approximant")
    p.add_argument("placement")
    p.add_argument("--depth", type=int, default=4, choices=range(MAX_RENDER_DEPTH + 1))
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CantorForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
