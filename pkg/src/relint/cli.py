"""Command line front end over JSON documents.

Exit codes: 0 success, 1 validation failure, 2 search cap or indeterminate
result, 3 I/O or schema error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import documents as docs
from .diagrams import ISO_CAP, SearchCapExceeded, colimit, limit
from .grid import (BoundaryError, GridTranslation, RectOpen, cell_weight, check_delta_approx,
                   delta_approx_witness, grid_from_json, grid_open_from_cells, grid_open_to_json,
                   tflat_grid)
from .interleave import distance, distortion_report
from .kan import pixelize_lower, pixelize_upper, pullback, pushforward, pushforward_open
from .poset import PosetError
from .reeb import ReebSpace, pixelize_reeb, reeb_distance, slice_2delta
from .translate import (IntrinsicShift, RelativeShift, TranslationError, fmt_rational, identity_family,
                        shift_weighted, validate_weighted)

OK, INVALID, INDETERMINATE, IO_ERROR = 0, 1, 2, 3


class Indeterminate(Exception):
    def __init__(self, payload):
        super().__init__("indeterminate")
        self.payload = payload


def _emit(args, obj) -> None:
    text = obj if isinstance(obj, str) else docs.dumps(obj)
    if getattr(args, "output", None):
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise docs.DocumentError(f"cannot write {args.output}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _obj_json(M, value) -> dict:
    key = "dim" if hasattr(M.category, "p") else "size"
    return {key: value}


# ---------------------------------------------------------------------------
def cmd_check(args) -> int:
    doc = docs.load(args.file)
    kind = args.kind or docs.detect_kind(doc)
    docs.check_schema(doc, kind)
    summary: dict = {"kind": kind, "valid": True}
    if kind == "poset":
        P = docs.poset_from_doc(doc)
        summary["size"] = len(P)
    elif kind == "module":
        M = docs.module_from_doc(doc)
        summary["size"] = len(M.poset)
    elif kind == "map":
        docs.map_from_doc(doc)
    elif kind == "weights":
        report = validate_weighted(docs.weights_from_doc(doc))
        if not report.ok:
            raise ValueError(f"weight axiom {report.axiom} fails: {report.message}")
    elif kind == "translation":
        docs.translation_from_doc(doc)
    elif kind == "grid":
        summary["cells"] = len(grid_from_json(doc).cells)
    elif kind == "reeb":
        ReebSpace.from_json(doc)
    _emit(args, summary)
    return OK


def cmd_colimit(args) -> int:
    M = docs.module_from_doc(docs.load(args.module))
    sub = colimit(M) if args.command == "colimit" else limit(M)
    out = _obj_json(M, sub.obj)
    out["legs"] = {M.poset.labels[p]: docs.morphism_to_json(m) for p, m in sorted(sub.legs.items())}
    _emit(args, out)
    return OK


def cmd_pullback(args) -> int:
    f = docs.map_from_doc(docs.load(args.map))
    M = docs.module_from_doc(docs.load(args.module), f.target)
    _emit(args, docs.module_to_doc(pullback(f, M)))
    return OK


def cmd_pushforward(args) -> int:
    f = docs.map_from_doc(docs.load(args.map))
    M = docs.module_from_doc(docs.load(args.module), f.source)
    N = pushforward_open(f, M) if args.open_supports else pushforward(f, M)
    _emit(args, docs.module_to_doc(N))
    return OK


def cmd_pixelize(args) -> int:
    f = docs.map_from_doc(docs.load(args.map))
    M = docs.module_from_doc(docs.load(args.module), f.target)
    if args.mode == "lower":
        pix, comparison = pixelize_lower(f, M)
    else:
        pix, comparison = pixelize_upper(f, M)
    _emit(args, {"module": docs.module_to_doc(pix), "comparison": docs.module_map_to_doc(comparison),
                 "mode": args.mode})
    return OK


def cmd_shift(args) -> int:
    M_doc = docs.load(args.module)
    eps = Fraction(args.epsilon)
    if args.weights:
        wP = docs.weights_from_doc(docs.load(args.weights))
        report = validate_weighted(wP)
        if not report.ok:
            raise ValueError(f"weight axiom {report.axiom} fails: {report.message}")
        M = docs.module_from_doc(M_doc, wP.poset)
        out = shift_weighted(wP, M, eps)
    elif args.relative and args.translation:
        f = docs.map_from_doc(docs.load(args.relative))
        T = docs.translation_from_doc(docs.load(args.translation), f.target)
        M = docs.module_from_doc(M_doc, f.source)
        out = RelativeShift(f, T).module(M, eps)
    else:
        raise ValueError("shift needs --weights, or --relative together with --translation")
    _emit(args, docs.module_to_doc(out))
    return OK


def _shift_for(args, P):
    if args.relative:
        if not args.translation:
            raise ValueError("--relative needs --translation")
        f = docs.map_from_doc(docs.load(args.relative))
        return RelativeShift(f, docs.translation_from_doc(docs.load(args.translation), f.target)), f.source
    if args.translation:
        T = docs.translation_from_doc(docs.load(args.translation), P)
        return IntrinsicShift(T), T.poset
    return IntrinsicShift(identity_family(P)), P


def cmd_distance(args) -> int:
    first = docs.load(args.first)
    P = docs.poset_from_doc(first["poset"]) if isinstance(first, dict) and "poset" in first else None
    shift, base = _shift_for(args, P)
    M = docs.module_from_doc(first, base)
    N = docs.module_from_doc(docs.load(args.second), base)
    result = distance(M, N, shift, args.mode, cap=args.cap, threads=args.threads)
    payload = result.to_json()
    if result.status == "indeterminate":
        raise Indeterminate(payload)
    _emit(args, payload)
    return OK


def cmd_report(args) -> int:
    f = docs.map_from_doc(docs.load(args.map))
    T = docs.translation_from_doc(docs.load(args.translation), f.target)
    M = docs.module_from_doc(docs.load(args.first), f.target)
    N = docs.module_from_doc(docs.load(args.second), f.target)
    rep = distortion_report(f, T, M, N, cap=args.cap)
    payload = {k: (str(v) if k != "holds" else v) for k, v in rep.items()}
    if rep["holds"] is None:
        raise Indeterminate(payload)
    _emit(args, payload)
    return OK if rep["holds"] else INVALID


# ---------------------------------------------------------------------------
def _cell(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def cmd_grid(args) -> int:
    G = grid_from_json(docs.load(args.grid))
    if args.action == "build":
        by_dim: dict[str, int] = {}
        for i in range(len(G.cells)):
            by_dim[str(G.dim(i))] = by_dim.get(str(G.dim(i)), 0) + 1
        _emit(args, {"cells": len(G.cells), "by_dimension": by_dim, "covers": len(G.poset.hasse)})
    elif args.action == "weight":
        if not (args.source and args.target):
            raise ValueError("weight needs --from and --to")
        w = cell_weight(G, G.index(_cell(args.source)), G.index(_cell(args.target)))
        _emit(args, {"weight": fmt_rational(w)})
    elif args.action == "tflat":
        if args.open is None or args.epsilon is None:
            raise ValueError("tflat needs --open and --epsilon")
        cells = docs.load(args.open)
        docs.check_schema(cells, "gridopen")
        U = grid_open_from_cells(G, cells)
        out = tflat_grid(G, U, Fraction(args.epsilon))
        _emit(args, {"open": grid_open_to_json(G, out),
                     "snapped": fmt_rational(GridTranslation(G).snap(Fraction(args.epsilon)))})
    else:
        if args.rect is None:
            raise ValueError("approx-witness needs --rect")
        boxes = docs.load(args.rect)
        docs.check_schema(boxes, "rectopen")
        V = RectOpen.of([[(Fraction(str(a)), Fraction(str(b))) for a, b in box] for box in boxes])
        U = delta_approx_witness(G, V)
        check = check_delta_approx(G, V, U)
        _emit(args, {"open": grid_open_to_json(G, U), "contains": check.lower, "within_delta": check.upper})
        return OK if check.ok else INVALID
    return OK


def _window(args):
    return tuple(args.window) if args.window else None


def cmd_reeb(args) -> int:
    R = ReebSpace.from_json(docs.load(args.reeb))
    delta = Fraction(args.delta)
    if args.action == "cosheaf":
        pix = pixelize_reeb(R, delta, args.refine, _window(args))
        fam = pix.refined
        _emit(args, {"intervals": [{"interval": [fmt_rational(a), fmt_rational(b)], "components": n}
                                   for (a, b), n in zip(fam.intervals, pix.module.objs)]})
    elif args.action == "pixelize":
        pix = pixelize_reeb(R, delta, args.refine, _window(args))
        fam = pix.refined
        _emit(args, {"intervals": [{"interval": [fmt_rational(a), fmt_rational(b)],
                                    "components": n, "pixelized": m}
                                   for (a, b), n, m in zip(fam.intervals, pix.module.objs, pix.pixelized.objs)],
                     "agrees_on_grid": pix.agrees_on_grid()})
    elif args.action == "slice":
        graph = slice_2delta(pixelize_reeb(R, delta, args.refine, _window(args)))
        if args.dot:
            _emit(args, graph.to_dot() + "\n")
        else:
            out = graph.to_json()
            out["cycle_rank"] = graph.cycle_rank()
            _emit(args, out)
    else:
        if not args.other:
            raise ValueError("distance needs --other")
        R2 = ReebSpace.from_json(docs.load(args.other))
        result = reeb_distance(R, R2, delta, args.mode, window=_window(args), cap=args.cap)
        payload = result.to_json()
        if result.status == "indeterminate":
            raise Indeterminate(payload)
        _emit(args, payload)
    return OK


# ---------------------------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    """Usage errors share the exit code of unreadable input."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(IO_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="relint", description=__doc__.splitlines()[0])
    ap.add_argument("--schema", metavar="NAME", choices=sorted(docs.SCHEMAS),
                    help="print the JSON schema of a document type and exit")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for searches")
    ap.add_argument("--cap", type=int, default=ISO_CAP, help="search cap")
    ap.add_argument("-o", "--output", help="write output here instead of stdout")
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("check", help="validate a document")
    p.add_argument("file")
    p.add_argument("--kind", choices=sorted(docs.SCHEMAS))
    p.set_defaults(func=cmd_check)

    for name in ("colimit", "limit"):
        p = sub.add_parser(name, help=f"{name} of a module over its whole poset")
        p.add_argument("module")
        p.set_defaults(func=cmd_colimit)

    p = sub.add_parser("pullback", help="precompose a module with a poset map")
    p.add_argument("module")
    p.add_argument("--map", required=True)
    p.set_defaults(func=cmd_pullback)

    p = sub.add_parser("pushforward", help="Kan extension along a poset map")
    p.add_argument("module")
    p.add_argument("--map", required=True)
    p.add_argument("--open-supports", action="store_true", help="right Kan extension (limits)")
    p.set_defaults(func=cmd_pushforward)

    p = sub.add_parser("pixelize", help="pull back then push forward")
    p.add_argument("module")
    p.add_argument("--map", required=True)
    p.add_argument("--mode", choices=["lower", "upper"], default="lower")
    p.set_defaults(func=cmd_pixelize)

    p = sub.add_parser("shift", help="weighted or relative shift of a module")
    p.add_argument("module")
    p.add_argument("--weights")
    p.add_argument("--relative")
    p.add_argument("--translation")
    p.add_argument("--epsilon", required=True)
    p.set_defaults(func=cmd_shift)

    p = sub.add_parser("distance", help="weak or standard interleaving distance")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--mode", choices=["weak", "standard"], default="weak")
    p.add_argument("--relative")
    p.add_argument("--translation")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("grid", help="cubical grid operations")
    p.add_argument("action", choices=["build", "weight", "tflat", "approx-witness"])
    p.add_argument("grid")
    p.add_argument("--from", dest="source")
    p.add_argument("--to", dest="target")
    p.add_argument("--open")
    p.add_argument("--epsilon")
    p.add_argument("--rect")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("reeb", help="Reeb cosheaf pipeline")
    p.add_argument("action", choices=["cosheaf", "pixelize", "slice", "distance"])
    p.add_argument("reeb")
    p.add_argument("--delta", default="1")
    p.add_argument("--refine", type=int, default=2)
    p.add_argument("--window", type=int, nargs=2)
    p.add_argument("--other")
    p.add_argument("--mode", choices=["weak", "standard"], default="weak")
    p.add_argument("--dot", action="store_true")
    p.set_defaults(func=cmd_reeb)

    p = sub.add_parser("report", help="reports")
    p.add_argument("what", choices=["distortion"])
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--map", required=True)
    p.add_argument("--translation", required=True)
    p.set_defaults(func=cmd_report)
    return ap


def run(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.schema:
        sys.stdout.write(docs.dumps(docs.SCHEMAS[args.schema]))
        return OK
    if not getattr(args, "func", None):
        ap.print_usage(sys.stderr)
        return IO_ERROR
    try:
        return args.func(args)
    except docs.DocumentError as exc:
        _error(exc)
        return IO_ERROR
    except Indeterminate as exc:
        _emit(args, exc.payload)
        return INDETERMINATE
    except SearchCapExceeded as exc:
        _error(exc)
        return INDETERMINATE
    except (PosetError, TranslationError, BoundaryError, ValueError, KeyError) as exc:
        _error(exc)
        return INVALID


def _error(exc: Exception) -> None:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
