"""Command-line front end.

Every command writes one JSON document to standard output (or ``--out``).
Errors go to standard error as ``{"error": {"code": .., "message": ..}}``
with exit status 1 for invalid input, 2 for failed computations and 3 for
gallery mismatches.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

import numpy as np

from . import analysis, averaging, feasibility, gallery, proximal, pythagorean
from .extended import ExtNonnegError
from .operators import NotInDomain, evaluate_operator, linear_matrix
from .results import jsonable
from .specs import (
    AverageSpec,
    SampleConfig,
    SpecError,
    as_vector,
    from_json,
    operator_or_average_from_json,
    to_json,
)

EXIT_VALIDATION = 1
EXIT_COMPUTATION = 2
EXIT_GALLERY = 3

PROPERTIES = (
    "monotone",
    "lipschitz",
    "cocoercive",
    "firmly-nonexpansive",
    "nonexpansive",
    "paramonotone",
    "k-cyclic",
    "disjoint-injective",
    "banach-contraction",
    "fitzpatrick",
)


class CliError(Exception):
    def __init__(self, code: str, message: str, status: int):
        super().__init__(message)
        self.code = code
        self.status = status


def _invalid(message) -> CliError:
    return CliError("validation", str(message), EXIT_VALIDATION)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _invalid(message)


def _load_json_arg(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _invalid(f"{what} is not valid JSON: {exc}")


def _read_spec(path: Optional[str]):
    if not path:
        raise _invalid("--spec is required")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise _invalid(f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise _invalid(f"{path} is not valid JSON: {exc}")


def _points(arg: Optional[str], fallback=None) -> List[np.ndarray]:
    raw = _load_json_arg(arg, "--points") if arg is not None else fallback
    if raw is None:
        raise _invalid("no points given")
    if not isinstance(raw, list) or not raw:
        raise _invalid("points must be a nonempty list")
    if not isinstance(raw[0], list):
        raw = [raw]
    return [as_vector(p, "point") for p in raw]


def _config(args) -> SampleConfig:
    return SampleConfig().replace(
        seed=args.seed, tol=args.tol, max_iter=args.max_iter,
        pair_count=args.samples, radius=args.radius)


def _emit(doc, args):
    text = json.dumps(jsonable(doc), sort_keys=True) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_average(args):
    avg = from_json(_read_spec(args.spec), "average")
    doc = {"mu": avg.mu, "spec": to_json(avg)}
    aff = averaging.resolvent_average_affine(avg)
    if aff is not None:
        M, b = aff
        doc.update({"affine": True, "matrix": M, "offset": b})
    else:
        T = averaging.averaged_resolvent_affine(avg)
        doc["affine"] = False
        if T is not None:
            doc["averaged_resolvent"] = {"matrix": T[0], "offset": T[1]}
    return doc


def cmd_eval(args):
    cfg = _config(args)
    src = operator_or_average_from_json(_read_spec(args.spec))
    values = []
    for x in _points(args.points):
        if isinstance(src, AverageSpec):
            values.append(averaging.evaluate_average(src, x, cfg))
        else:
            values.append(evaluate_operator(src, x, cfg))
    return {"values": values, "seed": cfg.seed}


def _linear_source(src) -> np.ndarray:
    if isinstance(src, AverageSpec):
        aff = averaging.resolvent_average_affine(src)
        if aff is None or np.linalg.norm(aff[1]) > 0:
            raise _invalid("property needs a linear operator or an average of linear operators")
        return aff[0]
    M = linear_matrix(src)
    if M is None:
        raise _invalid("property needs a linear operator")
    return M


def cmd_check(args):
    cfg = _config(args)
    src = operator_or_average_from_json(_read_spec(args.spec))
    prop = args.property
    if prop == "paramonotone":
        res = analysis.check_paramonotone_matrix(_linear_source(src))
        res.seed = cfg.seed
    elif prop == "fitzpatrick":
        if not isinstance(src, AverageSpec):
            raise _invalid("fitzpatrick needs an average of linear operators")
        mats = []
        for op in src.ops:
            M = linear_matrix(op, src.dim)
            if M is None:
                raise _invalid("fitzpatrick needs an average of linear operators")
            mats.append(M)
        res = analysis.check_fitzpatrick_inequality(mats, src.weights, src.mu, cfg)
    elif prop == "k-cyclic":
        res = analysis.check_k_cyclic(src, args.k, cfg)
    elif prop == "monotone":
        res = analysis.estimate_monotonicity_modulus(src, cfg, args.bound)
    elif prop == "lipschitz":
        res = analysis.estimate_lipschitz(src, cfg, args.bound)
    elif prop == "cocoercive":
        res = analysis.estimate_cocoercivity(src, cfg, args.bound)
    elif prop == "firmly-nonexpansive":
        res = analysis.check_firmly_nonexpansive(src, cfg)
    elif prop == "nonexpansive":
        res = analysis.check_nonexpansive(src, cfg)
    elif prop == "disjoint-injective":
        res = analysis.check_disjoint_injectivity(src, cfg)
    else:  # banach-contraction
        res = analysis.check_banach_contraction(src, cfg)
    doc = res.to_json()
    doc["property"] = prop
    return doc


def cmd_prox_average(args):
    cfg = _config(args)
    obj = _read_spec(args.spec)
    if not isinstance(obj, dict):
        raise _invalid("prox-average spec must be an object")
    extra = set(obj) - {"mu", "items", "points"}
    if extra:
        raise _invalid(f"unknown fields {sorted(extra)}")
    items = obj.get("items")
    if not isinstance(items, list) or not items:
        raise _invalid("items must be a nonempty list")
    fns, weights = [], []
    for item in items:
        if not isinstance(item, dict) or set(item) != {"weight", "fn"}:
            raise _invalid("each item needs exactly 'weight' and 'fn'")
        fns.append(from_json(item["fn"], "function"))
        weights.append(float(item["weight"]))
    mu = float(obj.get("mu", 1.0))
    values = []
    for x in _points(args.points, obj.get("points")):
        values.append(proximal.proximal_average_value(fns, weights, mu, x, cfg))
    return {"values": values, "seed": cfg.seed}


def cmd_feasible(args):
    cfg = _config(args)
    avg = from_json(_read_spec(args.spec), "average")
    if args.x0 is None:
        raise _invalid("--x0 is required")
    x0 = as_vector(_load_json_arg(args.x0, "--x0"), "x0")
    if args.u is not None:
        u = as_vector(_load_json_arg(args.u, "--u"), "u")
        x, trace = feasibility.solve_common_value(avg, u, x0, cfg)
    else:
        x, trace = feasibility.solve_common_zero(avg, x0, cfg)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(trace.jsonl())
    doc = {"x": x, "seed": cfg.seed, "common": trace.common(10 * cfg.tol)}
    doc.update(trace.summary())
    if not trace.converged:
        _emit(doc, args)
        raise CliError("computation", f"no convergence within {trace.iterations} iterations"
                       + (" (stalled)" if trace.stalled else ""), EXIT_COMPUTATION)
    return doc


def _triple_doc(p, q, m, t):
    return {"p": p, "q": q, "triple": list(t.as_tuple()), "matrix": m.to_json()}


def cmd_triples(args):
    vals = args.values
    if args.mode == "rational":
        if len(vals) != 2:
            raise _invalid("triples rational needs P Q")
        m, t = pythagorean.rotation_average_rational(vals[0], vals[1])
        return {"triple": list(t.as_tuple()), "matrix": m.to_json()}
    if args.mode == "euclid":
        if len(vals) != 2:
            raise _invalid("triples euclid needs K L")
        return {"triple": list(pythagorean.euclid_triple(vals[0], vals[1]).as_tuple())}
    if len(vals) != 1:
        raise _invalid("triples sweep needs QMAX")
    if vals[0] < 2:
        raise _invalid("QMAX must be at least 2")
    return {"triples": [_triple_doc(*row) for row in pythagorean.sweep(vals[0])]}


def cmd_gallery(args):
    cfg = _config(args)
    report = gallery.run_gallery(cfg)
    text = gallery.dumps(report)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "gallery.json"), "w", encoding="utf-8") as fh:
        fh.write(text)
    summary = {"entries": len(report["entries"]), "mismatches": report["mismatches"],
               "path": os.path.join(out_dir, "gallery.json")}
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    if report["mismatches"]:
        raise CliError("gallery_mismatch", f"{len(report['mismatches'])} gallery entries differ",
                       EXIT_GALLERY)
    return None


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--spec", help="JSON spec file")
    common.add_argument("--out", help="output file (directory for gallery)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    common.add_argument("--samples", type=int, default=None, help="number of sampled pairs")
    common.add_argument("--radius", type=float, default=None)

    parser = _Parser(prog="resavg", description="Resolvent and proximal averages of monotone operators.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("average", parents=[common], help="closed form of an average")
    p.set_defaults(func=cmd_average)

    p = sub.add_parser("eval", parents=[common], help="evaluate an operator or average")
    p.add_argument("--points", help="JSON list of points")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", parents=[common], help="sampled or exact property check")
    p.add_argument("property", choices=PROPERTIES)
    p.add_argument("--k", type=int, default=3, help="cycle length for k-cyclic")
    p.add_argument("--bound", type=float, default=None, help="claimed constant to test against")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("prox-average", parents=[common], help="values of a proximal average")
    p.add_argument("--points", help="JSON list of points (overrides those in the spec file)")
    p.set_defaults(func=cmd_prox_average)

    p = sub.add_parser("feasible", parents=[common], help="common zero of an average")
    p.add_argument("--x0", help="JSON starting point")
    p.add_argument("--u", help="JSON common value (default: zero)")
    p.add_argument("--trace", help="write the residual trace as JSON lines")
    p.set_defaults(func=cmd_feasible)

    p = sub.add_parser("triples", parents=[common], help="Pythagorean triples from rotation averages")
    p.add_argument("mode", choices=("rational", "euclid", "sweep"))
    p.add_argument("values", type=int, nargs="+")
    p.set_defaults(func=cmd_triples)

    p = sub.add_parser("gallery", parents=[common], help="recompute the example gallery")
    p.set_defaults(func=cmd_gallery)
    return parser


def _error(code: str, message: str):
    sys.stderr.write(json.dumps({"error": {"code": code, "message": message}}) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        doc = args.func(args)
        if doc is not None:
            _emit(doc, args)
        return 0
    except CliError as exc:
        _error(exc.code, str(exc))
        return exc.status
    except (SpecError, ExtNonnegError, ValueError, TypeError) as exc:
        _error("validation", str(exc))
        return EXIT_VALIDATION
    except (NotInDomain, proximal.BracketExhaustedError, averaging.SingularAverageError,
            ArithmeticError, np.linalg.LinAlgError) as exc:
        _error("computation", str(exc))
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
