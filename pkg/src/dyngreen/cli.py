"""Command-line front end.

Every report starts with a metadata record (version, map label, place, tol,
seed) and is deterministic for a given map file and flags.  Exit codes:
0 success, 1 invalid input, 2 a checked inequality failed, 3 resource guard.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .basis import SigmaIndex, basis_check
from .bounds import (
    bound_report,
    discriminant,
    dsum,
    effective_C,
    mahler_inequality_check,
    mahler_measure,
    random_points,
)
from .canonical import (
    RationalPoint,
    canonical_height,
    green_sum_identity_check,
    lattes_from_curve,
    small_point_census,
)
from .dynheight import DEFAULT_TOL, green, hhat
from .errors import PropertyViolation, ResourceLimitError, ValidationError
from .forms import Lift, MapPair, to_rat
from .places import INF, Place
from .tfd import verify_tfd_inequality

EXIT_OK, EXIT_INVALID, EXIT_VIOLATION, EXIT_RESOURCE = 0, 1, 2, 3


@dataclass(frozen=True)
class MapSpec:
    d: int
    F1: tuple[Fraction, ...]
    F2: tuple[Fraction, ...]
    label: str = ""

    def to_map(self) -> MapPair:
        return MapPair.from_coeffs(self.F1, self.F2, self.label)

    def as_json(self) -> dict:
        return {"d": self.d, "F1": [str(c) for c in self.F1], "F2": [str(c) for c in self.F2], "label": self.label}


@dataclass(frozen=True)
class RunConfig:
    place: Place = INF
    tol: float = DEFAULT_TOL
    seed: int = 0
    fmt: str = "tsv"
    precision: Optional[int] = None
    workers: int = 1


def _coeff(c: Any) -> Fraction:
    if isinstance(c, bool) or isinstance(c, float):
        raise ValidationError(f"coefficient {c!r} must be an integer or a rational string")
    return to_rat(c)


def parse_map_spec(text: str) -> tuple[MapSpec, MapPair]:
    """Parse ``{"d": .., "F1": [..], "F2": [..], "label": ..}`` and validate it."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed map JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("map JSON must be an object")
    missing = [k for k in ("d", "F1", "F2") if k not in raw]
    if missing:
        raise ValidationError(f"map JSON is missing {', '.join(missing)}")
    d = raw["d"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 2:
        raise ValidationError("d must be an integer >= 2")
    F1, F2 = raw["F1"], raw["F2"]
    if not isinstance(F1, list) or not isinstance(F2, list):
        raise ValidationError("F1 and F2 must be coefficient lists")
    if len(F1) != d + 1 or len(F2) != d + 1:
        raise ValidationError(f"degree mismatch: d={d} needs {d + 1} coefficients per form")
    spec = MapSpec(d, tuple(_coeff(c) for c in F1), tuple(_coeff(c) for c in F2), str(raw.get("label", "")))
    return spec, spec.to_map()


# ---------------------------------------------------------------------------
# output


def fmt_real(x: Optional[float]) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, Fraction)):
        return str(x)
    return "%.15g" % x


def _json_value(x: Any) -> Any:
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return float("%.15g" % x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return x


class Report:
    def __init__(self, command: str, label: str, cfg: RunConfig, place: Optional[str] = None):
        self.meta = {
            "tool": "dyngreen",
            "version": __version__,
            "command": command,
            "label": label,
            "place": place if place is not None else str(cfg.place),
            "tol": cfg.tol,
            "seed": cfg.seed,
        }
        self.columns: list[str] = []
        self.rows: list[list[Any]] = []
        self.summary: dict[str, Any] = {}

    def render(self, fmt: str) -> str:
        if fmt == "json":
            body = {
                "meta": self.meta,
                "records": [dict(zip(self.columns, row)) for row in self.rows],
                "summary": self.summary,
            }
            return json.dumps(_json_value(body), sort_keys=True) + "\n"
        lines = ["# " + " ".join(f"{k}={fmt_real(v) if not isinstance(v, str) else v}" for k, v in self.meta.items())]
        for k, v in self.summary.items():
            lines.append(f"# {k}={fmt_real(v) if not isinstance(v, str) else v}")
        if len(self.columns) > 1:
            lines.append("\t".join(self.columns))
        for row in self.rows:
            lines.append("\t".join(v if isinstance(v, str) else fmt_real(v) for v in row))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def _lift_arg(text: str) -> Lift:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValidationError(f"lift must look like 'a:b', got {text!r}")
    return Lift(to_rat(parts[0].strip()), to_rat(parts[1].strip()))


def cmd_resultant(F: MapPair, args, cfg: RunConfig, rep: Report) -> int:
    rep.columns = ["resultant"]
    rep.rows = [[str(F.resultant)]]
    return EXIT_OK


def cmd_height(F: MapPair, args, cfg: RunConfig, rep: Report) -> int:
    z = _lift_arg(args.point)
    if args.global_height:
        rep.meta["place"] = "global"
        h = canonical_height(F, RationalPoint.of(z), cfg.tol)
    else:
        h = hhat(F, z, cfg.place, cfg.tol, cfg.precision)
    rep.columns = ["point", "place", "value", "err", "iterations"]
    rep.rows = [[args.point, rep.meta["place"], h.value, h.err, h.iterations]]
    return EXIT_OK


def cmd_green(F: MapPair, args, cfg: RunConfig, rep: Report) -> int:
    g = green(F, _lift_arg(args.z), _lift_arg(args.w), cfg.place, cfg.tol, cfg.precision)
    rep.columns = ["z", "w", "place", "value", "err", "iterations"]
    rep.rows = [[args.z, args.w, str(cfg.place), g.value, g.err, g.iterations]]
    return EXIT_OK


def cmd_dsum(F: MapPair, args, cfg: RunConfig, rep: Report) -> int:
    lifts = [_lift_arg(t) for t in args.points.split(",") if t.strip()]
    s = dsum(F, lifts, cfg.place, cfg.tol)
    rep.columns = ["N", "dsum", "err"]
    rep.rows = [[len(lifts), s.value, s.err]]
    return EXIT_OK


def cmd_basis_check(F: MapPair, args, cfg: RunConfig, rep: Report) -> int:
    idx = SigmaIndex.of(args.t, args.k, F.d)
    chk = basis_check(F, idx)
    rep.columns = list(chk.as_dict())
    rep.rows = [list(chk.as_dict().values())]
    return EXIT_OK if chk.verified else EXIT_VIOLATION


def cmd_tfd(F: MapPair, args, cfg: RunConfig, rep: Report) -> int:
    n_list = [int(t) for t in args.n.split(",") if t.strip()]
    rows = verify_tfd_inequality(F, cfg.place, n_list, seed=cfg.seed)
    rep.columns = ["n", "estimate", "bound", "slack", "iterations"]
    rep.rows = [[r.n, r.estimate, r.bound, r.slack, r.iterations] for r in rows]
    rep.summary = {"C": effective_C(F, cfg.place), "chain_ok": all(r.chain_ok and r.bound_ok for r in rows)}
    return EXIT_OK if rep.summary["chain_ok"] else EXIT_VIOLATION


def cmd_census(F: MapPair, args, cfg: RunConfig, rep: Report) -> int:
    rep.meta["place"] = "global"
    res = small_point_census(F, args.B, args.theta, cfg.tol, cfg.workers)
    rep.columns = ["a", "b", "hhat", "err", "preperiodic_flag"]
    flag = {True: "true", False: "false", None: "unknown"}
    rep.rows = [[r.point.a, r.point.b, r.height.value, r.height.err, flag[r.preperiodic]] for r in res.rows if r.height.value <= res.theta]
    rep.summary = {
        "window": res.window,
        "count": res.count,
        "min_positive_height": res.min_positive_height,
    }
    return EXIT_OK


def cmd_green_sum(F: MapPair, args, cfg: RunConfig, rep: Report) -> int:
    rep.meta["place"] = "global"
    chk = green_sum_identity_check(F, RationalPoint.parse(args.z), RationalPoint.parse(args.w), cfg.tol)
    rep.columns = ["z", "w", "lhs", "rhs", "residual", "err"]
    rep.rows = [[args.z, args.w, chk.lhs, chk.rhs, chk.residual, chk.err]]
    rep.summary = {"places": ",".join(str(v) for v in chk.places)}
    return EXIT_OK if chk.residual <= max(cfg.tol, chk.err) else EXIT_VIOLATION


def cmd_bound_report(F: MapPair, args, cfg: RunConfig, rep: Report) -> int:
    if args.points:
        lifts = [_lift_arg(t) for t in args.points.split(",") if t.strip()]
    else:
        lifts = random_points(np.random.default_rng(cfg.seed), args.random, cfg.place)
    br = bound_report(F, lifts, cfg.place, cfg.tol)
    d = br.as_dict()
    rep.columns = list(d)
    rep.rows = [list(d.values())]
    bad = not br.nlogn_ok or br.corollary_ok is False or br.technical_ok is False
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_mahler_check(args, cfg: RunConfig, rep: Report) -> int:
    coeffs = [to_rat(t.strip()) for t in args.poly.split(",") if t.strip()]
    margin = mahler_inequality_check(coeffs)
    relative = mahler_inequality_check(coeffs, relative=True)
    disc = discriminant(coeffs)
    rep.columns = ["degree", "mahler", "discriminant", "margin", "relative_margin"]
    rep.rows = [[len(coeffs) - 1, mahler_measure(coeffs), str(disc), margin, relative]]
    return EXIT_OK if relative >= -1e-10 else EXIT_VIOLATION


def cmd_lattes(args, cfg: RunConfig, rep: Report) -> int:
    F = lattes_from_curve(args.a, args.b)
    spec = MapSpec(F.d, F.F1.coeffs, F.F2.coeffs, F.label)
    rep.meta["label"] = F.label
    rep.columns = ["map"]
    rep.rows = [[json.dumps(spec.as_json(), sort_keys=True)]]
    rep.summary = {"resultant": str(F.resultant)}
    return EXIT_OK


MAP_COMMANDS = {
    "resultant": cmd_resultant,
    "height": cmd_height,
    "green": cmd_green,
    "dsum": cmd_dsum,
    "basis-check": cmd_basis_check,
    "tfd": cmd_tfd,
    "census": cmd_census,
    "green-sum": cmd_green_sum,
    "bound-report": cmd_bound_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--place", default="inf", help="inf or p:<prime>")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("tsv", "json"), default="tsv")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--precision", type=int, default=None, help="mantissa bits for archimedean sums")

    with_map = argparse.ArgumentParser(add_help=False, parents=[common])
    with_map.add_argument("--map", "-m", required=True, help="map JSON file ('-' for stdin)")

    parser = argparse.ArgumentParser(prog="dyngreen", description="Dynamical Green's functions and heights on P^1.")
    parser.add_argument("--version", action="version", version=f"dyngreen {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("resultant", parents=[with_map], help="exact homogeneous resultant")
    p = sub.add_parser("height", parents=[with_map], help="local or global dynamical height")
    p.add_argument("--point", required=True, help="lift a:b")
    p.add_argument("--global", dest="global_height", action="store_true", help="canonical height over Q")
    p = sub.add_parser("green", parents=[with_map], help="Green's function of two points")
    p.add_argument("--z", required=True)
    p.add_argument("--w", required=True)
    p = sub.add_parser("dsum", parents=[with_map], help="discriminant sum of a configuration")
    p.add_argument("--points", required=True, help="comma separated lifts a:b")
    p = sub.add_parser("basis-check", parents=[with_map], help="exact determinant check for the special basis")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p = sub.add_parser("tfd", parents=[with_map], help="transfinite diameter estimates")
    p.add_argument("--n", default="2,4,8,16")
    p = sub.add_parser("census", parents=[with_map], help="small canonical heights in a box")
    p.add_argument("--B", type=float, required=True, help="log of the coordinate bound")
    p.add_argument("--theta", type=float, required=True)
    p = sub.add_parser("green-sum", parents=[with_map], help="product-formula identity for two rational points")
    p.add_argument("--z", required=True)
    p.add_argument("--w", required=True)
    p = sub.add_parser("bound-report", parents=[with_map], help="all lower bounds on one configuration")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--points")
    g.add_argument("--random", type=int, help="number of seeded random points")
    p = sub.add_parser("lattes", parents=[common], help="Lattes map of y^2 = x^3 + ax + b")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p = sub.add_parser("mahler-check", parents=[common], help="Mahler measure vs discriminant")
    p.add_argument("--poly", required=True, help="coefficients, leading first")
    return parser


def _read_map(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read map file: {exc}") from exc


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.tol <= 0:
            raise ValidationError("--tol must be positive")
        if args.workers < 1:
            raise ValidationError("--workers must be >= 1")
        cfg = RunConfig(Place.parse(args.place), args.tol, args.seed, args.format, args.precision, args.workers)
        if args.command in MAP_COMMANDS:
            spec, F = parse_map_spec(_read_map(args.map))
            rep = Report(args.command, spec.label, cfg)
            code = MAP_COMMANDS[args.command](F, args, cfg, rep)
        else:
            rep = Report(args.command, "", cfg)
            handler = cmd_lattes if args.command == "lattes" else cmd_mahler_check
            code = handler(args, cfg, rep)
    except ValidationError as exc:
        print(f"dyngreen: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PropertyViolation as exc:
        print(f"dyngreen: property violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except ResourceLimitError as exc:
        print(f"dyngreen: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    out.write(rep.render(cfg.fmt))
    if code == EXIT_VIOLATION:
        print("dyngreen: property violation: a checked inequality failed", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())
