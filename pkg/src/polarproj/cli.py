"""Command-line front end.

Subcommands: ``gauge`` (evaluate smoothness gauges), ``body`` (realize
and serialize a unit body), ``limits`` (run a (p, s) sweep and write the
table), ``check`` (inequality suites), ``symmetrize`` (emit the
symmetral of a field), ``plot`` (SVG of planar body boundaries).

Exit codes: 0 success, 1 a ``Violated`` inequality verdict, 2 usage or
domain errors, 3 completed with non-converged or degraded results.

All outputs are byte-deterministic for a fixed seed.  ``POLARPROJ_THREADS``
caps worker parallelism; every reduction in the library is an ordered
serial fold, so the cap changes timing only, never bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .asymptotics import SweepSpec, run_sweep
from .bodies import StarBody, body_of_field, body_to_csv, body_to_json, \
    random_fourier_body, volume
from .fields import AnisotropicTent, Cone, ScalarField, SmoothBump, TensorTent, \
    field_from_json, field_to_json
from .gauges import GaugeKind, gauge
from .inequalities import check_dual_mixed_inequality, check_endpoint_isoperimetric, \
    check_polya_szego_gradient, check_polya_szego_holder, check_volume_polya_szego, \
    reports_to_json_lines, reports_to_table
from .numerics import DomainError, QuadConfig, make_sphere_grid

# the CLI favors fast runs: looser than the library default, which a
# --rel-tol flag or config file overrides when accuracy matters
CLI_REL_TOL = 1e-4

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_USAGE = 2
EXIT_DEGRADED = 3

_FMT = "%.17g"


def _threads_cap() -> int:
    raw = os.environ.get("POLARPROJ_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        cap = int(raw)
    except ValueError as exc:
        raise DomainError(f"POLARPROJ_THREADS must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise DomainError("POLARPROJ_THREADS must be at least 1")
    return cap


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise DomainError(f"expected comma-separated numbers, got {text!r}") from exc


def _build_field(args) -> ScalarField:
    if getattr(args, "field_json", None):
        return field_from_json(args.field_json)
    name = getattr(args, "field", None)
    if not name:
        raise DomainError("missing --field (or --field-json)")
    n = args.n
    if name == "cone":
        return Cone(n, args.radius)
    if name == "bump":
        return SmoothBump(n, args.radius)
    if name == "tent":
        vals = _parse_floats(args.matrix) if args.matrix else None
        if vals is None:
            raise DomainError("tent needs --matrix a11,a12,...")
        side = int(round(math.sqrt(len(vals))))
        if side * side != len(vals):
            raise DomainError("--matrix must hold a square matrix")
        return AnisotropicTent(np.asarray(vals).reshape(side, side))
    if name == "tensortent":
        widths = _parse_floats(args.widths) if args.widths else [1.0] * n
        return TensorTent(widths)
    raise DomainError(f"unknown field {name!r}")


def _build_kind(args) -> GaugeKind:
    kind = args.kind
    sign = args.sign
    if kind == "lp":
        if args.p is None:
            raise DomainError("lp needs --p")
        return GaugeKind.lp(args.p, sign)
    if kind == "fraclp":
        if args.p is None or args.s is None:
            raise DomainError("fraclp needs --p and --s")
        return GaugeKind.frac_lp(args.s, args.p, sign)
    if kind == "linf":
        return GaugeKind.linf(sign)
    if kind == "fraclinf":
        if args.s is None:
            raise DomainError("fraclinf needs --s")
        return GaugeKind.frac_linf(args.s, sign)
    raise DomainError(f"unknown kind {args.kind!r}")


def _build_body_ref(spec: str, n: int) -> StarBody:
    name, _, rest = spec.partition(":")
    if name == "ball":
        return StarBody.ball(n, float(rest) if rest else 1.0)
    if name == "ellipse":
        diag = _parse_floats(rest) if rest else [1.0] * n
        if len(diag) != n:
            raise DomainError("ellipse needs one semi-axis factor per dimension")
        return StarBody.ellipsoid(np.diag(diag))
    if name == "fourier":
        if n != 2:
            raise DomainError("fourier bodies are planar")
        return random_fourier_body(int(rest) if rest else 0)
    raise DomainError(f"unknown body {spec!r}")


def _config_from(args) -> QuadConfig:
    merged: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            merged.update(json.load(fh))
    for key, flag in (("rel_tol", "rel_tol"), ("abs_tol", "abs_tol"),
                      ("seed", "seed"), ("x_cells_per_axis", "x_cells"),
                      ("max_subdivisions", "max_subdivisions")):
        val = getattr(args, flag, None)
        if val is not None:
            merged[key] = val
    merged.setdefault("rel_tol", CLI_REL_TOL)
    allowed = {k: merged[k] for k in
               ("rel_tol", "abs_tol", "t_split", "max_subdivisions",
                "x_cells_per_axis", "seed") if k in merged}
    return QuadConfig(**allowed)


def _write_out(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_gauge(args) -> int:
    cfg = _config_from(args)
    f = _build_field(args)
    kind = _build_kind(args)
    lines = []
    all_converged = True
    for spec in args.xi:
        xi = np.asarray(_parse_floats(spec))
        gv = gauge(f, kind, xi, cfg)
        est = gv.estimate
        all_converged = all_converged and est.converged
        row = {
            "direction": [float(v) for v in xi],
            "kind": kind.describe(),
            "value": gv.value,
            "error_bound": est.error_bound,
            "converged": est.converged,
        }
        if gv.witness is not None:
            x_star, t_star = gv.witness
            row["witness"] = {"x": [float(v) for v in np.atleast_1d(x_star)],
                              "t": float(t_star)}
        lines.append(json.dumps(row, sort_keys=True))
    _write_out(args, "\n".join(lines) + "\n")
    return EXIT_OK if all_converged else EXIT_DEGRADED


def cmd_body(args) -> int:
    cfg = _config_from(args)
    f = _build_field(args)
    kind = _build_kind(args)
    grid = make_sphere_grid(f.dim, args.resolution, cfg.seed)
    body = body_of_field(f, kind, grid, cfg)
    if args.format == "csv":
        _write_out(args, body_to_csv(body))
    elif args.format == "json":
        _write_out(args, body_to_json(body) + "\n")
    else:
        raise DomainError("body supports csv or json output")
    est = volume(body, grid)
    print(f"volume {est.value:.12g} +- {est.error_bound:.3g}", file=sys.stderr)
    return EXIT_OK if est.converged else EXIT_DEGRADED


def cmd_limits(args) -> int:
    cfg = _config_from(args)
    f = _build_field(args)
    quantity = {"gauge": "gauge", "volume": "volume",
                "dualmixed": "dual_mixed", "vtilroot": "vtil_root"}.get(args.quantity)
    if quantity is None:
        raise DomainError(f"unknown quantity {args.quantity!r}")
    kwargs: dict = {}
    if quantity == "gauge":
        if not args.xi:
            raise DomainError("gauge sweeps need --xi")
        kwargs["directions"] = _parse_floats(args.xi[0])
    if quantity in ("dual_mixed", "vtil_root"):
        kwargs["body"] = _build_body_ref(args.K or "ball", f.dim)
    if quantity == "dual_mixed":
        if args.q is None:
            raise DomainError("dualmixed needs --q")
        kwargs["q"] = args.q
    if args.p_ladder:
        kwargs["p_ladder"] = tuple(_parse_floats(args.p_ladder))
    if args.s_ladder:
        kwargs["s_ladder"] = tuple(_parse_floats(args.s_ladder))
    if args.resolution:
        kwargs["grid_resolution"] = args.resolution
    spec = SweepSpec(f, quantity=quantity, sign=args.sign, **kwargs)
    result = run_sweep(spec, cfg)
    if args.format == "json":
        _write_out(args, result.to_json() + "\n")
    else:
        _write_out(args, result.to_csv())
    print(f"corner via p-then-s {result.corner_via_p_then_s:.12g} "
          f"(+- {result.corner_bound_p_then_s:.3g}), "
          f"via s-then-p {result.corner_via_s_then_p:.12g} "
          f"(+- {result.corner_bound_s_then_p:.3g}), "
          f"commutation_gap {result.commutation_gap:.3g}", file=sys.stderr)
    for note in result.warnings:
        print(f"warning: {note}", file=sys.stderr)
    return EXIT_DEGRADED if result.degraded else EXIT_OK


def _catalog(n: int) -> list[ScalarField]:
    fields: list[ScalarField] = [Cone(n, 1.0), SmoothBump(n, 1.0)]
    if n == 2:
        fields.append(AnisotropicTent(np.diag([2.0, 1.0])))
        fields.append(TensorTent([1.0, 1.0]))
    return fields


def cmd_check(args) -> int:
    cfg = _config_from(args)
    n = args.n
    s_values = _parse_floats(args.s_values)
    signs = args.signs.split(",")
    suites = ("holder", "gradient", "volume", "endpoint", "dualmixed")
    wanted = suites if args.suite == "all" else (args.suite,)
    for name in wanted:
        if name not in suites:
            raise DomainError(f"unknown suite {name!r}")
    ball = StarBody.ball(n)
    reports = []
    vol_res = 96 if n == 2 else None
    for suite in wanted:
        if suite == "holder":
            for f in _catalog(n):
                for s in s_values:
                    for sign in signs:
                        reports.append(check_polya_szego_holder(f, ball, s, cfg, sign))
        elif suite == "gradient":
            for f in _catalog(n):
                for sign in signs:
                    reports.append(check_polya_szego_gradient(f, ball, cfg, sign))
        elif suite == "volume":
            for f in _catalog(n):
                for s in s_values + [1.0]:
                    for sign in signs:
                        reports.append(check_volume_polya_szego(
                            f, s, cfg, sign, grid_resolution=vol_res))
        elif suite == "endpoint":
            for f in _catalog(n):
                for s in s_values + [1.0]:
                    reports.append(check_endpoint_isoperimetric(
                        f, ball, s, cfg, grid_resolution=vol_res))
        elif suite == "dualmixed":
            if n != 2:
                raise DomainError("the dual-mixed suite uses planar bodies")
            qs = [args.q] if args.q is not None else [-0.5, -2.0, -8.0]
            for i in range(args.pairs):
                u = random_fourier_body(cfg.seed + 2 * i)
                v = random_fourier_body(cfg.seed + 2 * i + 1)
                for q in qs:
                    reports.append(check_dual_mixed_inequality(u, v, q, cfg))
    _write_out(args, reports_to_json_lines(reports))
    print(reports_to_table(reports), file=sys.stderr, end="")
    warn = sum(r.verdict == "ViolatedWithinTolerance" for r in reports)
    if warn:
        print(f"{warn} check(s) violated within tolerance", file=sys.stderr)
    return EXIT_VIOLATED if any(r.violated for r in reports) else EXIT_OK


def cmd_symmetrize(args) -> int:
    f = _build_field(args)
    _write_out(args, field_to_json(f.symmetrize()) + "\n")
    return EXIT_OK


def _svg_path(points: np.ndarray, color: str) -> str:
    cmds = [f"{'M' if i == 0 else 'L'} {x:.3f},{y:.3f}"
            for i, (x, y) in enumerate(points)]
    return (f'<path d="{" ".join(cmds)} Z" fill="none" '
            f'stroke="{color}" stroke-width="2"/>')


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def cmd_plot(args) -> int:
    cfg = _config_from(args)
    if args.format != "svg":
        raise DomainError("plot emits svg only")
    bodies: list[StarBody] = []
    if args.field or args.field_json:
        f = _build_field(args)
        if f.dim != 2:
            raise DomainError("plot draws planar bodies only")
        grid = make_sphere_grid(2, args.resolution, cfg.seed)
        bodies.append(body_of_field(f, _build_kind(args), grid, cfg))
    for spec in args.K or []:
        bodies.append(_build_body_ref(spec, 2))
    if args.unit_circle:
        bodies.append(StarBody.ball(2))
    if not bodies:
        raise DomainError("nothing to plot")
    for body in bodies:
        if body.dim != 2:
            raise DomainError("plot draws planar bodies only")

    theta = 2.0 * math.pi * np.arange(720) / 720
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    outlines = [body.radial_units(dirs) for body in bodies]
    scale = 360.0 / max(float(r.max()) for r in outlines)
    parts = ['<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 800">',
             '<rect width="800" height="800" fill="white"/>']
    for i, rho in enumerate(outlines):
        pts = np.stack([400.0 + scale * rho * dirs[:, 0],
                        400.0 - scale * rho * dirs[:, 1]], axis=-1)
        parts.append(_svg_path(pts, _PALETTE[i % len(_PALETTE)]))
    parts.append("</svg>")
    _write_out(args, "\n".join(parts) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _add_field_args(sub) -> None:
    sub.add_argument("--field", help="catalog field: cone, tent, bump, tensortent")
    sub.add_argument("--field-json", help="serialized field description")
    sub.add_argument("--n", type=int, default=2, help="ambient dimension")
    sub.add_argument("--radius", type=float, default=1.0)
    sub.add_argument("--matrix", help="tent matrix entries, row-major")
    sub.add_argument("--widths", help="tensortent widths")


def _add_kind_args(sub) -> None:
    sub.add_argument("--kind", default="linf",
                     choices=("lp", "fraclp", "linf", "fraclinf"))
    sub.add_argument("--p", type=float)
    sub.add_argument("--s", type=float)
    sub.add_argument("--sign", default="sym", choices=("sym", "plus", "minus"))


def _add_common_args(sub) -> None:
    sub.add_argument("--config", help="JSON config merged under explicit flags")
    sub.add_argument("--rel-tol", dest="rel_tol", type=float)
    sub.add_argument("--abs-tol", dest="abs_tol", type=float)
    sub.add_argument("--max-subdivisions", dest="max_subdivisions", type=int)
    sub.add_argument("--x-cells", dest="x_cells", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarproj",
        description="Smoothness gauges, their unit bodies, and limit sweeps.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("gauge", help="evaluate a gauge at directions")
    _add_field_args(sub)
    _add_kind_args(sub)
    _add_common_args(sub)
    sub.add_argument("--xi", action="append", required=True,
                     help="direction, comma-separated (repeatable)")
    sub.set_defaults(func=cmd_gauge)

    sub = subs.add_parser("body", help="realize a unit body on a sphere grid")
    _add_field_args(sub)
    _add_kind_args(sub)
    _add_common_args(sub)
    sub.add_argument("--resolution", type=int, default=720)
    sub.add_argument("--format", default="csv", choices=("csv", "json"))
    sub.set_defaults(func=cmd_body)

    sub = subs.add_parser("limits", help="run a (p, s) limit sweep")
    _add_field_args(sub)
    _add_common_args(sub)
    sub.add_argument("--quantity", default="gauge",
                     choices=("gauge", "volume", "dualmixed", "vtilroot"))
    sub.add_argument("--sign", default="sym", choices=("sym", "plus", "minus"))
    sub.add_argument("--xi", action="append", help="direction for gauge sweeps")
    sub.add_argument("--K", help="reference body: ball[:r], ellipse:a,b, fourier:seed")
    sub.add_argument("--q", type=float, help="dual mixed volume exponent")
    sub.add_argument("--p-ladder", dest="p_ladder")
    sub.add_argument("--s-ladder", dest="s_ladder")
    sub.add_argument("--resolution", type=int)
    sub.add_argument("--format", default="csv", choices=("csv", "json"))
    sub.set_defaults(func=cmd_limits)

    sub = subs.add_parser("check", help="run inequality suites")
    _add_common_args(sub)
    sub.add_argument("--suite", default="all")
    sub.add_argument("--n", type=int, default=2)
    sub.add_argument("--s-values", dest="s_values", default="0.5,0.8,0.95")
    sub.add_argument("--signs", default="sym,plus,minus")
    sub.add_argument("--q", type=float)
    sub.add_argument("--pairs", type=int, default=25)
    sub.set_defaults(func=cmd_check)

    sub = subs.add_parser("symmetrize", help="emit the symmetral of a field")
    _add_field_args(sub)
    _add_common_args(sub)
    sub.set_defaults(func=cmd_symmetrize)

    sub = subs.add_parser("plot", help="SVG outline of planar bodies")
    _add_field_args(sub)
    _add_kind_args(sub)
    _add_common_args(sub)
    sub.add_argument("--K", action="append",
                     help="extra body outline (repeatable)")
    sub.add_argument("--unit-circle", action="store_true")
    sub.add_argument("--resolution", type=int, default=720)
    sub.add_argument("--format", default="svg")
    sub.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _threads_cap()
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
