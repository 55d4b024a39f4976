"""Double-limit sweeps over the (p, s) parameter grid.

A sweep evaluates one quantity (a gauge value, a realized-body volume, a
dual mixed volume against a fixed body, or the ``q = -sp`` dual-mixed
root) on a ladder of finite ``p`` and ``s < 1`` cells, plus the two
directly computable edges: the ``p = inf`` column from the sup-based
gauges and the ``s = 1`` row from the classical derivative gauges.  The
corner is then estimated twice, once along each edge, and the
discrepancy between the two orders is reported as ``commutation_gap``.

Extrapolation models, fitted exactly on the last three ladder points:

* ``p`` ladders: ``ln v = L + (A + B ln p) / p``.  The gauges carry a
  ``(p (1-s))^(1/p)``-type correction whose expansion has exactly this
  ``ln p / p`` shape; a pure power law fitted to it underestimates the
  limit by more than the acceptance tolerances allow.
* ``s`` ladders: ``v = L + c (1-s)^gamma`` with the rate bracketed and
  solved numerically, falling back to the last value when the sequence
  is constant or non-contracting.

The heuristic error bound on an extrapolated limit is the difference
between the extrapolants of the last two three-point windows.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .bodies import StarBody, body_of_field, dilation_factor, dual_mixed_volume, \
    dual_mixed_volume_log, volume
from .fields import ScalarField
from .gauges import SIGNS, GaugeKind, gauge, _signed as _signed_part
from .numerics import DomainError, QuadConfig, SphereGrid, make_sphere_grid, sup_search

__all__ = [
    "SweepSpec",
    "SweepResult",
    "run_sweep",
    "holder_quotient_sup",
    "extrapolate_p_ladder",
    "extrapolate_s_ladder",
]

DEFAULT_P_LADDER = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0)
DEFAULT_S_LADDER = (0.5, 0.7, 0.8, 0.9, 0.95, 0.99)

QUANTITIES = ("gauge", "volume", "dual_mixed", "vtil_root")

_FMT = "%.17g"


def _label(x: float) -> str:
    return str(int(x)) if x == int(x) else repr(x)


@dataclass
class SweepSpec:
    """What to sweep: the field, the quantity, and the two ladders."""

    field: ScalarField
    quantity: str = "gauge"
    sign: str = "sym"
    p_ladder: tuple[float, ...] = DEFAULT_P_LADDER
    s_ladder: tuple[float, ...] = DEFAULT_S_LADDER
    directions: object = "grid"
    q: float | None = None
    body: StarBody | None = None
    grid_resolution: int | None = None

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise DomainError(f"unknown quantity {self.quantity!r}")
        if self.sign not in SIGNS:
            raise DomainError(f"unknown sign {self.sign!r}")
        self.p_ladder = tuple(float(p) for p in self.p_ladder)
        self.s_ladder = tuple(float(s) for s in self.s_ladder)
        if list(self.p_ladder) != sorted(set(self.p_ladder)) or min(self.p_ladder) < 1:
            raise DomainError("p ladder must be strictly increasing, all >= 1")
        if list(self.s_ladder) != sorted(set(self.s_ladder)):
            raise DomainError("s ladder must be strictly increasing")
        if not (0.0 < self.s_ladder[0] and self.s_ladder[-1] < 1.0):
            raise DomainError("s ladder must lie inside (0, 1)")
        if self.quantity == "gauge":
            if isinstance(self.directions, str):
                raise DomainError("gauge sweeps need one explicit direction")
            dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
            if dirs.shape[0] != 1:
                raise DomainError("gauge sweeps take exactly one direction")
            self.directions = dirs[0]
        if self.quantity in ("dual_mixed", "vtil_root"):
            if self.body is None:
                raise DomainError(f"{self.quantity} sweeps need a reference body")
            if self.body.dim != self.field.dim:
                raise DomainError("reference body dimension mismatch")
        if self.quantity == "dual_mixed":
            if self.q is None or self.q in (0.0, float(self.field.dim)):
                raise DomainError("dual_mixed needs q outside {0, n}")
        if self.quantity == "vtil_root" and self.body is not None:
            probe = make_sphere_grid(self.body.dim, 32, seed=0)
            if not np.all(np.isfinite(self.body.radial_units(probe.nodes))):
                raise DomainError("vtil_root needs a bounded reference body")

    def resolution(self) -> int:
        if self.grid_resolution is not None:
            return self.grid_resolution
        return {1: 1, 2: 720, 3: 48}.get(self.field.dim, 256)


@dataclass
class SweepResult:
    """Filled (p, s) table with edges, corner estimates, and error bounds.

    ``table`` has one extra row (``p = inf``) and one extra column
    (``s = 1``); ``errors``, ``converged`` and ``suspect`` are aligned
    with it cell-for-cell.
    """

    quantity: str
    sign: str
    p_ladder: tuple[float, ...]
    s_ladder: tuple[float, ...]
    table: np.ndarray
    errors: np.ndarray
    converged: np.ndarray
    suspect: np.ndarray
    edge_p_limits: np.ndarray
    edge_p_bounds: np.ndarray
    edge_s_limits: np.ndarray
    edge_s_bounds: np.ndarray
    corner_via_p_then_s: float
    corner_bound_p_then_s: float
    corner_via_s_then_p: float
    corner_bound_s_then_p: float
    commutation_gap: float
    degraded: bool
    warnings: list[str] = dataclass_field(default_factory=list)

    @property
    def corner_direct(self) -> float:
        return float(self.table[-1, -1])

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\r\n")
        writer.writerow(["p"] + [_label(s) for s in self.s_ladder] + ["1"])
        labels = [_label(p) for p in self.p_ladder] + ["inf"]
        for label, row in zip(labels, self.table):
            writer.writerow([label] + [_FMT % v for v in row])
        return out.getvalue()

    def to_json(self) -> str:
        payload = {
            "quantity": self.quantity,
            "sign": self.sign,
            "p_ladder": list(self.p_ladder),
            "s_ladder": list(self.s_ladder),
            "table": [[float(v) for v in row] for row in self.table],
            "errors": [[float(v) for v in row] for row in self.errors],
            "converged": [[bool(v) for v in row] for row in self.converged],
            "suspect": [[bool(v) for v in row] for row in self.suspect],
            "edge_p_limits": [float(v) for v in self.edge_p_limits],
            "edge_p_bounds": [float(v) for v in self.edge_p_bounds],
            "edge_s_limits": [float(v) for v in self.edge_s_limits],
            "edge_s_bounds": [float(v) for v in self.edge_s_bounds],
            "corner_via_p_then_s": self.corner_via_p_then_s,
            "corner_bound_p_then_s": self.corner_bound_p_then_s,
            "corner_via_s_then_p": self.corner_via_s_then_p,
            "corner_bound_s_then_p": self.corner_bound_s_then_p,
            "commutation_gap": self.commutation_gap,
            "degraded": self.degraded,
            "warnings": list(self.warnings),
        }
        return json.dumps(payload, sort_keys=True)


# --------------------------------------------------------------------------
# three-point ladder extrapolation
# --------------------------------------------------------------------------

def _log_aware_fit(ps, vs) -> float:
    """Solve ``ln v = L + (A + B ln p)/p`` on three points; return exp(L)."""
    m = np.array([[1.0, 1.0 / p, math.log(p) / p] for p in ps])
    sol = np.linalg.solve(m, np.log(vs))
    return float(math.exp(sol[0]))


def extrapolate_p_ladder(ps, vs) -> tuple[float, float]:
    """Limit of ``v(p)`` as p grows, with a heuristic error bound."""
    ps = [float(p) for p in ps]
    vs = [float(v) for v in vs]
    if len(vs) < 3 or min(vs) <= 0 or not all(map(math.isfinite, vs)):
        return vs[-1], abs(vs[-1] - vs[-2]) if len(vs) > 1 else 0.0
    if max(vs[-3:]) - min(vs[-3:]) < 1e-14 * abs(vs[-1]):
        return vs[-1], 0.0
    limit = _log_aware_fit(ps[-3:], vs[-3:])
    if len(vs) >= 4 and max(vs[-4:-1]) - min(vs[-4:-1]) > 1e-14 * abs(vs[-1]):
        prev = _log_aware_fit(ps[-4:-1], vs[-4:-1])
        bound = abs(limit - prev)
    else:
        bound = abs(limit - vs[-1])
    return limit, bound


def _power_fit(zs, vs) -> float | None:
    """Fit ``v = L + c z^gamma`` on three points with z decreasing to 0."""
    z1, z2, z3 = zs
    v1, v2, v3 = vs
    d1, d2 = v1 - v2, v2 - v3
    if abs(d1) < 1e-300 or abs(d2) < 1e-300:
        return None
    ratio = d2 / d1
    if not (0.0 < ratio < 1.0):
        return None

    def mismatch(gamma: float) -> float:
        return (z2 ** gamma - z3 ** gamma) / (z1 ** gamma - z2 ** gamma) - ratio

    lo, hi = 1e-3, 32.0
    try:
        if mismatch(lo) * mismatch(hi) > 0:
            return None
        gamma = brentq(mismatch, lo, hi, xtol=1e-13)
    except ValueError:
        return None
    c = d1 / (z1 ** gamma - z2 ** gamma)
    return float(v3 - c * z3 ** gamma)


def extrapolate_s_ladder(ss, vs) -> tuple[float, float]:
    """Limit of ``v(s)`` as s approaches 1, with a heuristic bound."""
    ss = [float(s) for s in ss]
    vs = [float(v) for v in vs]
    if len(vs) < 2 or not all(map(math.isfinite, vs)):
        return vs[-1], 0.0
    if max(vs) - min(vs) < 1e-14 * max(abs(vs[-1]), 1.0):
        return vs[-1], 0.0
    if len(vs) < 3:
        return vs[-1], abs(vs[-1] - vs[-2])
    zs = [1.0 - s for s in ss]
    limit = _power_fit(zs[-3:], vs[-3:])
    if limit is None:
        return vs[-1], abs(vs[-1] - vs[-2])
    if len(vs) >= 4:
        prev = _power_fit(zs[-4:-1], vs[-4:-1])
        bound = abs(limit - prev) if prev is not None else abs(limit - vs[-1])
    else:
        bound = abs(limit - vs[-1])
    return limit, bound


# --------------------------------------------------------------------------
# sweep driver
# --------------------------------------------------------------------------

def _gauge_kind(spec: SweepSpec, p: float | None, s: float | None) -> GaugeKind:
    if p is None and s is None:
        return GaugeKind.linf(spec.sign)
    if p is None:
        return GaugeKind.frac_linf(s, spec.sign)
    if s is None:
        return GaugeKind.lp(p, spec.sign)
    return GaugeKind.frac_lp(s, p, spec.sign)


def _interp_rel(body: StarBody, grid: SphereGrid) -> float:
    if not body.is_sampled:
        return 0.0
    rho = body.radii if body.grid is grid else body.radial_units(grid.nodes)
    rel = body.interpolation_error_estimate() / float(np.min(rho))
    return rel + body.realization_rel_error


def run_sweep(spec: SweepSpec, cfg: QuadConfig | None = None) -> SweepResult:
    """Fill the (p, s) table for the requested quantity.

    Cells are independent; they are evaluated in a fixed row-major order
    so that repeated runs with the same seed produce identical tables
    regardless of any threading hints in the environment.
    """
    if cfg is None:
        cfg = QuadConfig()
    f = spec.field
    n = f.dim
    np_, ns = len(spec.p_ladder), len(spec.s_ladder)
    needs_grid = spec.quantity != "gauge"
    grid = make_sphere_grid(n, spec.resolution(), cfg.seed) if needs_grid else None

    def cell(p: float | None, s: float | None) -> tuple[float, float, bool]:
        kind = _gauge_kind(spec, p, s)
        if spec.quantity == "gauge":
            gv = gauge(f, kind, spec.directions, cfg)
            return gv.value, gv.estimate.error_bound, gv.estimate.converged
        if spec.quantity == "vtil_root" and p is None:
            # sup-gauge edge: the dual-mixed root degenerates to the
            # s-scaled dilation factor of the reference body
            body = body_of_field(f, kind, grid, cfg)
            val, _ = dilation_factor(spec.body, body, s if s is not None else 1.0, grid)
            rel = _interp_rel(spec.body, grid) + _interp_rel(body, grid)
            return val, rel * val, not grid.is_stochastic
        body = body_of_field(f, kind, grid, cfg)
        if spec.quantity == "volume":
            est = volume(body, grid)
            return est.value, est.error_bound, est.converged
        if spec.quantity == "dual_mixed":
            est = dual_mixed_volume(spec.body, body, spec.q, grid)
            return est.value, est.error_bound, est.converged
        # vtil_root at finite p: q = -s p, s = 1 on the classical row
        s_eff = s if s is not None else 1.0
        q = -s_eff * p
        log_v = dual_mixed_volume_log(spec.body, body, q, grid)
        val = math.exp(log_v / p)
        rel = ((n + abs(q)) * _interp_rel(spec.body, grid)
               + abs(q) * _interp_rel(body, grid)) / p
        return val, rel * val, not grid.is_stochastic

    table = np.empty((np_ + 1, ns + 1))
    errors = np.empty_like(table)
    converged = np.empty(table.shape, dtype=bool)
    p_axis = list(spec.p_ladder) + [None]
    s_axis = list(spec.s_ladder) + [None]
    for i, p in enumerate(p_axis):
        for j, s in enumerate(s_axis):
            v, e, c = cell(p, s)
            table[i, j] = v
            errors[i, j] = e
            converged[i, j] = c

    # a cell is suspect when no positive lower bound survives its own
    # error bar; this is the practical form of the boundedness screen
    suspect = ~np.isfinite(table) | (table <= 0) | (errors >= np.abs(table))

    edge_p_limits = np.empty(ns)
    edge_p_bounds = np.empty(ns)
    for j in range(ns):
        edge_p_limits[j], edge_p_bounds[j] = extrapolate_p_ladder(
            spec.p_ladder, table[:np_, j])
    edge_s_limits = np.empty(np_)
    edge_s_bounds = np.empty(np_)
    for i in range(np_):
        edge_s_limits[i], edge_s_bounds[i] = extrapolate_s_ladder(
            spec.s_ladder, table[i, :ns])

    corner_a, bound_a = extrapolate_s_ladder(spec.s_ladder, table[np_, :ns])
    corner_b, bound_b = extrapolate_p_ladder(spec.p_ladder, table[:np_, ns])

    warnings: list[str] = []
    if np_ >= 3:
        for j in range(ns):
            gaps = np.abs(table[-4:-1, j] - table[np_, j])
            if not np.all(np.diff(gaps) <= 0):
                warnings.append(
                    f"gap to the p edge not monotone at s={spec.s_ladder[j]:g}")
    if ns >= 3:
        for i in range(np_):
            gaps = np.abs(table[i, -4:-1] - table[i, ns])
            if not np.all(np.diff(gaps) <= 0):
                warnings.append(
                    f"gap to the s edge not monotone at p={spec.p_ladder[i]:g}")

    return SweepResult(
        quantity=spec.quantity,
        sign=spec.sign,
        p_ladder=spec.p_ladder,
        s_ladder=spec.s_ladder,
        table=table,
        errors=errors,
        converged=converged,
        suspect=suspect,
        edge_p_limits=edge_p_limits,
        edge_p_bounds=edge_p_bounds,
        edge_s_limits=edge_s_limits,
        edge_s_bounds=edge_s_bounds,
        corner_via_p_then_s=float(corner_a),
        corner_bound_p_then_s=float(bound_a),
        corner_via_s_then_p=float(corner_b),
        corner_bound_s_then_p=float(bound_b),
        commutation_gap=abs(float(corner_a) - float(corner_b)),
        degraded=bool(np.any(~converged) or np.any(suspect)),
        warnings=warnings,
    )


# --------------------------------------------------------------------------
# direct Hoelder quotient sup
# --------------------------------------------------------------------------

def _pair_sup_along(f: ScalarField, step: np.ndarray, s: float,
                    cfg: QuadConfig, sign: str = "sym",
                    t_resolution: int = 256, refine_starts: int = 8
                    ) -> tuple[float, tuple[np.ndarray, float]]:
    """sup over (x, t) of ``signed(f(x + t step) - f(x)) / t^s`` for a step."""
    speed = float(np.linalg.norm(step))
    t_d = 2.0 * f.support_radius / speed
    t_lo = 1e-4 * t_d
    lo = -f.support_box - t_d * np.maximum(step, 0.0)
    hi = f.support_box + t_d * np.maximum(-step, 0.0)

    def q(x: np.ndarray, t: np.ndarray) -> np.ndarray:
        delta = f.eval(x + t[:, None] * step) - f.eval(x)
        return _signed_part(delta, sign) / t ** s

    value, (x_star, t_star) = sup_search(q, list(zip(lo, hi)), (t_lo, t_d), cfg,
                                         t_resolution=t_resolution,
                                         refine_starts=refine_starts)
    # disjoint supports: the signed sup equals the peak height either way
    exterior = f.sup_norm / t_d ** s
    if exterior > value:
        value, x_star, t_star = exterior, -t_d * step, t_d
    return value, (x_star, t_star)


def holder_quotient_sup(f: ScalarField, body: StarBody, s: float,
                        cfg: QuadConfig | None = None, sign: str = "sym"
                        ) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """sup over pairs of ``signed(f(x) - f(y))`` against the body-gauge
    of ``x - y``.

    Scans a direction grid, runs the in-direction (x, t) sup for the
    best candidates at full resolution, and polishes over the direction.
    Must agree with the s-scaled dilation factor of ``body`` relative to
    the sup-gauge body of ``f``; that identity is exercised in the tests.
    """
    if cfg is None:
        cfg = QuadConfig()
    if not (0.0 < s <= 1.0):
        raise DomainError("s must lie in (0, 1]")
    n = f.dim
    if body.dim != n:
        raise DomainError("body dimension mismatch")
    coarse = cfg.replace(x_cells_per_axis=min(cfg.x_cells_per_axis, 12))
    scan = make_sphere_grid(n, {1: 1, 2: 48, 3: 12}.get(n, 64), cfg.seed)
    isotropic = f.radially_symmetric and body.ball_radius is not None

    def along(u: np.ndarray, config: QuadConfig,
              quick: bool = False) -> tuple[float, tuple[np.ndarray, float]]:
        # the step with unit body-gauge: pairs x, x + t*step have
        # body-distance exactly t
        step = u * body.radial_units(u[None, :])[0]
        t_res, starts = (48, 2) if quick else (256, 8)
        val, (x_star, t_star) = _pair_sup_along(f, step, s, config, sign,
                                                t_resolution=t_res,
                                                refine_starts=starts)
        return val, (x_star, x_star + t_star * step)

    if isotropic:
        # every direction gives the same sup: evaluate one
        u0 = np.zeros(n)
        u0[0] = 1.0
        val, pair = along(u0, cfg)
        return float(val), pair

    vals = np.array([along(u, coarse, quick=True)[0] for u in scan.nodes])
    order = np.argsort(vals)[::-1][: (1 if n == 1 else 3)]
    best_val = -math.inf
    best_pair = None
    best_u = None
    for idx in order:
        val, pair = along(scan.nodes[idx], cfg)
        if val > best_val:
            best_val, best_pair, best_u = val, pair, scan.nodes[idx]

    if n == 2:
        theta0 = math.atan2(best_u[1], best_u[0])
        span = 2.0 * math.pi / len(scan)

        def neg(th: float) -> float:
            return -along(np.array([math.cos(th), math.sin(th)]), coarse,
                          quick=True)[0]

        res = minimize_scalar(neg, bounds=(theta0 - span, theta0 + span),
                              method="bounded", options={"xatol": 1e-10})
        u = np.array([math.cos(res.x), math.sin(res.x)])
        val, pair = along(u, cfg)
        if val > best_val:
            best_val, best_pair = val, pair
    return float(best_val), best_pair
