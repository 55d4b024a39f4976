"""Numerical checks of the rearrangement and dual-volume inequalities.

Every checker compares two numerically estimated sides and returns an
:class:`IneqReport` with a four-way verdict:

* ``Holds``: lhs exceeds rhs by more than the equality band.
* ``HoldsWithEquality``: |lhs - rhs| within ``max(2e-3 |lhs|, 1e-6)``.
* ``ViolatedWithinTolerance``: rhs exceeds lhs, but by less than the
  combined numerical error bounds of the two sides; treated as a
  warning, since a true inequality can look violated at this level.
* ``Violated``: rhs exceeds lhs beyond both bands.

The symmetrized comparison field is always the layer-cake rearrangement
from :meth:`ScalarField.symmetrize`, and the symmetrized body is the
ball of equal (numeric) volume.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .asymptotics import holder_quotient_sup
from .bodies import StarBody, body_of_field, dual_mixed_volume_log, volume
from .fields import ScalarField
from .gauges import SIGNS, GaugeKind, gauge
from .numerics import DomainError, QuadConfig, ball_volume, make_sphere_grid

__all__ = [
    "IneqReport",
    "check_polya_szego_holder",
    "check_polya_szego_gradient",
    "check_volume_polya_szego",
    "check_endpoint_isoperimetric",
    "check_dual_mixed_inequality",
    "reports_to_json_lines",
    "reports_to_table",
]

EQUALITY_BAND_REL = 2e-3
EQUALITY_BAND_ABS = 1e-6


@dataclass
class IneqReport:
    name: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    verdict: str
    inputs: dict = dataclass_field(default_factory=dict)

    @property
    def violated(self) -> bool:
        return self.verdict == "Violated"

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "inputs": self.inputs,
        }
        return json.dumps(payload, sort_keys=True)


def _report(name: str, lhs: float, rhs: float, err_bound: float,
            inputs: dict) -> IneqReport:
    margin = lhs - rhs
    band = max(EQUALITY_BAND_REL * abs(lhs), EQUALITY_BAND_ABS)
    if abs(margin) <= band:
        verdict = "HoldsWithEquality"
    elif margin > 0:
        verdict = "Holds"
    elif -margin <= band + err_bound:
        verdict = "ViolatedWithinTolerance"
    else:
        verdict = "Violated"
    return IneqReport(name, float(lhs), float(rhs), float(margin), band,
                      verdict, inputs)


def _field_tag(f: ScalarField) -> dict:
    return {"kind": f.kind, "dim": f.dim, "params": f.params()}


def _resolution(n: int) -> int:
    return {1: 1, 2: 720, 3: 48}.get(n, 256)


def _symmetral_ball(body: StarBody, grid) -> tuple[StarBody, float]:
    """Ball of the same volume as ``body``, plus its relative volume error."""
    est = volume(body, grid)
    n = body.dim
    radius = (est.value / ball_volume(n)) ** (1.0 / n)
    rel = est.error_bound / est.value if est.value else 0.0
    return StarBody.ball(n, radius), rel / n


def _grad_sup_quotient(f: ScalarField, body: StarBody, sign: str,
                       cfg: QuadConfig) -> float:
    """sup over directions of the derivative sup-gauge against the body gauge."""
    n = f.dim
    scan = make_sphere_grid(n, _resolution(n), cfg.seed)
    kind = GaugeKind.linf(sign)

    def quot(u: np.ndarray) -> float:
        return gauge(f, kind, u, cfg).value * float(body.radial_units(u[None, :])[0])

    vals = np.array([quot(u) for u in scan.nodes])
    best = float(vals.max())
    if n == 2:
        from scipy.optimize import minimize_scalar
        i0 = int(np.argmax(vals))
        theta0 = math.atan2(scan.nodes[i0, 1], scan.nodes[i0, 0])
        span = 2.0 * math.pi / len(scan)
        res = minimize_scalar(
            lambda th: -quot(np.array([math.cos(th), math.sin(th)])),
            bounds=(theta0 - span, theta0 + span), method="bounded",
            options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


# --------------------------------------------------------------------------
# checkers
# --------------------------------------------------------------------------

def check_polya_szego_holder(f: ScalarField, body: StarBody, s: float,
                             cfg: QuadConfig | None = None,
                             sign: str = "sym") -> IneqReport:
    """Hoelder-quotient rearrangement inequality: lhs from (f, K), rhs
    from the symmetrized pair (f*, K*)."""
    if cfg is None:
        cfg = QuadConfig()
    if sign not in SIGNS:
        raise DomainError(f"unknown sign {sign!r}")
    grid = make_sphere_grid(body.dim, _resolution(body.dim), cfg.seed)
    lhs, _ = holder_quotient_sup(f, body, s, cfg, sign)
    ball, ball_rel = _symmetral_ball(body, grid)
    f_star = f.symmetrize()
    rhs, _ = holder_quotient_sup(f_star, ball, s, cfg, sign)
    err = 1e-4 * (lhs + rhs) + s * ball_rel * rhs
    return _report(
        f"polya_szego_holder[s={s:g},{sign}]", lhs, rhs, err,
        {"field": _field_tag(f), "body": body.label, "s": s, "sign": sign})


def check_polya_szego_gradient(f: ScalarField, body: StarBody,
                               cfg: QuadConfig | None = None,
                               sign: str = "sym") -> IneqReport:
    """Derivative sup-gauge rearrangement inequality (the s = 1 case)."""
    if cfg is None:
        cfg = QuadConfig()
    if sign not in SIGNS:
        raise DomainError(f"unknown sign {sign!r}")
    grid = make_sphere_grid(body.dim, _resolution(body.dim), cfg.seed)
    lhs = _grad_sup_quotient(f, body, sign, cfg)
    ball, ball_rel = _symmetral_ball(body, grid)
    rhs = _grad_sup_quotient(f.symmetrize(), ball, sign, cfg)
    err = 1e-6 * (lhs + rhs) + ball_rel * rhs
    return _report(
        f"polya_szego_gradient[{sign}]", lhs, rhs, err,
        {"field": _field_tag(f), "body": body.label, "sign": sign})


def check_volume_polya_szego(f: ScalarField, s: float,
                             cfg: QuadConfig | None = None,
                             sign: str = "sym",
                             grid_resolution: int | None = None) -> IneqReport:
    """Volume form: the sup-gauge body of ``f`` has no larger
    ``|.|^(-s/n)`` than the one of its symmetral; ``s = 1`` uses the
    derivative sup body."""
    if cfg is None:
        cfg = QuadConfig()
    if sign not in SIGNS:
        raise DomainError(f"unknown sign {sign!r}")
    if not (0.0 < s <= 1.0):
        raise DomainError("s must lie in (0, 1]")
    n = f.dim
    grid = make_sphere_grid(n, grid_resolution or _resolution(n), cfg.seed)
    kind = GaugeKind.linf(sign) if s == 1.0 else GaugeKind.frac_linf(s, sign)
    vol_f = volume(body_of_field(f, kind, grid, cfg), grid)
    vol_star = volume(body_of_field(f.symmetrize(), kind, grid, cfg), grid)
    lhs = vol_f.value ** (-s / n)
    rhs = vol_star.value ** (-s / n)
    err = (s / n) * (vol_f.error_bound / vol_f.value * lhs
                     + vol_star.error_bound / vol_star.value * rhs)
    return _report(
        f"volume_polya_szego[s={s:g},{sign}]", lhs, rhs, err,
        {"field": _field_tag(f), "s": s, "sign": sign,
         "volume_lhs_body": vol_f.value, "volume_rhs_body": vol_star.value})


def check_endpoint_isoperimetric(f: ScalarField, body: StarBody, s: float,
                                 cfg: QuadConfig | None = None,
                                 grid_resolution: int | None = None) -> IneqReport:
    """Isoperimetric-type bound: the pair sup-quotient against ``body``
    dominates the volume ratio ``(|K| / |sup-gauge body|)^(s/n)``."""
    if cfg is None:
        cfg = QuadConfig()
    if not (0.0 < s <= 1.0):
        raise DomainError("s must lie in (0, 1]")
    n = f.dim
    grid = make_sphere_grid(n, grid_resolution or _resolution(n), cfg.seed)
    if s == 1.0:
        lhs = _grad_sup_quotient(f, body, "sym", cfg)
        kind = GaugeKind.linf()
    else:
        lhs, _ = holder_quotient_sup(f, body, s, cfg)
        kind = GaugeKind.frac_linf(s)
    vol_k = volume(body, grid)
    vol_b = volume(body_of_field(f, kind, grid, cfg), grid)
    rhs = vol_k.value ** (s / n) * vol_b.value ** (-s / n)
    err = (1e-4 * lhs
           + (s / n) * rhs * (vol_k.error_bound / vol_k.value
                              + vol_b.error_bound / vol_b.value))
    return _report(
        f"endpoint_isoperimetric[s={s:g}]", lhs, rhs, err,
        {"field": _field_tag(f), "body": body.label, "s": s,
         "volume_body": vol_k.value, "volume_field_body": vol_b.value})


def check_dual_mixed_inequality(body_u: StarBody, body_v: StarBody, q: float,
                                cfg: QuadConfig | None = None,
                                grid_resolution: int | None = None) -> IneqReport:
    """Negative-exponent dual mixed volume against the volume product.

    Compares in the log domain, so strongly negative ``q`` cannot
    overflow; the report still carries plain values.
    """
    if cfg is None:
        cfg = QuadConfig()
    if q >= 0:
        raise DomainError("the dual mixed volume bound needs q < 0")
    n = body_u.dim
    if body_v.dim != n:
        raise DomainError("dimension mismatch")
    grid = make_sphere_grid(n, grid_resolution or _resolution(n), cfg.seed)
    log_lhs = dual_mixed_volume_log(body_u, body_v, q, grid)
    vu = volume(body_u, grid)
    vv = volume(body_v, grid)
    log_rhs = ((n - q) * math.log(vu.value) + q * math.log(vv.value)) / n
    lhs, rhs = math.exp(log_lhs), math.exp(log_rhs)
    rel = (abs(n - q) / n) * (vu.error_bound / vu.value) \
        + (abs(q) / n) * (vv.error_bound / vv.value)
    return _report(
        f"dual_mixed[q={q:g}]", lhs, rhs, rel * rhs,
        {"U": body_u.label, "V": body_v.label, "q": q})


# --------------------------------------------------------------------------
# report serialization
# --------------------------------------------------------------------------

def reports_to_json_lines(reports: list[IneqReport]) -> str:
    return "\n".join(r.to_json() for r in reports) + "\n"


def reports_to_table(reports: list[IneqReport]) -> str:
    headers = ("name", "lhs", "rhs", "margin", "verdict")
    rows = [(r.name, f"{r.lhs:.9g}", f"{r.rhs:.9g}", f"{r.margin:+.3e}",
             r.verdict) for r in reports]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines) + "\n"
