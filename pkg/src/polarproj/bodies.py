"""Star bodies, their radial functions, and dual volume functionals.

A star body is stored either analytically (a 1-homogeneous gauge
callable evaluated on unit directions) or as radii sampled on a sphere
grid.  Sampled bodies interpolate: periodic linear in angle for n = 2,
bilinear in the (polar cosine, azimuth) chart for n = 3, and sign lookup
for n = 1.

The functionals follow the radial calculus on a grid ``G``:

* ``volume(K) = (1/n) sum_G w rho_K^n``
* ``dual_mixed_volume(K, L, q) = (1/n) sum_G w rho_K^(n-q) rho_L^q``
  for ``q`` outside {0, n}, with the accumulation done in the log
  domain so large ``|q|`` cannot overflow
* ``dilation_factor(K, L, s) = sup (rho_K / rho_L)^s``, the smallest
  ``lambda^s`` with ``K`` inside ``lambda L``, refined beyond the grid
  by a bounded 1-D or 2-D polish.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .fields import ScalarField
from .gauges import GaugeKind, gauge
from .numerics import (
    DomainError,
    Estimate,
    QuadConfig,
    SphereGrid,
    make_sphere_grid,
    weighted_logsumexp,
)

__all__ = [
    "StarBody",
    "body_of_field",
    "volume",
    "dual_mixed_volume",
    "dual_mixed_volume_log",
    "dilation_factor",
    "containment_check",
    "random_fourier_body",
    "body_to_json",
    "body_from_json",
    "body_to_csv",
    "body_from_csv",
]


class StarBody:
    """Origin-star-shaped body described by its radial function."""

    def __init__(self, dim: int, label: str = ""):
        self.dim = dim
        self.label = label
        self._unit_gauge: Callable[[np.ndarray], np.ndarray] | None = None
        self.grid: SphereGrid | None = None
        self.radii: np.ndarray | None = None
        self.realization_rel_error: float = 0.0
        self.ball_radius: float | None = None

    # ---- constructors ----

    @classmethod
    def analytic(cls, dim: int, unit_gauge: Callable[[np.ndarray], np.ndarray],
                 label: str = "") -> "StarBody":
        body = cls(dim, label)
        body._unit_gauge = unit_gauge
        return body

    @classmethod
    def ball(cls, dim: int, radius: float = 1.0) -> "StarBody":
        if radius <= 0:
            raise DomainError("radius must be positive")
        body = cls.analytic(dim, lambda d: np.full(d.shape[0], 1.0 / radius),
                            label=f"ball(r={radius:g})")
        body.ball_radius = radius
        return body

    @classmethod
    def ellipsoid(cls, matrix: np.ndarray) -> "StarBody":
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError("matrix must be square")
        return cls.analytic(a.shape[0],
                            lambda d: np.linalg.norm(d @ a.T, axis=-1),
                            label="ellipsoid")

    @classmethod
    def from_samples(cls, grid: SphereGrid, radii: np.ndarray,
                     label: str = "") -> "StarBody":
        radii = np.asarray(radii, dtype=float)
        if radii.shape != (len(grid),):
            raise DomainError("radii must match the grid size")
        if np.any(radii <= 0) or not np.all(np.isfinite(radii)):
            raise DomainError("radii must be positive and finite")
        body = cls(grid.dim, label)
        body.grid = grid
        body.radii = radii
        return body

    @property
    def is_sampled(self) -> bool:
        return self.radii is not None

    # ---- radial function ----

    def radial_units(self, dirs: np.ndarray) -> np.ndarray:
        """Radial function on an array of unit directions, shape (m, n)."""
        dirs = np.asarray(dirs, dtype=float)
        if self._unit_gauge is not None:
            g = np.asarray(self._unit_gauge(dirs), dtype=float)
            if np.any(g <= 0):
                raise DomainError("gauge must be positive on unit directions")
            return 1.0 / g
        return self._interp(dirs)

    def radial(self, xi) -> float:
        xi = np.asarray(xi, dtype=float)
        norm = float(np.linalg.norm(xi))
        if norm == 0.0:
            raise DomainError("radial function needs a nonzero direction")
        return float(self.radial_units(xi[None, :] / norm)[0]) / norm

    def gauge_at(self, xi) -> float:
        return 1.0 / self.radial(xi)

    def _interp(self, dirs: np.ndarray) -> np.ndarray:
        grid, radii = self.grid, self.radii
        assert grid is not None and radii is not None
        if self.dim == 1:
            return np.where(dirs[:, 0] >= 0, radii[-1], radii[0])
        if self.dim == 2:
            node_ang = np.arctan2(grid.nodes[:, 1], grid.nodes[:, 0])
            order = np.argsort(node_ang)
            ang_sorted = node_ang[order]
            rad_sorted = radii[order]
            a = np.arctan2(dirs[:, 1], dirs[:, 0])
            # periodic linear interpolation in angle
            ang_ext = np.concatenate([ang_sorted, [ang_sorted[0] + 2 * math.pi]])
            rad_ext = np.concatenate([rad_sorted, [rad_sorted[0]]])
            a_mod = np.mod(a - ang_sorted[0], 2 * math.pi) + ang_sorted[0]
            return np.interp(a_mod, ang_ext, rad_ext)
        if self.dim == 3 and grid.scheme == "product_gauss":
            res = grid.resolution
            n_az = 2 * res
            z_rings = grid.nodes[::n_az, 2]
            r_mat = radii.reshape(res, n_az)
            z = np.clip(dirs[:, 2], z_rings.min(), z_rings.max())
            phi = np.mod(np.arctan2(dirs[:, 1], dirs[:, 0]), 2 * math.pi)
            iz = np.clip(np.searchsorted(z_rings, z) - 1, 0, res - 2)
            tz = (z - z_rings[iz]) / (z_rings[iz + 1] - z_rings[iz])
            dphi = 2 * math.pi / n_az
            fp = phi / dphi
            ip = np.floor(fp).astype(int) % n_az
            tp = fp - np.floor(fp)
            ip1 = (ip + 1) % n_az
            v00 = r_mat[iz, ip]
            v01 = r_mat[iz, ip1]
            v10 = r_mat[iz + 1, ip]
            v11 = r_mat[iz + 1, ip1]
            return ((1 - tz) * ((1 - tp) * v00 + tp * v01)
                    + tz * ((1 - tp) * v10 + tp * v11))
        # nearest node fallback (stochastic grids)
        idx = np.argmax(dirs @ grid.nodes.T, axis=1)
        return radii[idx]

    def interpolation_error_estimate(self) -> float:
        """Crude bound on the radial interpolation error between nodes."""
        if not self.is_sampled:
            return 0.0
        radii = self.radii
        assert radii is not None and self.grid is not None
        if self.dim == 1 or len(radii) < 3:
            return 0.0
        if self.dim == 2:
            second = np.abs(np.diff(np.concatenate([radii, radii[:2]]), n=2))
            return float(second.max()) / 8.0
        if self.dim == 3 and self.grid.scheme == "product_gauss":
            res = self.grid.resolution
            r_mat = radii.reshape(res, 2 * res)
            s_az = np.abs(np.diff(np.concatenate([r_mat, r_mat[:, :2]], axis=1),
                                  n=2, axis=1)).max() if 2 * res >= 3 else 0.0
            s_po = np.abs(np.diff(r_mat, n=2, axis=0)).max() if res >= 3 else 0.0
            return (float(s_az) + float(s_po)) / 8.0
        return float(np.abs(np.diff(radii)).max())

    def __repr__(self) -> str:  # pragma: no cover
        tag = "sampled" if self.is_sampled else "analytic"
        return f"StarBody({tag}, dim={self.dim}, label={self.label!r})"


# --------------------------------------------------------------------------
# realization from a field and gauge kind
# --------------------------------------------------------------------------

def body_of_field(f: ScalarField, kind: GaugeKind, grid: SphereGrid,
                  cfg: QuadConfig | None = None, label: str = "") -> StarBody:
    """Realize the unit body of a field's gauge on a sphere grid.

    Radii are reciprocals of the gauge at each node.  For radially
    symmetric fields every direction gives the same gauge value, so a
    single evaluation is broadcast; this is exact, not an approximation,
    and is what makes dense realizations of radial fields cheap.
    """
    if cfg is None:
        cfg = QuadConfig()
    if grid.dim != f.dim:
        raise DomainError("grid dimension does not match the field")
    label = label or f"{f.kind}:{kind.describe()}"
    if f.radially_symmetric:
        gv = gauge(f, kind, grid.nodes[0], cfg)
        radii = np.full(len(grid), 1.0 / gv.value)
        rel = gv.estimate.error_bound / gv.value if gv.value else 0.0
    else:
        vals = np.empty(len(grid))
        rel = 0.0
        for i, node in enumerate(grid.nodes):
            gv = gauge(f, kind, node, cfg)
            vals[i] = gv.value
            if gv.value:
                rel = max(rel, gv.estimate.error_bound / gv.value)
        radii = 1.0 / vals
    body = StarBody.from_samples(grid, radii, label)
    body.realization_rel_error = rel
    return body


# --------------------------------------------------------------------------
# volume functionals
# --------------------------------------------------------------------------

def _radii_on(body: StarBody, grid: SphereGrid) -> np.ndarray:
    if body.is_sampled and body.grid is grid:
        assert body.radii is not None
        return body.radii
    return body.radial_units(grid.nodes)

def volume(body: StarBody, grid: SphereGrid) -> Estimate:
    """Volume ``(1/n) sum w rho^n`` on the given grid."""
    n = body.dim
    if grid.dim != n:
        raise DomainError("grid dimension mismatch")
    rho = _radii_on(body, grid)
    val = float(np.dot(grid.weights, rho ** n)) / n
    if body.is_sampled:
        interp = body.interpolation_error_estimate()
        err = interp * float(np.dot(grid.weights, rho ** (n - 1)))
        err += n * body.realization_rel_error * abs(val)
    else:
        fine = make_sphere_grid(n, grid.resolution * 2, grid.seed)
        rho_f = body.radial_units(fine.nodes)
        val_f = float(np.dot(fine.weights, rho_f ** n)) / n
        err = abs(val - val_f)
        val = val_f
    # deterministic grids carry honest error bounds; stochastic ones do not
    return Estimate(val, err, not grid.is_stochastic)


def dual_mixed_volume_log(body_k: StarBody, body_l: StarBody, q: float,
                          grid: SphereGrid) -> float:
    """log of the dual mixed volume; valid for q outside {0, n}."""
    n = body_k.dim
    if body_l.dim != n or grid.dim != n:
        raise DomainError("dimension mismatch")
    if q in (0.0, float(n)):
        raise DomainError("q must avoid 0 and the dimension")
    rho_k = _radii_on(body_k, grid)
    rho_l = _radii_on(body_l, grid)
    logs = (n - q) * np.log(rho_k) + q * np.log(rho_l)
    return weighted_logsumexp(logs, grid.weights) - math.log(n)


def dual_mixed_volume(body_k: StarBody, body_l: StarBody, q: float,
                      grid: SphereGrid) -> Estimate:
    """Dual mixed volume ``(1/n) sum w rho_K^(n-q) rho_L^q``.

    Reduces to ``volume`` when the two bodies coincide.  The log-domain
    accumulation makes exponents like ``q = -200`` safe; the value is
    exponentiated only at the end.
    """
    n = body_k.dim
    log_val = dual_mixed_volume_log(body_k, body_l, q, grid)
    val = math.exp(log_val)
    rel = 0.0
    for body, power in ((body_k, n - q), (body_l, q)):
        if body.is_sampled:
            rho = _radii_on(body, grid)
            interp = body.interpolation_error_estimate()
            rel += abs(power) * interp / float(rho.min())
            rel += abs(power) * body.realization_rel_error
    if not body_k.is_sampled and not body_l.is_sampled:
        fine = make_sphere_grid(n, grid.resolution * 2, grid.seed)
        log_f = dual_mixed_volume_log(body_k, body_l, q, fine)
        rel = abs(math.expm1(log_f - log_val))
        val = math.exp(log_f)
    err = rel * abs(val)
    return Estimate(val, err, not grid.is_stochastic)


# --------------------------------------------------------------------------
# dilation factor and containment
# --------------------------------------------------------------------------

def _log_ratio_fn(body_k: StarBody, body_l: StarBody):
    def log_ratio(dirs: np.ndarray) -> np.ndarray:
        return (np.log(body_k.radial_units(dirs))
                - np.log(body_l.radial_units(dirs)))
    return log_ratio


def dilation_factor(body_k: StarBody, body_l: StarBody, s: float,
                    grid: SphereGrid) -> tuple[float, np.ndarray]:
    """``sup (rho_K / rho_L)^s`` with the maximizing direction.

    For ``s = 1`` this is the classical smallest dilation of ``L``
    containing ``K``; the power commutes with the sup, so the search is
    done once on the ratio and raised to ``s`` afterwards.
    """
    if not (0.0 < s <= 1.0):
        raise DomainError("s must lie in (0, 1]")
    n = body_k.dim
    if body_l.dim != n or grid.dim != n:
        raise DomainError("dimension mismatch")
    log_ratio = _log_ratio_fn(body_k, body_l)
    vals = log_ratio(grid.nodes)
    i0 = int(np.argmax(vals))
    best = float(vals[i0])
    best_dir = grid.nodes[i0].copy()

    if n == 2:
        theta0 = math.atan2(best_dir[1], best_dir[0])
        span = 2.0 * math.pi / grid.resolution

        def neg(th: float) -> float:
            d = np.array([[math.cos(th), math.sin(th)]])
            return -float(log_ratio(d)[0])

        res = minimize_scalar(neg, bounds=(theta0 - span, theta0 + span),
                              method="bounded", options={"xatol": 1e-12})
        if -res.fun > best:
            best = -float(res.fun)
            best_dir = np.array([math.cos(res.x), math.sin(res.x)])
    elif n == 3:
        z0 = best_dir[2]
        phi0 = math.atan2(best_dir[1], best_dir[0])

        def neg3(zp) -> float:
            z = min(max(zp[0], -1.0), 1.0)
            rho = math.sqrt(max(1.0 - z * z, 0.0))
            d = np.array([[rho * math.cos(zp[1]), rho * math.sin(zp[1]), z]])
            return -float(log_ratio(d)[0])

        out = minimize(neg3, np.array([z0, phi0]), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "disp": False})
        if -out.fun > best:
            best = -float(out.fun)
            z = min(max(out.x[0], -1.0), 1.0)
            rho = math.sqrt(max(1.0 - z * z, 0.0))
            best_dir = np.array([rho * math.cos(out.x[1]),
                                 rho * math.sin(out.x[1]), z])
    return math.exp(s * best), best_dir


def containment_check(body_k: StarBody, body_l: StarBody, lam: float,
                      grid: SphereGrid, slack: float = 1e-10) -> bool:
    """Whether ``K`` is contained in ``lam * L`` on the grid directions."""
    if lam <= 0:
        raise DomainError("lam must be positive")
    rho_k = _radii_on(body_k, grid)
    rho_l = _radii_on(body_l, grid)
    return bool(np.all(rho_k <= lam * rho_l + slack))


# --------------------------------------------------------------------------
# random test bodies
# --------------------------------------------------------------------------

def random_fourier_body(seed: int, coeff_bound: float = 0.3,
                        n_modes: int = 6) -> StarBody:
    """Smooth random planar star body with log-radial Fourier profile.

    ``rho(theta) = exp(sum_k a_k cos(k theta) + b_k sin(k theta))`` with
    coefficients drawn uniformly from ``[-coeff_bound, coeff_bound]``.
    """
    rng = np.random.default_rng(seed)
    a = rng.uniform(-coeff_bound, coeff_bound, n_modes)
    b = rng.uniform(-coeff_bound, coeff_bound, n_modes)
    ks = np.arange(1, n_modes + 1)

    def unit_gauge(dirs: np.ndarray) -> np.ndarray:
        th = np.arctan2(dirs[:, 1], dirs[:, 0])
        log_rho = (np.cos(np.outer(th, ks)) @ a
                   + np.sin(np.outer(th, ks)) @ b)
        return np.exp(-log_rho)

    return StarBody.analytic(2, unit_gauge, label=f"fourier(seed={seed})")


# --------------------------------------------------------------------------
# serialization (sampled bodies)
# --------------------------------------------------------------------------

_FMT = "%.17g"


def body_to_json(body: StarBody) -> str:
    if not body.is_sampled:
        raise DomainError("only sampled bodies serialize")
    assert body.grid is not None and body.radii is not None
    payload = {
        "dim": body.dim,
        "label": body.label,
        "scheme": body.grid.scheme,
        "resolution": body.grid.resolution,
        "seed": body.grid.seed,
        "nodes": [[float(v) for v in row] for row in body.grid.nodes],
        "weights": [float(v) for v in body.grid.weights],
        "radii": [float(v) for v in body.radii],
    }
    return json.dumps(payload, sort_keys=True)


def body_from_json(text: str) -> StarBody:
    data = json.loads(text)
    grid = SphereGrid(
        dim=int(data["dim"]),
        nodes=np.asarray(data["nodes"], dtype=float),
        weights=np.asarray(data["weights"], dtype=float),
        scheme=str(data["scheme"]),
        resolution=int(data["resolution"]),
        seed=data.get("seed"),
    )
    return StarBody.from_samples(grid, np.asarray(data["radii"], dtype=float),
                                 label=data.get("label", ""))


def body_to_csv(body: StarBody) -> str:
    """RFC 4180 table of nodes, weights, and radii at 17 significant digits."""
    if not body.is_sampled:
        raise DomainError("only sampled bodies serialize")
    assert body.grid is not None and body.radii is not None
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow([f"x{i+1}" for i in range(body.dim)] + ["weight", "radius"])
    for node, w, r in zip(body.grid.nodes, body.grid.weights, body.radii):
        writer.writerow([_FMT % v for v in node] + [_FMT % w, _FMT % r])
    return out.getvalue()


def body_from_csv(text: str, scheme: str = "custom",
                  label: str = "") -> StarBody:
    rows = list(csv.reader(io.StringIO(text)))
    header, data = rows[0], rows[1:]
    dim = len(header) - 2
    arr = np.asarray([[float(v) for v in row] for row in data])
    grid = SphereGrid(dim=dim, nodes=arr[:, :dim], weights=arr[:, dim],
                      scheme=scheme, resolution=len(data))
    return StarBody.from_samples(grid, arr[:, dim + 1], label=label)
