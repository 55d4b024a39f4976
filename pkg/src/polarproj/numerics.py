"""Quadrature, sphere grids, log-domain reductions, and sup searches.

Every routine in this module returns plain floats or :class:`Estimate`
records and is deterministic for a fixed configuration and seed.  The
heavy numerical work elsewhere in the package (gauge evaluation, body
realization, limit sweeps) is expressed in terms of these primitives so
that accuracy bookkeeping happens in one place.

Conventions
-----------
* 1-D integrands passed to :func:`integrate_1d_adaptive` must accept a
  numpy array of abscissae and return an array of values.
* Power means of nonnegative quantities are handled through logarithms;
  see :func:`log_domain_mean_p`.  This is what keeps exponents of order
  ``p * log(value)`` (with ``p`` up to 1024) finite.
* The weighted singular integral ``int_0^inf t^(-s*p-1) h(t) dt`` is
  evaluated in the substitution ``u = log t``, where the integrand
  becomes ``exp(-s*p*u) * h(e^u)`` and both tails decay exponentially.
"""

from __future__ import annotations

import dataclasses
import heapq
import json
import math
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

__all__ = [
    "DomainError",
    "Estimate",
    "QuadConfig",
    "SphereGrid",
    "LogIntegral",
    "integrate_1d_adaptive",
    "singular_t_integral",
    "singular_t_integral_log",
    "cubature_support",
    "box_gauss_nodes",
    "log_domain_mean_p",
    "weighted_logsumexp",
    "sup_search",
    "make_sphere_grid",
    "sphere_area",
    "ball_volume",
]


class DomainError(ValueError):
    """Raised when an operation is evaluated outside its domain."""


# --------------------------------------------------------------------------
# result and configuration records
# --------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class Estimate:
    """A numerical value together with an error bound.

    Attributes
    ----------
    value : float
        Best available approximation.
    error_bound : float
        Nonnegative bound (possibly heuristic) on ``|value - exact|``.
    converged : bool
        True when ``error_bound <= max(rel_tol * |value|, abs_tol)`` for
        the tolerances the producing routine was configured with.
    """

    value: float
    error_bound: float
    converged: bool

    def __float__(self) -> float:
        return float(self.value)

    def within(self, rel_tol: float, abs_tol: float) -> bool:
        return self.error_bound <= max(rel_tol * abs(self.value), abs_tol)


@dataclasses.dataclass(frozen=True)
class QuadConfig:
    """Tolerances and resolutions shared by the quadrature stack.

    ``t_split`` is the pivot separating the singular region near t = 0
    from the far region in weighted time integrals.  ``x_cells_per_axis``
    controls both the composite cubature grids over supports and the
    coarse stage of :func:`sup_search`.
    """

    rel_tol: float = 1e-7
    abs_tol: float = 1e-12
    t_split: float = 1.0
    max_subdivisions: int = 60
    x_cells_per_axis: int = 64
    seed: int = 1234

    def __post_init__(self) -> None:
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.t_split <= 0:
            raise DomainError("t_split must be positive")
        if self.max_subdivisions < 1 or self.x_cells_per_axis < 2:
            raise DomainError("subdivision and cell counts out of range")

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "QuadConfig":
        data = json.loads(text)
        return cls(**data)

    def replace(self, **kw) -> "QuadConfig":
        return dataclasses.replace(self, **kw)


@dataclasses.dataclass(frozen=True)
class SphereGrid:
    """Nodes and weights for integration over the unit sphere S^(n-1).

    ``sum(weights)`` equals the sphere area exactly (to roundoff) for the
    deterministic schemes.  ``scheme`` records how the nodes were built:
    ``"signs"`` (n = 1), ``"equiangular"`` (n = 2), ``"product_gauss"``
    (n = 3) or ``"montecarlo"`` (n >= 4, seeded).
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    resolution: int
    seed: int | None = None

    def __len__(self) -> int:
        return self.nodes.shape[0]

    @property
    def is_stochastic(self) -> bool:
        return self.scheme == "montecarlo"


class LogIntegral(NamedTuple):
    """Log-domain integral result: ``exp(log_value)`` is the integral."""

    log_value: float
    rel_error: float
    converged: bool


# --------------------------------------------------------------------------
# Gauss-Kronrod 7/15 adaptive quadrature
# --------------------------------------------------------------------------

# Abscissae of the 15-point Kronrod rule on [-1, 1] (nonnegative half;
# odd-indexed entries are the embedded 7-point Gauss nodes).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])

_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])

_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-node table on [-1, 1].
_KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_WEIGHTS_SPARSE = np.zeros(15)
_GAUSS_WEIGHTS_SPARSE[1:15:2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(g: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> tuple[float, float]:
    """One Gauss-Kronrod 7/15 panel; returns (integral, error estimate)."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = center + half * _KRONROD_NODES
    y = np.asarray(g(x), dtype=float)
    ik = half * float(np.dot(_KRONROD_WEIGHTS, y))
    ig = half * float(np.dot(_GAUSS_WEIGHTS_SPARSE, y))
    diff = abs(ik - ig)
    # standard QUADPACK-style sharpened error estimate
    scale = float(np.dot(_KRONROD_WEIGHTS, np.abs(y))) * half
    if scale > 0.0 and diff > 0.0:
        err = scale * min(1.0, (200.0 * diff / scale) ** 1.5)
    else:
        err = diff
    return ik, max(err, abs(ik) * np.finfo(float).eps * 50.0)


def integrate_1d_adaptive(
    g: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadConfig,
    initial_panels: int = 1,
) -> Estimate:
    """Adaptive bisection with an embedded Gauss-Kronrod 7/15 rule.

    The worst panel (largest local error) is bisected until the summed
    error meets ``max(rel_tol * |I|, abs_tol)`` or the subdivision budget
    ``cfg.max_subdivisions`` is exhausted.  Endpoint behavior such as an
    integrable singularity at ``a`` is handled by the open rule: panel
    endpoints are never evaluated.
    """
    if not (b > a):
        raise DomainError("integration interval must have b > a")
    initial_panels = max(1, int(initial_panels))
    edges = np.linspace(a, b, initial_panels + 1)
    heap: list[tuple[float, float, float, float]] = []
    total = 0.0
    total_err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _gk15(g, lo, hi)
        total += val
        total_err += err
        heapq.heappush(heap, (-err, lo, hi, val))

    splits = 0
    while splits < cfg.max_subdivisions:
        if total_err <= max(cfg.rel_tol * abs(total), cfg.abs_tol):
            break
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # interval exhausted at machine precision
            heapq.heappush(heap, (neg_err, lo, hi, val))
            break
        v1, e1 = _gk15(g, lo, mid)
        v2, e2 = _gk15(g, mid, hi)
        total += v1 + v2 - val
        total_err += e1 + e2 - (-neg_err)
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        splits += 1

    converged = total_err <= max(cfg.rel_tol * abs(total), cfg.abs_tol)
    return Estimate(total, total_err, converged)


# --------------------------------------------------------------------------
# log-domain reductions
# --------------------------------------------------------------------------

def weighted_logsumexp(logs: np.ndarray, weights: np.ndarray) -> float:
    """``log(sum_i w_i * exp(logs_i))`` without overflow.

    Entries with ``logs = -inf`` or zero weight are ignored.  Returns
    ``-inf`` when every contribution vanishes.
    """
    logs = np.asarray(logs, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if logs.shape != weights.shape:
        raise DomainError("logs and weights must have matching shapes")
    if np.any(weights < 0):
        raise DomainError("weights must be nonnegative")
    mask = np.isfinite(logs) & (weights > 0)
    if not mask.any():
        return -math.inf
    logs = logs[mask]
    weights = weights[mask]
    m = float(logs.max())
    return m + math.log(float(np.dot(weights, np.exp(logs - m))))


def log_domain_mean_p(samples: Sequence[tuple[float, float]], p: float) -> float:
    """Log of the weighted p-th power mean, computed stably.

    ``samples`` is a sequence of ``(log_value, weight)`` pairs with
    nonnegative weights.  Returns ``(1/p) * log(sum_i w_i * v_i^p)``
    where ``v_i = exp(log_value_i)``.  Safe for ``p`` up to at least
    1024 because the only exponentiation happens after subtracting the
    running maximum of ``p * log_value``.
    """
    if p <= 0:
        raise DomainError("p must be positive")
    arr = np.asarray(list(samples), dtype=float)
    if arr.size == 0:
        raise DomainError("empty sample list")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError("samples must be (log_value, weight) pairs")
    logs = arr[:, 0] * p
    return weighted_logsumexp(logs, arr[:, 1]) / p


# --------------------------------------------------------------------------
# weighted singular time integral
# --------------------------------------------------------------------------

def _tail_exponents(p: float, s: float, lipschitz: float, sup_norm: float,
                    c_x: float, cfg: QuadConfig) -> tuple[float, float, float, float]:
    """Truncation points (as u = log t) and the log tail bounds at them.

    The envelope below the pivot is ``h(t) <= (L t)^p * c_x`` and above it
    ``h(t) <= (2 M)^p * c_x``; integrating them against ``t^(-s*p-1)``
    gives closed-form brackets
    ``L^p c_x t_min^(p(1-s)) / (p(1-s))`` and
    ``(2M)^p c_x T^(-s*p) / (s*p)``.  The cut points solve
    ``bracket = abs_tol``.
    """
    rate_lo = p * (1.0 - s)          # growth rate below the pivot, in u
    rate_hi = s * p                  # decay rate above the pivot
    log_l = math.log(lipschitz)
    log_2m = math.log(2.0 * sup_norm)
    log_cx = math.log(c_x)
    log_tol = math.log(cfg.abs_tol)
    u_min = (log_tol + math.log(rate_lo) - p * log_l - log_cx) / rate_lo
    u_max = (p * log_2m + log_cx - math.log(rate_hi) - log_tol) / rate_hi
    log_tail_lo = p * log_l + log_cx + rate_lo * u_min - math.log(rate_lo)
    log_tail_hi = p * log_2m + log_cx - rate_hi * u_max - math.log(rate_hi)
    return u_min, u_max, log_tail_lo, log_tail_hi


def singular_t_integral_log(
    log_h_u: Callable[[np.ndarray], np.ndarray],
    p: float,
    s: float,
    lipschitz: float,
    sup_norm: float,
    cfg: QuadConfig,
    c_x: float = 1.0,
    constant_beyond: float | None = None,
) -> LogIntegral:
    """Log-domain core of :func:`singular_t_integral`.

    ``log_h_u(u)`` must return ``log h(e^u)`` elementwise; values of
    ``-inf`` mark regions where ``h`` vanishes.  When ``constant_beyond``
    is given, ``h`` is taken to be exactly constant for ``t`` at or above
    that point (for two-point differences this happens once the shifted
    and unshifted supports are disjoint) and that tail is added in closed
    form instead of being integrated numerically.
    """
    if p < 1:
        raise DomainError("p must be at least 1")
    if not (0.0 < s < 1.0):
        raise DomainError("s must lie in (0, 1)")
    if p * (1.0 - s) <= 0:
        raise DomainError("p * (1 - s) must be positive")
    if lipschitz <= 0 or sup_norm <= 0 or c_x <= 0:
        raise DomainError("envelope constants must be positive")

    u_min, u_max, log_tail_lo, log_tail_hi = _tail_exponents(
        p, s, lipschitz, sup_norm, c_x, cfg)

    exact_tail_log = -math.inf
    if constant_beyond is not None:
        if constant_beyond <= 0:
            raise DomainError("constant_beyond must be positive")
        u_cut = math.log(constant_beyond)
        if u_cut < u_max:
            log_h_cut = float(log_h_u(np.array([u_cut]))[0])
            if math.isfinite(log_h_cut):
                exact_tail_log = log_h_cut - s * p * u_cut - math.log(s * p)
            u_max = u_cut
            log_tail_hi = -math.inf
    if u_max <= u_min:
        # envelope windows collapsed; everything is inside the brackets
        return LogIntegral(-math.inf, math.inf, False)

    def integrand_log(u: np.ndarray) -> np.ndarray:
        return -s * p * u + np.asarray(log_h_u(u), dtype=float)

    probe = np.linspace(u_min, u_max, 65)
    probe_log = integrand_log(probe)
    finite = probe_log[np.isfinite(probe_log)]
    if finite.size == 0 and not math.isfinite(exact_tail_log):
        return LogIntegral(-math.inf, 0.0, True)
    shift = float(finite.max()) if finite.size else exact_tail_log

    def shifted(u: np.ndarray) -> np.ndarray:
        out = integrand_log(np.asarray(u, dtype=float)) - shift
        return np.exp(np.clip(out, -745.0, 50.0))

    width = u_max - u_min
    panels = int(min(64, max(4, math.ceil(width / 15.0))))
    quad = integrate_1d_adaptive(shifted, u_min, u_max, cfg, initial_panels=panels)

    # assemble value = exp(shift) * quad.value + exact tail
    pieces_log = [shift + math.log(quad.value)] if quad.value > 0 else []
    if math.isfinite(exact_tail_log):
        pieces_log.append(exact_tail_log)
    if not pieces_log:
        return LogIntegral(-math.inf, 0.0, True)
    m = max(pieces_log)
    log_value = m + math.log(sum(math.exp(q - m) for q in pieces_log))

    err_pieces = [shift + math.log(quad.error_bound) if quad.error_bound > 0 else -math.inf,
                  log_tail_lo, log_tail_hi]
    m_err = max(err_pieces)
    if math.isfinite(m_err):
        log_err = m_err + math.log(sum(math.exp(q - m_err) for q in err_pieces
                                       if math.isfinite(q)))
        rel_error = math.exp(min(log_err - log_value, 700.0))
    else:
        log_err = -math.inf
        rel_error = 0.0
    converged = quad.converged and (rel_error <= cfg.rel_tol
                                    or log_err <= math.log(cfg.abs_tol))
    return LogIntegral(log_value, rel_error, converged)


def singular_t_integral(
    h: Callable[[np.ndarray], np.ndarray],
    p: float,
    s: float,
    lipschitz: float,
    sup_norm: float,
    cfg: QuadConfig,
    c_x: float = 1.0,
    constant_beyond: float | None = None,
) -> Estimate:
    """Evaluate ``int_0^inf t^(-s*p-1) h(t) dt`` with tail bracketing.

    ``h`` must be vectorized, nonnegative, and satisfy the two envelopes
    ``h(t) <= (lipschitz * t)^p * c_x`` and
    ``h(t) <= (2 * sup_norm)^p * c_x``.  The quadrature window
    ``[t_min, T]`` is chosen so both envelope tails fall below
    ``cfg.abs_tol``; those brackets are included in ``error_bound``.
    Raises :class:`DomainError` when ``p (1 - s) <= 0``, i.e. at s = 1.
    """
    def log_h_u(u: np.ndarray) -> np.ndarray:
        t = np.exp(np.asarray(u, dtype=float))
        vals = np.asarray(h(t), dtype=float)
        if np.any(vals < 0):
            raise DomainError("h must be nonnegative")
        with np.errstate(divide="ignore"):
            return np.log(vals)

    res = singular_t_integral_log(log_h_u, p, s, lipschitz, sup_norm, cfg,
                                  c_x=c_x, constant_beyond=constant_beyond)
    if res.log_value == -math.inf:
        return Estimate(0.0, 0.0, True)
    value = math.exp(res.log_value)
    return Estimate(value, res.rel_error * value, res.converged)


# --------------------------------------------------------------------------
# cubature over supports
# --------------------------------------------------------------------------

_GL3_NODES, _GL3_WEIGHTS = np.polynomial.legendre.leggauss(3)


def box_gauss_nodes(bounds: Sequence[tuple[float, float]],
                    cells: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite 3-point Gauss-Legendre product grid over a box.

    ``bounds`` lists ``(lo, hi)`` per axis; each axis is split into
    ``cells`` equal cells carrying a 3-point Gauss rule.  Returns
    ``(nodes, weights)`` with nodes of shape ``(N, d)``.  Kinks of the
    integrands used in this package lie on cell boundaries or curves of
    measure zero, which the open rule never samples exactly.
    """
    if cells < 1:
        raise DomainError("cells must be positive")
    axes = []
    wts = []
    for lo, hi in bounds:
        if not hi > lo:
            raise DomainError("degenerate box axis")
        edges = np.linspace(lo, hi, cells + 1)
        half = 0.5 * (edges[1] - edges[0])
        centers = 0.5 * (edges[:-1] + edges[1:])
        pts = (centers[:, None] + half * _GL3_NODES[None, :]).ravel()
        w = np.tile(half * _GL3_WEIGHTS, cells)
        axes.append(pts)
        wts.append(w)
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weight = wts[0]
    for w in wts[1:]:
        weight = np.multiply.outer(weight, w)
    return nodes, weight.ravel()


def _cells_for_dim(cfg: QuadConfig, n: int) -> int:
    # keep n = 3 tensor grids at a tractable node count
    return cfg.x_cells_per_axis if n <= 2 else min(cfg.x_cells_per_axis, 20)


def cubature_support(g: Callable[[np.ndarray], np.ndarray], radius: float,
                     n: int, cfg: QuadConfig) -> Estimate:
    """Integrate ``g`` over the box ``[-radius, radius]^n``.

    For n <= 3 a composite Gauss grid is evaluated at two refinement
    levels; the Richardson-extrapolated fine value is returned with
    ``|fine - coarse|`` as the error bound.  For n >= 4 a seeded Sobol
    rule is used and the result is flagged ``converged=False``: the
    refinement-ratio bound is then only indicative.
    """
    if n < 1:
        raise DomainError("dimension must be at least 1")
    if radius <= 0:
        raise DomainError("radius must be positive")
    bounds = [(-radius, radius)] * n
    if n <= 3:
        cells = _cells_for_dim(cfg, n)
        coarse_cells = max(1, cells // 2)
        vals = []
        for c in (coarse_cells, cells):
            nodes, wts = box_gauss_nodes(bounds, c)
            vals.append(float(np.dot(wts, np.asarray(g(nodes), dtype=float))))
        coarse, fine = vals
        extrap = fine + (fine - coarse) / 3.0
        err = abs(fine - coarse)
        converged = err <= max(cfg.rel_tol * abs(extrap), cfg.abs_tol)
        return Estimate(extrap, err, converged)

    from scipy.stats import qmc

    sampler = qmc.Sobol(d=n, scramble=True, seed=cfg.seed)
    m = 16  # 2^16 points, then one refinement doubling
    pts = sampler.random_base2(m=m + 1)
    lo = np.full(n, -radius)
    scale = np.full(n, 2.0 * radius)
    x = lo + pts * scale
    vol = float(np.prod(scale))
    y = np.asarray(g(x), dtype=float)
    half = float(np.mean(y[: 2 ** m])) * vol
    full = float(np.mean(y)) * vol
    return Estimate(full, abs(full - half), False)


# --------------------------------------------------------------------------
# sup search
# --------------------------------------------------------------------------

def sup_search(
    g: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x_box: Sequence[tuple[float, float]],
    t_range: tuple[float, float],
    cfg: QuadConfig,
    t_resolution: int = 256,
    refine_starts: int = 8,
) -> tuple[float, tuple[np.ndarray, float]]:
    """Maximize ``g(x, t)`` over a box in x and a positive t interval.

    Stage one scans a deterministic coarse grid: cell centers with
    ``cfg.x_cells_per_axis`` cells per x axis and ``t_resolution``
    log-spaced t points.  Stage two polishes the ``refine_starts`` best
    grid points with Nelder-Mead in ``(x, log t)``.  The returned value
    is never below the best coarse sample.

    ``g`` must be vectorized: it receives ``x`` of shape ``(m, d)`` (d
    may be zero when ``x_box`` is empty) and ``t`` of shape ``(m,)``.
    Returns ``(value, (x_star, t_star))``.
    """
    t_lo, t_hi = t_range
    if not (0.0 < t_lo < t_hi):
        raise DomainError("t_range must satisfy 0 < t_lo < t_hi")
    d = len(x_box)
    res = cfg.x_cells_per_axis
    axes = []
    for lo, hi in x_box:
        if not hi > lo:
            raise DomainError("degenerate x_box axis")
        h = (hi - lo) / res
        axes.append(lo + h * (np.arange(res) + 0.5))
    t_pts = np.geomspace(t_lo, t_hi, t_resolution)

    if d:
        grids = np.meshgrid(*axes, indexing="ij")
        x_grid = np.stack([a.ravel() for a in grids], axis=-1)
    else:
        x_grid = np.zeros((1, 0))
    n_x = x_grid.shape[0]

    best_vals = np.full(n_x, -np.inf)
    best_t = np.empty(n_x)
    # chunk over t to bound the peak array size
    chunk = max(1, int(2 ** 22 // max(n_x, 1)))
    for start in range(0, t_resolution, chunk):
        ts = t_pts[start:start + chunk]
        xx = np.repeat(x_grid, ts.size, axis=0)
        tt = np.tile(ts, n_x)
        vals = np.asarray(g(xx, tt), dtype=float).reshape(n_x, ts.size)
        arg = np.argmax(vals, axis=1)
        vmax = vals[np.arange(n_x), arg]
        upd = vmax > best_vals
        best_vals[upd] = vmax[upd]
        best_t[upd] = ts[arg[upd]]

    order = np.argsort(best_vals)[::-1][:refine_starts]
    grid_best = float(best_vals[order[0]])
    x_star = x_grid[order[0]].copy()
    t_star = float(best_t[order[0]])
    best = grid_best

    lo_b = np.array([b[0] for b in x_box])
    hi_b = np.array([b[1] for b in x_box])

    def neg(z: np.ndarray) -> float:
        x = np.clip(z[:d], lo_b, hi_b) if d else np.zeros(0)
        t = math.exp(min(max(z[d], math.log(t_lo)), math.log(t_hi)))
        return -float(g(x[None, :], np.array([t]))[0])

    for idx in order:
        z0 = np.concatenate([x_grid[idx], [math.log(best_t[idx])]])
        val = -math.inf
        for _ in range(3):
            out = minimize(neg, z0, method="Nelder-Mead",
                           options={"xatol": 1e-9, "fatol": 1e-12,
                                    "maxiter": 400 * (d + 1), "disp": False})
            gain = -float(out.fun) - val
            val = max(val, -float(out.fun))
            z0 = out.x
            # restarting rebuilds the simplex; that recovers ridge and
            # corner maxima the first descent stalls short of
            if gain <= 1e-13 * max(abs(val), 1.0):
                break
        if val > best:
            best = val
            x_star = np.clip(z0[:d], lo_b, hi_b) if d else np.zeros(0)
            t_star = math.exp(min(max(z0[d], math.log(t_lo)), math.log(t_hi)))
    return max(best, grid_best), (x_star, t_star)


# --------------------------------------------------------------------------
# sphere grids
# --------------------------------------------------------------------------

def sphere_area(n: int) -> float:
    """Surface measure of S^(n-1); counting measure (total 2) for n = 1."""
    if n < 1:
        raise DomainError("dimension must be at least 1")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def ball_volume(n: int, radius: float = 1.0) -> float:
    return sphere_area(n) / n * radius ** n


def make_sphere_grid(n: int, resolution: int, seed: int | None = None) -> SphereGrid:
    """Build an integration grid on S^(n-1).

    n = 1: the two points {-1, +1} with unit weights.
    n = 2: ``resolution`` equiangular nodes, weights ``2 pi / resolution``.
    n = 3: Gauss-Legendre in the polar cosine (``resolution`` nodes) times
    an equiangular azimuth circle (``2 * resolution`` nodes); weights sum
    to ``4 pi`` to roundoff.
    n >= 4: ``resolution`` seeded uniform points with equal weights; the
    grid is flagged stochastic and downstream estimates built on it must
    not report convergence.
    """
    if n < 1:
        raise DomainError("dimension must be at least 1")
    if resolution < 1:
        raise DomainError("resolution must be positive")
    if n == 1:
        nodes = np.array([[-1.0], [1.0]])
        weights = np.array([1.0, 1.0])
        return SphereGrid(1, nodes, weights, "signs", resolution)
    if n == 2:
        theta = 2.0 * math.pi * np.arange(resolution) / resolution
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        weights = np.full(resolution, 2.0 * math.pi / resolution)
        return SphereGrid(2, nodes, weights, "equiangular", resolution)
    if n == 3:
        z, wz = np.polynomial.legendre.leggauss(resolution)
        n_az = 2 * resolution
        phi = 2.0 * math.pi * np.arange(n_az) / n_az
        zz = np.repeat(z, n_az)
        ww = np.repeat(wz, n_az) * (2.0 * math.pi / n_az)
        pp = np.tile(phi, resolution)
        rho = np.sqrt(np.clip(1.0 - zz ** 2, 0.0, None))
        nodes = np.stack([rho * np.cos(pp), rho * np.sin(pp), zz], axis=-1)
        return SphereGrid(3, nodes, ww, "product_gauss", resolution)
    rng = np.random.default_rng(cfg_seed := (seed if seed is not None else 0))
    raw = rng.standard_normal((resolution, n))
    nodes = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    weights = np.full(resolution, sphere_area(n) / resolution)
    return SphereGrid(n, nodes, weights, "montecarlo", resolution, cfg_seed)
