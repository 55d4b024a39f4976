"""Gauge families against closed forms and independent quadrature oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaln

from polarproj.fields import AnisotropicTent, Cone, SmoothBump, TensorTent
from polarproj.gauges import GaugeKind, alpha_np, gauge
from polarproj.numerics import DomainError, QuadConfig, make_sphere_grid

CFG = QuadConfig()
E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


def _disk_cos_moment(p: float) -> float:
    # int_0^{2pi} |cos|^p = 2 sqrt(pi) Gamma((p+1)/2) / Gamma(p/2 + 1)
    return 2.0 * math.sqrt(math.pi) * math.exp(
        gammaln((p + 1.0) / 2.0) - gammaln(p / 2.0 + 1.0))


# --------------------------------------------------------------------------
# gradient-integral family
# --------------------------------------------------------------------------

@pytest.mark.parametrize("p", [1.0, 2.0, 5.0])
def test_lp_cone_planar_closed_form(p):
    # slope is -cos(theta) on the unit disk, so the p-th moment reduces
    # to a Beta integral times the radial factor 1/2
    expect = (0.5 * _disk_cos_moment(p)) ** (1.0 / p)
    gv = gauge(Cone(2, 1.0), GaugeKind.lp(p), E1, CFG)
    assert gv.estimate.converged
    assert gv.value == pytest.approx(expect, rel=1e-8)


def test_lp_cone_p2_is_sqrt_pi_half():
    gv = gauge(Cone(2, 1.0), GaugeKind.lp(2.0), E1, CFG)
    assert gv.value == pytest.approx(math.sqrt(math.pi / 2.0), rel=1e-9)


@pytest.mark.parametrize("p", [1.0, 2.0, 7.0])
def test_lp_cone_line_closed_form(p):
    # on the line the slope is +-1 on a support of length 2
    gv = gauge(Cone(1, 1.0), GaugeKind.lp(p), np.array([1.0]), CFG)
    assert gv.value == pytest.approx(2.0 ** (1.0 / p), rel=1e-9)


def test_lp_tent_p2_closed_form():
    # substituting y = Ax turns the slope moment into the disk moment
    gv = gauge(AnisotropicTent(np.diag([2.0, 1.0])), GaugeKind.lp(2.0), E1, CFG)
    assert gv.value == pytest.approx(math.sqrt(math.pi), rel=1e-6)


def test_lp_is_one_homogeneous():
    f = Cone(2, 1.0)
    base = gauge(f, GaugeKind.lp(3.0), E1, CFG).value
    scaled = gauge(f, GaugeKind.lp(3.0), 2.5 * E1, CFG).value
    assert scaled == pytest.approx(2.5 * base, rel=1e-9)


def test_lp_plus_minus_split_even_field():
    # |v|^p = v_+^p + v_-^p pointwise and even symmetry halves the mass
    f = Cone(2, 1.0)
    p = 3.0
    sym = gauge(f, GaugeKind.lp(p, "sym"), E1, CFG).value
    plus = gauge(f, GaugeKind.lp(p, "plus"), E1, CFG).value
    minus = gauge(f, GaugeKind.lp(p, "minus"), E1, CFG).value
    assert plus == pytest.approx(minus, rel=1e-10)
    assert plus == pytest.approx(sym * 2.0 ** (-1.0 / p), rel=1e-9)


# --------------------------------------------------------------------------
# slope-sup family
# --------------------------------------------------------------------------

def test_linf_cone_every_direction():
    f = Cone(2, 1.0)
    for u in (E1, E2, np.array([0.6, 0.8])):
        gv = gauge(f, GaugeKind.linf(), u, CFG)
        assert gv.value == pytest.approx(1.0, rel=1e-9)


def test_linf_tent_axis_values():
    f = AnisotropicTent(np.diag([2.0, 1.0]))
    assert gauge(f, GaugeKind.linf(), E1, CFG).value == pytest.approx(2.0, rel=1e-9)
    assert gauge(f, GaugeKind.linf(), E2, CFG).value == pytest.approx(1.0, rel=1e-9)


def test_linf_signs_coincide_even_field():
    f = AnisotropicTent(np.diag([2.0, 1.0]))
    vals = [gauge(f, GaugeKind.linf(sign), E1, CFG).value
            for sign in ("sym", "plus", "minus")]
    assert max(vals) - min(vals) < 1e-12


# --------------------------------------------------------------------------
# holder-sup family
# --------------------------------------------------------------------------

@pytest.mark.parametrize("s", [0.3, 0.5, 0.8, 0.99])
def test_frac_linf_cone_is_one(s):
    gv = gauge(Cone(2, 1.0), GaugeKind.frac_linf(s), E1, CFG)
    assert gv.value == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("s", [0.5, 0.8])
def test_frac_linf_tent_matrix_law(s):
    # the quotient sup rescales to the cone sup, leaving exactly |Au|
    a = np.diag([2.0, 1.0])
    f = AnisotropicTent(a)
    assert gauge(f, GaugeKind.frac_linf(s), E1, CFG).value == pytest.approx(
        2.0, rel=1e-6)
    u = np.array([math.cos(0.7), math.sin(0.7)])
    expect = float(np.linalg.norm(a @ u))
    assert gauge(f, GaugeKind.frac_linf(s), u, CFG).value == pytest.approx(
        expect, rel=1e-5)


def test_frac_linf_witness_attains_the_sup():
    f = AnisotropicTent(np.diag([2.0, 1.0]))
    s = 0.5
    gv = gauge(f, GaugeKind.frac_linf(s), E1, CFG)
    assert gv.witness is not None
    x_star, t_star = gv.witness
    quot = abs(f.eval(x_star + t_star * E1) - f.eval(x_star)) / t_star ** s
    assert quot == pytest.approx(gv.value ** s, rel=1e-6)


def test_frac_linf_homogeneous():
    f = Cone(2, 1.0)
    kind = GaugeKind.frac_linf(0.6)
    base = gauge(f, kind, E1, CFG).value
    scaled = gauge(f, kind, 3.0 * E1, CFG).value
    assert scaled == pytest.approx(3.0 * base, rel=1e-6)


# --------------------------------------------------------------------------
# two-point integral family
# --------------------------------------------------------------------------

# independent dblquad oracle values for the planar unit cone at s = 0.8
# (nested adaptive quadrature over the pair integral, 1e-9 internal
# tolerances, exterior tail in closed form)
DBLQUAD_CONE_S08 = {
    16.0: 0.86541497,
    32.0: 0.89043491,
    64.0: 0.92118108,
    128.0: 0.94764832,
}


@pytest.mark.parametrize("p", [16.0, 32.0, 64.0])
def test_frac_lp_cone_matches_dblquad(p):
    gv = gauge(Cone(2, 1.0), GaugeKind.frac_lp(0.8, p), E1, CFG)
    assert gv.value == pytest.approx(DBLQUAD_CONE_S08[p], rel=2e-4)


def test_frac_lp_line_brute_force():
    # trapezoid-grid oracle on the line: h(t) by direct pair sums, the
    # time integral on a log grid with both tails in closed form
    p, s = 4.0, 0.6
    f = Cone(1, 1.0)

    def h_of(t):
        xs = np.linspace(-1.0 - t, 1.0, 8001)
        vals = np.abs(f.eval((xs + t)[:, None]) - f.eval(xs[:, None])) ** p
        return float(np.sum((vals[1:] + vals[:-1]) * np.diff(xs)) / 2.0)

    t0, t1 = 1e-4, 2.0
    ts = np.geomspace(t0, t1, 400)
    hs = np.array([h_of(t) for t in ts])
    integrand = ts ** (-s * p - 1.0) * hs
    core = float(np.sum((integrand[1:] + integrand[:-1]) * np.diff(ts)) / 2.0)
    sp = s * p
    head = 2.0 * t0 ** (p - sp) / (p - sp)          # h ~ 2 t^p below t0
    tail = (4.0 / (p + 1.0)) * t1 ** (-sp) / sp     # h = 2 ||f||_p^p beyond
    oracle = (p * (1.0 - s) * (core + head + tail)) ** (1.0 / sp)

    gv = gauge(f, GaugeKind.frac_lp(s, p), np.array([1.0]), CFG)
    assert gv.value == pytest.approx(oracle, rel=5e-4)


def test_frac_lp_plus_minus_split_even_field():
    f = Cone(2, 1.0)
    s, p = 0.7, 8.0
    sym = gauge(f, GaugeKind.frac_lp(s, p, "sym"), E1, CFG).value
    plus = gauge(f, GaugeKind.frac_lp(s, p, "plus"), E1, CFG).value
    minus = gauge(f, GaugeKind.frac_lp(s, p, "minus"), E1, CFG).value
    assert plus == pytest.approx(minus, rel=1e-10)
    assert plus == pytest.approx(sym * 2.0 ** (-1.0 / (s * p)), rel=1e-6)


def test_frac_lp_homogeneous():
    f = Cone(2, 1.0)
    kind = GaugeKind.frac_lp(0.8, 16.0)
    base = gauge(f, kind, E1, CFG).value
    scaled = gauge(f, kind, 0.5 * E1, CFG).value
    assert scaled == pytest.approx(0.5 * base, rel=1e-8)


def test_frac_lp_error_bound_is_honest():
    gv = gauge(Cone(2, 1.0), GaugeKind.frac_lp(0.8, 32.0), E1, CFG)
    assert gv.estimate.error_bound < 0.01
    assert abs(gv.value - DBLQUAD_CONE_S08[32.0]) <= \
        3.0 * gv.estimate.error_bound + 1e-7


# --------------------------------------------------------------------------
# invariants shared across the families
# --------------------------------------------------------------------------

SKEW_TENT = AnisotropicTent(np.array([[1.5, 0.4], [0.0, 0.8]]))


def test_sym_gauges_are_even_in_direction():
    u = np.array([math.cos(1.1), math.sin(1.1)])
    for kind in (GaugeKind.lp(3.0), GaugeKind.linf(),
                 GaugeKind.frac_linf(0.6), GaugeKind.frac_lp(0.6, 8.0)):
        v = gauge(SKEW_TENT, kind, u, CFG).value
        w = gauge(SKEW_TENT, kind, -u, CFG).value
        assert w == pytest.approx(v, rel=1e-6)


def test_reflecting_the_direction_swaps_plus_and_minus():
    u = np.array([math.cos(0.3), math.sin(0.3)])
    for make in (lambda sg: GaugeKind.lp(3.0, sg),
                 lambda sg: GaugeKind.linf(sg),
                 lambda sg: GaugeKind.frac_linf(0.7, sg),
                 lambda sg: GaugeKind.frac_lp(0.7, 8.0, sg)):
        plus_neg = gauge(SKEW_TENT, make("plus"), -u, CFG).value
        minus_pos = gauge(SKEW_TENT, make("minus"), u, CFG).value
        assert plus_neg == pytest.approx(minus_pos, rel=1e-6)


def test_holder_sup_gauge_s_power_triangle():
    # concavity of r^s on top of the pairwise quotient bound
    s = 0.7
    kind = GaugeKind.frac_linf(s)
    cfg = CFG.replace(x_cells_per_axis=24)
    rng = np.random.default_rng(20240817)
    thetas = rng.uniform(0.0, 2.0 * math.pi, size=12)
    dirs = np.stack([np.cos(thetas), np.sin(thetas)], axis=-1)
    vals = [gauge(SKEW_TENT, kind, u, cfg).value for u in dirs]
    checked = 0
    while checked < 50:
        i, j = rng.integers(0, len(dirs), size=2)
        combined = dirs[i] + dirs[j]
        if np.linalg.norm(combined) < 1e-3:
            continue
        lhs = gauge(SKEW_TENT, kind, combined, cfg).value ** s
        assert lhs <= vals[i] ** s + vals[j] ** s + 1e-5
        checked += 1


def test_slope_sup_gauge_triangle_inequality():
    rng = np.random.default_rng(11)
    for _ in range(50):
        xi, eta = rng.normal(size=(2, 2))
        combined = xi + eta
        if np.linalg.norm(combined) < 1e-3:
            continue
        lhs = gauge(SKEW_TENT, GaugeKind.linf(), combined, CFG).value
        rhs = gauge(SKEW_TENT, GaugeKind.linf(), xi, CFG).value \
            + gauge(SKEW_TENT, GaugeKind.linf(), eta, CFG).value
        assert lhs <= rhs + 1e-8


def test_holder_sup_gauge_envelope_bound():
    # |f(x + tu) - f(x)| <= min(L t, 2 M) caps the quotient sup
    for f in (Cone(2, 1.0), AnisotropicTent(np.diag([2.0, 1.0])),
              SmoothBump(2, 1.0), TensorTent([1.0, 1.0])):
        for s in (0.3, 0.6, 0.9):
            v = gauge(f, GaugeKind.frac_linf(s), E1, CFG).value
            cap = f.lipschitz ** s * (2.0 * f.sup_norm) ** (1.0 - s)
            assert v ** s <= cap + 1e-9


def test_two_point_gauge_uniform_in_p():
    # the same envelope, integrated with crossover at t = 2M/L, gives a
    # closed-form cap that stays bounded as p grows
    f = Cone(2, 1.0)
    s = 0.8
    t_star = 2.0 * f.sup_norm / f.lipschitz
    for p in (8.0, 32.0, 128.0, 256.0):
        sp = s * p
        log_head = (p - 1.0) * math.log(f.lipschitz) \
            + math.log(f.grad_l1_norm) + (p - sp) * math.log(t_star) \
            - math.log(p - sp)
        log_tail = (p - 1.0) * math.log(2.0 * f.sup_norm) \
            + math.log(2.0 * f.l1_norm) - sp * math.log(t_star) \
            - math.log(sp)
        log_cap = (math.log(p * (1.0 - s))
                   + np.logaddexp(log_head, log_tail)) / sp
        v = gauge(f, GaugeKind.frac_lp(s, p), E1, CFG).value
        assert math.log(v) <= log_cap + 1e-9


def test_sup_kinds_decompose_as_max_of_signs():
    u = np.array([math.cos(0.9), math.sin(0.9)])
    for make in (lambda sg: GaugeKind.linf(sg),
                 lambda sg: GaugeKind.frac_linf(0.6, sg)):
        sym = gauge(SKEW_TENT, make("sym"), u, CFG).value
        plus = gauge(SKEW_TENT, make("plus"), u, CFG).value
        minus = gauge(SKEW_TENT, make("minus"), u, CFG).value
        assert sym == pytest.approx(max(plus, minus), abs=1e-8)


# --------------------------------------------------------------------------
# sphere moments and kind validation
# --------------------------------------------------------------------------

@pytest.mark.parametrize("n,p", [(2, 2.0), (2, 4.0), (3, 2.0), (3, 4.0)])
def test_alpha_np_matches_beta_integral_even(n, p):
    # for even p the moment is a polynomial the rules integrate exactly
    grid = make_sphere_grid(n, 360 if n == 2 else 24, seed=0)
    if n == 2:
        expect = _disk_cos_moment(p)
    else:
        # int_{S^2} |u_3|^p = 4 pi / (p + 1)
        expect = 4.0 * math.pi / (p + 1.0)
    assert alpha_np(n, p, grid) == pytest.approx(expect, rel=1e-10)


@pytest.mark.parametrize("p", [1.0, 3.0])
def test_alpha_np_odd_p_converges(p):
    # |cos|^p has kinks at the zeros, so convergence is algebraic
    grid = make_sphere_grid(2, 720, seed=0)
    assert alpha_np(2, p, grid) == pytest.approx(_disk_cos_moment(p), rel=1e-4)


def test_kind_constructors_validate():
    with pytest.raises(DomainError):
        GaugeKind.lp(0.5)
    with pytest.raises(DomainError):
        GaugeKind.frac_lp(1.0, 2.0)
    with pytest.raises(DomainError):
        GaugeKind.frac_lp(0.5, 2.0, "up")
    with pytest.raises(DomainError):
        GaugeKind.frac_linf(0.0)


def test_kind_describe():
    assert GaugeKind.lp(2.0).describe() == "lp,p=2"
    assert GaugeKind.frac_lp(0.5, 8.0, "plus").describe() == "fraclp,p=8,s=0.5,plus"
    assert GaugeKind.linf().describe() == "linf"


def test_gauge_rejects_zero_direction():
    with pytest.raises(DomainError):
        gauge(Cone(2, 1.0), GaugeKind.linf(), np.zeros(2), CFG)
    with pytest.raises(DomainError):
        gauge(Cone(2, 1.0), GaugeKind.linf(), np.array([np.inf, 0.0]), CFG)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 4.0), st.floats(0.0, 2.0 * math.pi))
def test_linf_homogeneity_property(c, theta):
    f = AnisotropicTent(np.diag([2.0, 1.0]))
    u = np.array([math.cos(theta), math.sin(theta)])
    base = gauge(f, GaugeKind.linf(), u, CFG).value
    scaled = gauge(f, GaugeKind.linf(), c * u, CFG).value
    assert scaled == pytest.approx(c * base, rel=1e-8)
