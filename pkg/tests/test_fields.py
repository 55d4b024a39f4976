"""Field catalog: values, gradients, level-set volumes, rearrangement."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarproj.fields import (
    AnisotropicTent,
    Cone,
    SmoothBump,
    TabulatedRadial,
    TensorTent,
    field_from_json,
    field_to_json,
)
from polarproj.numerics import DomainError, QuadConfig, cubature_support

CFG = QuadConfig()


def _catalog():
    return [
        Cone(1, 1.0),
        Cone(2, 1.0),
        Cone(3, 2.0),
        AnisotropicTent(np.diag([2.0, 1.0])),
        AnisotropicTent(np.array([[1.5, 0.4], [0.0, 0.8]])),
        SmoothBump(2, 1.0),
        SmoothBump(3, 1.5),
        TensorTent([1.0, 1.0]),
        TensorTent([2.0, 0.5]),
    ]


# --------------------------------------------------------------------------
# pointwise values and gradients
# --------------------------------------------------------------------------

def test_cone_values():
    f = Cone(2, 1.0)
    assert f.eval(np.array([0.0, 0.0])) == pytest.approx(1.0)
    assert f.eval(np.array([0.5, 0.0])) == pytest.approx(0.5)
    assert f.eval(np.array([2.0, 0.0])) == 0.0
    assert f.sup_norm == 1.0
    assert f.lipschitz == pytest.approx(1.0)
    assert f.support_radius == pytest.approx(1.0)


def test_cone_scaled_radius():
    f = Cone(2, 2.0)
    # unit peak, slope 1/R
    assert f.eval(np.array([1.0, 0.0])) == pytest.approx(0.5)
    assert f.lipschitz == pytest.approx(0.5)


def test_tent_values():
    f = AnisotropicTent(np.diag([2.0, 1.0]))
    assert f.eval(np.array([0.0, 0.0])) == pytest.approx(1.0)
    # unit sublevel is the ellipse |Ax| <= 1: semi-axes 1/2 and 1
    assert f.eval(np.array([0.5, 0.0])) == pytest.approx(0.0)
    assert f.eval(np.array([0.0, 0.5])) == pytest.approx(0.5)


def test_tent_requires_invertible_matrix():
    with pytest.raises(DomainError):
        AnisotropicTent(np.array([[1.0, 0.0], [2.0, 0.0]]))


def test_bump_is_smooth_at_boundary():
    f = SmoothBump(2, 1.0)
    assert f.eval(np.array([0.0, 0.0])) == pytest.approx(1.0)
    edge = np.array([1.0 - 1e-9, 0.0])
    assert f.eval(edge) < 1e-6
    assert np.linalg.norm(f.grad(edge)) < 1e-4


def test_tensor_tent_product_structure():
    f = TensorTent([2.0, 0.5])
    x = np.array([0.6, 0.1])
    expect = (1.0 - 0.6 / 2.0) * (1.0 - 0.1 / 0.5)
    assert f.eval(x) == pytest.approx(expect)
    assert f.eval(np.array([2.5, 0.0])) == 0.0


@pytest.mark.parametrize("f", _catalog(), ids=lambda f: repr(f))
def test_gradient_matches_finite_differences(f):
    rng = np.random.default_rng(3)
    h = 1e-6
    pts = rng.uniform(-0.3, 0.3, size=(8, f.dim))
    for x in pts:
        g = f.grad(x)
        if not np.all(np.isfinite(g)):
            continue
        for i in range(f.dim):
            e = np.zeros(f.dim)
            e[i] = h
            fd = (f.eval(x + e) - f.eval(x - e)) / (2.0 * h)
            assert g[i] == pytest.approx(fd, abs=5e-5)


# --------------------------------------------------------------------------
# distribution function and norms
# --------------------------------------------------------------------------

def test_cone_distribution():
    f = Cone(2, 1.0)
    assert f.distribution_function(0.25) == pytest.approx(math.pi * 0.75 ** 2)
    assert f.distribution_function(1.0) == pytest.approx(0.0)


def test_tent_distribution():
    a = np.diag([2.0, 1.0])
    f = AnisotropicTent(a)
    # level sets are shrunk copies of the ellipse of area pi/det
    assert f.distribution_function(0.5) == pytest.approx(math.pi * 0.25 / 2.0)


@pytest.mark.parametrize("f", _catalog(), ids=lambda f: repr(f))
def test_distribution_matches_cubature(f):
    tau = 0.37
    g = lambda x: (np.asarray(f.eval(x)) >= tau).astype(float)
    est = cubature_support(g, f.support_radius * 1.01, f.dim,
                           CFG.replace(x_cells_per_axis=96))
    tol = 2e-2 if f.dim == 3 else 5e-3
    assert est.value == pytest.approx(f.distribution_function(tau), rel=tol)


@pytest.mark.parametrize("f", _catalog(), ids=lambda f: repr(f))
def test_l1_norm_matches_cubature(f):
    est = cubature_support(lambda x: f.eval(x), f.support_radius * 1.01,
                           f.dim, CFG.replace(x_cells_per_axis=64))
    assert est.value == pytest.approx(f.l1_norm, rel=5e-3)


def test_cone_l1_norm_closed_form():
    # int (1 - |x|) over the unit disk = pi/3
    assert Cone(2, 1.0).l1_norm == pytest.approx(math.pi / 3.0)
    assert Cone(3, 1.0).l1_norm == pytest.approx(math.pi / 3.0)


def test_cone_grad_l1_norm():
    assert Cone(2, 1.0).grad_l1_norm == pytest.approx(math.pi)


# --------------------------------------------------------------------------
# symmetrization
# --------------------------------------------------------------------------

def test_cone_is_its_own_symmetral():
    f = Cone(2, 1.5)
    g = f.symmetrize()
    assert isinstance(g, Cone) and g.radius == pytest.approx(1.5)


def test_tent_symmetral_is_cone():
    a = np.diag([2.0, 1.0])
    g = AnisotropicTent(a).symmetrize()
    assert isinstance(g, Cone)
    assert g.radius == pytest.approx(1.0 / math.sqrt(2.0))


@pytest.mark.parametrize("f", _catalog(), ids=lambda f: repr(f))
def test_symmetral_preserves_level_volumes(f):
    g = f.symmetrize()
    for tau in (0.15, 0.5, 0.85):
        assert g.distribution_function(tau) == pytest.approx(
            f.distribution_function(tau), rel=2e-6, abs=1e-9)


def test_symmetral_is_radially_decreasing():
    f = TensorTent([2.0, 0.5]).symmetrize()
    r = np.linspace(0.0, f.support_radius, 200)
    x = np.zeros((200, 2))
    x[:, 0] = r
    vals = f.eval(x)
    assert np.all(np.diff(vals) <= 1e-12)
    assert vals[0] == pytest.approx(f.sup_norm, rel=1e-6)


def test_tabulated_radial_interpolates():
    f = TabulatedRadial(2, [0.0, 0.25, 0.5, 1.0], [1.0, 0.8, 0.6, 0.0])
    # exact at the knots, monotone in between
    assert f.eval(np.array([0.25, 0.0])) == pytest.approx(0.8, abs=1e-12)
    assert 0.6 < f.eval(np.array([0.3, 0.0])) < 0.8
    assert f.radially_symmetric


# --------------------------------------------------------------------------
# slope envelopes
# --------------------------------------------------------------------------

def test_slope_sup_cone():
    f = Cone(2, 1.0)
    for sign in ("sym", "plus", "minus"):
        assert f.slope_sup(np.array([1.0, 0.0]), sign) == pytest.approx(1.0)


def test_slope_sup_tent_directions():
    f = AnisotropicTent(np.diag([2.0, 1.0]))
    assert f.slope_sup(np.array([1.0, 0.0])) == pytest.approx(2.0)
    assert f.slope_sup(np.array([0.0, 1.0])) == pytest.approx(1.0)


def test_slope_sup_scales_with_direction():
    f = Cone(2, 1.0)
    assert f.slope_sup(np.array([3.0, 0.0])) == pytest.approx(3.0)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

@pytest.mark.parametrize("f", _catalog(), ids=lambda f: repr(f))
def test_json_roundtrip(f):
    g = field_from_json(field_to_json(f))
    assert type(g) is type(f)
    assert g.dim == f.dim
    rng = np.random.default_rng(11)
    pts = rng.uniform(-1.0, 1.0, size=(16, f.dim))
    np.testing.assert_allclose(g.eval(pts), f.eval(pts), atol=1e-12)


def test_json_rejects_unknown_kind():
    with pytest.raises(DomainError):
        field_from_json('{"kind": "mystery", "dim": 2, "params": {}}')


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 5.0), st.integers(1, 3))
def test_cone_roundtrip_any_radius(radius, dim):
    f = Cone(dim, radius)
    g = field_from_json(field_to_json(f))
    x = np.zeros(dim)
    x[0] = radius / 3.0
    assert g.eval(x) == pytest.approx(f.eval(x), abs=1e-15)
