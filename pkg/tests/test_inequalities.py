"""Inequality checkers against closed-form equality and strict cases."""

import json
import math

import numpy as np
import pytest

from polarproj.bodies import StarBody, random_fourier_body
from polarproj.fields import AnisotropicTent, Cone
from polarproj.inequalities import (
    IneqReport,
    _report,
    check_dual_mixed_inequality,
    check_endpoint_isoperimetric,
    check_polya_szego_gradient,
    check_polya_szego_holder,
    check_volume_polya_szego,
    reports_to_json_lines,
    reports_to_table,
)
from polarproj.numerics import DomainError, QuadConfig

CFG = QuadConfig(rel_tol=1e-4)
BALL = StarBody.ball(2)
TENT = AnisotropicTent(np.diag([2.0, 1.0]))


# --------------------------------------------------------------------------
# verdict kernel
# --------------------------------------------------------------------------

def test_verdict_branches():
    assert _report("t", 2.0, 1.0, 0.0, {}).verdict == "Holds"
    assert _report("t", 1.0, 1.0 + 1e-9, 0.0, {}).verdict == "HoldsWithEquality"
    assert _report("t", 1.0, 1.0015, 0.0, {}).verdict == "HoldsWithEquality"
    assert _report("t", 1.0, 1.01, 0.02, {}).verdict == "ViolatedWithinTolerance"
    assert _report("t", 1.0, 1.5, 0.01, {}).verdict == "Violated"
    assert _report("t", 1.0, 1.5, 0.01, {}).violated
    assert not _report("t", 2.0, 1.0, 0.0, {}).violated


def test_report_json_fields():
    rep = _report("demo", 2.0, 1.0, 0.1, {"q": -2.0})
    data = json.loads(rep.to_json())
    assert data["name"] == "demo"
    assert data["margin"] == pytest.approx(1.0)
    assert data["inputs"] == {"q": -2.0}


# --------------------------------------------------------------------------
# rearrangement inequalities
# --------------------------------------------------------------------------

def test_holder_cone_is_equality():
    rep = check_polya_szego_holder(Cone(2, 1.0), BALL, 0.7, CFG)
    assert rep.verdict == "HoldsWithEquality"
    assert rep.lhs == pytest.approx(1.0, rel=1e-4)
    assert rep.rhs == pytest.approx(1.0, rel=1e-4)


def test_holder_tent_closed_forms():
    s = 0.7
    rep = check_polya_szego_holder(TENT, BALL, s, CFG)
    assert rep.verdict == "Holds"
    assert rep.lhs == pytest.approx(2.0 ** s, rel=1e-3)
    assert rep.rhs == pytest.approx(2.0 ** (s / 2.0), rel=1e-3)


def test_gradient_tent_closed_forms():
    rep = check_polya_szego_gradient(TENT, BALL, CFG)
    assert rep.verdict == "Holds"
    assert rep.lhs == pytest.approx(2.0, rel=1e-6)
    assert rep.rhs == pytest.approx(math.sqrt(2.0), rel=1e-6)


def test_gradient_cone_is_equality():
    rep = check_polya_szego_gradient(Cone(2, 1.0), BALL, CFG)
    assert rep.verdict == "HoldsWithEquality"


@pytest.mark.parametrize("scale", [0.1, 10.0])
def test_holder_equality_scale_covariant(scale):
    # rescaling the field moves both sides together
    rep = check_polya_szego_holder(Cone(2, scale), BALL, 0.6, CFG)
    assert rep.verdict == "HoldsWithEquality"
    assert rep.lhs == pytest.approx(scale ** -0.6, rel=1e-4)


def test_volume_tent_is_equality_every_s():
    # the sup-quotient body of a linear image is the preimage ellipse,
    # whose volume matches the symmetral's ball exactly
    for s in (0.5, 0.9):
        rep = check_volume_polya_szego(TENT, s, CFG, grid_resolution=96)
        assert rep.verdict == "HoldsWithEquality"
        assert rep.lhs == pytest.approx((math.pi / 2.0) ** (-s / 2.0), rel=1e-3)


def test_volume_s_one_uses_slope_body():
    rep = check_volume_polya_szego(TENT, 1.0, CFG, grid_resolution=96)
    assert rep.verdict == "HoldsWithEquality"
    assert rep.lhs == pytest.approx((math.pi / 2.0) ** -0.5, rel=1e-3)


def test_endpoint_cone_equality():
    rep = check_endpoint_isoperimetric(Cone(2, 1.0), BALL, 0.8, CFG,
                                       grid_resolution=96)
    assert rep.verdict == "HoldsWithEquality"
    assert rep.lhs == pytest.approx(1.0, rel=1e-3)


def test_endpoint_tent_strict_at_s_one():
    rep = check_endpoint_isoperimetric(TENT, BALL, 1.0, CFG,
                                       grid_resolution=96)
    assert rep.verdict == "Holds"
    assert rep.lhs == pytest.approx(2.0, rel=1e-3)
    assert rep.rhs == pytest.approx(math.sqrt(2.0), rel=1e-3)


# --------------------------------------------------------------------------
# dual mixed volume inequality
# --------------------------------------------------------------------------

def test_dual_mixed_balls_equality():
    rep = check_dual_mixed_inequality(StarBody.ball(2, 2.0), BALL, -2.0, CFG)
    assert rep.verdict == "HoldsWithEquality"
    assert rep.lhs == pytest.approx(16.0 * math.pi, rel=1e-9)


def test_dual_mixed_random_pair_holds():
    rep = check_dual_mixed_inequality(random_fourier_body(1),
                                      random_fourier_body(2), -2.0, CFG)
    assert rep.verdict in ("Holds", "HoldsWithEquality")
    assert rep.margin >= -1e-9


def test_dual_mixed_rejects_nonnegative_q():
    with pytest.raises(DomainError):
        check_dual_mixed_inequality(BALL, BALL, 0.5, CFG)


# --------------------------------------------------------------------------
# report serialization
# --------------------------------------------------------------------------

def test_json_lines_and_table():
    reps = [
        _report("a", 2.0, 1.0, 0.0, {}),
        _report("b", 1.0, 1.0, 0.0, {}),
    ]
    lines = reports_to_json_lines(reps).strip().split("\n")
    assert len(lines) == 2
    assert json.loads(lines[0])["verdict"] == "Holds"
    table = reports_to_table(reps)
    assert "HoldsWithEquality" in table
    assert table.splitlines()[0].startswith("name")
