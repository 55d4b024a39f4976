"""Star bodies from smoothness gauges of scalar fields.

The package evaluates directional smoothness gauges of compactly
supported fields, realizes their unit star bodies, follows the
strong-smoothness and low-regularity limits along (p, s) ladders, and
checks the rearrangement and dual-mixed-volume inequalities that
constrain them.
"""

from .numerics import DomainError, Estimate, QuadConfig, SphereGrid, \
    ball_volume, make_sphere_grid, sphere_area
from .fields import AnisotropicTent, Cone, ScalarField, SmoothBump, \
    TabulatedRadial, TensorTent, field_from_json, field_to_json
from .gauges import SIGNS, GaugeKind, GaugeValue, alpha_np, gauge
from .bodies import StarBody, body_from_csv, body_from_json, body_of_field, \
    body_to_csv, body_to_json, containment_check, dilation_factor, \
    dual_mixed_volume, dual_mixed_volume_log, random_fourier_body, volume
from .asymptotics import DEFAULT_P_LADDER, DEFAULT_S_LADDER, SweepResult, \
    SweepSpec, extrapolate_p_ladder, extrapolate_s_ladder, \
    holder_quotient_sup, run_sweep
from .inequalities import IneqReport, check_dual_mixed_inequality, \
    check_endpoint_isoperimetric, check_polya_szego_gradient, \
    check_polya_szego_holder, check_volume_polya_szego, \
    reports_to_json_lines, reports_to_table

__version__ = "0.1.0"

__all__ = [
    "DomainError", "Estimate", "QuadConfig", "SphereGrid",
    "ball_volume", "make_sphere_grid", "sphere_area",
    "ScalarField", "Cone", "AnisotropicTent", "SmoothBump", "TensorTent",
    "TabulatedRadial", "field_from_json", "field_to_json",
    "SIGNS", "GaugeKind", "GaugeValue", "alpha_np", "gauge",
    "StarBody", "body_of_field", "volume", "dual_mixed_volume",
    "dual_mixed_volume_log", "dilation_factor", "containment_check",
    "random_fourier_body", "body_from_csv", "body_from_json",
    "body_to_csv", "body_to_json",
    "SweepSpec", "SweepResult", "run_sweep", "extrapolate_p_ladder",
    "extrapolate_s_ladder", "holder_quotient_sup",
    "DEFAULT_P_LADDER", "DEFAULT_S_LADDER",
    "IneqReport", "check_polya_szego_holder", "check_polya_szego_gradient",
    "check_volume_polya_szego", "check_endpoint_isoperimetric",
    "check_dual_mixed_inequality", "reports_to_json_lines",
    "reports_to_table",
    "__version__",
]
