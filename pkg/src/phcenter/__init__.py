"""Passivity analysis of LTI systems through analytic centers of the KYP inequality."""

from .analytic_center import BarrierKind, CenterOptions, CenterResult, compute_center
from .errors import PhCenterError
from .kyp import assemble_W, extremal_solutions, riccati_residual
from .lti_core import SystemModel
from .ph_form import PhRealization, generate_random_ph, ph_from_certificate, ph_in_T_coordinates
from .radii import (
    RadiusReport,
    condition_optimal_certificate,
    true_stability_radius,
    x_passivity_radius,
    x_stability_radius,
)

__all__ = [
    "BarrierKind",
    "CenterOptions",
    "CenterResult",
    "PhCenterError",
    "PhRealization",
    "RadiusReport",
    "SystemModel",
    "assemble_W",
    "compute_center",
    "condition_optimal_certificate",
    "extremal_solutions",
    "generate_random_ph",
    "ph_from_certificate",
    "ph_in_T_coordinates",
    "riccati_residual",
    "true_stability_radius",
    "x_passivity_radius",
    "x_stability_radius",
]
