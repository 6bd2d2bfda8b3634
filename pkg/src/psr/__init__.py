"""Closed cubic projective special real manifolds: standard forms, evolution along curves and limit geometries."""

from .catalog import LimitForm, Variant, canonical_polynomial, classify, symmetry_dim_lower_bound
from .cubic import CubicForm, StandardFormPoly, assemble_standard, evaluate
from .evolution import evolve, extract_limit, horizon_R
from .hyperbolicity import Status, closedness, sphere_max
from .metric import centro_affine_metric, dom_boundary_radius, metric_convergence_check
from .standard_form import GaugePolicy, standard_form_at

__all__ = [
    "CubicForm",
    "GaugePolicy",
    "LimitForm",
    "StandardFormPoly",
    "Status",
    "Variant",
    "assemble_standard",
    "canonical_polynomial",
    "centro_affine_metric",
    "classify",
    "closedness",
    "dom_boundary_radius",
    "evaluate",
    "evolve",
    "extract_limit",
    "horizon_R",
    "metric_convergence_check",
    "sphere_max",
    "standard_form_at",
    "symmetry_dim_lower_bound",
]
