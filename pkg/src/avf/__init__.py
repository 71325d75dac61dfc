"""Exact rational computer algebra for polynomial vector fields on affine varieties."""

from .algebra import Polynomial, RationalFunction
from .derivations import VectorField, apply, bracket, span_at_point, tangency_check
from .density import (
    LieClosure,
    TransitivityPlanner,
    closure_member,
    closure_span,
    compatibility_check,
    compatibility_report,
    perturb_to_separated,
    semi_compatibility_evidence,
)
from .errors import BudgetExceeded, InputError, NotTangentError, SeparationError
from .integrability import (
    certify_flow,
    flow_evaluate,
    kernel_linear_certify,
    lnd_certify,
    lnd_degree,
    triangular_certify,
    verify_automorphism,
    verify_flow_volume,
)
from .parsing import parse_expression, parse_polynomial, parse_rational
from .varieties import CoordinateRing, Point, groebner_basis, unit_ideal_certificate
from .volume import VolumeChart, divergence, field_divergence, restrict_to_chart

__all__ = [
    "BudgetExceeded", "CoordinateRing", "InputError", "LieClosure", "NotTangentError", "Point",
    "Polynomial", "RationalFunction", "SeparationError", "TransitivityPlanner", "VectorField",
    "VolumeChart", "apply", "bracket", "certify_flow", "closure_member", "closure_span",
    "compatibility_check", "compatibility_report", "divergence", "field_divergence", "flow_evaluate",
    "groebner_basis", "kernel_linear_certify", "lnd_certify", "lnd_degree", "parse_expression",
    "parse_polynomial", "parse_rational", "perturb_to_separated", "restrict_to_chart",
    "semi_compatibility_evidence", "span_at_point", "tangency_check", "triangular_certify",
    "unit_ideal_certificate", "verify_automorphism", "verify_flow_volume",
]
