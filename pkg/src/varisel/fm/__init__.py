"""Feature models: representation, validation, enumeration, rendering, text format."""

from .bundled import BUNDLED, bundled_text, load_bundled
from .dot import to_dot
from .dsl import parse, parse_formula, serialize
from .expr import And, Formula, Implies, Not, Or, Var
from .model import (
    Configuration,
    Constraint,
    Feature,
    FeatureModel,
    Group,
    GroupKind,
    ValidationResult,
    Variability,
    Violation,
    enumerate_configurations,
    validate_configuration,
    validate_model,
)

__all__ = [
    "BUNDLED",
    "And",
    "Configuration",
    "Constraint",
    "Feature",
    "FeatureModel",
    "Formula",
    "Group",
    "GroupKind",
    "Implies",
    "Not",
    "Or",
    "ValidationResult",
    "Var",
    "Variability",
    "Violation",
    "bundled_text",
    "enumerate_configurations",
    "load_bundled",
    "parse",
    "parse_formula",
    "serialize",
    "to_dot",
    "validate_configuration",
    "validate_model",
]
