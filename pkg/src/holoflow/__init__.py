"""Global analysis of holomorphic polynomial flows ``z' = f(z)``."""

from .poly_core import ComplexPoly, RealPlanarField, parse_poly, to_real_field, xi_eta
from .ode import IntegratorOptions, StepUnderflow

__all__ = [
    "ComplexPoly",
    "RealPlanarField",
    "parse_poly",
    "to_real_field",
    "xi_eta",
    "IntegratorOptions",
    "StepUnderflow",
]

__version__ = "0.1.0"
