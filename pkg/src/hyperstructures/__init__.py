"""Multilevel bond structures: build, validate, cluster, transfer, propagate."""

from .core import (
    Bond,
    ElementId,
    Hyperstructure,
    ValidationReport,
    Violation,
    new_hyperstructure,
)
from .errors import HyperstructureError

__all__ = [
    "Bond",
    "ElementId",
    "Hyperstructure",
    "HyperstructureError",
    "ValidationReport",
    "Violation",
    "new_hyperstructure",
]

__version__ = "0.1.0"
