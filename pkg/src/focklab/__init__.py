"""Numerical toolkit for weighted Fock spaces on the complex plane."""

from .errors import NumericalFailure, UsageError
from .quadcore import CPoint, IntegrandMeta, QuadSpec, Region

__version__ = "0.1.0"

__all__ = ["CPoint", "IntegrandMeta", "NumericalFailure", "QuadSpec", "Region", "UsageError"]
