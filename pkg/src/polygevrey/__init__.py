"""Numerical toolkit for Gevrey-type polyanalytic functions on the unit disk."""

from .core import NEG_INF, HoloPoly, NAnalyticPoly, dbar_pow, degree, dz_pow, eval, random_poly
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "NEG_INF",
    "HoloPoly",
    "NAnalyticPoly",
    "dbar_pow",
    "degree",
    "dz_pow",
    "eval",
    "random_poly",
]
