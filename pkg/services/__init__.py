"""Services package for the cubic B-spline workbench."""

from .bspline_core import QuasiInterpolant
from .datapath_sim import DatapathSimulator
from .error_analysis import ClassicalCubicApproximant, ErrorAnalyzer

__all__ = [
    "QuasiInterpolant",
    "DatapathSimulator",
    "ClassicalCubicApproximant",
    "ErrorAnalyzer"
]
