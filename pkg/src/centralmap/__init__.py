"""Decide whether a central linear mapping, given by its homogeneous
Cartesian coordinate matrix, is a central projection followed by a
similarity."""

from .criterion import (
    AnalysisReport,
    CoordinateMatrix,
    NotCentral,
    ReducedMatrix,
    SpectrumReport,
    ToleranceConfig,
    analyze,
    reduce,
    restricted_matrix,
)
from .linalg import NumericalError

__all__ = [
    "AnalysisReport",
    "CoordinateMatrix",
    "NotCentral",
    "NumericalError",
    "ReducedMatrix",
    "SpectrumReport",
    "ToleranceConfig",
    "analyze",
    "reduce",
    "restricted_matrix",
]
__version__ = "0.1.0"
