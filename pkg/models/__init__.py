"""Data models for the cubic B-spline workbench."""

from .errors import (
    SplineError,
    DomainError,
    ShapeError,
    RangeError,
    ParseError,
    DegenerateInputError,
    NumericError,
    SignalIOError
)

from .spline import (
    ExtensionRule,
    SplineDegree,
    CUBIC,
    UniformGrid,
    SampledSignal,
    CoefficientVector
)

from .datapath import (
    FixedPointFormat,
    RomBank,
    CycleCosts,
    DatapathConfig,
    DatapathState,
    CycleReport,
    SimulationResult
)

from .analysis import (
    ErrorBoundInput,
    ErrorReport,
    ConvergenceResult,
    ComparisonReport
)

from .run_config import Command, RunConfig

__all__ = [
    "SplineError",
    "DomainError",
    "ShapeError",
    "RangeError",
    "ParseError",
    "DegenerateInputError",
    "NumericError",
    "SignalIOError",
    "ExtensionRule",
    "SplineDegree",
    "CUBIC",
    "UniformGrid",
    "SampledSignal",
    "CoefficientVector",
    "FixedPointFormat",
    "RomBank",
    "CycleCosts",
    "DatapathConfig",
    "DatapathState",
    "CycleReport",
    "SimulationResult",
    "ErrorBoundInput",
    "ErrorReport",
    "ConvergenceResult",
    "ComparisonReport",
    "Command",
    "RunConfig"
]
