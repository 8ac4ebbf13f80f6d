"""
Data models for error analysis: bound inputs, bound/empirical reports and
convergence estimates.
"""

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


class ErrorBoundInput(BaseModel):
    """
    Parameters of the methodical error bounds.

    Attributes:
        h: Node spacing
        deriv_bound: Derivative bound M multiplying h^4
    """
    model_config = ConfigDict(frozen=True)

    h: float = Field(gt=0.0)
    deriv_bound: float = Field(ge=0.0)


class ErrorReport(BaseModel):
    """
    Spline vs classical-polynomial bound comparison.

    Attributes:
        bound_spline: (5/384) h^4 M
        bound_poly: (1/24) h^4 M
        empirical_max: Measured max |S3 - f| over the probes (0 when not measured)
        probes: Probe count behind empirical_max
        ratio_bounds: bound_poly / bound_spline
        ratio_exact: The same ratio in exact rational arithmetic, as "p/q"
    """
    model_config = ConfigDict(frozen=True)

    bound_spline: float = Field(ge=0.0)
    bound_poly: float = Field(ge=0.0)
    empirical_max: float = Field(default=0.0, ge=0.0)
    probes: int = Field(default=0, ge=0)
    ratio_bounds: float = Field(gt=0.0)
    ratio_exact: str = "16/5"


class ConvergenceResult(BaseModel):
    """Least-squares order estimate from an h ladder."""
    model_config = ConfigDict(frozen=True)

    order: Optional[float]
    h_values: Tuple[float, ...]
    errors: Tuple[float, ...]
    window: Tuple[float, float]

    @property
    def defined(self) -> bool:
        return self.order is not None


class ComparisonReport(BaseModel):
    """Everything the compare command reports."""

    function: str
    h: float
    interval: Tuple[float, float]
    window: Tuple[float, float]
    unit_m_bounds: ErrorReport
    analytic_bounds: ErrorReport
    analytic_deriv_bound: float
    quasi_interpolation_bound: float
    empirical_spline_error: float
    empirical_classical_error: float
    bound_ratio: float
    bound_ratio_exact: str
    datapath_cycles_per_sample: str
    horner_cycles_per_sample: int
    cycle_ratio: float
    convergence_order: Optional[float]
    convergence_errors: List[float] = Field(default_factory=list)
    convergence_h_values: List[float] = Field(default_factory=list)
    notes: Dict[str, str] = Field(default_factory=dict)
