"""
Error analysis for the spline workbench.

Methodical error bounds for the cubic spline and for classical cubic
polynomials, empirical error measurement, convergence-order estimation, and
the classical Horner baseline used for accuracy and cycle comparisons.
"""

import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from models.analysis import ComparisonReport, ConvergenceResult, ErrorBoundInput, ErrorReport
from models.datapath import DatapathConfig
from models.errors import DegenerateInputError, NumericError, ShapeError
from models.spline import ExtensionRule, UniformGrid
from services.bspline_core import QuasiInterpolant, sample_function
from services.datapath_sim import cycle_report
from config import Settings, get_logger, get_settings

logger = get_logger(__name__)

SPLINE_BOUND_CONSTANT = Fraction(5, 384)
POLY_BOUND_CONSTANT = Fraction(1, 24)
# max over the knot interval of 1/36 + t^2 (1 - t)^2 / 24, reached at t = 1/2
QUASI_BOUND_CONSTANT = Fraction(35, 1152)

HORNER_MULTIPLIES = 3
HORNER_ADDITIONS = 3

RealFunction = Callable[[float], float]


class ReferenceFunction(BaseModel):
    """A built-in test function with an analytic bound on |f''''|."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    f: Callable[[float], float]
    fourth_derivative_max: Callable[[float, float], float]
    description: str = ""

    def __call__(self, x: float) -> float:
        return self.f(x)


def _sin_fourth_max(a: float, b: float) -> float:
    # |sin| reaches 1 at pi/2 + j*pi
    j = math.ceil((a - math.pi / 2) / math.pi)
    if math.pi / 2 + j * math.pi <= b:
        return 1.0
    return max(abs(math.sin(a)), abs(math.sin(b)))


def _ln1p_fourth_max(a: float, b: float) -> float:
    if a <= -1.0:
        raise NumericError(f"ln(1+x) is undefined at x = {a}", x=a)
    return 6.0 / (1.0 + a) ** 4


REFERENCE_FUNCTIONS: Dict[str, ReferenceFunction] = {
    "ln1p": ReferenceFunction(
        name="ln1p", f=math.log1p, fourth_derivative_max=_ln1p_fourth_max,
        description="ln(1+x); |f''''| = 6/(1+x)^4",
    ),
    "sin": ReferenceFunction(
        name="sin", f=math.sin, fourth_derivative_max=_sin_fourth_max,
        description="sin(x); |f''''| = |sin x|",
    ),
    "exp": ReferenceFunction(
        name="exp", f=math.exp, fourth_derivative_max=lambda a, b: math.exp(b),
        description="exp(x); |f''''| = exp(x)",
    ),
}


def get_reference_function(name: str) -> ReferenceFunction:
    if name not in REFERENCE_FUNCTIONS:
        raise KeyError(f"Unknown function {name!r}")
    return REFERENCE_FUNCTIONS[name]


def spline_error_bound(bound_input: ErrorBoundInput) -> float:
    """(5/384) h^4 M."""
    return float(SPLINE_BOUND_CONSTANT) * bound_input.h ** 4 * bound_input.deriv_bound


def poly_error_bound(bound_input: ErrorBoundInput) -> float:
    """(1/24) h^4 M."""
    return float(POLY_BOUND_CONSTANT) * bound_input.h ** 4 * bound_input.deriv_bound


def quasi_interpolation_error_bound(bound_input: ErrorBoundInput) -> float:
    """(35/1152) h^4 M, the leading-order bound of the three-point quasi-interpolant."""
    return float(QUASI_BOUND_CONSTANT) * bound_input.h ** 4 * bound_input.deriv_bound


def exact_bound_ratio(bound_input: ErrorBoundInput) -> Fraction:
    """bound_poly / bound_spline in rational arithmetic (floats convert exactly)."""
    h4m = Fraction(bound_input.h) ** 4 * Fraction(bound_input.deriv_bound)
    if h4m == 0:
        return POLY_BOUND_CONSTANT / SPLINE_BOUND_CONSTANT
    return (POLY_BOUND_CONSTANT * h4m) / (SPLINE_BOUND_CONSTANT * h4m)


def compare_bounds(h: float, deriv_bound: float) -> ErrorReport:
    """Both methodical bounds and their ratio (16/5 whenever M > 0)."""
    bound_input = ErrorBoundInput(h=h, deriv_bound=deriv_bound)
    spline = spline_error_bound(bound_input)
    poly = poly_error_bound(bound_input)
    ratio = exact_bound_ratio(bound_input)
    return ErrorReport(
        bound_spline=spline,
        bound_poly=poly,
        ratio_bounds=poly / spline if spline > 0 else float(ratio),
        ratio_exact=f"{ratio.numerator}/{ratio.denominator}",
    )


def empirical_max_error(
    f: RealFunction,
    approx: RealFunction,
    a: float,
    b: float,
    probes: int,
) -> float:
    """
    max |f(x) - approx(x)| over `probes` equispaced points of [a, b], endpoints included.

    Raises:
        ShapeError: fewer than two probes or an empty interval
        NumericError: f or approx is not finite at some probe
    """
    if probes < 2:
        raise ShapeError(f"Need at least 2 probes, got {probes}")
    if not b > a:
        raise ShapeError(f"Interval end {b} must exceed start {a}")
    worst = 0.0
    for x in np.linspace(a, b, probes):
        x = float(x)
        exact, estimate = f(x), approx(x)
        if not (math.isfinite(exact) and math.isfinite(estimate)):
            raise NumericError(f"Non-finite value at probe x = {x}", x=x)
        worst = max(worst, abs(exact - estimate))
    return worst


def interior_window(grid: UniformGrid, intervals: Optional[int] = None) -> Tuple[float, float]:
    """[a, b] with `intervals` knot intervals removed at each end."""
    intervals = get_settings().interior_intervals if intervals is None else intervals
    lo, hi = grid.node(intervals), grid.node(grid.n - 1 - intervals)
    if not hi > lo:
        raise ShapeError(f"Grid of {grid.n} nodes has no interior left after {intervals} intervals per side")
    return lo, hi


def convergence_order(
    f: RealFunction,
    h_values: Sequence[float],
    a: float,
    b: float,
    window: Optional[Tuple[float, float]] = None,
    probes: Optional[int] = None,
    rule: Union[ExtensionRule, str] = ExtensionRule.QUADRATIC,
) -> ConvergenceResult:
    """
    Least-squares slope of log(max error) against log(h).

    The measurement window is the same for every h; by default it trims
    interior_intervals coarsest-h intervals from each end of [a, b].
    An order of None means the errors vanished (exact reproduction).
    """
    settings = get_settings()
    h_values = [float(h) for h in h_values]
    if len(h_values) < 2:
        raise ShapeError("Need at least two step sizes")
    if any(later >= earlier for earlier, later in zip(h_values, h_values[1:])):
        raise ShapeError(f"Step sizes must be strictly decreasing, got {h_values}")

    grids = [UniformGrid.from_step(a, b, h, settings.grid_tolerance) for h in h_values]
    if window is None:
        margin = settings.interior_intervals * h_values[0]
        window = (a + margin, b - margin)
    probes = probes or settings.probes

    errors: List[float] = []
    for grid in grids:
        spline = QuasiInterpolant.from_function(f, grid, rule=rule)
        errors.append(empirical_max_error(f, spline, window[0], window[1], probes))
        logger.debug(f"h = {grid.h}: max error {errors[-1]:.3e}")

    scale = max(1.0, max(abs(f(x)) for x in np.linspace(window[0], window[1], 16)))
    if min(errors) <= settings.exact_error_threshold * scale:
        logger.warning("Errors vanish at some step size; convergence order undefined")
        order = None
    else:
        slope, _ = np.polyfit(np.log(h_values), np.log(errors), 1)
        order = float(slope)

    return ConvergenceResult(order=order, h_values=tuple(h_values), errors=tuple(errors), window=window)


def fit_classical_cubic(samples: Sequence[Tuple[float, float]]) -> Tuple[float, float, float, float]:
    """
    Power-form coefficients (c0, c1, c2, c3) of the cubic through four points.

    Raises:
        ShapeError: not exactly four points
        DegenerateInputError: repeated abscissae
    """
    if len(samples) != 4:
        raise ShapeError(f"A cubic needs exactly 4 points, got {len(samples)}")
    xs = np.array([float(x) for x, _ in samples])
    ys = np.array([float(y) for _, y in samples])
    if len(set(xs.tolist())) != 4:
        raise DegenerateInputError(f"Interpolation abscissae must be distinct, got {xs.tolist()}")
    vandermonde = np.vander(xs, 4, increasing=True)
    coefficients = np.linalg.solve(vandermonde, ys)
    return tuple(float(c) for c in coefficients)


def horner_cycles(multiply: int = 1, add: int = 1) -> int:
    """Sequential Horner cost for a cubic: 3 multiplies + 3 additions."""
    return HORNER_MULTIPLIES * multiply + HORNER_ADDITIONS * add


def horner_eval(coefficients: Sequence[float], x: float) -> Tuple[float, int]:
    """((c3 x + c2) x + c1) x + c0, with its cycle count under the default model."""
    c0, c1, c2, c3 = coefficients
    value = ((c3 * x + c2) * x + c1) * x + c0
    return value, horner_cycles()


def speed_ratio(config: DatapathConfig, multiply: int = 1, add: int = 1) -> float:
    """Horner cycles per sample over datapath cycles per sample."""
    rate = cycle_report(1, config).cycles_per_sample
    return float(Fraction(horner_cycles(multiply, add)) / rate)


class ClassicalCubicApproximant:
    """
    Piecewise classical cubic interpolation evaluated by Horner's scheme.

    Each piece interpolates four consecutive nodes spanning three knot intervals
    and is stored in the local coordinate u = (x - x0) / h. When the interval
    count is not a multiple of three, the last piece reuses the final four nodes.
    """

    def __init__(self, f: RealFunction, grid: UniformGrid):
        self.grid = grid
        values = sample_function(f, grid)
        starts = list(range(0, grid.n - 3, 3))
        if starts[-1] + 3 != grid.n - 1:
            starts.append(grid.n - 4)
        self.starts = starts
        self.pieces = [
            fit_classical_cubic([(float(j), values[s + j]) for j in range(4)])
            for s in starts
        ]
        self.cycles = 0

    def _piece(self, x: float) -> int:
        span = (x - self.grid.a) / self.grid.h
        for index in range(len(self.starts) - 1, -1, -1):
            if span >= self.starts[index]:
                return index
        return 0

    def __call__(self, x: float) -> float:
        index = self._piece(x)
        u = (x - self.grid.node(self.starts[index])) / self.grid.h
        value, cycles = horner_eval(self.pieces[index], u)
        self.cycles += cycles
        return value


class ErrorAnalyzer:
    """
    Accuracy and speed comparison between the spline and the classical baseline.

    Features:
    - Methodical bounds with a unit and an analytic derivative bound
    - Empirical errors of both approximants on the interior window
    - Convergence order over an h ladder with a fixed window
    - Cycle ratio under the declared datapath and Horner models
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    def bounds(self, h: float, deriv_bound: float) -> ErrorReport:
        return compare_bounds(h, deriv_bound)

    def ladder(self, h: float, a: float, b: float, levels: int = 3) -> List[float]:
        """Coarsest-first h ladder ending at h, halving each step; levels that do not fit are dropped."""
        ladder = []
        for power in range(levels - 1, -1, -1):
            step = h * (1 << power)
            try:
                UniformGrid.from_step(a, b, step, self.settings.grid_tolerance)
            except ShapeError:
                continue
            ladder.append(step)
        return ladder

    def compare(
        self,
        function: str,
        h: float,
        interval: Tuple[float, float],
        config: DatapathConfig,
        probes: Optional[int] = None,
        rule: Union[ExtensionRule, str, None] = None,
    ) -> ComparisonReport:
        settings = self.settings
        probes = probes or settings.probes
        rule = ExtensionRule.parse(rule or settings.extension_rule)
        reference = get_reference_function(function)
        a, b = interval
        grid = UniformGrid.from_step(a, b, h, settings.grid_tolerance)
        window = interior_window(grid, settings.interior_intervals)

        logger.info(f"Comparing {function} on [{a}, {b}] with h = {h}, window {window}")

        unit_m = compare_bounds(h, 1.0)
        deriv_bound = reference.fourth_derivative_max(a, b)

        spline = QuasiInterpolant.from_function(reference.f, grid, rule=rule)
        spline_error = empirical_max_error(reference.f, spline, window[0], window[1], probes)
        analytic = compare_bounds(h, deriv_bound).model_copy(
            update={"empirical_max": spline_error, "probes": probes}
        )

        # the local error at x depends on f'''' within two intervals of x
        widened = (max(a, window[0] - 2 * h), min(b, window[1] + 2 * h))
        quasi_bound = quasi_interpolation_error_bound(
            ErrorBoundInput(h=h, deriv_bound=reference.fourth_derivative_max(*widened))
        )

        classical = ClassicalCubicApproximant(reference.f, grid)
        classical_error = empirical_max_error(reference.f, classical, window[0], window[1], probes)

        rate = cycle_report(1, config).cycles_per_sample
        horner = horner_cycles(settings.horner_multiply_cycles, settings.horner_add_cycles)
        ratio = speed_ratio(config, settings.horner_multiply_cycles, settings.horner_add_cycles)

        notes: Dict[str, str] = {
            "unit_m_bounds": "derivative bound M = 1.0",
            "analytic_bounds": f"M = max |f''''| over [{a}, {b}] = {deriv_bound:.6g}",
            "quasi_interpolation_bound": "(35/1152) h^4 M with M over the window widened by 2h",
            "cycle_model": cycle_report(1, config).model_description,
        }

        ladder = self.ladder(h, a, b)
        convergence: Optional[ConvergenceResult] = None
        if len(ladder) >= 2:
            try:
                convergence = convergence_order(reference.f, ladder, a, b, probes=probes, rule=rule)
            except ShapeError as e:
                notes["convergence"] = f"not estimated: {e}"
        else:
            notes["convergence"] = "not estimated: interval too short for an h ladder"
        if convergence is not None and not convergence.defined:
            notes["convergence"] = "errors vanish; order undefined"

        return ComparisonReport(
            function=function,
            h=h,
            interval=(a, b),
            window=window,
            unit_m_bounds=unit_m,
            analytic_bounds=analytic,
            analytic_deriv_bound=deriv_bound,
            quasi_interpolation_bound=quasi_bound,
            empirical_spline_error=spline_error,
            empirical_classical_error=classical_error,
            bound_ratio=unit_m.ratio_bounds,
            bound_ratio_exact=unit_m.ratio_exact,
            datapath_cycles_per_sample=str(rate),
            horner_cycles_per_sample=horner,
            cycle_ratio=ratio,
            convergence_order=convergence.order if convergence else None,
            convergence_errors=list(convergence.errors) if convergence else [],
            convergence_h_values=list(convergence.h_values) if convergence else [],
            notes=notes,
        )
