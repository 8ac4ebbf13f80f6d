"""
Tests for error bounds, empirical error, convergence order and the Horner baseline.

Run with: pytest tests/test_error_analysis.py -v
"""

import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from models.analysis import ErrorBoundInput
from models.errors import DegenerateInputError, NumericError, ShapeError
from models.spline import UniformGrid
from services.bspline_core import QuasiInterpolant
from services.datapath_sim import default_config
from services.error_analysis import (
    REFERENCE_FUNCTIONS,
    ClassicalCubicApproximant,
    ErrorAnalyzer,
    compare_bounds,
    convergence_order,
    empirical_max_error,
    fit_classical_cubic,
    get_reference_function,
    horner_cycles,
    horner_eval,
    interior_window,
    poly_error_bound,
    quasi_interpolation_error_bound,
    spline_error_bound,
    speed_ratio,
)

H = 1.0 / 32.0
LADDER = (1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0)


@pytest.fixture(scope="module")
def ln1p_grid():
    return UniformGrid.from_step(0.0, 2.0, H)


@pytest.fixture(scope="module")
def ln1p_spline(ln1p_grid):
    return QuasiInterpolant.from_function(math.log1p, ln1p_grid)


class TestBounds:
    """Methodical bound arithmetic."""

    def test_spline_bound(self):
        value = spline_error_bound(ErrorBoundInput(h=H, deriv_bound=1.0))
        assert value == pytest.approx(5.0 / (384.0 * 32 ** 4), rel=1e-12)
        assert value == pytest.approx(1.2418e-8, rel=1e-3)

    def test_poly_bound(self):
        value = poly_error_bound(ErrorBoundInput(h=H, deriv_bound=1.0))
        assert value == pytest.approx(1.0 / (24.0 * 32 ** 4), rel=1e-12)
        assert value == pytest.approx(3.974e-8, rel=1e-3)

    def test_zero_derivative(self):
        assert spline_error_bound(ErrorBoundInput(h=H, deriv_bound=0.0)) == 0.0
        assert poly_error_bound(ErrorBoundInput(h=H, deriv_bound=0.0)) == 0.0

    def test_quartic_scaling_is_exact(self):
        fine = spline_error_bound(ErrorBoundInput(h=H, deriv_bound=1.0))
        coarse = spline_error_bound(ErrorBoundInput(h=2 * H, deriv_bound=1.0))
        assert coarse / fine == 16.0
        assert spline_error_bound(ErrorBoundInput(h=1.0 / 16.0, deriv_bound=1.0)) == 16 * fine

    def test_quasi_bound_constant(self):
        value = quasi_interpolation_error_bound(ErrorBoundInput(h=H, deriv_bound=1.0))
        assert value == pytest.approx(35.0 / 1152.0 * H ** 4, rel=1e-12)
        assert value > spline_error_bound(ErrorBoundInput(h=H, deriv_bound=1.0))

    def test_invalid_input(self):
        with pytest.raises(ValidationError):
            ErrorBoundInput(h=0.0, deriv_bound=1.0)
        with pytest.raises(ValidationError):
            ErrorBoundInput(h=H, deriv_bound=-1.0)


class TestCompareBounds:
    """Bound comparison report."""

    def test_unit_derivative_values(self):
        report = compare_bounds(H, 1.0)
        assert report.bound_spline == pytest.approx(1.2418e-8, rel=1e-3)
        assert report.bound_poly == pytest.approx(3.974e-8, rel=1e-3)
        assert report.ratio_bounds == pytest.approx(3.2, rel=1e-12)
        assert report.ratio_exact == "16/5"

    @pytest.mark.parametrize("h", [0.5, 0.1, 1.0 / 32.0, 1e-3])
    def test_ratio_constant(self, h):
        report = compare_bounds(h, 1.0)
        assert report.ratio_exact == "16/5"
        assert report.ratio_bounds == pytest.approx(3.2, rel=1e-12)

    def test_linear_in_m(self):
        single, double = compare_bounds(H, 1.0), compare_bounds(H, 2.0)
        assert double.bound_spline == 2 * single.bound_spline
        assert double.bound_poly == 2 * single.bound_poly
        assert double.ratio_exact == single.ratio_exact

    def test_zero_m_keeps_ratio(self):
        report = compare_bounds(H, 0.0)
        assert report.bound_spline == 0.0
        assert Fraction(report.ratio_exact) == Fraction(16, 5)


class TestEmpiricalError:
    """Probe-based max error."""

    def test_identical_functions(self):
        assert empirical_max_error(math.sin, math.sin, 0.0, 2.0, 100) == 0.0

    def test_known_gap(self):
        assert empirical_max_error(lambda x: x, lambda x: 0.0, 0.0, 3.0, 4) == 3.0

    def test_too_few_probes(self):
        with pytest.raises(ShapeError):
            empirical_max_error(math.sin, math.sin, 0.0, 1.0, 1)

    def test_non_finite(self):
        with pytest.raises(NumericError) as info:
            empirical_max_error(lambda x: 1.0 / (x - 1.0) if x != 1.0 else math.inf, math.sin, 0.0, 2.0, 3)
        assert info.value.x == 1.0

    def test_interior_window(self, ln1p_grid):
        assert interior_window(ln1p_grid) == (2 * H, 2.0 - 2 * H)
        assert interior_window(ln1p_grid, 1) == (H, 2.0 - H)
        with pytest.raises(ShapeError):
            interior_window(UniformGrid.from_step(0.0, 3.0, 1.0), 2)

    def test_ln1p_magnitude(self, ln1p_spline):
        error = empirical_max_error(math.log1p, ln1p_spline, 1.0, 2.0 - 2 * H, 10000)
        assert error <= 1.25e-8

    def test_quasi_bound_dominates_interior(self, ln1p_grid, ln1p_spline):
        lo, hi = interior_window(ln1p_grid)
        error = empirical_max_error(math.log1p, ln1p_spline, lo, hi, 10000)
        deriv = REFERENCE_FUNCTIONS["ln1p"].fourth_derivative_max(lo - 2 * H, hi)
        assert error <= quasi_interpolation_error_bound(ErrorBoundInput(h=H, deriv_bound=deriv))

    @pytest.mark.parametrize("name,a,b", [("sin", 0.0, 1.0), ("exp", -1.0, 1.0)])
    def test_quasi_bound_other_functions(self, name, a, b):
        reference = get_reference_function(name)
        grid = UniformGrid.from_step(a, b, 1.0 / 16.0)
        spline = QuasiInterpolant.from_function(reference.f, grid)
        lo, hi = interior_window(grid)
        error = empirical_max_error(reference.f, spline, lo, hi, 4000)
        deriv = reference.fourth_derivative_max(a, b)
        assert 0.0 < error <= quasi_interpolation_error_bound(ErrorBoundInput(h=1.0 / 16.0, deriv_bound=deriv))


class TestConvergence:
    """Least-squares order estimate."""

    def test_ln1p_order(self):
        result = convergence_order(math.log1p, LADDER, 0.0, 2.0, probes=4000)
        assert result.window == (0.25, 1.75)
        assert 3.7 <= result.order <= 4.3
        assert list(result.errors) == sorted(result.errors, reverse=True)

    def test_sin_order(self):
        result = convergence_order(math.sin, LADDER, 0.0, 2.0, probes=4000)
        assert 3.7 <= result.order <= 4.3

    def test_linear_is_undefined(self):
        result = convergence_order(lambda x: 2.0 * x + 1.0, LADDER, 0.0, 2.0, probes=500)
        assert result.order is None
        assert not result.defined

    def test_explicit_window(self):
        result = convergence_order(math.exp, LADDER, 0.0, 2.0, window=(0.5, 1.5), probes=1000)
        assert result.window == (0.5, 1.5)
        assert 3.7 <= result.order <= 4.3

    def test_ladder_must_decrease(self):
        with pytest.raises(ShapeError):
            convergence_order(math.sin, (1.0 / 16.0, 1.0 / 8.0), 0.0, 2.0)
        with pytest.raises(ShapeError):
            convergence_order(math.sin, (1.0 / 16.0,), 0.0, 2.0)


class TestClassicalCubic:
    """Power-form fit and Horner evaluation."""

    def test_exact_cubic(self):
        coefficients = fit_classical_cubic([(x, x ** 3) for x in (0.0, 1.0, 2.0, 3.0)])
        assert coefficients == pytest.approx((0.0, 0.0, 0.0, 1.0), abs=1e-12)

    def test_constant(self):
        coefficients = fit_classical_cubic([(x, 5.0) for x in (0.0, 1.0, 2.0, 3.0)])
        assert coefficients == pytest.approx((5.0, 0.0, 0.0, 0.0), abs=1e-12)

    def test_ln1p_interpolates(self):
        xs = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)
        coefficients = fit_classical_cubic([(x, math.log1p(x)) for x in xs])
        for x in xs:
            value, _ = horner_eval(coefficients, x)
            assert value == pytest.approx(math.log1p(x), abs=1e-12)

    def test_duplicate_nodes(self):
        with pytest.raises(DegenerateInputError):
            fit_classical_cubic([(0.0, 1.0), (1.0, 2.0), (1.0, 3.0), (2.0, 4.0)])

    def test_wrong_count(self):
        with pytest.raises(ShapeError):
            fit_classical_cubic([(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)])

    def test_horner_values(self):
        assert horner_eval((0.0, 0.0, 0.0, 1.0), 2.0) == (8.0, 6)
        assert horner_eval((5.0, 0.0, 0.0, 0.0), -3.7) == (5.0, 6)

    def test_horner_against_exact_arithmetic(self):
        rng = np.random.default_rng(2024)
        xs = rng.uniform(-4.0, 4.0, 10000)
        cs = rng.uniform(-16.0, 16.0, (10000, 4))
        for x, c in zip(xs, cs):
            x, c = float(x), [float(v) for v in c]
            value, _ = horner_eval(c, x)
            exact = sum(Fraction(ci) * Fraction(x) ** i for i, ci in enumerate(c))
            scale = sum(abs(ci) * abs(x) ** i for i, ci in enumerate(c))
            assert abs(Fraction(value) - exact) <= 4 * math.ulp(scale)

    def test_cycle_model(self, ln1p_grid):
        assert horner_cycles() == 6
        assert horner_cycles(2, 1) == 9
        assert speed_ratio(default_config()) == 3.0

    def test_piecewise_reproduces_cubics(self):
        grid = UniformGrid.from_step(0.0, 2.0, 0.125)
        approximant = ClassicalCubicApproximant(lambda x: x ** 3 - x, grid)
        for x in np.linspace(0.0, 2.0, 97):
            assert approximant(float(x)) == pytest.approx(float(x) ** 3 - float(x), abs=1e-12)
        assert approximant.cycles == 97 * 6

    def test_piecewise_within_poly_bound(self, ln1p_grid):
        approximant = ClassicalCubicApproximant(math.log1p, ln1p_grid)
        lo, hi = interior_window(ln1p_grid)
        error = empirical_max_error(math.log1p, approximant, lo, hi, 4000)
        assert error <= poly_error_bound(ErrorBoundInput(h=H, deriv_bound=6.0))


class TestReferenceFunctions:
    """Built-in functions and their fourth-derivative maxima."""

    def test_registry(self):
        assert set(REFERENCE_FUNCTIONS) == {"ln1p", "sin", "exp"}
        assert REFERENCE_FUNCTIONS["ln1p"](1.0) == pytest.approx(math.log(2.0))

    def test_derivative_maxima(self):
        assert REFERENCE_FUNCTIONS["ln1p"].fourth_derivative_max(0.0, 2.0) == 6.0
        assert REFERENCE_FUNCTIONS["sin"].fourth_derivative_max(0.0, 2.0) == 1.0
        assert REFERENCE_FUNCTIONS["sin"].fourth_derivative_max(0.0, 1.0) == pytest.approx(math.sin(1.0))
        assert REFERENCE_FUNCTIONS["exp"].fourth_derivative_max(0.0, 2.0) == pytest.approx(math.exp(2.0))

    def test_ln1p_domain(self):
        with pytest.raises(NumericError):
            REFERENCE_FUNCTIONS["ln1p"].fourth_derivative_max(-1.0, 0.0)

    def test_unknown(self):
        with pytest.raises(KeyError):
            get_reference_function("tan")


class TestErrorAnalyzer:
    """Full comparison report."""

    @pytest.fixture(scope="class")
    def report(self):
        return ErrorAnalyzer().compare("ln1p", H, (0.0, 2.0), default_config(), probes=2000)

    def test_bounds(self, report):
        assert report.unit_m_bounds.bound_spline == pytest.approx(1.2418e-8, rel=1e-3)
        assert report.unit_m_bounds.bound_poly == pytest.approx(3.974e-8, rel=1e-3)
        assert report.bound_ratio == pytest.approx(3.2)
        assert report.bound_ratio_exact == "16/5"
        assert report.analytic_deriv_bound == 6.0

    def test_speed(self, report):
        assert report.datapath_cycles_per_sample == "2"
        assert report.horner_cycles_per_sample == 6
        assert report.cycle_ratio == 3.0

    def test_accuracy(self, report):
        assert report.window == (2 * H, 2.0 - 2 * H)
        assert 0.0 < report.empirical_spline_error <= report.quasi_interpolation_bound
        assert report.analytic_bounds.empirical_max == report.empirical_spline_error
        assert report.empirical_classical_error <= report.analytic_bounds.bound_poly

    def test_convergence(self, report):
        assert report.convergence_h_values == [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]
        assert 3.7 <= report.convergence_order <= 4.3

    def test_short_interval_skips_convergence(self):
        report = ErrorAnalyzer().compare("sin", 0.25, (0.0, 2.0), default_config(), probes=200)
        assert report.convergence_order is None
        assert report.notes["convergence"].startswith("not estimated")
