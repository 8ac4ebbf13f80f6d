"""
Tests for the fixed-point datapath: quantization, ROM bank, register machine,
cycle accounting and the ROM image format.

Run with: pytest tests/test_datapath_sim.py -v
"""

import math
import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from models.analysis import ErrorBoundInput
from models.datapath import TRANSIENT_WINDOWS, CycleCosts, DatapathConfig, DatapathState, FixedPointFormat
from models.errors import DomainError, ParseError, RangeError, ShapeError
from models.spline import ExtensionRule, UniformGrid
from services.bspline_core import extend_signal, sample_function
from services.datapath_sim import (
    DatapathSimulator,
    build_rom_bank,
    cycle_report,
    dequantize,
    export_rom_image,
    parse_rom_image,
    preset,
    quantize,
    run_simulation,
    step_cycle,
    subsection_address,
    subsection_label,
)
from services.error_analysis import interior_window, quasi_interpolation_error_bound

GOLDEN = Path(__file__).parent / "golden" / "rom_k10_q16_14.txt"

ROM1 = (2731, 1991, 1398, 937, 590, 341, 175, 74, 22, 3)
ROM2 = (10923, 10767, 10333, 9669, 8826, 7851, 6794, 5704, 4631, 3624)


@pytest.fixture(scope="module")
def fmt():
    return FixedPointFormat()


@pytest.fixture(scope="module")
def config(fmt):
    return DatapathConfig(rom=build_rom_bank(10, fmt))


def run_to_end(state, config):
    while not state.finished:
        state = step_cycle(state, config)
    return state


class TestQuantize:
    """Q-format rounding and overflow."""

    def test_basis_peak(self, fmt):
        assert quantize(2.0 / 3.0, fmt) == 10923

    def test_round_half_even(self, fmt):
        assert quantize(0.5 / fmt.scale, fmt) == 0
        assert quantize(1.5 / fmt.scale, fmt) == 2
        assert quantize(2.5 / fmt.scale, fmt) == 2

    def test_range_limits(self, fmt):
        assert quantize(-2.0, fmt) == -32768
        assert quantize(fmt.max_value, fmt) == 32767
        with pytest.raises(RangeError):
            quantize(2.0, fmt)
        with pytest.raises(RangeError):
            quantize(math.nan, fmt)

    def test_unsigned_rejects_negative(self):
        unsigned = FixedPointFormat(total_bits=16, frac_bits=14, signed=False)
        with pytest.raises(RangeError):
            quantize(-0.25, unsigned)
        assert quantize(3.5, unsigned) == 57344

    def test_dequantize(self, fmt):
        assert dequantize(10923, fmt) == 10923 / 16384
        assert dequantize(quantize(0.75, fmt), fmt) == 0.75


class TestRomBank:
    """Quantized basis tables."""

    def test_golden_words(self, config):
        rom = config.rom
        assert rom.tables[0] == ROM1
        assert rom.tables[1] == ROM2

    def test_symmetry(self, config):
        tables = config.rom.tables
        for p in range(1, 10):
            assert tables[2][p] == tables[1][10 - p]
            assert tables[3][p] == tables[0][10 - p]
        assert tables[2][0] == tables[0][0]
        assert tables[3][0] == 0

    def test_column_sums(self, config):
        for p in range(10):
            total = sum(config.rom.word(j, p) for j in range(4))
            assert total in (16384, 16385)

    def test_single_sample_per_segment(self, fmt):
        rom = build_rom_bank(1, fmt)
        assert rom.tables == ((2731,), (10923,), (2731,), (0,))

    def test_invalid_k(self, fmt):
        with pytest.raises(ShapeError):
            build_rom_bank(0, fmt)

    def test_dequantized_table(self, config):
        assert config.rom.dequantized(1)[0] == pytest.approx(2.0 / 3.0, abs=2.0 ** -15)


class TestSubsections:
    """Two-bit ROM addressing."""

    def test_labels(self):
        assert [subsection_label(lane) for lane in range(4)] == ["00", "01", "10", "11"]
        assert subsection_address(3) == 3

    @pytest.mark.parametrize("lane", [-1, 4, True, 1.0])
    def test_bad_lane(self, lane):
        with pytest.raises(DomainError):
            subsection_address(lane)


class TestShiftRegister:
    """Pre-set, stepping and shifting."""

    def test_preset(self, fmt):
        state = preset([1.0, 1.5, 0.5], fmt)
        assert state.shift_register == (0, 0, 0, 16384)
        assert state.window == -3
        assert state.addr == 0
        assert state.cycle == 0

    def test_shift_after_wrap(self, fmt, config):
        state = preset([1.0, 1.5, 0.5], fmt)
        for _ in range(10):
            state = step_cycle(state, config)
        assert state.shift_register == (0, 0, 16384, 24576)
        assert state.addr == 0
        assert state.window == -2
        assert state.shifts == 1

    def test_single_lane_reads_rom4(self, fmt, config):
        state = preset([1.0, 0.0], fmt)
        for p in range(10):
            state = step_cycle(state, config)
            assert state.outputs[-1] == config.rom.word(3, p)

    def test_constant_stream_steady_state(self, fmt, config):
        state = run_to_end(preset([1.0] * 8, fmt), config)
        steady = state.outputs[30:]
        assert steady
        for word in steady:
            assert abs(word - 16384) <= 4

    def test_lanes_read_in_lockstep(self, fmt, config):
        state = run_to_end(preset([0.25] * 6, fmt), config)
        assert len(set(state.rom_reads)) == 1
        assert state.rom_reads[0] == len(state.outputs)

    def test_stream_end_is_a_flag(self, fmt, config):
        state = run_to_end(preset([0.5, 0.5], fmt), config)
        assert state.finished
        assert len(state.outputs) == 20
        assert step_cycle(state, config) is state

    def test_saturation_flag(self, fmt, config):
        state = preset([fmt.max_value] * 5, fmt)
        for _ in range(30):
            state = step_cycle(state, config)
        assert state.window == 0
        state = step_cycle(state, config)
        assert state.saturated[-1]
        assert state.outputs[-1] == fmt.max_word

    def test_empty_stream(self, fmt):
        with pytest.raises(ShapeError):
            preset([], fmt)

    def test_overflow_names_index(self, fmt):
        with pytest.raises(RangeError) as info:
            preset([0.5, 9.0], fmt)
        assert info.value.index == 1


class TestCycleReport:
    """Declared cycle model."""

    def test_defaults(self, config):
        report = cycle_report(100, config)
        assert report.total_cycles == 200
        assert report.cycles_per_sample == Fraction(2)
        assert report.preset_cycles == 0
        assert "4 multipliers" in report.model_description

    def test_shift_amortized(self, fmt):
        shifted = DatapathConfig(rom=build_rom_bank(10, fmt), cycle_costs=CycleCosts(shift=1))
        report = cycle_report(100, shifted)
        assert report.cycles_per_sample == Fraction(21, 10)
        assert report.total_cycles == 210
        assert report.preset_cycles == 1

    def test_serialized_rate(self, config):
        assert cycle_report(10, config).model_dump(mode="json")["cycles_per_sample"] == "2"

    def test_negative_samples(self, config):
        with pytest.raises(ShapeError):
            cycle_report(-1, config)


class TestRunSimulation:
    """Whole-signal runs."""

    def test_constant_signal(self, fmt):
        grid = UniformGrid.from_step(0.0, 7.0, 1.0)
        quadratic = DatapathConfig(rom=build_rom_bank(10, fmt), extension_rule=ExtensionRule.QUADRATIC)
        result = run_simulation(extend_signal([1.0] * 8, grid), quadratic)

        assert len(result.outputs) == 100
        assert len(result.interior_indices) == 70
        assert sum(result.transient) == 30
        for i in result.interior_indices:
            assert abs(result.outputs[i] - 1.0) <= 2.0 ** -12
        assert result.report.total_cycles == 200

    def test_output_positions(self, config):
        grid = UniformGrid.from_step(0.0, 7.0, 1.0)
        result = run_simulation(extend_signal([0.5] * 8, grid), config)
        assert result.xs[30] == 0.0
        assert result.xs[31] == pytest.approx(0.1)
        assert result.xs[-1] == pytest.approx(6.9)
        assert result.reference[29] is None
        assert result.reference[30] is not None

    def test_register_startup_trace(self, config, fmt):
        grid = UniformGrid.from_step(0.0, 2.0, 1.0 / 32.0)
        signal = extend_signal(sample_function(math.log1p, grid), grid, rule="zero-pad")
        result = run_simulation(signal, config)

        from services.bspline_core import compute_coefficients
        coeffs = compute_coefficients(signal)
        q = [quantize(coeffs.coefficient(i), fmt) for i in (-1, 0)]
        assert result.register_trace[0] == (0, 0, 0, q[0])
        assert result.register_trace[1] == (0, 0, q[0], q[1])

    def test_ln1p_fidelity(self, config):
        grid = UniformGrid.from_step(0.0, 2.0, 1.0 / 32.0)
        result = run_simulation(extend_signal(sample_function(math.log1p, grid), grid), config)
        assert result.max_reference_gap() <= 5 * 2.0 ** -15
        assert not result.any_saturation

    def test_zero_signal(self, config):
        grid = UniformGrid.from_step(0.0, 1.0, 0.125)
        result = run_simulation(extend_signal([0.0] * 9, grid), config)
        assert all(value == 0.0 for value in result.outputs)
        assert not result.any_saturation

    def test_overflow_reports_coefficient(self, config):
        grid = UniformGrid.from_step(0.0, 1.0, 0.125)
        with pytest.raises(RangeError) as info:
            run_simulation(extend_signal([3.0] * 9, grid, rule="zero-pad"), config)
        assert info.value.index == 0
        assert "b[0]" in str(info.value)

    def test_machine_matches_cycle_model_with_shift(self, fmt):
        shifted = DatapathConfig(rom=build_rom_bank(10, fmt), cycle_costs=CycleCosts(shift=1))
        grid = UniformGrid.from_step(0.0, 1.0, 0.125)
        result = run_simulation(extend_signal([0.5] * 9, grid), shifted)
        assert result.report.total_cycles == len(result.outputs) * 2 + len(result.outputs) // 10


class TestRomImage:
    """Bit-exact ROM export."""

    def test_matches_golden(self, config):
        assert export_rom_image(config.rom) == GOLDEN.read_text()

    def test_parse_round_trip(self, config):
        assert parse_rom_image(export_rom_image(config.rom)) == config.rom

    def test_negative_words_round_trip(self, fmt):
        from models.datapath import RomBank
        rom = RomBank(format=fmt, samples_per_segment=1, tables=((-1,), (-32768,), (5,), (0,)))
        text = export_rom_image(rom)
        assert "FFFF" in text and "8000" in text
        assert parse_rom_image(text) == rom

    def test_missing_header(self):
        with pytest.raises(ParseError):
            parse_rom_image("#ROM1\n0001\n")

    def test_bad_word_line_number(self):
        with pytest.raises(ParseError) as info:
            parse_rom_image("#format 16 14 s 1\n#ROM1\nZZZZ\n")
        assert info.value.line == 3

    def test_simulator_service(self, config):
        simulator = DatapathSimulator(config)
        assert simulator.rom_image() == GOLDEN.read_text()
        assert simulator.cycle_report(50).total_cycles == 100


class TestDatapathProperties:
    """Determinism, word-width monotonicity and agreement with the analytic function."""

    def test_runs_are_bit_identical(self, config):
        grid = UniformGrid.from_step(0.0, 2.0, 1.0 / 32.0)
        signal = extend_signal(sample_function(math.sin, grid), grid)
        first = run_simulation(signal, config)
        second = run_simulation(signal, config)
        assert first.words == second.words
        assert first.register_trace == second.register_trace
        assert first.report == second.report

    def test_default_state_starts_in_transient(self, fmt):
        assert DatapathState().window == -TRANSIENT_WINDOWS
        assert preset([1.0], fmt).window == -TRANSIENT_WINDOWS

    def test_wider_words_keep_unsaturated_outputs(self):
        narrow_fmt = FixedPointFormat(total_bits=16, frac_bits=14)
        wide_fmt = FixedPointFormat(total_bits=18, frac_bits=14)
        narrow = DatapathConfig(rom=build_rom_bank(10, narrow_fmt))
        wide = DatapathConfig(rom=build_rom_bank(10, wide_fmt))
        peak = narrow_fmt.max_value
        stream = [peak, peak, peak, 1.0, -0.5, 0.25]

        narrow_state = run_to_end(preset(stream, narrow_fmt), narrow)
        wide_state = run_to_end(preset(stream, wide_fmt), wide)

        assert any(narrow_state.saturated)
        assert not any(wide_state.saturated)
        for i, clipped in enumerate(narrow_state.saturated):
            if not clipped:
                assert narrow_state.outputs[i] == wide_state.outputs[i]

    def test_agrees_with_ln1p(self, config):
        grid = UniformGrid.from_step(0.0, 2.0, 1.0 / 32.0)
        result = run_simulation(extend_signal(sample_function(math.log1p, grid), grid), config)
        lo, hi = interior_window(grid, 2)
        budget = 5 * 2.0 ** -15 + quasi_interpolation_error_bound(ErrorBoundInput(h=grid.h, deriv_bound=6.0))

        checked = 0
        for i in result.interior_indices:
            x = result.xs[i]
            if lo <= x <= hi:
                assert abs(result.outputs[i] - math.log1p(x)) <= budget
                checked += 1
        assert checked > 500
