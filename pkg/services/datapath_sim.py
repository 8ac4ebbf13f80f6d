"""
Cycle-stepped fixed-point simulation of the parallel spline datapath.

The machine holds one cubic basis spline split over four ROM subsections,
a four-slot left-shifting coefficient register, four multipliers that run in
the same cycle, and a four-input summator. The address counter walks the K
samples of each subsection; every K outputs the register shifts left and
loads the next coefficient.
"""

import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from models.datapath import (
    SUBSECTIONS,
    TRANSIENT_WINDOWS,
    CycleCosts,
    CycleReport,
    DatapathConfig,
    DatapathState,
    FixedPointFormat,
    RomBank,
    SimulationResult,
)
from models.errors import DomainError, ParseError, RangeError, ShapeError
from models.spline import CUBIC, CoefficientVector, ExtensionRule, SampledSignal, UniformGrid
from services.bspline_core import compute_coefficients, eval_basis, evaluate_spline, extend_signal
from config import Settings, get_logger, get_settings

logger = get_logger(__name__)

# Left end of the basis argument interval stored in ROM1 .. ROM4
SUBSECTION_STARTS = (1.0, 0.0, -1.0, -2.0)

MODEL_DESCRIPTION = (
    "4 multipliers in parallel ({multiply} cycle(s)), one 4-input summator "
    "({summator} cycle(s)), register shift {shift} cycle(s) per {k} samples; "
    "pre-set load reported separately"
)


def quantize(value: float, fmt: FixedPointFormat) -> int:
    """
    Round-to-nearest-even fixed-point word for `value`.

    Raises:
        RangeError: the rounded word does not fit the format
    """
    if not math.isfinite(value):
        raise RangeError(f"Cannot quantize non-finite value {value}", value=value)
    word = round(value * fmt.scale)
    if word > fmt.max_word or word < fmt.min_word:
        raise RangeError(
            f"{value} overflows {fmt.label} (range [{fmt.min_value}, {fmt.max_value}])",
            value=value,
        )
    return word


def dequantize(word: int, fmt: FixedPointFormat) -> float:
    return word / fmt.scale


def _round_shift(value: int, shift: int) -> int:
    """value / 2**shift rounded to nearest, ties to even."""
    if shift == 0:
        return value
    quotient, remainder = divmod(value, 1 << shift)
    half = 1 << (shift - 1)
    if remainder > half or (remainder == half and quotient & 1):
        quotient += 1
    return quotient


def build_rom_bank(samples_per_segment: int, fmt: FixedPointFormat) -> RomBank:
    """
    Quantized basis samples for the four subsections.

    Subsection j samples B3 at x_j + p/K for p = 0 .. K-1, x_j being the left
    end of its interval, so address 0 lines up with a knot.
    """
    if samples_per_segment < 1:
        raise ShapeError(f"Need at least one sample per segment, got {samples_per_segment}")
    k = samples_per_segment
    tables = tuple(
        tuple(quantize(eval_basis(start + p / k), fmt) for p in range(k))
        for start in SUBSECTION_STARTS
    )
    logger.debug(f"Built ROM bank: {SUBSECTIONS} x {k} words in {fmt.label}")
    return RomBank(format=fmt, samples_per_segment=k, tables=tables)


def subsection_address(lane: int) -> int:
    """
    Two-bit subsection code for a multiplier lane.

    Lane 0 pairs with b_{k-1} and always reads [1, 2) (code 00); lane 3 pairs
    with b_{k+2} and reads [-2, -1) (code 11).
    """
    if isinstance(lane, bool) or not isinstance(lane, int) or not 0 <= lane < SUBSECTIONS:
        raise DomainError(f"Lane must be 0..3, got {lane!r}")
    return lane


def subsection_label(lane: int) -> str:
    return format(subsection_address(lane), "02b")


def preset(
    coeffs: Union[CoefficientVector, Sequence[float]],
    fmt: FixedPointFormat,
) -> DatapathState:
    """
    Initial machine state: register {0, 0, 0, first coefficient}, counters at zero.

    Raises:
        ShapeError: empty coefficient stream
        RangeError: a coefficient overflows the format; carries its index
    """
    if isinstance(coeffs, CoefficientVector):
        values = coeffs.coeffs
        offset = coeffs.index_offset
    else:
        values = tuple(float(c) for c in coeffs)
        offset = 0
    if not values:
        raise ShapeError("Coefficient stream is empty")

    stream = []
    for position, value in enumerate(values):
        try:
            stream.append(quantize(value, fmt))
        except RangeError as e:
            index = position - offset
            raise RangeError(f"Coefficient b[{index}] = {value}: {e}", value=value, index=index) from e

    return DatapathState(
        shift_register=(0, 0, 0, stream[0]),
        stream=tuple(stream),
        stream_pos=1,
        window=-TRANSIENT_WINDOWS,
    )


def step_cycle(state: DatapathState, config: DatapathConfig) -> DatapathState:
    """
    Produce one output sample.

    All four lanes read the same address, one word from each subsection,
    multiply in parallel, and the summator adds the products. When the address
    counter wraps, the register shifts left and loads the next coefficient; an
    exhausted stream marks the state finished instead.
    """
    if state.finished:
        return state

    fmt = config.format
    acc_min, acc_max = fmt.accumulator_limits()
    rom = config.rom
    costs = config.cycle_costs
    saturated = False

    lanes = []
    for lane in range(SUBSECTIONS):
        product = state.shift_register[lane] * rom.word(subsection_address(lane), state.addr)
        if product > acc_max or product < acc_min:
            product = min(max(product, acc_min), acc_max)
            saturated = True
        lanes.append(product)

    summator = sum(lanes)
    if summator > acc_max or summator < acc_min:
        summator = min(max(summator, acc_min), acc_max)
        saturated = True

    word, clipped = fmt.saturate(_round_shift(summator, fmt.frac_bits))
    saturated = saturated or clipped
    if saturated:
        logger.warning(f"Saturation at output {len(state.outputs)} (window {state.window}, addr {state.addr})")

    reads = tuple(count + 1 for count in state.rom_reads)
    cycle = state.cycle + costs.multiply + costs.summator
    addr = state.addr + 1
    register = state.shift_register
    window = state.window
    stream_pos = state.stream_pos
    shifts = state.shifts
    finished = False

    if addr == rom.samples_per_segment:
        addr = 0
        cycle += costs.shift
        if stream_pos < len(state.stream):
            register = register[1:] + (state.stream[stream_pos],)
            stream_pos += 1
            window += 1
            shifts += 1
        else:
            finished = True

    return state.model_copy(update={
        "cycle": cycle,
        "addr": addr,
        "window": window,
        "shift_register": register,
        "lanes": tuple(lanes),
        "summator": summator,
        "outputs": state.outputs + (word,),
        "saturated": state.saturated + (saturated,),
        "stream_pos": stream_pos,
        "finished": finished,
        "rom_reads": reads,
        "shifts": shifts,
    })


def cycle_report(samples: int, config: DatapathConfig) -> CycleReport:
    """
    Cycles for `samples` outputs in steady state.

    cycles_per_sample = multiply + summator + shift / K.
    """
    if samples < 0:
        raise ShapeError(f"Sample count must be non-negative, got {samples}")
    costs = config.cycle_costs
    k = config.samples_per_segment
    rate = Fraction(costs.multiply + costs.summator) + Fraction(costs.shift, k)
    return CycleReport(
        total_cycles=math.ceil(samples * rate),
        cycles_per_sample=rate,
        samples=samples,
        preset_cycles=costs.shift,
        model_description=MODEL_DESCRIPTION.format(
            multiply=costs.multiply, summator=costs.summator, shift=costs.shift, k=k
        ),
    )


def output_positions(grid: UniformGrid, samples: int, k: int) -> Tuple[List[float], List[bool]]:
    """x position and transient flag of each output sample in stream order."""
    xs, transient = [], []
    for j in range(samples):
        window = j // k - TRANSIENT_WINDOWS
        phase = j % k
        xs.append(grid.node(window) + phase * grid.h / k)
        transient.append(window < 0)
    return xs, transient


def run_simulation(signal: SampledSignal, config: DatapathConfig) -> SimulationResult:
    """
    Stream a sampled signal through the datapath.

    Coefficients come from the three-point formula on the signal re-extended
    with config.extension_rule. Outputs are K samples per knot interval at the
    ROM sampling phases; the first 3K are flagged transient.

    Raises:
        RangeError: a coefficient overflows the word format
    """
    grid = signal.grid
    if signal.extension_rule != config.extension_rule or signal.margin < CUBIC.margin:
        signal = extend_signal(
            signal.interior, grid,
            margin=max(signal.margin, CUBIC.margin),
            rule=config.extension_rule,
        )
    coeffs = compute_coefficients(signal)
    fmt = config.format
    k = config.samples_per_segment

    state = preset(coeffs, fmt)
    trace = [state.shift_register]
    while not state.finished:
        previous_shifts = state.shifts
        state = step_cycle(state, config)
        if state.shifts > previous_shifts:
            trace.append(state.shift_register)

    samples = len(state.outputs)
    report = cycle_report(samples, config)
    if report.total_cycles != state.cycle:
        logger.warning(f"Cycle model predicts {report.total_cycles}, machine counted {state.cycle}")

    xs, transient = output_positions(grid, samples, k)
    interior = [i for i, flag in enumerate(transient) if not flag]
    reference: List[Optional[float]] = [None] * samples
    if interior:
        values = evaluate_spline(coeffs, [xs[i] for i in interior])
        for i, value in zip(interior, values):
            reference[i] = float(value)

    logger.info(
        f"Simulated {samples} samples ({len(interior)} interior) in {state.cycle} cycles, "
        f"saturation={'yes' if any(state.saturated) else 'no'}"
    )
    return SimulationResult(
        xs=tuple(xs),
        outputs=tuple(dequantize(w, fmt) for w in state.outputs),
        words=state.outputs,
        transient=tuple(transient),
        saturated=state.saturated,
        reference=tuple(reference),
        register_trace=tuple(trace),
        report=report,
    )


def export_rom_image(rom: RomBank) -> str:
    """
    Text image of a ROM bank.

    A `#format T F s|u K` header, then `#ROM1` .. `#ROM4` sections with one
    two's-complement uppercase hex word per line.
    """
    fmt = rom.format
    mask = (1 << fmt.total_bits) - 1
    width = fmt.hex_width
    lines = [f"#format {fmt.total_bits} {fmt.frac_bits} {'s' if fmt.signed else 'u'} {rom.samples_per_segment}"]
    for j, table in enumerate(rom.tables):
        lines.append(f"#ROM{j + 1}")
        lines.extend(f"{word & mask:0{width}X}" for word in table)
    return "\n".join(lines) + "\n"


def parse_rom_image(text: str) -> RomBank:
    """Inverse of export_rom_image."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#format "):
        raise ParseError("ROM image must start with a #format header", line=1)
    try:
        total, frac, sign, k = lines[0].split()[1:]
        fmt = FixedPointFormat(total_bits=int(total), frac_bits=int(frac), signed=sign == "s")
        k = int(k)
    except ValueError as e:
        raise ParseError(f"Bad #format header: {e}", line=1) from e

    tables: List[List[int]] = []
    for number, line in enumerate(lines[1:], start=2):
        if line.startswith("#ROM"):
            tables.append([])
            continue
        if not tables:
            raise ParseError("Word before the first #ROM section", line=number)
        try:
            word = int(line, 16)
        except ValueError as e:
            raise ParseError(f"Not a hex word: {line!r}", line=number) from e
        if fmt.signed and word >= 1 << (fmt.total_bits - 1):
            word -= 1 << fmt.total_bits
        tables[-1].append(word)

    try:
        return RomBank(format=fmt, samples_per_segment=k, tables=tuple(tuple(t) for t in tables))
    except ValueError as e:
        raise ParseError(f"Inconsistent ROM image: {e}") from e


def default_config(settings: Optional[Settings] = None, **overrides) -> DatapathConfig:
    """Datapath configuration from settings, with keyword overrides for fmt, k and rule."""
    settings = settings or get_settings()
    fmt = overrides.get("fmt") or FixedPointFormat(
        total_bits=settings.total_bits, frac_bits=settings.frac_bits, signed=settings.signed
    )
    k = overrides.get("k") or settings.samples_per_segment
    rule = ExtensionRule.parse(overrides.get("rule") or settings.datapath_extension_rule)
    return DatapathConfig(
        rom=build_rom_bank(k, fmt),
        extension_rule=rule,
        cycle_costs=CycleCosts(
            multiply=settings.multiply_cycles,
            summator=settings.summator_cycles,
            shift=settings.shift_cycles,
        ),
    )


class DatapathSimulator:
    """
    Service wrapper around the datapath state machine.

    Features:
    - Builds the ROM bank and cycle model from settings
    - Runs sampled signals and keeps the last result
    - Exports the ROM image
    """

    def __init__(self, config: Optional[DatapathConfig] = None):
        self.settings = get_settings()
        self.config = config or default_config(self.settings)
        self.last_result: Optional[SimulationResult] = None

    def run(self, signal: SampledSignal) -> SimulationResult:
        self.last_result = run_simulation(signal, self.config)
        return self.last_result

    def cycle_report(self, samples: int) -> CycleReport:
        return cycle_report(samples, self.config)

    def rom_image(self) -> str:
        return export_rom_image(self.config.rom)
