"""
Data models for the fixed-point parallel datapath: number format, ROM bank,
cycle model, machine state and simulation results.
"""

import math
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, model_validator

from models.spline import ExtensionRule

# Largest basis value a ROM must hold: B3(0)
ROM_PEAK = 2.0 / 3.0

SUBSECTIONS = 4

# Windows whose register still holds pre-set zeros
TRANSIENT_WINDOWS = 3


class FixedPointFormat(BaseModel):
    """
    Q-format word description.

    Attributes:
        total_bits: Word length including the sign bit
        frac_bits: Fraction bits
        signed: Two's-complement words when True
    """
    model_config = ConfigDict(frozen=True)

    total_bits: int = 16
    frac_bits: int = 14
    signed: bool = True

    @model_validator(mode="after")
    def check_widths(self) -> "FixedPointFormat":
        if not 0 < self.frac_bits < self.total_bits <= 64:
            raise ValueError(
                f"Need 0 < frac_bits < total_bits <= 64, got {self.frac_bits}/{self.total_bits}"
            )
        if self.max_value < ROM_PEAK:
            raise ValueError(f"Format {self.label} cannot hold the basis peak 2/3")
        return self

    @classmethod
    def parse(cls, text: str) -> "FixedPointFormat":
        """Parse the CLI notation T:F:s or T:F:u."""
        parts = text.strip().split(":")
        if len(parts) != 3 or parts[2] not in ("s", "u"):
            raise ValueError(f"Format must look like 16:14:s, got {text!r}")
        return cls(total_bits=int(parts[0]), frac_bits=int(parts[1]), signed=parts[2] == "s")

    @property
    def label(self) -> str:
        return f"{self.total_bits}:{self.frac_bits}:{'s' if self.signed else 'u'}"

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    @property
    def lsb(self) -> float:
        return 1.0 / self.scale

    @property
    def min_word(self) -> int:
        return -(1 << (self.total_bits - 1)) if self.signed else 0

    @property
    def max_word(self) -> int:
        return (1 << (self.total_bits - 1)) - 1 if self.signed else (1 << self.total_bits) - 1

    @property
    def min_value(self) -> float:
        return self.min_word / self.scale

    @property
    def max_value(self) -> float:
        return self.max_word / self.scale

    @property
    def hex_width(self) -> int:
        return math.ceil(self.total_bits / 4)

    def accumulator_limits(self) -> Tuple[int, int]:
        """Word range of the double-width accumulator (2*frac_bits fraction bits)."""
        bits = 2 * self.total_bits
        if self.signed:
            return -(1 << (bits - 1)), (1 << (bits - 1)) - 1
        return 0, (1 << bits) - 1

    def saturate(self, word: int) -> Tuple[int, bool]:
        """Clamp a word into range; the flag is True when clamping happened."""
        if word > self.max_word:
            return self.max_word, True
        if word < self.min_word:
            return self.min_word, True
        return word, False


class RomBank(BaseModel):
    """
    Four subsection tables of quantized basis samples.

    tables[0] .. tables[3] are ROM1 .. ROM4, covering the basis argument
    intervals [1, 2), [0, 1), [-1, 0) and [-2, -1).
    """
    model_config = ConfigDict(frozen=True)

    format: FixedPointFormat
    samples_per_segment: int = Field(ge=1)
    tables: Tuple[Tuple[int, ...], ...]

    @model_validator(mode="after")
    def check_tables(self) -> "RomBank":
        if len(self.tables) != SUBSECTIONS:
            raise ValueError(f"A ROM bank has {SUBSECTIONS} subsections, got {len(self.tables)}")
        for j, table in enumerate(self.tables):
            if len(table) != self.samples_per_segment:
                raise ValueError(
                    f"ROM{j + 1} holds {len(table)} words, expected {self.samples_per_segment}"
                )
        return self

    def word(self, subsection: int, addr: int) -> int:
        return self.tables[subsection][addr]

    def dequantized(self, subsection: int) -> np.ndarray:
        return np.asarray(self.tables[subsection], dtype=float) / self.format.scale


class CycleCosts(BaseModel):
    """Clock cycles charged per datapath action."""
    model_config = ConfigDict(frozen=True)

    multiply: int = Field(default=1, ge=1)
    summator: int = Field(default=1, ge=1)
    shift: int = Field(default=0, ge=0, le=1)


class DatapathConfig(BaseModel):
    """ROM contents, boundary rule for the coefficient generator, and the cycle model."""
    model_config = ConfigDict(frozen=True)

    rom: RomBank
    extension_rule: ExtensionRule = ExtensionRule.ZERO_PAD
    cycle_costs: CycleCosts = Field(default_factory=CycleCosts)

    @property
    def format(self) -> FixedPointFormat:
        return self.rom.format

    @property
    def samples_per_segment(self) -> int:
        return self.rom.samples_per_segment


class DatapathState(BaseModel):
    """
    Immutable snapshot of the machine.

    Attributes:
        cycle: Elapsed clock cycles
        addr: Address counter CT, 0 <= addr < K
        window: Knot interval k whose coefficients sit in the register
        shift_register: [b_{k-1}, b_k, b_{k+1}, b_{k+2}] as words
        lanes: Last four multiplier products (accumulator words)
        summator: Last summator value (accumulator word)
        outputs: Output words emitted so far
        saturated: Per-output saturation flags
        stream: Quantized coefficient stream, b_{-1} first
        stream_pos: Next stream element to load
        finished: True once a wrap found the stream exhausted
        rom_reads: Read count per subsection
        shifts: Register shifts performed
    """
    model_config = ConfigDict(frozen=True)

    cycle: int = 0
    addr: int = 0
    window: int = -TRANSIENT_WINDOWS
    shift_register: Tuple[int, int, int, int] = (0, 0, 0, 0)
    lanes: Tuple[int, int, int, int] = (0, 0, 0, 0)
    summator: int = 0
    outputs: Tuple[int, ...] = ()
    saturated: Tuple[bool, ...] = ()
    stream: Tuple[int, ...] = ()
    stream_pos: int = 0
    finished: bool = False
    rom_reads: Tuple[int, int, int, int] = (0, 0, 0, 0)
    shifts: int = 0


class CycleReport(BaseModel):
    """Cycle accounting under a declared model."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    total_cycles: int
    cycles_per_sample: Fraction
    samples: int
    preset_cycles: int = 0
    model_description: str

    @field_serializer("cycles_per_sample")
    def _serialize_rate(self, value: Fraction) -> str:
        return str(value)

    @property
    def rate(self) -> float:
        return float(self.cycles_per_sample)


class SimulationResult(BaseModel):
    """Everything one datapath run produces."""
    model_config = ConfigDict(frozen=True)

    xs: Tuple[float, ...]
    outputs: Tuple[float, ...]
    words: Tuple[int, ...]
    transient: Tuple[bool, ...]
    saturated: Tuple[bool, ...]
    reference: Tuple[Optional[float], ...]
    register_trace: Tuple[Tuple[int, int, int, int], ...]
    report: CycleReport

    @property
    def interior_indices(self) -> list:
        return [i for i, flag in enumerate(self.transient) if not flag]

    @property
    def any_saturation(self) -> bool:
        return any(self.saturated)

    def max_reference_gap(self) -> float:
        """Largest |fixed - float| over non-transient outputs."""
        gaps = [
            abs(self.outputs[i] - self.reference[i])
            for i in self.interior_indices
            if self.reference[i] is not None
        ]
        return max(gaps, default=0.0)
