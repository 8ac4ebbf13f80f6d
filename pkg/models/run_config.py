"""
Run configuration for the command-line front end.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.datapath import FixedPointFormat
from models.spline import ExtensionRule


class Command(str, Enum):
    """CLI commands."""
    BASIS = "basis"
    APPROX = "approx"
    SIMULATE = "simulate"
    COMPARE = "compare"
    ROM = "rom"

    @property
    def needs_signal(self) -> bool:
        return self in (Command.APPROX, Command.SIMULATE, Command.COMPARE)


BUILTIN_FUNCTION_NAMES = ("ln1p", "sin", "exp")


class RunConfig(BaseModel):
    """
    One CLI invocation after flags, config file and settings are merged.

    Attributes:
        command: Which command to run
        input_path: Signal CSV (data-bearing commands)
        output_path: Destination file; stdout when absent
        h: Node spacing for built-in functions
        interval: (a, b) for built-in functions; command default when absent
        samples_per_segment: ROM words per subsection (K)
        format: Fixed-point word format
        extension_rule: Boundary extension; command default when absent
        function: Built-in function name
        probes: Probe count for basis tables and error measurements
        plot_path: Optional SVG chart destination
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    input_path: Optional[Path] = None
    output_path: Optional[Path] = None
    h: float = Field(default=1.0 / 32.0, gt=0.0)
    interval: Optional[Tuple[float, float]] = None
    samples_per_segment: int = Field(default=10, ge=1)
    format: FixedPointFormat = Field(default_factory=FixedPointFormat)
    extension_rule: Optional[ExtensionRule] = None
    function: Optional[str] = None
    probes: int = Field(default=10000, ge=2)
    plot_path: Optional[Path] = None

    @field_validator("interval", mode="before")
    @classmethod
    def parse_interval(cls, value: Any) -> Any:
        if isinstance(value, str):
            parts = value.split(":")
            if len(parts) != 2:
                raise ValueError(f"Interval must look like a:b, got {value!r}")
            return float(parts[0]), float(parts[1])
        return value

    @field_validator("format", mode="before")
    @classmethod
    def parse_format(cls, value: Any) -> Any:
        if isinstance(value, str):
            return FixedPointFormat.parse(value)
        return value

    @field_validator("extension_rule", mode="before")
    @classmethod
    def parse_rule(cls, value: Any) -> Any:
        if isinstance(value, str):
            return ExtensionRule.parse(value)
        return value

    @field_validator("function")
    @classmethod
    def known_function(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in BUILTIN_FUNCTION_NAMES:
            raise ValueError(f"Unknown function {value!r}; choose from {', '.join(BUILTIN_FUNCTION_NAMES)}")
        return value

    @model_validator(mode="after")
    def check_sources(self) -> "RunConfig":
        if self.interval is not None:
            a, b = self.interval
            if not b > a:
                raise ValueError(f"Interval end {b} must exceed start {a}")
        if self.command == Command.COMPARE:
            if self.function is None:
                raise ValueError("compare needs a built-in function")
        elif self.command.needs_signal:
            if (self.input_path is None) == (self.function is None):
                raise ValueError(f"{self.command.value} needs exactly one of --input or --function")
        return self
