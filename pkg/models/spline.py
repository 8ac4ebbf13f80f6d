"""
Spline data models: the sampling lattice, sampled signals and smoothing coefficients.
"""

import math
from enum import Enum
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.errors import ShapeError


class ExtensionRule(str, Enum):
    """How samples outside [a, b] are produced."""
    ZERO_PAD = "zero-pad"
    LINEAR = "linear-extrapolate"
    QUADRATIC = "quadratic-extrapolate"

    @classmethod
    def parse(cls, name: "str | ExtensionRule") -> "ExtensionRule":
        """Resolve a rule from its name or one of the short CLI aliases."""
        if isinstance(name, ExtensionRule):
            return name
        key = name.strip().lower()
        aliases = {
            "zero": cls.ZERO_PAD,
            "zero-pad": cls.ZERO_PAD,
            "linear": cls.LINEAR,
            "linear-extrapolate": cls.LINEAR,
            "quadratic": cls.QUADRATIC,
            "quadratic-extrapolate": cls.QUADRATIC,
        }
        if key not in aliases:
            raise ValueError(f"Unknown extension rule: {name!r}")
        return aliases[key]

    @property
    def fit_order(self) -> int:
        """Number of interior samples the rule fits (0 for zero padding)."""
        return {ExtensionRule.ZERO_PAD: 0, ExtensionRule.LINEAR: 2, ExtensionRule.QUADRATIC: 3}[self]


class SplineDegree(BaseModel):
    """Degree of the spline. Only the cubic case exists."""
    model_config = ConfigDict(frozen=True)

    value: Literal[3] = 3

    @property
    def margin(self) -> int:
        """Extension samples needed per side for the three-point coefficient stencil."""
        return (self.value + 1) // 2


CUBIC = SplineDegree()


class UniformGrid(BaseModel):
    """
    Uniform sampling lattice on [a, b].

    Attributes:
        a: Interval start
        b: Interval end
        h: Node spacing
        n: Number of interior nodes, at a + r*h for r = 0 .. n-1
    """
    model_config = ConfigDict(frozen=True)

    a: float
    b: float
    h: float = Field(gt=0.0)
    n: int = Field(ge=4)

    @model_validator(mode="after")
    def check_lattice(self) -> "UniformGrid":
        if not self.b > self.a:
            raise ValueError(f"Interval end {self.b} must exceed start {self.a}")
        steps = (self.b - self.a) / self.h
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"Step {self.h} does not divide [{self.a}, {self.b}]")
        if round(steps) + 1 != self.n:
            raise ValueError(f"Node count {self.n} does not match {round(steps) + 1} lattice points")
        return self

    @classmethod
    def from_step(cls, a: float, b: float, h: float, tolerance: float = 1e-9) -> "UniformGrid":
        """Build the grid for [a, b] with spacing h, raising ShapeError on a bad lattice."""
        if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(h)):
            raise ShapeError("Grid parameters must be finite")
        if h <= 0:
            raise ShapeError(f"Node spacing must be positive, got {h}")
        if not b > a:
            raise ShapeError(f"Interval end {b} must exceed start {a}")
        steps = (b - a) / h
        if abs(steps - round(steps)) > tolerance * max(1.0, steps):
            raise ShapeError(f"Step {h} does not divide [{a}, {b}] (ratio {steps})")
        n = int(round(steps)) + 1
        if n < 4:
            raise ShapeError(f"A cubic spline needs at least 4 nodes, got {n}")
        return cls(a=a, b=b, h=h, n=n)

    @property
    def intervals(self) -> int:
        """Number of knot intervals."""
        return self.n - 1

    def node(self, r: int) -> float:
        """Position of node r (r may lie outside 0 .. n-1)."""
        return self.a + r * self.h

    def nodes(self, margin: int = 0) -> np.ndarray:
        """Node positions, optionally including `margin` extension nodes per side."""
        return self.a + self.h * np.arange(-margin, self.n + margin, dtype=float)

    def refined(self, factor: int) -> "UniformGrid":
        """Grid with `factor` times as many intervals over the same [a, b]."""
        return UniformGrid(a=self.a, b=self.b, h=self.h / factor, n=self.intervals * factor + 1)


class SampledSignal(BaseModel):
    """
    Node values of f on a grid, extended by `margin` samples on each side.

    Attributes:
        grid: Sampling lattice
        values: f_r for r = -margin .. n-1+margin
        margin: Extension samples per side
        extension_rule: Rule that produced the exterior samples
    """
    model_config = ConfigDict(frozen=True)

    grid: UniformGrid
    values: Tuple[float, ...]
    margin: int = Field(ge=0)
    extension_rule: ExtensionRule = ExtensionRule.QUADRATIC

    @model_validator(mode="after")
    def check_length(self) -> "SampledSignal":
        expected = self.grid.n + 2 * self.margin
        if len(self.values) != expected:
            raise ValueError(f"Expected {expected} values, got {len(self.values)}")
        return self

    @property
    def interior(self) -> Tuple[float, ...]:
        """Samples at the grid nodes only."""
        return self.values[self.margin:self.margin + self.grid.n]

    def stored(self, r: int) -> Optional[float]:
        """Stored value f_r, or None if r lies beyond the stored margin."""
        position = r + self.margin
        if 0 <= position < len(self.values):
            return self.values[position]
        return None


class CoefficientVector(BaseModel):
    """
    Smoothing coefficients b_i for i = -1 .. n.

    Attributes:
        grid: Sampling lattice the coefficients belong to
        coeffs: b_{-1} .. b_n in storage order
        index_offset: Storage position of b_0
    """
    model_config = ConfigDict(frozen=True)

    grid: UniformGrid
    coeffs: Tuple[float, ...]
    index_offset: int = 1

    @model_validator(mode="after")
    def check_length(self) -> "CoefficientVector":
        if len(self.coeffs) != self.grid.n + 2:
            raise ValueError(f"Expected {self.grid.n + 2} coefficients, got {len(self.coeffs)}")
        return self

    def coefficient(self, i: int) -> float:
        """Coefficient b_i by logical index."""
        position = i + self.index_offset
        if not 0 <= position < len(self.coeffs):
            raise IndexError(f"Coefficient index {i} outside -1 .. {self.grid.n}")
        return self.coeffs[position]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)
