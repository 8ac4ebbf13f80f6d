"""
Cubic basic-spline core for the signal approximation workbench.

Floating-point reference implementation: the cubic basis at h = 1, boundary
extension of sampled signals, the three-point smoothing-coefficient formula and
local four-term spline evaluation.
"""

import math
from typing import Callable, Iterable, List, Sequence, Union

import numpy as np

from models.errors import DomainError, ShapeError
from models.spline import (
    CUBIC,
    CoefficientVector,
    ExtensionRule,
    SampledSignal,
    UniformGrid,
)
from config import get_logger

logger = get_logger(__name__)

SUPPORT_RADIUS = 2.0


def eval_basis(x: float) -> float:
    """
    Cubic basic spline B3 at unit spacing.

    Both signs go through |x| so B3(x) == B3(-x) bit for bit.

    Raises:
        DomainError: x is NaN or infinite
    """
    if not math.isfinite(x):
        raise DomainError(f"Basis argument must be finite, got {x}", value=x)
    ax = abs(x)
    if ax >= SUPPORT_RADIUS:
        return 0.0
    if ax >= 1.0:
        s = 2.0 - ax
        return s * s * s / 6.0
    s = 1.0 - ax
    return (1.0 + 3.0 * s + 3.0 * s * s - 3.0 * s * s * s) / 6.0


def eval_basis_array(xs: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    """Vectorized eval_basis with the same branch arithmetic."""
    x = np.asarray(xs, dtype=float)
    finite = np.isfinite(x)
    if not np.all(finite):
        bad = int(np.flatnonzero(~finite.ravel())[0])
        raise DomainError(f"Basis argument at index {bad} is not finite", index=bad)
    ax = np.abs(x)
    out = np.zeros_like(ax)

    outer = (ax >= 1.0) & (ax < SUPPORT_RADIUS)
    s = 2.0 - ax[outer]
    out[outer] = s * s * s / 6.0

    inner = ax < 1.0
    s = 1.0 - ax[inner]
    out[inner] = (1.0 + 3.0 * s + 3.0 * s * s - 3.0 * s * s * s) / 6.0
    return out


def _lagrange(ys: Sequence[float], positions: Sequence[int], at: int) -> float:
    total = 0.0
    for k, (y, xk) in enumerate(zip(ys, positions)):
        weight = 1.0
        for m, xm in enumerate(positions):
            if m != k:
                weight *= (at - xm) / (xk - xm)
        total += y * weight
    return total


def exterior_value(interior: Sequence[float], rule: ExtensionRule, r: int) -> float:
    """
    Value of the extended signal at node index r outside 0 .. n-1.

    Extrapolating rules fit the nearest interior samples on that side and
    evaluate the fitted polynomial at r.
    """
    n = len(interior)
    if 0 <= r < n:
        return float(interior[r])
    if rule == ExtensionRule.ZERO_PAD:
        return 0.0
    order = rule.fit_order
    positions = list(range(order)) if r < 0 else list(range(n - order, n))
    return _lagrange([interior[p] for p in positions], positions, r)


def extend_signal(
    raw: Sequence[float],
    grid: UniformGrid,
    margin: int = CUBIC.margin,
    rule: Union[ExtensionRule, str] = ExtensionRule.QUADRATIC,
) -> SampledSignal:
    """
    Add `margin` exterior samples on each side of the node values.

    Args:
        raw: f_r at the n grid nodes
        grid: Sampling lattice
        margin: Exterior samples per side (>= 1)
        rule: Extension rule

    Returns:
        SampledSignal whose interior equals `raw`
    """
    rule = ExtensionRule.parse(rule)
    if len(raw) != grid.n:
        raise ShapeError(f"Signal has {len(raw)} samples but the grid has {grid.n} nodes")
    if margin < 1:
        raise ShapeError(f"Extension margin must be at least 1, got {margin}")

    interior = [float(v) for v in raw]
    left = [exterior_value(interior, rule, r) for r in range(-margin, 0)]
    right = [exterior_value(interior, rule, r) for r in range(grid.n, grid.n + margin)]

    logger.debug(f"Extended {grid.n} samples by {margin} per side using {rule.value}")
    return SampledSignal(
        grid=grid,
        values=tuple(left + interior + right),
        margin=margin,
        extension_rule=rule,
    )


def sample_at(signal: SampledSignal, r: int) -> float:
    """f_r on the extended signal; indices past the stored margin follow the signal's rule."""
    stored = signal.stored(r)
    if stored is not None:
        return stored
    return exterior_value(signal.interior, signal.extension_rule, r)


def compute_coefficients(signal: SampledSignal) -> CoefficientVector:
    """
    Smoothing coefficients b_r = (-f_{r-1} + 8 f_r - f_{r+1}) / 6 for r = -1 .. n.

    Raises:
        ShapeError: the signal carries no extension samples
    """
    if signal.margin < 1:
        raise ShapeError("Coefficient generation needs at least one extension sample per side")
    n = signal.grid.n
    f = np.array([sample_at(signal, r) for r in range(-2, n + 2)], dtype=float)
    b = (-f[:-2] + 8.0 * f[1:-1] - f[2:]) / 6.0
    return CoefficientVector(grid=signal.grid, coeffs=tuple(float(v) for v in b), index_offset=1)


def spline_from_samples(
    raw: Sequence[float],
    grid: UniformGrid,
    rule: Union[ExtensionRule, str] = ExtensionRule.QUADRATIC,
    margin: int = CUBIC.margin,
) -> CoefficientVector:
    """Extend node samples and generate their coefficients."""
    return compute_coefficients(extend_signal(raw, grid, margin=margin, rule=rule))


def sample_function(f: Callable[[float], float], grid: UniformGrid) -> List[float]:
    """f at every grid node."""
    return [float(f(grid.node(r))) for r in range(grid.n)]


def locate(grid: UniformGrid, x: float) -> int:
    """
    Knot interval k with x in [x_k, x_{k+1}); the last interval is closed at b.

    Raises:
        DomainError: x is not finite or lies outside [a, b]
    """
    if not math.isfinite(x):
        raise DomainError(f"Evaluation point must be finite, got {x}", value=x)
    slack = 1e-12 * (grid.b - grid.a)
    if x < grid.a - slack or x > grid.b + slack:
        raise DomainError(f"x = {x} lies outside [{grid.a}, {grid.b}]", value=x)
    k = math.floor((x - grid.a) / grid.h)
    return min(max(k, 0), grid.n - 2)


def evaluate_spline_local(coeffs: CoefficientVector, x: float) -> float:
    """
    S3(x) from the four coefficients active on x's knot interval.

    Returns b_{k-1}B_{k-1}(x) + b_k B_k(x) + b_{k+1}B_{k+1}(x) + b_{k+2}B_{k+2}(x).
    """
    grid = coeffs.grid
    k = locate(grid, x)
    u = (x - grid.a) / grid.h
    total = 0.0
    for i in range(k - 1, k + 3):
        total += coeffs.coefficient(i) * eval_basis(u - i)
    return total


def evaluate_spline(coeffs: CoefficientVector, xs: Iterable[float]) -> np.ndarray:
    """
    Batch evaluation; same windows and arithmetic as evaluate_spline_local.

    Raises:
        DomainError: carrying the index of the first offending x
    """
    grid = coeffs.grid
    x = np.asarray(list(xs), dtype=float)
    if x.size == 0:
        return np.zeros(0)

    slack = 1e-12 * (grid.b - grid.a)
    bad = ~np.isfinite(x) | (x < grid.a - slack) | (x > grid.b + slack)
    if np.any(bad):
        index = int(np.flatnonzero(bad)[0])
        raise DomainError(
            f"x[{index}] = {x[index]} lies outside [{grid.a}, {grid.b}]",
            value=float(x[index]),
            index=index,
        )

    u = (x - grid.a) / grid.h
    k = np.clip(np.floor(u).astype(int), 0, grid.n - 2)
    b = coeffs.as_array()
    total = np.zeros_like(x)
    for j in range(4):
        i = k - 1 + j
        total += b[i + coeffs.index_offset] * eval_basis_array(u - i)
    return total


def nodal_value(coeffs: CoefficientVector, r: int) -> float:
    """S3 at node r via (b_{r-1} + 4 b_r + b_{r+1}) / 6."""
    return (coeffs.coefficient(r - 1) + 4.0 * coeffs.coefficient(r) + coeffs.coefficient(r + 1)) / 6.0


def composite_nodal_stencil(signal: SampledSignal, r: int) -> float:
    """S3 at node r straight from samples: (-f_{r-2} + 4f_{r-1} + 30f_r + 4f_{r+1} - f_{r+2}) / 36."""
    f = [sample_at(signal, r + j) for j in range(-2, 3)]
    return (-f[0] + 4.0 * f[1] + 30.0 * f[2] + 4.0 * f[3] - f[4]) / 36.0


class QuasiInterpolant:
    """
    Callable cubic spline S3 built from node samples.

    Wraps a CoefficientVector so it can be passed wherever a function of x is expected.
    """

    def __init__(self, coeffs: CoefficientVector):
        self.coeffs = coeffs

    @classmethod
    def from_function(
        cls,
        f: Callable[[float], float],
        grid: UniformGrid,
        rule: Union[ExtensionRule, str] = ExtensionRule.QUADRATIC,
    ) -> "QuasiInterpolant":
        return cls(spline_from_samples(sample_function(f, grid), grid, rule=rule))

    @property
    def grid(self) -> UniformGrid:
        return self.coeffs.grid

    def __call__(self, x: float) -> float:
        return evaluate_spline_local(self.coeffs, x)

    def evaluate(self, xs: Iterable[float]) -> np.ndarray:
        return evaluate_spline(self.coeffs, xs)
