"""
File formats for the workbench.

Signal CSV (`x` and `f` columns, uniformly spaced nodes), result CSVs for the approx,
simulate and basis commands, ROM image files and flat JSON run configs.
"""

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from models.datapath import SimulationResult
from models.errors import ParseError, ShapeError, SignalIOError
from models.spline import UniformGrid
from config import get_logger, get_settings

logger = get_logger(__name__)

SIGNAL_HEADER = ["x", "f"]
APPROX_HEADER = ["x", "f", "s3", "error"]
SIMULATE_HEADER = ["x", "fixed", "float", "abs_diff", "transient", "saturated"]
BASIS_HEADER = ["x", "b3"]

PathLike = Union[str, Path]


def _fmt(value: Optional[float]) -> str:
    # repr is the shortest string that reads back to the same float
    return "" if value is None else repr(float(value))


def _rows_to_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SignalIOError(f"Cannot read {path}: {e}") from e


def write_text(text: str, path: Optional[PathLike] = None) -> None:
    """Write to `path`, or to stdout when no path is given."""
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="")
    except OSError as e:
        raise SignalIOError(f"Cannot write {path}: {e}") from e
    logger.info(f"Wrote {path}")


def parse_signal_csv(text: str, tolerance: Optional[float] = None) -> Tuple[UniformGrid, List[float]]:
    """
    Parse a signal CSV into its grid and node values.

    The `x` and `f` columns are found by header name, so approx output
    (`x,f,s3,error`) reads back as well; rows with an empty `f` are skipped.

    Args:
        text: CSV with a header naming `x` and `f` and one row per point
        tolerance: Relative tolerance of the uniform-spacing check

    Returns:
        (grid, values)

    Raises:
        ParseError: bad header, bad number, non-increasing or non-uniform x
        ShapeError: fewer than four nodes
    """
    tolerance = get_settings().grid_tolerance if tolerance is None else tolerance
    reader = csv.reader(io.StringIO(text))
    xs: List[float] = []
    values: List[float] = []

    header: Optional[List[str]] = None
    for line_number, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if row[0].lstrip().startswith("#"):
            continue
        if header is None:
            header = [cell.strip().lower() for cell in row]
            if not all(name in header for name in SIGNAL_HEADER):
                raise ParseError(f"Header must name columns 'x' and 'f', got {','.join(row)!r}", line=line_number)
            x_col, f_col = header.index("x"), header.index("f")
            continue
        if len(row) != len(header):
            raise ParseError(f"Expected {len(header)} columns, got {len(row)}", line=line_number)
        if not row[f_col].strip():
            continue
        try:
            x, f = float(row[x_col]), float(row[f_col])
        except ValueError as e:
            raise ParseError(f"Not a number: {e}", line=line_number) from e
        if not (math.isfinite(x) and math.isfinite(f)):
            raise ParseError("Values must be finite", line=line_number)
        if xs and x <= xs[-1]:
            raise ParseError(f"x = {x} does not increase", line=line_number)
        xs.append(x)
        values.append(f)

        if len(xs) >= 3:
            h0 = xs[1] - xs[0]
            gap = xs[-1] - xs[-2]
            if abs(gap - h0) > tolerance * max(abs(h0), 1.0):
                raise ParseError(f"Spacing {gap} differs from {h0}; nodes must be uniform", line=line_number)

    if header is None:
        raise ParseError("Empty signal file", line=1)
    if len(xs) < 4:
        raise ShapeError(f"A cubic spline needs at least 4 nodes, got {len(xs)}")

    h = (xs[-1] - xs[0]) / (len(xs) - 1)
    grid = UniformGrid(a=xs[0], b=xs[-1], h=h, n=len(xs))
    logger.debug(f"Parsed {grid.n} nodes on [{grid.a}, {grid.b}], h = {grid.h}")
    return grid, values


def read_signal_csv(path: PathLike) -> Tuple[UniformGrid, List[float]]:
    return parse_signal_csv(read_text(path))


def render_signal_csv(grid: UniformGrid, values: Sequence[float]) -> str:
    if len(values) != grid.n:
        raise ShapeError(f"{len(values)} values for {grid.n} nodes")
    return _rows_to_text(SIGNAL_HEADER, ((_fmt(grid.node(r)), _fmt(v)) for r, v in enumerate(values)))


def render_basis_csv(xs: Sequence[float], values: Sequence[float]) -> str:
    return _rows_to_text(BASIS_HEADER, ((_fmt(x), _fmt(v)) for x, v in zip(xs, values)))


def render_approx_csv(
    xs: Sequence[float],
    s3: Sequence[float],
    f_values: Optional[Sequence[Optional[float]]] = None,
) -> str:
    """Rows x,f,s3,error; f and error stay empty where f is unknown."""
    rows = []
    for i, (x, s) in enumerate(zip(xs, s3)):
        f = f_values[i] if f_values is not None else None
        error = None if f is None else abs(f - s)
        rows.append((_fmt(x), _fmt(f), _fmt(s), _fmt(error)))
    return _rows_to_text(APPROX_HEADER, rows)


def render_simulation_csv(result: SimulationResult, summary: Optional[Dict[str, Any]] = None) -> str:
    """Rows x,fixed,float,abs_diff,transient,saturated, then `# key: value` summary lines."""
    rows = []
    for i, x in enumerate(result.xs):
        reference = result.reference[i]
        gap = None if reference is None else abs(result.outputs[i] - reference)
        rows.append((
            _fmt(x),
            _fmt(result.outputs[i]),
            _fmt(reference),
            _fmt(gap),
            int(result.transient[i]),
            int(result.saturated[i]),
        ))
    text = _rows_to_text(SIMULATE_HEADER, rows)
    if summary:
        text += "".join(f"# {key}: {value}\n" for key, value in summary.items())
    return text


def load_config_file(path: PathLike) -> Dict[str, Any]:
    """
    Flat JSON object mirroring RunConfig fields.

    Raises:
        SignalIOError: unreadable file
        ParseError: invalid JSON or not an object
    """
    text = read_text(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"Invalid JSON in {path}: {e.msg}", line=e.lineno) from e
    if not isinstance(data, dict):
        raise ParseError(f"{path} must hold a JSON object")
    return data
