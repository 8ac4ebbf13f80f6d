"""
Standalone SVG line charts for the basis table, approximations and datapath runs.
"""

from pathlib import Path
from typing import Mapping, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from models.errors import SignalIOError  # noqa: E402
from config import get_logger  # noqa: E402

logger = get_logger(__name__)

Series = Tuple[Sequence[float], Sequence[float]]


def plot_series(
    path: Union[str, Path],
    series: Mapping[str, Series],
    title: str = "",
    xlabel: str = "x",
    ylabel: str = "",
    log_y: bool = False,
) -> Path:
    """
    Draw one line per series and save the figure as SVG.

    Args:
        path: Destination .svg file
        series: Label -> (xs, ys)
        title: Figure title
        xlabel: X axis label
        ylabel: Y axis label
        log_y: Logarithmic y axis (error plots)

    Returns:
        The written path
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    try:
        for label, (xs, ys) in series.items():
            ax.plot(list(xs), list(ys), label=label, linewidth=1.2)
        if log_y:
            ax.set_yscale("log")
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
        if len(series) > 1:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg")
    except OSError as e:
        raise SignalIOError(f"Cannot write chart {path}: {e}") from e
    finally:
        plt.close(fig)

    logger.info(f"Chart saved to {path}")
    return path


def plot_error(
    path: Union[str, Path],
    xs: Sequence[float],
    errors: Sequence[Optional[float]],
    title: str = "Approximation error",
) -> Path:
    """|f - S3| against x; rows without an error value are skipped."""
    kept = [(x, e) for x, e in zip(xs, errors) if e is not None and e > 0.0]
    if not kept:
        return plot_series(path, {"|error|": (list(xs), [0.0] * len(xs))}, title=title, ylabel="|error|")
    return plot_series(
        path,
        {"|error|": ([x for x, _ in kept], [e for _, e in kept])},
        title=title,
        ylabel="|error|",
        log_y=True,
    )


def error_chart_path(path: Union[str, Path]) -> Path:
    """Companion file for the error chart: approx.svg -> approx-error.svg."""
    path = Path(path)
    return path.with_name(f"{path.stem}-error{path.suffix or '.svg'}")
