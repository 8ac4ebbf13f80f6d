"""
Cubic B-spline Workbench - Main Orchestrator

Command-line entry point. Ingests sampled signals, runs the floating-point
spline and the fixed-point datapath simulation, compares both against the
classical cubic baseline and exports ROM images.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from config import LogConfig, Settings, get_logger, get_settings
from models.datapath import DatapathConfig
from models.errors import ParseError, SplineError
from models.run_config import Command, RunConfig
from models.spline import ExtensionRule, UniformGrid
from services.bspline_core import (
    eval_basis_array,
    evaluate_spline,
    extend_signal,
    sample_function,
    spline_from_samples,
)
from services.datapath_sim import DatapathSimulator, default_config
from services.error_analysis import ErrorAnalyzer, get_reference_function, interior_window
from services.signal_io import (
    load_config_file,
    read_signal_csv,
    render_approx_csv,
    render_basis_csv,
    render_simulation_csv,
    write_text,
)

logger = get_logger(__name__)

BASIS_RANGE = (-2.5, 2.5)


class SplineWorkbench:
    """
    Main orchestrator for the cubic B-spline workbench.

    Each command turns a RunConfig into one text artifact:
    1. basis    - B3 table over its support
    2. approx   - float spline on the refined output grid
    3. simulate - fixed-point datapath run with cycle summary
    4. compare  - bound, accuracy and speed report (JSON)
    5. rom      - ROM image
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.analyzer = ErrorAnalyzer(self.settings)

    # ------------------------------------------------------------------
    # Configuration
    # ------------------------------------------------------------------

    def build_config(
        self,
        command: str,
        flags: Optional[Dict[str, Any]] = None,
        config_path: Optional[str] = None,
    ) -> RunConfig:
        """
        Merge settings, an optional JSON config file and command-line flags.

        Flags win over the file, the file wins over settings.
        """
        s = self.settings
        merged: Dict[str, Any] = {
            "h": s.default_h,
            "samples_per_segment": s.samples_per_segment,
            "format": f"{s.total_bits}:{s.frac_bits}:{'s' if s.signed else 'u'}",
            "probes": s.probes,
        }
        if config_path:
            file_values = load_config_file(config_path)
            file_values.pop("command", None)
            merged.update(file_values)
        merged.update({key: value for key, value in (flags or {}).items() if value is not None})
        merged["command"] = command

        try:
            return RunConfig(**merged)
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
            )
            raise ParseError(f"Invalid {command} configuration: {problems}") from e

    def _interval(self, config: RunConfig) -> Tuple[float, float]:
        if config.interval is not None:
            return config.interval
        return self.settings.interval_a, self.settings.interval_b

    def _rule(self, config: RunConfig, default: str) -> ExtensionRule:
        return config.extension_rule or ExtensionRule.parse(default)

    def _datapath_config(self, config: RunConfig) -> DatapathConfig:
        return default_config(
            self.settings,
            fmt=config.format,
            k=config.samples_per_segment,
            rule=self._rule(config, self.settings.datapath_extension_rule),
        )

    def load_signal(
        self, config: RunConfig
    ) -> Tuple[UniformGrid, List[float], Optional[Callable[[float], float]]]:
        """Grid, node values and (for built-in functions) the function itself."""
        if config.input_path is not None:
            grid, values = read_signal_csv(config.input_path)
            logger.info(f"Loaded {grid.n} nodes from {config.input_path}")
            return grid, values, None
        a, b = self._interval(config)
        reference = get_reference_function(config.function)
        grid = UniformGrid.from_step(a, b, config.h, self.settings.grid_tolerance)
        return grid, sample_function(reference.f, grid), reference.f

    def _report(self, config: RunConfig, text: str) -> None:
        # stdout carries the artifact when no output file is given
        stream = sys.stdout if config.output_path is not None else sys.stderr
        print(text, file=stream)

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    def cmd_basis(self, config: RunConfig) -> str:
        """Table of (x, B3(x)) over [-2.5, 2.5], or over --interval when given."""
        lo, hi = config.interval or BASIS_RANGE
        xs = np.linspace(lo, hi, config.probes)
        values = eval_basis_array(xs)
        text = render_basis_csv(xs.tolist(), values.tolist())
        write_text(text, config.output_path)

        if config.plot_path:
            from services.plotting import plot_series
            plot_series(config.plot_path, {"B3": (xs, values)}, title="Cubic basic spline", ylabel="B3(x)")
        return text

    def cmd_approx(self, config: RunConfig) -> str:
        """Float spline on K output points per knot interval, with the error where f is known."""
        grid, values, f = self.load_signal(config)
        rule = self._rule(config, self.settings.extension_rule)
        coeffs = spline_from_samples(values, grid, rule=rule)

        # short grids keep at least one knot interval to measure on
        trim = min(self.settings.interior_intervals, (grid.n - 2) // 2)
        lo, hi = interior_window(grid, trim)

        k = config.samples_per_segment
        fine = grid.refined(k)
        xs = fine.nodes()
        s3 = evaluate_spline(coeffs, xs)
        if f is not None:
            f_values: List[Optional[float]] = [f(float(x)) for x in xs]
        else:
            f_values = [values[i // k] if i % k == 0 else None for i in range(len(xs))]
        errors = [None if fv is None else abs(fv - sv) for fv, sv in zip(f_values, s3)]

        text = render_approx_csv(xs.tolist(), s3.tolist(), f_values)
        write_text(text, config.output_path)

        measured = [
            e for x, e in zip(xs, errors)
            if e is not None and lo - 1e-12 <= x <= hi + 1e-12
        ]
        max_error = max(measured, default=0.0)
        logger.info(f"Approximated {grid.n} nodes with {rule.value}; interior max error {max_error:.3e}")
        self._report(config, f"interior max error on [{lo}, {hi}]: {max_error:.6e}")

        if config.plot_path:
            from services.plotting import error_chart_path, plot_error, plot_series
            series = {"S3": (xs, s3)}
            if f is not None:
                series["f"] = (xs, f_values)
            plot_series(config.plot_path, series, title="Spline approximation", ylabel="value")
            plot_error(error_chart_path(config.plot_path), xs.tolist(), errors)
        return text

    def cmd_simulate(self, config: RunConfig) -> str:
        """Datapath run: CSV rows plus a `# key: value` cycle summary."""
        grid, values, _ = self.load_signal(config)
        datapath = self._datapath_config(config)
        signal = extend_signal(values, grid, rule=datapath.extension_rule)

        simulator = DatapathSimulator(datapath)
        result = simulator.run(signal)
        report = result.report
        summary = {
            "samples": report.samples,
            "interior_samples": len(result.interior_indices),
            "transient_samples": report.samples - len(result.interior_indices),
            "total_cycles": report.total_cycles,
            "cycles_per_sample": str(report.cycles_per_sample),
            "preset_cycles": report.preset_cycles,
            "max_abs_diff": f"{result.max_reference_gap():.6e}",
            "saturation": "yes" if result.any_saturation else "no",
            "cycle_model": report.model_description,
        }
        text = render_simulation_csv(result, summary)
        write_text(text, config.output_path)
        self._report(config, f"cycles_per_sample = {report.cycles_per_sample}")

        if config.plot_path:
            from services.plotting import plot_series
            kept = result.interior_indices
            plot_series(
                config.plot_path,
                {
                    "fixed-point": ([result.xs[i] for i in kept], [result.outputs[i] for i in kept]),
                    "float": ([result.xs[i] for i in kept], [result.reference[i] for i in kept]),
                },
                title="Datapath output",
                ylabel="S3",
            )
        return text

    def cmd_compare(self, config: RunConfig) -> str:
        """JSON report of bounds, empirical errors, convergence order and cycle ratio."""
        report = self.analyzer.compare(
            function=config.function,
            h=config.h,
            interval=self._interval(config),
            config=self._datapath_config(config),
            probes=config.probes,
            rule=self._rule(config, self.settings.extension_rule),
        )
        text = json.dumps(report.model_dump(mode="json"), indent=2) + "\n"
        write_text(text, config.output_path)

        if config.plot_path and report.convergence_errors:
            from services.plotting import plot_series
            plot_series(
                config.plot_path,
                {"max error": (report.convergence_h_values, report.convergence_errors)},
                title=f"Convergence for {config.function}",
                xlabel="h",
                ylabel="max |S3 - f|",
                log_y=True,
            )
        return text

    def cmd_rom(self, config: RunConfig) -> str:
        """ROM image for the configured format and K."""
        text = DatapathSimulator(self._datapath_config(config)).rom_image()
        write_text(text, config.output_path)
        return text

    def run(self, config: RunConfig) -> str:
        handlers = {
            Command.BASIS: self.cmd_basis,
            Command.APPROX: self.cmd_approx,
            Command.SIMULATE: self.cmd_simulate,
            Command.COMPARE: self.cmd_compare,
            Command.ROM: self.cmd_rom,
        }
        logger.debug(f"Running {config.command.value}")
        return handlers[config.command](config)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Cubic B-spline Workbench",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Basis table for plotting
  python main.py basis --probes 501 --output basis.csv --plot basis.svg

  # Float spline of ln(1+x) on [0, 2] with h = 1/32
  python main.py approx --function ln1p --h 0.03125 --interval 0:2

  # Fixed-point datapath run on a sampled signal
  python main.py simulate --input data/sample_signal.csv --format 16:14:s --k 10

  # Bound, accuracy and speed comparison
  python main.py compare --function ln1p --output report.json

  # ROM image
  python main.py rom --k 10 --format 16:14:s --output rom.txt
        """
    )
    parser.add_argument("command", choices=[c.value for c in Command], help="Command to run")

    parser.add_argument("--input", dest="input_path", help="Signal CSV with x and f columns")
    parser.add_argument("--output", dest="output_path", help="Output file (default: stdout)")
    parser.add_argument("--function", help="Built-in function: ln1p, sin or exp")
    parser.add_argument("--h", type=float, help="Node spacing for built-in functions")
    parser.add_argument("--interval", help="Interval as a:b")
    parser.add_argument("--k", dest="samples_per_segment", type=int, help="Samples per ROM subsection")
    parser.add_argument("--format", help="Fixed-point format T:F:s or T:F:u")
    parser.add_argument("--extension", dest="extension_rule", help="zero-pad, linear or quadratic")
    parser.add_argument("--probes", type=int, help="Probe count")

    parser.add_argument("--config", help="JSON run config")
    parser.add_argument("--plot", dest="plot_path", help="Also write an SVG chart")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    return parser


FLAG_FIELDS = (
    "input_path", "output_path", "function", "h", "interval",
    "samples_per_segment", "format", "extension_rule", "probes", "plot_path",
)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        LogConfig.setup_logging(args.log_level)

    workbench = SplineWorkbench()
    try:
        config = workbench.build_config(
            args.command,
            {name: getattr(args, name) for name in FLAG_FIELDS},
            args.config,
        )
        workbench.run(config)
    except SplineError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    LogConfig.setup_logging(get_settings().log_level)
    sys.exit(main())
