"""Command-line front end: operation points and fault simulations to CSV.

Exit codes are a stable scripting contract: 0 success, 1 usage error,
2 unreadable or invalid input tables, 3 operation-point failure,
4 integration failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .assembly import assemble
from .errors import (
    ConvergenceError,
    IntegrationError,
    SchemaError,
    SingularJacobianError,
)
from .grid import build_admittance_laplacian, is_connected
from .io import (
    bundled_bus_table,
    bundled_line_table,
    load_bus_table,
    load_line_table,
    write_timeseries,
)
from .scenarios import (
    FREQUENCY_PERTURBATION,
    LINE_TRIPPING,
    ScenarioSpec,
    derived_series,
    run_scenario,
)
from .solver import IMPLICIT_EULER, TRAPEZOIDAL, SolverOptions, Trajectory, operation_point

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCHEMA = 2
EXIT_OPERATION_POINT = 3
EXIT_INTEGRATION = 4

_SCENARIO_KINDS = {"freq-perturb": FREQUENCY_PERTURBATION, "line-trip": LINE_TRIPPING}
_DEFAULT_DELTA = 0.2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gridwell",
        description="Transient dynamics of power grids: operation points and fault scenarios.",
        epilog="Without --buses/--lines the bundled IEEE 14-bus tables are used; "
        "the GRIDWELL_DATA environment variable overrides their directory.",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add_tables(sub):
        sub.add_argument("--buses", metavar="PATH", help="bus table CSV (default: bundled IEEE 14-bus)")
        sub.add_argument("--lines", metavar="PATH", help="line table CSV (default: bundled IEEE 14-bus)")

    op = commands.add_parser(
        "operationpoint", help="solve the operation point and emit it as CSV"
    )
    add_tables(op)
    op.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout")
    op.set_defaults(handler=cmd_operationpoint)

    sim = commands.add_parser("simulate", help="run a fault scenario and write the time series")
    add_tables(sim)
    sim.add_argument(
        "--scenario", required=True, choices=sorted(_SCENARIO_KINDS), help="fault kind"
    )
    sim.add_argument(
        "--target",
        required=True,
        type=int,
        metavar="N",
        help="bus index (freq-perturb) or line number (line-trip)",
    )
    sim.add_argument(
        "--delta",
        type=float,
        metavar="RAD_S",
        help=f"frequency kick in rad/s (freq-perturb only, default {_DEFAULT_DELTA})",
    )
    sim.add_argument("--t-end", required=True, type=float, metavar="S", help="simulation end time")
    sim.add_argument("--h", type=float, default=1e-3, metavar="S", help="step size (default 1e-3)")
    sim.add_argument(
        "--method",
        choices=[TRAPEZOIDAL, IMPLICIT_EULER],
        default=TRAPEZOIDAL,
        help="implicit one-step method (default trapezoidal)",
    )
    sim.add_argument("--out", required=True, metavar="PATH", help="time-series CSV output path")
    sim.add_argument("--plot", metavar="PATH", help="also render an SVG report figure")
    sim.set_defaults(handler=cmd_simulate)
    return parser


def _read(path: str | None, bundled) -> str:
    if path is None:
        return bundled()
    return Path(path).read_text(encoding="utf-8")


def _build_model(args):
    nodes = load_bus_table(_read(args.buses, bundled_bus_table))
    lines = load_line_table(_read(args.lines, bundled_line_table))
    laplacian = build_admittance_laplacian(lines, len(nodes))
    return assemble(nodes, laplacian, lines=lines), lines


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_operationpoint(args) -> int:
    model, lines = _build_model(args)
    if not is_connected(lines, len(model.nodes)):
        print("warning: grid is not connected; the operation point may not exist", file=sys.stderr)
    fp = operation_point(model)
    trajectory = Trajectory(times=np.zeros(1), states=fp.data[None, :], model=model)
    _emit(write_timeseries(trajectory, derived_series(trajectory)), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    parser = args.parser
    kind = _SCENARIO_KINDS[args.scenario]
    if args.delta is not None and kind != FREQUENCY_PERTURBATION:
        parser.error("--delta only applies to --scenario freq-perturb")
    if args.t_end <= 0:
        parser.error("--t-end must be positive")
    delta = _DEFAULT_DELTA if args.delta is None else args.delta
    options = SolverOptions(step_size=args.h, integrator=args.method)
    model, _ = _build_model(args)
    fp = operation_point(model, options=options)
    spec = ScenarioSpec(kind=kind, target=args.target, t_span=(0.0, args.t_end), delta=delta)
    trajectory = run_scenario(model, fp, spec, options)
    derived = derived_series(trajectory)
    _emit(write_timeseries(trajectory, derived), args.out)
    if args.plot:
        from .plotting import render_timeseries_figure

        render_timeseries_figure(trajectory, derived, args.plot)
    with np.errstate(invalid="ignore"):
        max_abs_omega = float(np.nanmax(np.abs(derived.omega))) if derived.omega_buses else 0.0
    print(f"max_abs_omega={max_abs_omega:.6g} rad/s, max_freq_dev={max_abs_omega / (2 * np.pi):.6g} Hz")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.parser = parser
    try:
        return args.handler(args)
    except (SchemaError, OSError) as exc:
        print(f"gridwell: input error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (ConvergenceError, SingularJacobianError) as exc:
        print(f"gridwell: operation point not found: {exc}", file=sys.stderr)
        return EXIT_OPERATION_POINT
    except IntegrationError as exc:
        print(f"gridwell: integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except ValueError as exc:
        print(f"gridwell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
