"""CSV ingestion and emission: bus tables, line tables, trajectory output.

Bus tables carry one row per bus with the exact header
`bus,type,U,P,Q,D,H`; blank cells mean "absent" while 0 is a real zero
(a zero-power load is legitimate). Line tables use `line,from,to,R,X`
with consecutive line numbers starting at 1. Trajectory output is
time-major, bus-minor with header `t,bus,re_u,im_u,v,phi,p,q,omega`.

All files are UTF-8 with `.` as the decimal separator; LF and CRLF are
both accepted on input and LF is emitted. Floats are printed with
`repr`, which round-trips exactly, so load/emit cycles are lossless.
"""

from __future__ import annotations

import math
import os
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .errors import SchemaError
from .grid import LineSpec
from .nodes import NodeModel, make_node
from .scenarios import DerivedSeries
from .solver import Trajectory

__all__ = [
    "BusRow",
    "BUS_TABLE_HEADER",
    "LINE_TABLE_HEADER",
    "TIMESERIES_HEADER",
    "parse_bus_rows",
    "load_bus_table",
    "dump_bus_table",
    "load_line_table",
    "dump_line_table",
    "write_timeseries",
    "bundled_bus_table",
    "bundled_line_table",
    "DATA_DIR_ENV",
]

BUS_TABLE_HEADER = "bus,type,U,P,Q,D,H"
LINE_TABLE_HEADER = "line,from,to,R,X"
TIMESERIES_HEADER = "t,bus,re_u,im_u,v,phi,p,q,omega"

# Environment variable overriding the bundled dataset directory.
DATA_DIR_ENV = "GRIDWELL_DATA"

_BUS_FILE = "ieee14_buses.csv"
_LINE_FILE = "ieee14_lines.csv"


@dataclass(frozen=True)
class BusRow:
    """One parsed bus-table row; None marks a blank cell."""

    bus: int
    type: str
    U: float | None = None
    P: float | None = None
    Q: float | None = None
    D: float | None = None
    H: float | None = None


def _data_lines(text: str, header: str, what: str) -> list[tuple[int, list[str]]]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != header:
        found = lines[0].strip() if lines else "<empty>"
        raise SchemaError(f"{what} header must be {header!r}, found {found!r}")
    width = header.count(",") + 1
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = [cell.strip() for cell in line.split(",")]
        if len(cells) != width:
            raise SchemaError(f"{what} line {number}: expected {width} cells, got {len(cells)}")
        rows.append((number, cells))
    return rows


def _parse_int(cell: str, what: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise SchemaError(f"{what}: not an integer: {cell!r}") from None


def _parse_float(cell: str, what: str) -> float | None:
    if cell == "":
        return None
    try:
        value = float(cell)
    except ValueError:
        raise SchemaError(f"{what}: not a decimal: {cell!r}") from None
    if not math.isfinite(value):
        raise SchemaError(f"{what}: non-finite value {cell!r}")
    return value


def _format(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def parse_bus_rows(text: str) -> list[BusRow]:
    """Parse a bus table into rows, sorted by bus id (ids must be 1..n)."""
    rows = []
    for number, cells in _data_lines(text, BUS_TABLE_HEADER, "bus table"):
        where = f"bus table line {number}"
        rows.append(
            BusRow(
                bus=_parse_int(cells[0], where),
                type=cells[1],
                U=_parse_float(cells[2], f"{where}, field U"),
                P=_parse_float(cells[3], f"{where}, field P"),
                Q=_parse_float(cells[4], f"{where}, field Q"),
                D=_parse_float(cells[5], f"{where}, field D"),
                H=_parse_float(cells[6], f"{where}, field H"),
            )
        )
    ids = sorted(row.bus for row in rows)
    if ids != list(range(1, len(rows) + 1)):
        raise SchemaError(f"bus ids must be exactly 1..{len(rows)} once each, got {ids}")
    return sorted(rows, key=lambda row: row.bus)


def load_bus_table(text: str) -> list[NodeModel]:
    """Instantiate node models from a bus table, ordered by bus id."""
    models = []
    for row in parse_bus_rows(text):
        try:
            models.append(
                make_node(row.type, U=row.U, P=row.P, Q=row.Q, D=row.D, H=row.H)
            )
        except (SchemaError, ValueError) as exc:
            raise SchemaError(f"bus {row.bus}: {exc}") from exc
    return models


def dump_bus_table(rows: Sequence[BusRow]) -> str:
    lines = [BUS_TABLE_HEADER]
    for row in rows:
        lines.append(
            f"{row.bus},{row.type},{_format(row.U)},{_format(row.P)},"
            f"{_format(row.Q)},{_format(row.D)},{_format(row.H)}"
        )
    return "\n".join(lines) + "\n"


def load_line_table(text: str) -> list[LineSpec]:
    """Parse a line table; line numbers must run 1..m in order."""
    specs = []
    for number, cells in _data_lines(text, LINE_TABLE_HEADER, "line table"):
        where = f"line table line {number}"
        line_no = _parse_int(cells[0], where)
        if line_no != len(specs) + 1:
            raise SchemaError(f"{where}: line numbers must be consecutive from 1, got {line_no}")
        r = _parse_float(cells[3], f"{where}, field R")
        x = _parse_float(cells[4], f"{where}, field X")
        if r is None or x is None:
            raise SchemaError(f"{where}: R and X are required")
        try:
            specs.append(
                LineSpec(
                    from_bus=_parse_int(cells[1], f"{where}, field from"),
                    to_bus=_parse_int(cells[2], f"{where}, field to"),
                    R=r,
                    X=x,
                )
            )
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from exc
    return specs


def dump_line_table(lines: Sequence[LineSpec]) -> str:
    out = [LINE_TABLE_HEADER]
    for number, line in enumerate(lines, start=1):
        out.append(f"{number},{line.from_bus},{line.to_bus},{_format(line.R)},{_format(line.X)}")
    return "\n".join(out) + "\n"


def write_timeseries(
    trajectory: Trajectory,
    derived: DerivedSeries,
    sink: IO[str] | None = None,
) -> str:
    """Render a trajectory as CSV text (and write it to `sink` if given).

    One row per (time, bus), time-major and bus-minor; omega is blank for
    buses without a frequency variable. Identical inputs produce
    identical text.
    """
    layout = trajectory.model.layout
    n_buses = len(trajectory.model.nodes)
    rows = [TIMESERIES_HEADER]
    for k, t in enumerate(trajectory.times):
        t_text = repr(float(t))
        state = trajectory.states[k]
        for b in range(n_buses):
            omega = derived.omega[k, b]
            rows.append(
                ",".join(
                    (
                        t_text,
                        str(b + 1),
                        repr(float(state[layout.re_index[b]])),
                        repr(float(state[layout.im_index[b]])),
                        repr(float(derived.v[k, b])),
                        repr(float(derived.phi[k, b])),
                        repr(float(derived.p[k, b])),
                        repr(float(derived.q[k, b])),
                        "" if np.isnan(omega) else repr(float(omega)),
                    )
                )
            )
    text = "\n".join(rows) + "\n"
    if sink is not None:
        sink.write(text)
    return text


def _dataset_dir() -> Path:
    override = os.environ.get(DATA_DIR_ENV)
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "data"


def bundled_bus_table() -> str:
    """Text of the bundled IEEE 14-bus bus table (GRIDWELL_DATA overrides)."""
    return (_dataset_dir() / _BUS_FILE).read_text(encoding="utf-8")


def bundled_line_table() -> str:
    """Text of the bundled IEEE 14-bus line table (GRIDWELL_DATA overrides)."""
    return (_dataset_dir() / _LINE_FILE).read_text(encoding="utf-8")
