"""Report figures: outflowing power and frequency deviation over time.

Figures are rendered straight to files through a matplotlib Figure (no
pyplot state, no interactive backend needed), so plotting works in
headless batch runs alongside the CSV output.
"""

from __future__ import annotations

from pathlib import Path

from matplotlib.figure import Figure

from .nodes import PQAlgebraic, SlackAlgebraic, SwingEq
from .scenarios import DerivedSeries
from .solver import Trajectory

__all__ = ["render_timeseries_figure"]

_KIND_LETTERS = ((SwingEq, "G"), (SlackAlgebraic, "S"), (PQAlgebraic, "L"))


def _kind_letter(node) -> str:
    for cls, letter in _KIND_LETTERS:
        if isinstance(node, cls):
            return letter
    return "?"


def render_timeseries_figure(
    trajectory: Trajectory, derived: DerivedSeries, path: str | Path
) -> None:
    """Save power (top) and frequency deviation (bottom) per bus to `path`.

    The file format follows the path suffix; paths without a suffix get
    `.svg`. Bus labels carry the model kind: G swing machine, S slack,
    L load.
    """
    path = Path(path)
    if not path.suffix:
        path = path.with_suffix(".svg")
    nodes = trajectory.model.nodes
    fig = Figure(figsize=(8.0, 6.0))
    ax_power, ax_freq = fig.subplots(2, 1, sharex=True)

    for b, node in enumerate(nodes):
        ax_power.plot(
            derived.times,
            derived.p[:, b],
            linewidth=1.0,
            label=f"bus {b + 1} ({_kind_letter(node)})",
        )
    ax_power.set_ylabel("outflowing power p [p.u.]")
    ax_power.grid(True, alpha=0.3)
    ax_power.legend(fontsize=6, ncol=2, loc="center right")

    for b in derived.omega_buses:
        ax_freq.plot(
            derived.times,
            derived.omega[:, b - 1],
            linewidth=1.0,
            label=f"bus {b} ({_kind_letter(nodes[b - 1])})",
        )
    ax_freq.set_ylabel("frequency deviation [rad/s]")
    ax_freq.set_xlabel("time [s]")
    ax_freq.grid(True, alpha=0.3)
    if derived.omega_buses:
        ax_freq.legend(fontsize=7, loc="center right")

    fig.tight_layout()
    fig.savefig(path)
