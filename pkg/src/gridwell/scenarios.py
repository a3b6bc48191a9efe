"""Reproducible fault experiments and derived per-bus output quantities.

Two disturbance kinds are supported. A frequency perturbation kicks one
machine's frequency deviation away from the operation point and lets the
coupled system relax back. A line trip removes one line: the pre-fault
operation point is handed as initial condition to a rebuilt grid model
whose Laplacian no longer contains the line, so the state starts off the
new equilibrium (and, at the endpoint buses, off the new constraint
manifold; the first implicit step projects it back).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite

import numpy as np

from .assembly import GridModel, StateVector, assemble, state_get, state_set
from .errors import ConnectivityError
from .grid import build_admittance_laplacian, is_connected, remove_line
from .solver import SolverOptions, Trajectory, integrate

__all__ = [
    "FREQUENCY_PERTURBATION",
    "LINE_TRIPPING",
    "ScenarioSpec",
    "run_scenario",
    "run_frequency_perturbation",
    "run_line_tripping",
    "DerivedSeries",
    "derived_series",
]

FREQUENCY_PERTURBATION = "frequency-perturbation"
LINE_TRIPPING = "line-tripping"


@dataclass(frozen=True)
class ScenarioSpec:
    """One fault experiment: what to disturb and how long to simulate.

    target is a bus index for frequency perturbations and a line number
    for line trips; delta (rad/s) only applies to frequency perturbations.
    """

    kind: str
    target: int
    t_span: tuple[float, float]
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in (FREQUENCY_PERTURBATION, LINE_TRIPPING):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.target < 1:
            raise ValueError(f"target must be a 1-based index, got {self.target}")
        if not isfinite(self.delta):
            raise ValueError("delta must be finite")


def run_scenario(
    model: GridModel,
    fp: StateVector,
    spec: ScenarioSpec,
    options: SolverOptions | None = None,
) -> Trajectory:
    if spec.kind == FREQUENCY_PERTURBATION:
        return run_frequency_perturbation(
            model, fp, spec.target, spec.delta, spec.t_span, options
        )
    return run_line_tripping(model, fp, spec.target, spec.t_span, options)


def run_frequency_perturbation(
    model: GridModel,
    fp: StateVector,
    bus: int,
    delta: float,
    t_span: tuple[float, float],
    options: SolverOptions | None = None,
) -> Trajectory:
    """Add delta (rad/s) to internal variable 1 of `bus` and integrate.

    Only buses with at least one internal variable can be perturbed.
    Perturbing a differential variable leaves the algebraic constraints
    intact, so the start is consistent.
    """
    if not 1 <= bus <= len(model.nodes):
        raise ValueError(f"bus {bus} outside 1..{len(model.nodes)}")
    if model.nodes[bus - 1].internal_count < 1:
        raise ValueError(
            f"bus {bus} ({type(model.nodes[bus - 1]).__name__}) has no internal "
            "variable to perturb"
        )
    x0 = state_set(fp, bus, "int", state_get(fp, bus, "int", 1) + delta, k=1)
    return integrate(model, x0, t_span, options)


def run_line_tripping(
    model: GridModel,
    fp: StateVector,
    line_number: int,
    t_span: tuple[float, float],
    options: SolverOptions | None = None,
) -> Trajectory:
    """Remove one line and integrate the pre-fault state on the new grid.

    The returned trajectory belongs to the post-trip model. Its t = 0
    state equals fp exactly, which violates the PQ constraint of any load
    adjacent to the tripped line until the first step re-projects it, so
    the usual consistency precheck is bypassed here.
    """
    if model.lines is None:
        raise ValueError("model was assembled without line data; cannot trip a line")
    remaining = remove_line(model.lines, line_number)
    n = len(model.nodes)
    if not is_connected(remaining, n):
        raise ConnectivityError(
            f"removing line {line_number} splits the grid into islands"
        )
    post_model = assemble(
        model.nodes, build_admittance_laplacian(remaining, n), lines=remaining
    )
    return integrate(post_model, fp.data, t_span, options, consistency_tol=None)


@dataclass(frozen=True, eq=False)
class DerivedSeries:
    """Per-bus quantities along a trajectory, one row per time sample.

    Arrays are (n_times, n_buses): voltage magnitude v, unwrapped angle
    phi (rad), active/reactive outflowing power p/q (p.u.), and frequency
    deviation omega (rad/s), NaN at buses without one.
    """

    times: np.ndarray
    v: np.ndarray
    phi: np.ndarray
    p: np.ndarray
    q: np.ndarray
    omega: np.ndarray

    @property
    def omega_buses(self) -> tuple[int, ...]:
        """1-based indices of buses that carry a frequency deviation."""
        return tuple(
            b + 1 for b in range(self.omega.shape[1]) if not np.isnan(self.omega[0, b])
        )


def derived_series(trajectory: Trajectory) -> DerivedSeries:
    """Voltage, angle, power and frequency series for every bus.

    Currents are recomputed from the trajectory's own model Laplacian,
    powers follow as s = u * conj(i). Angles are unwrapped over time by
    nearest-branch continuation. Buses whose node has internal variables
    report internal variable 1 as omega.
    """
    model = trajectory.model
    layout = model.layout
    u = trajectory.states[:, layout.re_index] + 1j * trajectory.states[:, layout.im_index]
    currents = u @ model.laplacian.entries.T
    s = u * np.conj(currents)
    phi = np.unwrap(np.angle(u), axis=0)
    omega = np.full(u.shape, np.nan)
    for b, node in enumerate(model.nodes):
        if node.internal_count >= 1:
            omega[:, b] = trajectory.states[:, layout.offsets[b] + 2]
    return DerivedSeries(
        times=trajectory.times,
        v=np.abs(u),
        phi=phi,
        p=s.real,
        q=s.imag,
        omega=omega,
    )
