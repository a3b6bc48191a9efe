"""Assembly of node models and a Laplacian into one flat residual system.

The grid state is a flat real vector with one contiguous block per bus:
[Re u, Im u, internals...] in node order. A binary mass vector marks each
row as differential (1) or algebraic (0), giving the semi-explicit system

    M * dx/dt = F(x)

where F couples the buses only through the network currents i = LY @ u.
GridModel and StateVector are immutable; residual evaluation is pure, so
one model can serve many concurrent simulations with separate states.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .grid import AdmittanceLaplacian, LineSpec
from .nodes import NodeModel

__all__ = [
    "Layout",
    "GridModel",
    "StateVector",
    "assemble",
    "system_size",
    "full_residual",
    "state_get",
    "state_set",
]


@dataclass(frozen=True, eq=False)
class Layout:
    """Index map from (bus, variable) to positions in the flat state."""

    offsets: tuple[int, ...]
    internal_counts: tuple[int, ...]
    dim: int
    re_index: np.ndarray
    im_index: np.ndarray

    def __post_init__(self):
        self.re_index.setflags(write=False)
        self.im_index.setflags(write=False)


@dataclass(frozen=True, eq=False)
class GridModel:
    """Node models plus Laplacian with the derived state layout and masses.

    `lines` optionally retains the line list behind the Laplacian so fault
    scenarios can rebuild the network; it does not affect the dynamics.
    """

    nodes: tuple[NodeModel, ...]
    laplacian: AdmittanceLaplacian
    layout: Layout
    mass: np.ndarray
    lines: tuple[LineSpec, ...] | None = None

    @property
    def n_buses(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Flat real state with symbolic per-bus access (see state_get/state_set)."""

    data: np.ndarray
    layout: Layout

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        if arr.shape != (self.layout.dim,):
            raise ValueError(f"state length {arr.shape} does not match layout dim {self.layout.dim}")
        arr = arr.copy() if arr.flags.writeable else arr
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def __len__(self) -> int:
        return self.layout.dim


def assemble(
    nodes: Sequence[NodeModel],
    laplacian: AdmittanceLaplacian,
    lines: Sequence[LineSpec] | None = None,
) -> GridModel:
    """Combine node models and a Laplacian into a GridModel.

    The flat layout packs per-node blocks [Re u, Im u, internals...] in
    node order. The voltage mass flag is duplicated onto both the Re and
    Im rows: a complex voltage has one mass, not two.
    """
    nodes = tuple(nodes)
    if len(nodes) == 0:
        raise ValueError("a grid needs at least one bus")
    if laplacian.n != len(nodes):
        raise ValueError(
            f"Laplacian is for {laplacian.n} buses but {len(nodes)} node models given"
        )
    offsets = []
    mass_entries = []
    offset = 0
    for node in nodes:
        offsets.append(offset)
        mass_entries += [float(node.voltage_mass)] * 2
        mass_entries += [float(m) for m in node.internal_masses]
        offset += 2 + node.internal_count
    re_index = np.array(offsets, dtype=np.intp)
    layout = Layout(
        offsets=tuple(offsets),
        internal_counts=tuple(node.internal_count for node in nodes),
        dim=offset,
        re_index=re_index,
        im_index=re_index + 1,
    )
    mass = np.array(mass_entries)
    mass.setflags(write=False)
    return GridModel(
        nodes=nodes,
        laplacian=laplacian,
        layout=layout,
        mass=mass,
        lines=None if lines is None else tuple(lines),
    )


def system_size(model: GridModel) -> int:
    """Total dimension of the flat state vector."""
    return model.layout.dim


def _as_array(x: StateVector | np.ndarray, dim: int) -> np.ndarray:
    data = x.data if isinstance(x, StateVector) else np.asarray(x, dtype=float)
    if data.shape != (dim,):
        raise ValueError(f"expected state of length {dim}, got shape {data.shape}")
    return data


def bus_voltages(model: GridModel, x: StateVector | np.ndarray) -> np.ndarray:
    """Complex voltage vector of all buses, in node order."""
    data = _as_array(x, model.layout.dim)
    return data[model.layout.re_index] + 1j * data[model.layout.im_index]


def full_residual(model: GridModel, x: StateVector | np.ndarray) -> np.ndarray:
    """Evaluate F(x): network currents, then every node's residual rows.

    Complex voltage residuals are split into (Re, Im) rows at the node's
    voltage offsets. Nodes only interact through the shared current
    vector, so the result is independent of node evaluation order.
    """
    data = _as_array(x, model.layout.dim)
    if not np.isfinite(data).all():
        raise ValueError("state vector contains non-finite entries")
    u = data[model.layout.re_index] + 1j * data[model.layout.im_index]
    currents = model.laplacian.entries @ u
    out = np.empty(model.layout.dim)
    for a, (node, offset) in enumerate(zip(model.nodes, model.layout.offsets)):
        internals = data[offset + 2 : offset + 2 + node.internal_count]
        du, dx = node.residual(u[a], currents[a], internals)
        out[offset] = du.real
        out[offset + 1] = du.imag
        if node.internal_count:
            out[offset + 2 : offset + 2 + node.internal_count] = dx
    return out


def _locate(layout: Layout, bus: int, selector: str, k: int) -> int:
    if not 1 <= bus <= len(layout.offsets):
        raise ValueError(f"bus {bus} outside 1..{len(layout.offsets)}")
    offset = layout.offsets[bus - 1]
    if selector == "u":
        return offset
    if selector == "int":
        if not 1 <= k <= layout.internal_counts[bus - 1]:
            raise ValueError(
                f"bus {bus} has {layout.internal_counts[bus - 1]} internal "
                f"variables, requested #{k}"
            )
        return offset + 1 + k
    raise ValueError(f"selector must be 'u' or 'int', got {selector!r}")


def state_get(x: StateVector, bus: int, selector: str, k: int = 1) -> complex | float:
    """Read bus variables symbolically: (bus, 'u') or (bus, 'int', k).

    Bus and internal-variable indices are 1-based.
    """
    pos = _locate(x.layout, bus, selector, k)
    if selector == "u":
        return complex(x.data[pos], x.data[pos + 1])
    return float(x.data[pos])


def state_set(
    x: StateVector, bus: int, selector: str, value: complex | float, k: int = 1
) -> StateVector:
    """Return a new state with one bus variable replaced."""
    pos = _locate(x.layout, bus, selector, k)
    data = x.data.copy()
    if selector == "u":
        value = complex(value)
        data[pos] = value.real
        data[pos + 1] = value.imag
    else:
        data[pos] = float(value)
    return StateVector(data=data, layout=x.layout)
