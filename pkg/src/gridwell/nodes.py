"""Per-bus dynamics models.

Every bus contributes a complex voltage u and, optionally, internal
variables x to the grid state. A node model supplies the right-hand side
of

    m_u * du/dt   = f(u, x, i)
    m_x[k] * dx[k]/dt = g_k(u, x, i)

where i is the complex current injected into the network and the masses
m_u, m_x[k] are each exactly 0 or 1. Mass-1 rows are genuine dynamics;
mass-0 rows are algebraic constraints whose residual must vanish along
any trajectory. All variables live in the co-rotating frame of the rated
grid frequency.

Three concrete models are provided: a slack bus holding a fixed complex
voltage, a constant-power (PQ) bus, and a second-order synchronous
machine (swing machine) with frequency deviation omega as its single
internal variable. New bus types register a constructor under a type
name so that bus tables can instantiate them (see `register_node_type`).
"""

from __future__ import annotations

import abc
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from .errors import SchemaError

__all__ = [
    "NodeModel",
    "SlackAlgebraic",
    "PQAlgebraic",
    "SwingEq",
    "node_residual",
    "register_node_type",
    "make_node",
    "registered_node_types",
    "RATED_FREQUENCY_HZ",
]

# Rated frequency assumed when bus tables instantiate swing machines.
RATED_FREQUENCY_HZ = 50.0

_NO_INTERNALS = np.zeros(0)
_NO_INTERNALS.setflags(write=False)


class NodeModel(abc.ABC):
    """Interface of a bus model: mass flags plus a residual function."""

    internal_count: ClassVar[int]
    voltage_mass: ClassVar[int]
    internal_masses: ClassVar[tuple[int, ...]]

    # True when the voltage dynamics is a pure rotation driven by internal
    # variable 1, making |u| a conserved quantity. The operation-point
    # solver pins such magnitudes to remove the resulting degeneracy.
    voltage_magnitude_is_conserved: ClassVar[bool] = False

    @abc.abstractmethod
    def residual(self, u: complex, i: complex, x: Sequence[float]) -> tuple[complex, np.ndarray]:
        """Right-hand sides (du, dx) at voltage u, current i, internals x.

        For mass-0 rows the returned value is the algebraic residual,
        zero exactly on the constraint manifold.
        """


@dataclass(frozen=True)
class SlackAlgebraic(NodeModel):
    """Bus held at a fixed complex voltage U; absorbs the power imbalance.

    Purely algebraic: 0 * du/dt = u - U.
    """

    U: complex

    internal_count: ClassVar[int] = 0
    voltage_mass: ClassVar[int] = 0
    internal_masses: ClassVar[tuple[int, ...]] = ()

    def residual(self, u, i, x):
        return u - self.U, _NO_INTERNALS


@dataclass(frozen=True)
class PQAlgebraic(NodeModel):
    """Bus exchanging a fixed complex power S with the grid.

    Sign convention: S is the power flowing from the node into the grid,
    so consumers carry negative S. Purely algebraic:
    0 * du/dt = S - u * conj(i).
    """

    S: complex

    internal_count: ClassVar[int] = 0
    voltage_mass: ClassVar[int] = 0
    internal_masses: ClassVar[tuple[int, ...]] = ()

    def residual(self, u, i, x):
        return self.S - u * i.conjugate(), _NO_INTERNALS


@dataclass(frozen=True)
class SwingEq(NodeModel):
    """Second-order synchronous machine (swing machine).

    Parameters: inertia H (p.u.*s), active power setpoint P (p.u.),
    damping D (p.u.), rated frequency Omega (Hz). The single internal
    variable is the angular frequency deviation omega (rad/s) in the
    co-rotating frame:

        du/dt     = j * u * omega
        domega/dt = (P - D*omega - Re(u * conj(i))) * 2*pi*Omega / H

    The voltage dynamics rotates u without changing its magnitude, so
    |u| is a conserved quantity of the isolated machine. The factor
    2*pi*Omega/H is fixed at construction; grids mixing rated
    frequencies are representable because Omega is per node.
    """

    H: float
    P: float
    D: float
    Omega: float

    internal_count: ClassVar[int] = 1
    voltage_mass: ClassVar[int] = 1
    internal_masses: ClassVar[tuple[int, ...]] = (1,)
    voltage_magnitude_is_conserved: ClassVar[bool] = True

    # rad/s^2 of rotor acceleration per p.u. of power imbalance
    acceleration_gain: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.H <= 0:
            raise ValueError(f"inertia H must be positive, got {self.H}")
        if self.D <= 0:
            raise ValueError(f"damping D must be positive, got {self.D}")
        object.__setattr__(self, "acceleration_gain", 2.0 * math.pi * self.Omega / self.H)

    def residual(self, u, i, x):
        omega = x[0]
        p = (u * i.conjugate()).real
        du = 1j * u * omega
        domega = (self.P - self.D * omega - p) * self.acceleration_gain
        return du, np.array([domega])


def node_residual(
    model: NodeModel, u: complex, i: complex, x: Sequence[float]
) -> tuple[complex, np.ndarray]:
    """Evaluate a node's residual, checking the internal-variable count."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.internal_count,):
        raise ValueError(
            f"{type(model).__name__} expects {model.internal_count} internal "
            f"variables, got {x.shape[0] if x.ndim == 1 else x.shape}"
        )
    return model.residual(u, i, x)


# --- node type registry -----------------------------------------------------
#
# Maps a bus-table type name to a constructor taking the optional column
# values of one table row. Lets the io layer instantiate node models
# without knowing the concrete classes.

_REGISTRY: dict[str, Callable[..., NodeModel]] = {}


def register_node_type(name: str, constructor: Callable[..., NodeModel]) -> None:
    """Register a constructor for bus-table rows of type `name`.

    The constructor is called with keyword arguments U, P, Q, D, H
    (floats or None for blank cells) and returns a NodeModel.
    """
    if name in _REGISTRY:
        raise ValueError(f"node type {name!r} already registered")
    _REGISTRY[name] = constructor


def make_node(type_name: str, **params) -> NodeModel:
    """Instantiate a registered node type from bus-table column values."""
    try:
        constructor = _REGISTRY[type_name]
    except KeyError:
        raise SchemaError(f"unknown node type {type_name!r}") from None
    return constructor(**params)


def registered_node_types() -> tuple[str, ...]:
    return tuple(_REGISTRY)


def _require(type_name: str, **given) -> list[float]:
    missing = [key for key, value in given.items() if value is None]
    if missing:
        raise SchemaError(f"type {type_name} requires field {missing[0]}")
    return list(given.values())


def _slack_constructor(U=None, P=None, Q=None, D=None, H=None) -> NodeModel:
    (u,) = _require("Slack", U=U)
    return SlackAlgebraic(U=complex(u))


def _load_constructor(U=None, P=None, Q=None, D=None, H=None) -> NodeModel:
    p, q = _require("Load", P=P, Q=Q)
    return PQAlgebraic(S=complex(p, q))


def _swing_constructor(type_name):
    def construct(U=None, P=None, Q=None, D=None, H=None) -> NodeModel:
        p, d, h = _require(type_name, P=P, D=D, H=H)
        return SwingEq(H=h, P=p, D=d, Omega=RATED_FREQUENCY_HZ)

    return construct


register_node_type("Slack", _slack_constructor)
register_node_type("Load", _load_constructor)
register_node_type("Generator", _swing_constructor("Generator"))
register_node_type("SynComp", _swing_constructor("SynComp"))
