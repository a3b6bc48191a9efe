"""Grid topology: transmission lines and the admittance Laplacian.

A grid of n buses joined by series lines is encoded as a complex n x n
Laplacian LY. Each line contributes its admittance Y = 1/(R + jX) to the
diagonal entries of both endpoints and -Y to the matching off-diagonal
pair, so every row and column sums to zero. Bus currents follow from bus
voltages as i = LY @ u; a constant voltage vector therefore drives no
current at all.

Bus indices are 1-based in the public interface (matching the usual test
case tables) and converted to 0-based array positions exactly once, here.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DuplicateLineError, SingularLineError, TopologyError

__all__ = [
    "LineSpec",
    "AdmittanceLaplacian",
    "build_admittance_laplacian",
    "remove_line",
    "node_currents",
    "is_connected",
]


@dataclass(frozen=True)
class LineSpec:
    """A series line between two buses, impedance R + jX in p.u."""

    from_bus: int
    to_bus: int
    R: float
    X: float

    def __post_init__(self):
        if self.from_bus < 1 or self.to_bus < 1:
            raise TopologyError(
                f"bus indices are 1-based, got ({self.from_bus}, {self.to_bus})"
            )
        if self.from_bus == self.to_bus:
            raise TopologyError(f"line connects bus {self.from_bus} to itself")
        if self.R < 0:
            raise ValueError(f"negative series resistance R={self.R}")
        if self.R == 0 and self.X == 0:
            raise SingularLineError(
                f"line {self.from_bus}-{self.to_bus} has R = X = 0"
            )

    @property
    def admittance(self) -> complex:
        """Series admittance Y = 1/(R + jX)."""
        return 1.0 / complex(self.R, self.X)


@dataclass(frozen=True, eq=False)
class AdmittanceLaplacian:
    """Symmetric complex Laplacian of line admittances.

    Immutable after construction; the backing array is read-only and may
    be shared between concurrent simulations.
    """

    n: int
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        if arr.shape != (self.n, self.n):
            raise ValueError(f"expected a {self.n}x{self.n} matrix, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)


def build_admittance_laplacian(lines: Sequence[LineSpec], n: int) -> AdmittanceLaplacian:
    """Build the n x n admittance Laplacian from a line list.

    Off-diagonal entries are -Y of the connecting line (0 where none);
    each diagonal entry is the sum of admittances incident to that bus.
    Lines are pure series admittances: no shunts, taps or line charging.
    Parallel lines between the same pair are rejected rather than summed,
    so duplicated rows in a data file surface as errors.
    """
    if n < 0:
        raise ValueError(f"bus count must be non-negative, got {n}")
    matrix = np.zeros((n, n), dtype=complex)
    seen: set[tuple[int, int]] = set()
    for line in lines:
        if line.from_bus > n or line.to_bus > n:
            raise TopologyError(
                f"line {line.from_bus}-{line.to_bus} outside grid of {n} buses"
            )
        pair = (min(line.from_bus, line.to_bus), max(line.from_bus, line.to_bus))
        if pair in seen:
            raise DuplicateLineError(f"duplicate line between buses {pair[0]} and {pair[1]}")
        seen.add(pair)
        a, b = line.from_bus - 1, line.to_bus - 1
        y = line.admittance
        matrix[a, b] -= y
        matrix[b, a] -= y
        matrix[a, a] += y
        matrix[b, b] += y
    return AdmittanceLaplacian(n=n, entries=matrix)


def remove_line(lines: Sequence[LineSpec], index: int) -> list[LineSpec]:
    """Return the line list without line `index` (1-based table numbering).

    Rebuilding the Laplacian from the result is equivalent to zeroing the
    removed line's admittance in the original matrix.
    """
    if not 1 <= index <= len(lines):
        raise ValueError(f"line index {index} outside 1..{len(lines)}")
    return [line for k, line in enumerate(lines, start=1) if k != index]


def node_currents(laplacian: AdmittanceLaplacian, u: Sequence[complex]) -> np.ndarray:
    """Complex bus currents i = LY @ u for a bus voltage vector u."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (laplacian.n,):
        raise ValueError(f"expected {laplacian.n} bus voltages, got shape {u.shape}")
    return laplacian.entries @ u


def is_connected(lines: Sequence[LineSpec], n: int) -> bool:
    """True when every bus is reachable from bus 1 over the line set."""
    if n <= 1:
        return True
    adjacency: dict[int, list[int]] = {b: [] for b in range(1, n + 1)}
    for line in lines:
        adjacency[line.from_bus].append(line.to_bus)
        adjacency[line.to_bus].append(line.from_bus)
    seen = {1}
    stack = [1]
    while stack:
        for neighbor in adjacency[stack.pop()]:
            if neighbor not in seen:
                seen.add(neighbor)
                stack.append(neighbor)
    return len(seen) == n
