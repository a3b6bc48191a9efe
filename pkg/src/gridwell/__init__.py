"""Transient dynamics of power grids as a semi-explicit DAE.

Per-bus dynamics (slack constraint, PQ load, swing machine) couple
through an admittance Laplacian into one flat residual system with a
binary mass vector. The package finds operation points by damped Newton,
integrates fault scenarios with implicit one-step methods, ships the
IEEE 14-bus test system, and exposes everything through a CLI.
"""

from .assembly import (
    GridModel,
    StateVector,
    assemble,
    bus_voltages,
    full_residual,
    state_get,
    state_set,
    system_size,
)
from .errors import (
    ConnectivityError,
    ConvergenceError,
    DuplicateLineError,
    InconsistentStateError,
    IntegrationError,
    SchemaError,
    SingularJacobianError,
    SingularLineError,
    TopologyError,
)
from .grid import (
    AdmittanceLaplacian,
    LineSpec,
    build_admittance_laplacian,
    is_connected,
    node_currents,
    remove_line,
)
from .io import (
    BusRow,
    bundled_bus_table,
    bundled_line_table,
    dump_bus_table,
    dump_line_table,
    load_bus_table,
    load_line_table,
    parse_bus_rows,
    write_timeseries,
)
from .nodes import (
    NodeModel,
    PQAlgebraic,
    SlackAlgebraic,
    SwingEq,
    make_node,
    node_residual,
    register_node_type,
    registered_node_types,
)
from .scenarios import (
    DerivedSeries,
    ScenarioSpec,
    derived_series,
    run_frequency_perturbation,
    run_line_tripping,
    run_scenario,
)
from .solver import (
    IMPLICIT_EULER,
    TRAPEZOIDAL,
    SolverOptions,
    Trajectory,
    integrate,
    jacobian,
    operation_point,
)

__version__ = "0.1.0"

__all__ = [
    "AdmittanceLaplacian",
    "BusRow",
    "ConnectivityError",
    "ConvergenceError",
    "DerivedSeries",
    "DuplicateLineError",
    "GridModel",
    "IMPLICIT_EULER",
    "InconsistentStateError",
    "IntegrationError",
    "LineSpec",
    "NodeModel",
    "PQAlgebraic",
    "ScenarioSpec",
    "SchemaError",
    "SingularJacobianError",
    "SingularLineError",
    "SlackAlgebraic",
    "SolverOptions",
    "StateVector",
    "SwingEq",
    "TRAPEZOIDAL",
    "TopologyError",
    "Trajectory",
    "assemble",
    "build_admittance_laplacian",
    "bundled_bus_table",
    "bundled_line_table",
    "bus_voltages",
    "derived_series",
    "dump_bus_table",
    "dump_line_table",
    "full_residual",
    "integrate",
    "is_connected",
    "jacobian",
    "load_bus_table",
    "load_line_table",
    "make_node",
    "node_currents",
    "node_residual",
    "operation_point",
    "parse_bus_rows",
    "register_node_type",
    "registered_node_types",
    "remove_line",
    "run_frequency_perturbation",
    "run_line_tripping",
    "run_scenario",
    "state_get",
    "state_set",
    "system_size",
    "write_timeseries",
]
