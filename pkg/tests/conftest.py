"""Shared fixtures: the bundled IEEE 14-bus system and its operation point."""

from __future__ import annotations

import pytest

from gridwell import (
    assemble,
    build_admittance_laplacian,
    bundled_bus_table,
    bundled_line_table,
    load_bus_table,
    load_line_table,
    operation_point,
)

# Buses modeled by the swing machine in the bundled system.
SWING_BUSES = (1, 3, 6, 8)
SLACK_BUS = 2
LOAD_BUSES = (4, 5, 7, 9, 10, 11, 12, 13, 14)


@pytest.fixture(scope="session")
def ieee14_nodes():
    return load_bus_table(bundled_bus_table())


@pytest.fixture(scope="session")
def ieee14_lines():
    return load_line_table(bundled_line_table())


@pytest.fixture(scope="session")
def ieee14_model(ieee14_nodes, ieee14_lines):
    laplacian = build_admittance_laplacian(ieee14_lines, len(ieee14_nodes))
    return assemble(ieee14_nodes, laplacian, lines=ieee14_lines)


@pytest.fixture(scope="session")
def ieee14_fp(ieee14_model):
    return operation_point(ieee14_model)
