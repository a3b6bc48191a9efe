"""Flat-system assembly: layout, masses, residual evaluation, state access."""

from __future__ import annotations

import numpy as np
import pytest

from gridwell import (
    LineSpec,
    PQAlgebraic,
    SlackAlgebraic,
    StateVector,
    SwingEq,
    assemble,
    build_admittance_laplacian,
    bus_voltages,
    full_residual,
    state_get,
    state_set,
    system_size,
)
from tests.conftest import SWING_BUSES


def single_slack_model():
    return assemble([SlackAlgebraic(U=1)], build_admittance_laplacian([], 1))


# --- layout and masses ---------------------------------------------------------


def test_ieee14_total_dimension(ieee14_model):
    # 14 complex voltages as Re/Im pairs plus one frequency per machine
    assert system_size(ieee14_model) == 32


def test_ieee14_mass_vector(ieee14_model):
    mass = ieee14_model.mass
    assert mass.sum() == 12
    expected = np.zeros(32)
    for bus in SWING_BUSES:
        offset = ieee14_model.layout.offsets[bus - 1]
        expected[offset : offset + 3] = 1.0
    assert np.array_equal(mass, expected)


def test_single_slack_layout():
    model = single_slack_model()
    assert system_size(model) == 2
    assert np.array_equal(model.mass, [0.0, 0.0])


def test_slack_plus_swing_dimension():
    nodes = [SlackAlgebraic(U=1), SwingEq(H=5.0, P=1.0, D=1.0, Omega=50)]
    model = assemble(nodes, build_admittance_laplacian([LineSpec(1, 2, 0.1, 0.2)], 2))
    assert system_size(model) == 5


def test_per_node_contiguous_offsets(ieee14_model):
    offsets = ieee14_model.layout.offsets
    widths = [2 + node.internal_count for node in ieee14_model.nodes]
    assert offsets[0] == 0
    for k in range(1, 14):
        assert offsets[k] == offsets[k - 1] + widths[k - 1]


def test_assemble_count_mismatch():
    with pytest.raises(ValueError):
        assemble([SlackAlgebraic(U=1)], build_admittance_laplacian([], 2))


def test_assemble_empty_rejected():
    with pytest.raises(ValueError):
        assemble([], build_admittance_laplacian([], 0))


# --- full_residual ---------------------------------------------------------------


def test_single_slack_residual_zero_at_setpoint():
    model = single_slack_model()
    assert np.array_equal(full_residual(model, np.array([1.0, 0.0])), np.zeros(2))


def test_ieee14_residual_from_ones_is_finite_nonzero(ieee14_model):
    values = full_residual(ieee14_model, np.ones(32))
    assert np.isfinite(values).all()
    assert np.max(np.abs(values)) > 1.0


def test_ieee14_residual_at_operation_point(ieee14_model, ieee14_fp):
    assert np.max(np.abs(full_residual(ieee14_model, ieee14_fp))) <= 1e-8


def test_residual_rejects_non_finite():
    model = single_slack_model()
    with pytest.raises(ValueError):
        full_residual(model, np.array([np.nan, 0.0]))


def test_residual_independent_of_node_order(ieee14_model, ieee14_fp):
    """Writing rows per node in any order gives the identical vector."""
    data = ieee14_fp.data
    layout = ieee14_model.layout
    u = data[layout.re_index] + 1j * data[layout.im_index]
    currents = ieee14_model.laplacian.entries @ u
    out = np.empty(32)
    order = list(range(14))[::-1]
    for a in order:
        node = ieee14_model.nodes[a]
        offset = layout.offsets[a]
        du, dx = node.residual(u[a], currents[a], data[offset + 2 : offset + 2 + node.internal_count])
        out[offset] = du.real
        out[offset + 1] = du.imag
        if node.internal_count:
            out[offset + 2 : offset + 2 + node.internal_count] = dx
    assert np.array_equal(out, full_residual(ieee14_model, ieee14_fp))


def test_total_current_conservation(ieee14_model):
    rng = np.random.default_rng(7)
    for _ in range(20):
        state = np.ones(32) + 0.2 * rng.normal(size=32)
        u = bus_voltages(ieee14_model, state)
        assert abs((ieee14_model.laplacian.entries @ u).sum()) <= 1e-10


def test_rotational_covariance_without_slack():
    """With no slack bus: a global voltage rotation rotates the swing
    voltage rows with it, leaves PQ rows and internal rows unchanged."""
    nodes = [SwingEq(H=5.0, P=0.4, D=1.5, Omega=50), PQAlgebraic(S=-0.4 - 0.1j)]
    model = assemble(nodes, build_admittance_laplacian([LineSpec(1, 2, 0.05, 0.2)], 2))
    layout = model.layout
    rng = np.random.default_rng(11)
    for angle in rng.uniform(-np.pi, np.pi, size=8):
        state = np.array([1.02, 0.1, 0.3, 0.96, -0.2])  # u1, omega1, u2
        rotation = np.exp(1j * angle)
        u = bus_voltages(model, state)
        rotated = state.copy()
        rotated[layout.re_index] = (u * rotation).real
        rotated[layout.im_index] = (u * rotation).imag
        base = full_residual(model, state)
        turned = full_residual(model, rotated)
        swing_du = complex(base[0], base[1]) * rotation
        assert abs(complex(turned[0], turned[1]) - swing_du) <= 1e-12
        assert abs(turned[2] - base[2]) <= 1e-12          # machine acceleration row
        assert abs(complex(turned[3], turned[4]) - complex(base[3], base[4])) <= 1e-12


# --- state access -----------------------------------------------------------------


def test_state_round_trip(ieee14_fp):
    for bus, selector, value in ((3, "u", 0.87 - 0.22j), (6, "int", -1.5)):
        updated = state_set(ieee14_fp, bus, selector, value)
        assert state_get(updated, bus, selector) == value


def test_state_set_returns_new_vector(ieee14_fp):
    updated = state_set(ieee14_fp, 1, "int", 0.5)
    assert updated is not ieee14_fp
    assert state_get(ieee14_fp, 1, "int") != 0.5


def test_slack_voltage_at_operation_point(ieee14_fp):
    assert state_get(ieee14_fp, 2, "u") == pytest.approx(1 + 0j, abs=1e-9)


def test_perturbation_indexing(ieee14_fp):
    bumped = state_set(ieee14_fp, 1, "int", state_get(ieee14_fp, 1, "int") + 0.2)
    assert state_get(bumped, 1, "int") == pytest.approx(0.2, abs=1e-9)
    # everything else untouched
    difference = bumped.data - ieee14_fp.data
    assert np.count_nonzero(difference) == 1


def test_state_access_errors(ieee14_fp):
    with pytest.raises(ValueError):
        state_get(ieee14_fp, 4, "int")  # load has no internals
    with pytest.raises(ValueError):
        state_get(ieee14_fp, 1, "int", k=2)
    with pytest.raises(ValueError):
        state_get(ieee14_fp, 15, "u")
    with pytest.raises(ValueError):
        state_get(ieee14_fp, 1, "voltage")


def test_state_vector_is_read_only(ieee14_fp):
    with pytest.raises(ValueError):
        ieee14_fp.data[0] = 2.0


def test_state_vector_length_checked(ieee14_model):
    with pytest.raises(ValueError):
        StateVector(data=np.ones(5), layout=ieee14_model.layout)
