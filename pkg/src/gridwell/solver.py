"""Newton operation-point finder and implicit integration of the grid DAE.

The grid system M * dx/dt = F(x) has a binary mass matrix: mass-0 rows
are algebraic constraints. An operation point is a root of the full F,
differential and algebraic rows alike, which in particular forces every
machine frequency deviation to zero.

The raw fixed-point system is degenerate: a swing machine's voltage
dynamics conserves its voltage magnitude, so operation points form a
manifold (one free magnitude per machine) and F also admits spurious
roots with collapsed machine voltages. `operation_point` therefore runs
damped Newton on an equivalent pinned system in which each such
machine's redundant voltage row is replaced by an explicit frequency row
and a magnitude pin at a configurable setpoint (1 p.u. by default).
Every root of the pinned system is a root of F; the spurious collapsed
roots are excluded and the Jacobian is regular at the solution.

Time integration uses fixed-step one-step implicit methods. Mass-1 rows
get the implicit Euler or trapezoidal update; mass-0 rows are collocated
(F_row(x_next) = 0), keeping the constraints satisfied at every accepted
step. Each step is solved by a modified Newton iteration on the
integration matrix M/h - theta*J, with J from forward finite differences
and dense LU for the linear solves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .assembly import GridModel, StateVector, full_residual
from .errors import (
    ConvergenceError,
    InconsistentStateError,
    IntegrationError,
    SingularJacobianError,
)

__all__ = [
    "SolverOptions",
    "Trajectory",
    "IMPLICIT_EULER",
    "TRAPEZOIDAL",
    "operation_point",
    "jacobian",
    "integrate",
]

IMPLICIT_EULER = "implicit-euler"
TRAPEZOIDAL = "trapezoidal"

# Implicitness weight theta of the one-step update on mass-1 rows:
# x_next = x + h*(theta*F(x_next) + (1-theta)*F(x)).
_THETA = {IMPLICIT_EULER: 1.0, TRAPEZOIDAL: 0.5}

_MAX_STEP_BISECTIONS = 5
_MAX_DAMPING_HALVINGS = 8
_LSTSQ_RCOND = 1e-8


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and step sizes shared by the Newton and time-step solvers.

    machine_voltage is the magnitude (p.u.) assigned to the voltage of
    every magnitude-conserving machine at the operation point; along a
    trajectory those magnitudes then stay at their initial values.
    """

    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    step_size: float = 1e-3
    integrator: str = TRAPEZOIDAL
    fd_epsilon: float = 1e-7
    machine_voltage: float = 1.0

    def __post_init__(self):
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be at least 1")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.integrator not in _THETA:
            raise ValueError(
                f"integrator must be one of {sorted(_THETA)}, got {self.integrator!r}"
            )
        if self.fd_epsilon <= 0:
            raise ValueError("fd_epsilon must be positive")
        if self.machine_voltage <= 0:
            raise ValueError("machine_voltage must be positive")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-stamped states of one integration run."""

    times: np.ndarray
    states: np.ndarray  # shape (len(times), dim)
    model: GridModel

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if np.any(np.diff(times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        if not np.isfinite(states).all():
            raise ValueError("trajectory states must be finite")
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return len(self.times)

    def state(self, index: int) -> StateVector:
        return StateVector(data=self.states[index], layout=self.model.layout)


def _fd_jacobian(
    f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, fd_epsilon: float
) -> np.ndarray:
    """Forward-difference Jacobian; column j steps by fd_epsilon*max(1, |x_j|)."""
    base = f(x)
    jac = np.empty((base.shape[0], x.shape[0]))
    for j in range(x.shape[0]):
        eps = fd_epsilon * max(1.0, abs(x[j]))
        bumped = x.copy()
        bumped[j] += eps
        jac[:, j] = (f(bumped) - base) / eps
    return jac


def jacobian(
    model: GridModel,
    x: StateVector | np.ndarray,
    options: SolverOptions | None = None,
) -> np.ndarray:
    """Forward-difference Jacobian of full_residual at x."""
    opts = options or SolverOptions()
    data = x.data if isinstance(x, StateVector) else np.asarray(x, dtype=float)
    return _fd_jacobian(lambda v: full_residual(model, v), data, opts.fd_epsilon)


def _norm(values: np.ndarray) -> float:
    return float(np.max(np.abs(values))) if values.size else 0.0


def _try_damped(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    fx_norm: float,
    step: np.ndarray,
    tol: float,
) -> tuple[np.ndarray, np.ndarray, float] | None:
    """Walk along `step`, halving on residual increase; None if no progress."""
    alpha = 1.0
    for _ in range(_MAX_DAMPING_HALVINGS + 1):
        candidate = x + alpha * step
        if np.isfinite(candidate).all():
            fc = f(candidate)
            norm = _norm(fc)
            if np.isfinite(norm) and (norm < fx_norm or norm <= tol):
                return candidate, fc, norm
        alpha /= 2.0
    return None


def _damped_newton(
    f: Callable[[np.ndarray], np.ndarray],
    make_jacobian: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    tol: float,
    max_iter: int,
    reuse_jacobian: bool = False,
) -> tuple[np.ndarray, float]:
    """Damped Newton on f(x) = 0; returns (solution, final residual norm).

    Plain Newton steps, halved up to 8 times when the residual norm
    increases. With reuse_jacobian the matrix from the first iteration is
    kept until progress stalls (modified Newton, for the per-step solves
    where the start is already close). A stalled or singular LU step
    falls back to the minimum-norm least-squares step before giving up.
    """
    x = np.asarray(x0, dtype=float).copy()
    fx = f(x)
    norm = _norm(fx)
    matrix: np.ndarray | None = None
    for iteration in range(1, max_iter + 1):
        if norm <= tol:
            return x, norm
        fresh = matrix is None or not reuse_jacobian
        if fresh:
            matrix = make_jacobian(x)
        result = None
        try:
            step = np.linalg.solve(matrix, -fx)
            result = _try_damped(f, x, norm, step, tol)
        except np.linalg.LinAlgError:
            pass
        if result is None and not fresh:
            matrix = make_jacobian(x)
            try:
                step = np.linalg.solve(matrix, -fx)
                result = _try_damped(f, x, norm, step, tol)
            except np.linalg.LinAlgError:
                pass
        if result is None:
            if not np.isfinite(matrix).all():
                raise SingularJacobianError("Jacobian contains non-finite entries")
            step = np.linalg.lstsq(matrix, -fx, rcond=_LSTSQ_RCOND)[0]
            result = _try_damped(f, x, norm, step, tol)
        if result is None:
            raise ConvergenceError(
                f"Newton stalled at residual {norm:.3e} after {iteration} iterations",
                residual_norm=norm,
                iterations=iteration,
            )
        x, fx, norm = result
    if norm <= tol:
        return x, norm
    raise ConvergenceError(
        f"Newton did not reach tolerance {tol:.1e} in {max_iter} iterations "
        f"(residual {norm:.3e})",
        residual_norm=norm,
        iterations=max_iter,
    )


def _pinned_buses(model: GridModel) -> list[int]:
    return [
        b
        for b, node in enumerate(model.nodes)
        if node.voltage_magnitude_is_conserved and node.internal_count >= 1
    ]


def _pinned_residual(
    model: GridModel, buses: list[int], magnitude: float, x: np.ndarray
) -> np.ndarray:
    """F(x) with each pinned bus's voltage rows replaced by an explicit
    frequency row and a magnitude pin (same roots, regular Jacobian)."""
    out = full_residual(model, x)
    half_sq = 0.5 * magnitude * magnitude
    for b in buses:
        offset = model.layout.offsets[b]
        out[offset] = x[offset + 2]
        out[offset + 1] = 0.5 * (x[offset] ** 2 + x[offset + 1] ** 2) - half_sq
    return out


def operation_point(
    model: GridModel,
    x0: StateVector | np.ndarray | None = None,
    options: SolverOptions | None = None,
) -> StateVector:
    """Find a fixed point of the grid system by damped Newton on F(x) = 0.

    Masses are ignored: the fixed point zeroes differential and algebraic
    rows alike, so every swing machine ends at omega = 0 and delivers
    exactly its power setpoint. Machine voltage magnitudes, which the
    dynamics leaves free, are pinned to options.machine_voltage. Defaults
    to the all-ones start when x0 is omitted.
    """
    opts = options or SolverOptions()
    if x0 is None:
        data = np.ones(model.layout.dim)
    else:
        data = x0.data if isinstance(x0, StateVector) else np.asarray(x0, dtype=float)
        if data.shape != (model.layout.dim,):
            raise ValueError(
                f"initial guess has shape {data.shape}, expected ({model.layout.dim},)"
            )
    if not np.isfinite(data).all():
        raise ValueError("initial guess contains non-finite entries")
    if _norm(full_residual(model, data)) <= opts.newton_tol:
        return StateVector(data=data, layout=model.layout)

    pinned = _pinned_buses(model)
    if pinned:
        target = lambda v: _pinned_residual(model, pinned, opts.machine_voltage, v)
    else:
        target = lambda v: full_residual(model, v)
    solution, _ = _damped_newton(
        f=target,
        make_jacobian=lambda v: _fd_jacobian(target, v, opts.fd_epsilon),
        x0=data,
        tol=opts.newton_tol,
        max_iter=opts.newton_max_iter,
    )
    residual_norm = _norm(full_residual(model, solution))
    if residual_norm > opts.newton_tol:
        # pinned rows converged but a raw row is marginally above: polish
        solution, residual_norm = _damped_newton(
            f=lambda v: full_residual(model, v),
            make_jacobian=lambda v: jacobian(model, v, opts),
            x0=solution,
            tol=opts.newton_tol,
            max_iter=opts.newton_max_iter,
        )
    return StateVector(data=solution, layout=model.layout)


class _StepFailure(Exception):
    """Internal: one implicit step did not converge."""


def _one_step(
    model: GridModel,
    x: np.ndarray,
    h: float,
    theta: float,
    opts: SolverOptions,
) -> np.ndarray:
    """Advance one implicit step of size h from state x."""
    mass = model.mass
    algebraic = 1.0 - mass
    f_now = full_residual(model, x)

    def step_residual(y: np.ndarray) -> np.ndarray:
        f_next = full_residual(model, y)
        return mass * ((y - x) / h - theta * f_next - (1.0 - theta) * f_now) + algebraic * f_next

    def step_jacobian(y: np.ndarray) -> np.ndarray:
        jac = jacobian(model, y, opts)
        return np.diag(mass / h) + (algebraic - theta * mass)[:, None] * jac

    try:
        y, _ = _damped_newton(
            f=step_residual,
            make_jacobian=step_jacobian,
            x0=x,
            tol=opts.newton_tol,
            max_iter=opts.newton_max_iter,
            reuse_jacobian=True,
        )
    except (ConvergenceError, SingularJacobianError) as exc:
        raise _StepFailure(str(exc)) from exc
    return y


def _advance(
    model: GridModel,
    x: np.ndarray,
    t_from: float,
    t_to: float,
    theta: float,
    opts: SolverOptions,
    depth: int,
) -> np.ndarray:
    try:
        return _one_step(model, x, t_to - t_from, theta, opts)
    except _StepFailure:
        if depth >= _MAX_STEP_BISECTIONS:
            raise IntegrationError(
                f"step Newton failed at t = {t_from:.6g} s after "
                f"{_MAX_STEP_BISECTIONS} step-halving retries",
                time=t_from,
            ) from None
        t_mid = 0.5 * (t_from + t_to)
        x_mid = _advance(model, x, t_from, t_mid, theta, opts, depth + 1)
        return _advance(model, x_mid, t_mid, t_to, theta, opts, depth + 1)


def _time_grid(t0: float, t1: float, h: float) -> np.ndarray:
    span = t1 - t0
    whole = int(np.floor(span / h + 1e-9))
    times = t0 + h * np.arange(whole + 1)
    if span - whole * h > 1e-12 * max(1.0, abs(t1)):
        times = np.append(times, t1)
    return times


def integrate(
    model: GridModel,
    x0: StateVector | np.ndarray,
    t_span: tuple[float, float],
    options: SolverOptions | None = None,
    consistency_tol: float | None = 1e-6,
) -> Trajectory:
    """Integrate M * dx/dt = F(x) over t_span with fixed steps.

    The initial state must satisfy the algebraic rows within
    consistency_tol; pass None to skip the check when a network change
    deliberately starts off the constraint manifold (collocation then
    restores the constraints after the first step). A step whose Newton
    solve fails is retried on halved sub-steps, at most 5 halvings deep;
    the reported time grid keeps the nominal spacing. The final step is
    shortened when the span is not a multiple of the step size.
    """
    opts = options or SolverOptions()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError(f"t_span must satisfy t1 > t0, got {t_span}")
    data = x0.data if isinstance(x0, StateVector) else np.asarray(x0, dtype=float)
    if data.shape != (model.layout.dim,):
        raise ValueError(
            f"initial state has shape {data.shape}, expected ({model.layout.dim},)"
        )
    if not np.isfinite(data).all():
        raise ValueError("initial state contains non-finite entries")
    if consistency_tol is not None:
        residual = full_residual(model, data)
        violation = _norm(residual[model.mass == 0.0])
        if violation > consistency_tol:
            raise InconsistentStateError(
                f"initial state violates algebraic constraints by {violation:.3e} "
                f"(allowed {consistency_tol:.1e})"
            )
    theta = _THETA[opts.integrator]
    times = _time_grid(t0, t1, opts.step_size)
    states = np.empty((len(times), model.layout.dim))
    states[0] = data
    x = data
    for k in range(1, len(times)):
        x = _advance(model, x, times[k - 1], times[k], theta, opts, depth=0)
        states[k] = x
    return Trajectory(times=times, states=states, model=model)
