"""Integrators for the linear flow ``dx/dt = a @ x``.

Three routes: the exact spectral propagator, classical fixed-step RK4, and
implicit minimizing-movement steps in the metric of a constant-mobility
gradient system.  A dissipation audit evaluates the energy along a computed
trajectory and checks the decay identity.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import FlowOverflowError, NonFiniteStateError, SingularStepError
from .spectral import Diagonalisation, as_square_matrix, as_vector, operator_norm
from .synthesis import CanonicalGradientSystem

if TYPE_CHECKING:  # pragma: no cover
    from .geometry import MetricContext

#: Largest exponent argument before exp overflows in double precision (~709).
EXP_GUARD = 700.0


class Integrator(str, enum.Enum):
    EXACT = "exact"
    RK4 = "rk4"
    MINIMIZING_MOVEMENT = "mm"


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: ``states[k]`` is the state at ``times[k]``."""

    times: np.ndarray
    states: np.ndarray
    method: Integrator

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if times.ndim != 1 or states.ndim != 2 or states.shape[0] != times.size:
            raise ValueError("times and states shapes disagree")
        if times.size == 0 or times[0] != 0.0:
            raise ValueError("times must start at 0")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(states))):
            raise ValueError("trajectory contains non-finite values")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "method", Integrator(self.method))

    @property
    def dim(self) -> int:
        return self.states.shape[1]


def exact_flow(diag: Diagonalisation, x0, t: float) -> np.ndarray:
    """Propagate ``x0`` by time ``t`` with the spectral propagator.

    Computes ``inv(transform) @ diag(exp(t w)) @ transform @ x0``.  ``x0``
    may be a single state or an array of states in rows.  Negative ``t``
    runs the flow backwards; the formula is its own inverse under t -> -t.
    Raises :class:`FlowOverflowError` when some ``t * w_i`` exceeds the
    double-precision exponential range; rescale time in that case.
    """
    exponents = t * diag.eigenvalues
    if np.max(exponents) > EXP_GUARD:
        raise FlowOverflowError(
            f"t * eigenvalue = {np.max(exponents):.3g} exceeds the exp range")
    x0 = np.asarray(x0, dtype=float)
    single = x0.ndim == 1
    points = np.atleast_2d(x0)
    if points.shape[1] != diag.dim:
        raise ValueError("state dimension does not match the diagonalisation")
    modes = (points @ diag.transform.T) * np.exp(exponents)
    out = np.linalg.solve(diag.transform, modes.T).T
    return out[0] if single else out


def exact_trajectory(diag: Diagonalisation, x0, t_end: float,
                     nodes: int = 200) -> Trajectory:
    """Sample the exact flow at ``nodes`` uniform times on ``[0, t_end]``."""
    x0 = as_vector(x0, diag.dim)
    if t_end < 0.0:
        raise ValueError("t_end must be non-negative")
    if nodes < 1:
        raise ValueError("need at least one node")
    if t_end == 0.0:
        return Trajectory(np.zeros(1), x0[None, :], Integrator.EXACT)
    times = np.linspace(0.0, t_end, max(nodes, 2))
    exponents = np.outer(times, diag.eigenvalues)
    if np.max(exponents) > EXP_GUARD:
        raise FlowOverflowError(
            f"t * eigenvalue = {np.max(exponents):.3g} exceeds the exp range")
    modes = np.exp(exponents) * (diag.transform @ x0)
    states = np.linalg.solve(diag.transform, modes.T).T
    states[0] = x0
    return Trajectory(times, states, Integrator.EXACT)


def rk4_flow(a, x0, t_end: float, step: float) -> Trajectory:
    """Classical fixed-step fourth-order Runge-Kutta for ``dx/dt = a @ x``.

    Steps of size ``step`` cover ``[0, t_end]``, with one shorter final step
    when the horizon is not an exact multiple.  Emits a RuntimeWarning when
    ``step * operator_norm(a) > 1`` (accuracy/stability advisory, not an
    error) and raises :class:`NonFiniteStateError` if the state blows up.
    """
    a = as_square_matrix(a)
    x0 = as_vector(x0, a.shape[0])
    if step <= 0.0:
        raise ValueError("step must be positive")
    if t_end < step:
        raise ValueError("step must not exceed t_end")
    if step * operator_norm(a) > 1.0:
        warnings.warn("step * operator_norm(a) > 1: RK4 may be inaccurate "
                      "or unstable", RuntimeWarning, stacklevel=2)

    n_full = int(np.floor(t_end / step + 1e-12))
    remainder = t_end - n_full * step
    if remainder < 1e-12 * max(step, t_end):
        remainder = 0.0
    times = step * np.arange(n_full + 1)
    if remainder > 0.0:
        times = np.append(times, t_end)

    states = np.empty((times.size, x0.size))
    states[0] = x0
    x = x0
    for k in range(1, times.size):
        h = times[k] - times[k - 1]
        k1 = a @ x
        k2 = a @ (x + 0.5 * h * k1)
        k3 = a @ (x + 0.5 * h * k2)
        k4 = a @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteStateError(f"state became non-finite at t = {times[k]:g}")
        states[k] = x
    return Trajectory(times, states, Integrator.RK4)


def minimizing_movement_flow(gs: CanonicalGradientSystem, ctx: "MetricContext",
                             x0, t_end: float, tau: float) -> Trajectory:
    """Implicit steps ``x_{k+1} = argmin F(x) + d(x, x_k)^2 / (2 tau)``.

    For the quadratic energy and the flat metric with tensor
    ``g = transform.T @ transform`` each step is the single linear solve

        (g + tau * hessian) x_{k+1} = g @ x_k + tau * hessian @ equilibrium

    (the equilibrium term vanishes for systems centred at zero).  The step
    matrix must be positive definite, which bounds ``tau`` by the most
    negative curvature direction; :class:`SingularStepError` is raised
    otherwise.  The scheme is backward Euler in disguise, first-order
    accurate in ``tau``.
    """
    x0 = as_vector(x0, gs.dim)
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    if t_end < tau:
        raise ValueError("tau must not exceed t_end")
    tensor = ctx.metric_tensor()
    step_matrix = tensor + tau * gs.hessian
    step_matrix = (step_matrix + step_matrix.T) / 2.0
    try:
        np.linalg.cholesky(step_matrix)
    except np.linalg.LinAlgError:
        raise SingularStepError(
            f"step matrix not positive definite at tau = {tau:g}; "
            "reduce the step") from None

    n_steps = int(round(t_end / tau))
    if abs(n_steps * tau - t_end) > 1e-9 * t_end:
        n_steps = int(np.ceil(t_end / tau - 1e-12))
    n_steps = max(n_steps, 1)
    shift = tau * (gs.hessian @ gs.equilibrium)
    states = np.empty((n_steps + 1, x0.size))
    states[0] = x0
    x = x0
    for k in range(1, n_steps + 1):
        x = np.linalg.solve(step_matrix, tensor @ x + shift)
        states[k] = x
    return Trajectory(tau * np.arange(n_steps + 1), states,
                      Integrator.MINIMIZING_MOVEMENT)


@dataclass(frozen=True)
class DissipationReport:
    """Energy profile of a trajectory and its decay-identity defect."""

    energies: np.ndarray
    monotone: bool
    dissipation_defect: float


def dissipation_audit(gs: CanonicalGradientSystem, traj: Trajectory) -> DissipationReport:
    """Evaluate the energy along a trajectory and audit its decay.

    ``monotone`` is True when the energy never increases by more than
    ``1e-9 * scale`` between consecutive nodes, with scale the largest
    energy magnitude (floored at 1).  The defect is the worst interior-node
    mismatch of the chain rule ``dF/dt = -<grad, onsager grad>`` with the
    time derivative taken by central differences, so O(dt) is expected for
    sampled trajectories.
    """
    energies = np.atleast_1d(gs.energy(traj.states))
    scale = max(1.0, float(np.max(np.abs(energies))))
    monotone = bool(np.all(np.diff(energies) <= 1e-9 * scale))
    if energies.size < 3:
        return DissipationReport(energies, monotone, 0.0)
    dts = traj.times[2:] - traj.times[:-2]
    rate = (energies[2:] - energies[:-2]) / dts
    grads = (traj.states[1:-1] - gs.equilibrium) @ gs.hessian.T
    dissipation = np.einsum("ni,ij,nj->n", grads, gs.onsager, grads)
    defect = float(np.max(np.abs(rate + dissipation)))
    return DissipationReport(energies, monotone, defect)
