"""Time integration of the model and of its reformulated decay system.

The model evolves ``(u, omega)`` with ``psi`` slaved to ``omega`` through the
boundary-regime solver::

    u_t     = nu L5 u     + 2 u psi_z
    omega_t = nu L5 omega + (u^2)_z
    -L5 psi = omega

The decay system evolves ``(ut, v)`` on the interior domain::

    ut_t = -4 M ut - 4 ut v
    v_t  = L5^{-1} ut_zz        (homogeneous Dirichlet inverse)

Both use classical RK4.  The model step size follows the stretching rate,
``dt = cfl / (1 + 4 max|psi_z|)``, and never more than doubles between steps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .elliptic import BcSpec, EllipticSolver, solver_for
from .grid import Grid

__all__ = [
    "ModelState",
    "DecayState",
    "StepControl",
    "BlowupTerminated",
    "PositivityError",
    "Model",
    "DecayModel",
    "rhs_model",
    "step_model",
    "step_decay",
    "run_model",
    "run_decay",
    "RunResult",
    "canonical_exterior_data",
]

logger = logging.getLogger(__name__)


@dataclass
class StepControl:
    dt: float = 1e-3
    dt_min: float = 1e-10
    cfl_c: float = 0.1
    blowup_factor: float = 1e6
    h3_factor: float = np.inf
    max_steps: int = 200_000
    clip_tol: float = 1e-12

    def __post_init__(self):
        if not self.dt_min > 0:
            raise ValueError("dt_min must be positive")
        if not 0 < self.cfl_c <= 1:
            raise ValueError("cfl_c must lie in (0, 1]")


@dataclass(frozen=True)
class ModelState:
    t: float
    u: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    nu: float = 0.0


@dataclass(frozen=True)
class DecayState:
    t: float
    u_tilde: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    M: float = 1.0


class BlowupTerminated(Exception):
    """Raised by a step that ends the run; carries the last accepted state."""

    def __init__(self, reason: str, state):
        super().__init__(reason)
        self.reason = reason
        self.state = state


class PositivityError(RuntimeError):
    pass


class Model:
    """Right-hand side of the model bound to a grid, boundary regime and viscosity."""

    def __init__(self, grid: Grid, bc: BcSpec, nu: float = 0.0, solver: EllipticSolver | None = None):
        if nu < 0:
            raise ValueError("nu must be >= 0")
        self.grid = grid
        self.bc = bc
        self.nu = float(nu)
        self.solver = solver or solver_for(grid, bc)

    def psi_of(self, omega: np.ndarray) -> np.ndarray:
        return self.solver.solve(omega)

    def state(self, t: float, u: np.ndarray, omega: np.ndarray) -> ModelState:
        u = np.array(u, dtype=float)
        u[:, 0] = 0.0
        u[:, -1] = 0.0
        return ModelState(float(t), u, np.array(omega, dtype=float), self.psi_of(omega), self.nu)

    def rhs(self, u: np.ndarray, omega: np.ndarray):
        g = self.grid
        psi = self.psi_of(omega)
        psi_z = g.diff_z(psi)
        du = 2.0 * u * psi_z
        domega = g.diff_z(u * u)
        if self.nu > 0:
            du += self.nu * g.apply_L5(u)
            domega += self.nu * g.apply_L5(omega)
        du[:, 0] = 0.0
        du[:, -1] = 0.0
        return du, domega, psi_z

    def stable_dt(self, state: ModelState, ctrl: StepControl, dt_prev: float) -> float:
        psi_z = self.grid.diff_z(state.psi)
        dt = min(ctrl.cfl_c / (1.0 + 4.0 * np.max(np.abs(psi_z))), 2.0 * dt_prev)
        if self.nu > 0:
            h = min(self.grid.hr, self.grid.hz)
            dt = min(dt, h * h / (8.0 * self.nu))
        return dt


def rhs_model(model: Model, state: ModelState):
    """``(du, domega)`` at ``state``; ``psi`` is re-solved from ``omega`` first."""
    du, domega, _ = model.rhs(state.u, state.omega)
    return du, domega


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f([a + 0.5 * dt * b for a, b in zip(y, k1)])
    k3 = f([a + 0.5 * dt * b for a, b in zip(y, k2)])
    k4 = f([a + dt * b for a, b in zip(y, k3)])
    return [a + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]


def advance_model(model: Model, state: ModelState, dt: float) -> ModelState:
    """One RK4 step of fixed size ``dt`` (negative values integrate backwards)."""

    def f(y):
        du, dw, _ = model.rhs(y[0], y[1])
        return [du, dw]

    u, w = _rk4(f, [state.u, state.omega], dt)
    u[:, 0] = 0.0
    u[:, -1] = 0.0
    return ModelState(state.t + dt, u, w, model.psi_of(w), state.nu)


def step_model(
    model: Model, state: ModelState, ctrl: StepControl, sup_u0: float | None = None, h3_u0: float | None = None
) -> ModelState:
    """Advance by ``ctrl.dt`` and set ``ctrl.dt`` for the next step.

    Raises :class:`BlowupTerminated` on step collapse, when ``max|u|`` passes
    ``ctrl.blowup_factor * sup_u0``, or when the discrete ``H^3`` norm of ``u``
    passes ``ctrl.h3_factor * h3_u0``.
    """
    if ctrl.dt < ctrl.dt_min:
        raise BlowupTerminated("blow-up suspected: step collapse", state)
    new = advance_model(model, state, ctrl.dt)
    if not (np.all(np.isfinite(new.u)) and np.all(np.isfinite(new.omega))):
        raise BlowupTerminated("blow-up suspected: non-finite state", state)
    ctrl.dt = model.stable_dt(new, ctrl, ctrl.dt)
    if sup_u0 is not None and np.max(np.abs(new.u)) > ctrl.blowup_factor * sup_u0:
        raise BlowupTerminated("blow-up detected", new)
    if h3_u0 and np.isfinite(ctrl.h3_factor) and h3_norm(model.grid, new.u) > ctrl.h3_factor * h3_u0:
        raise BlowupTerminated("blow-up detected: H3 surrogate", new)
    return new


def h3_norm(grid: Grid, u: np.ndarray) -> float:
    from .diagnostics import sobolev_surrogate

    return sobolev_surrogate(grid, u, 3)


@dataclass
class RunResult:
    state: object
    reason: str
    steps: int


def run_model(model: Model, state: ModelState, ctrl: StepControl, t_end: float = np.inf, observer=None) -> RunResult:
    """Step until ``t_end``, termination, or ``ctrl.max_steps``.

    ``observer(state, dt)`` sees the initial state and every accepted state;
    ``dt`` is the step that produced it (0 for the initial state).
    """
    sup_u0 = float(np.max(np.abs(state.u))) or None
    h3_u0 = h3_norm(model.grid, state.u) if np.isfinite(ctrl.h3_factor) and sup_u0 else None
    ctrl.dt = min(ctrl.dt, model.stable_dt(state, ctrl, np.inf))
    if observer:
        observer(state, 0.0)
    steps = 0
    while steps < ctrl.max_steps:
        if state.t >= t_end:
            return RunResult(state, "t_end reached", steps)
        dt = ctrl.dt = min(ctrl.dt, t_end - state.t)
        try:
            state = step_model(model, state, ctrl, sup_u0, h3_u0)
        except BlowupTerminated as exc:
            if exc.state is not state:
                steps += 1
                if observer:
                    observer(exc.state, dt)
            logger.info("run terminated at t=%.6g: %s", exc.state.t, exc.reason)
            return RunResult(exc.state, exc.reason, steps)
        steps += 1
        if observer:
            observer(state, dt)
    return RunResult(state, "max_steps reached", steps)


class DecayModel:
    """The reformulated system on the interior domain with homogeneous Dirichlet inverse."""

    def __init__(self, grid: Grid, M: float):
        if not grid.domain.is_interior:
            raise ValueError("decay system lives on the interior domain")
        if M <= 0:
            raise ValueError("M must be positive")
        self.grid = grid
        self.M = float(M)
        self.solver = solver_for(grid, BcSpec.dirichlet())

    def inv_L5(self, f: np.ndarray) -> np.ndarray:
        return -self.solver.solve(f)

    def rhs(self, ut: np.ndarray, v: np.ndarray):
        dut = -4.0 * self.M * ut - 4.0 * ut * v
        dv = self.inv_L5(self.grid.diff_z(ut, 2))
        return dut, dv

    def stable_dt(self, state: DecayState, ctrl: StepControl) -> float:
        return ctrl.cfl_c / (4.0 * self.M + 4.0 * np.max(np.abs(state.v)))


def step_decay(model: DecayModel, state: DecayState, ctrl: StepControl) -> DecayState:
    """RK4 step of size ``ctrl.dt``; small negative undershoot in ``ut`` is clipped."""

    def f(y):
        return list(model.rhs(y[0], y[1]))

    ut, v = _rk4(f, [state.u_tilde, state.v], ctrl.dt)
    v[-1] = 0.0
    v[:, 0] = 0.0
    v[:, -1] = 0.0
    lo = float(ut.min())
    if lo < 0:
        if lo < -ctrl.clip_tol:
            raise PositivityError(f"positivity violated: min u_tilde = {lo:.3e}")
        logger.debug("clipping u_tilde undershoot %.3e at t=%.6g", lo, state.t + ctrl.dt)
        ut = np.maximum(ut, 0.0)
    return replace(state, t=state.t + ctrl.dt, u_tilde=ut, v=v)


def run_decay(model: DecayModel, state: DecayState, ctrl: StepControl, t_end: float, observer=None) -> RunResult:
    if observer:
        observer(state, 0.0)
    steps = 0
    while state.t < t_end and steps < ctrl.max_steps:
        dt = ctrl.dt = min(model.stable_dt(state, ctrl), t_end - state.t)
        state = step_decay(model, state, ctrl)
        steps += 1
        if observer:
            observer(state, dt)
    reason = "t_end reached" if state.t >= t_end else "max_steps reached"
    return RunResult(state, reason, steps)


def canonical_exterior_data(grid: Grid, alpha: float, b: float, s: float, c: float):
    """Closed-form exterior initial data ``(u0, omega0, psi0)``.

    ``psi0 = -(b/pi) exp(-alpha r^2) cos(pi z)`` meets the Robin condition with
    ``beta = 2 alpha`` and has ``psi0_z = b phi``; ``omega0 = -L5 psi0`` exactly;
    ``u0 = sqrt(s) sin(pi z) exp(c phi / 2)``.
    """
    if grid.domain.is_interior:
        raise ValueError("canonical exterior data needs an exterior grid")
    R, Z = grid.R, grid.Z
    gauss = np.exp(-alpha * R**2)
    phi = gauss * np.sin(np.pi * Z)
    psi0 = -(b / np.pi) * gauss * np.cos(np.pi * Z)
    omega0 = (b / np.pi) * (4 * alpha**2 * R**2 - 8 * alpha - np.pi**2) * gauss * np.cos(np.pi * Z)
    u0 = np.sqrt(s) * np.sin(np.pi * Z) * np.exp(0.5 * c * phi)
    u0[:, 0] = 0.0
    u0[:, -1] = 0.0
    return u0, omega0, psi0
