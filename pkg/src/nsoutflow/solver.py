"""Semi-discrete compressible Navier-Stokes evolution in flattened coordinates.

Convection is upwinded along the grid directions using the contravariant
velocity (u1 - M' u2, u2); all other derivatives use the centered mapped
operators. Velocity and temperature carry Dirichlet data at y1 = 0 and the
far-field values at y1 = L; the density has no boundary condition at the
outflow wall and is evolved there with interior-biased stencils. Time
stepping is two-stage strong-stability-preserving Runge-Kutta with boundary
conditions reimposed after every stage.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, DomainError
from .gas import FarFieldState, GasParams, sound_speed
from .geometry import FlattenedGrid, d_y1, d_y1_2, d_y2, d_y2_2, mapped_grad_div
from .state import FieldState

__all__ = [
    "SolverConfig",
    "OutflowProblem",
    "rhs_eval",
    "stable_dt",
    "apply_boundary_conditions",
    "step",
    "evolve",
    "EvolveResult",
]

SCHEMES = ("upwind1", "upwind2")


@dataclass
class SolverConfig:
    """Time-stepping knobs; tolerances are strict inputs, not suggestions."""

    cfl: float = 0.4
    t_end: float = 1.0
    snapshot_interval: float = 0.1
    steady_tol: float = 1e-9
    scheme: str = "upwind1"
    backend: str = "auto"  # numpy | numba | auto
    max_steps: int = 200_000_000

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise DomainError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.steady_tol <= 0 or self.snapshot_interval <= 0:
            raise DomainError("tolerances and cadences must be positive")
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown convection scheme {self.scheme!r}")
        if self.backend not in ("auto", "numpy", "numba"):
            raise DomainError(f"unknown backend {self.backend!r}")


@dataclass
class OutflowProblem:
    """Grid, gas, far field, and boundary node values for one run."""

    grid: FlattenedGrid
    gas: GasParams
    far_field: FarFieldState
    u_b: np.ndarray  # (d,) in 1-D, (d, n2) in 2-D
    theta_b: np.ndarray  # scalar-like in 1-D, (n2,) in 2-D
    scheme: str = "upwind1"
    backend: str = "auto"
    _use_numba: bool = field(init=False, default=False)

    def __post_init__(self):
        self.u_b = np.atleast_1d(np.asarray(self.u_b, dtype=float))
        self.theta_b = np.asarray(self.theta_b, dtype=float)
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown convection scheme {self.scheme!r}")
        if self.backend == "numba" or (self.backend == "auto" and self.grid.dimension == 2):
            try:
                from . import kernels  # noqa: F401

                self._use_numba = True
            except ImportError:
                if self.backend == "numba":
                    raise
                self._use_numba = False

    def far_state(self, t=0.0) -> FieldState:
        g = self.grid
        u = np.zeros((g.dimension,) + g.node_shape)
        u[0] = self.far_field.u_plus
        return FieldState(
            t,
            np.full(g.node_shape, self.far_field.rho_plus),
            u,
            np.full(g.node_shape, self.far_field.theta_plus),
            g,
        )


# ---------------------------------------------------------------------------
# upwinded first derivatives

def _upwind_y1(f, a, h, scheme):
    out_f = np.empty_like(f)
    out_b = np.empty_like(f)
    if scheme == "upwind1":
        out_f[:-1] = (f[1:] - f[:-1]) / h
        out_f[-1] = (f[-1] - f[-2]) / h
        out_b[1:] = (f[1:] - f[:-1]) / h
        out_b[0] = (f[1] - f[0]) / h
    else:
        out_f[:-2] = (-3.0 * f[:-2] + 4.0 * f[1:-1] - f[2:]) / (2.0 * h)
        out_f[-2] = (f[-1] - f[-3]) / (2.0 * h)
        out_f[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
        out_b[2:] = (3.0 * f[2:] - 4.0 * f[1:-1] + f[:-2]) / (2.0 * h)
        out_b[1] = (f[2] - f[0]) / (2.0 * h)
        out_b[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    return np.where(a > 0.0, out_b, out_f)


def _upwind_y2(f, a, h, scheme):
    if scheme == "upwind1":
        fwd = (np.roll(f, -1, axis=1) - f) / h
        bwd = (f - np.roll(f, 1, axis=1)) / h
    else:
        fwd = (-3.0 * f + 4.0 * np.roll(f, -1, axis=1) - np.roll(f, -2, axis=1)) / (2.0 * h)
        bwd = (3.0 * f - 4.0 * np.roll(f, 1, axis=1) + np.roll(f, 2, axis=1)) / (2.0 * h)
    return np.where(a > 0.0, bwd, fwd)


# ---------------------------------------------------------------------------
# right-hand side

def rhs_eval(state: FieldState, problem: OutflowProblem):
    """Time derivative of (rho, u, theta) at every node.

    Rows that carry Dirichlet data are computed like any other and
    overwritten by the stepper; only the density row at y1 = 0 evolves.
    """
    rmin, tmin = float(np.min(state.rho)), float(np.min(state.theta))
    if not (rmin > 0.0 and tmin > 0.0 and np.isfinite(rmin) and np.isfinite(tmin)):
        bad = state.positivity_violation()
        raise BlowUpError(
            f"positivity lost at node {bad}, t = {state.t:.6g}",
            last_state=state,
            node=bad,
            time=state.t,
        )
    if problem._use_numba and state.grid.dimension == 2:
        from . import kernels

        return kernels.rhs_2d(state, problem)
    return _rhs_numpy(state, problem)


def _rhs_numpy(state: FieldState, problem: OutflowProblem):
    g = state.grid
    gas = problem.gas
    rho, theta = state.rho, state.theta
    h1 = g.h1
    scheme = problem.scheme
    R, c_v, mu, lam, kappa = gas.R, gas.c_v, gas.mu, gas.lam, gas.kappa

    if g.dimension == 1:
        u1 = state.u[0]
        a1 = u1
        divu = d_y1(u1, h1)
        conv_rho = a1 * _upwind_y1(rho, a1, h1, scheme)
        drho = -(conv_rho + rho * divu)
        p = R * rho * theta
        dpdx = d_y1(p, h1)
        lap_u = d_y1_2(u1, h1)
        du1 = -a1 * _upwind_y1(u1, a1, h1, scheme) + (
            -dpdx + (2.0 * mu + lam) * lap_u
        ) / rho
        lap_th = d_y1_2(theta, h1)
        diss = 2.0 * mu * divu * divu + lam * divu * divu
        dth = -a1 * _upwind_y1(theta, a1, h1, scheme) + (
            -p * divu + kappa * lap_th + diss
        ) / (c_v * rho)
        return drho, du1[None], dth

    h2 = g.h2
    mp = g.mp[None, :]
    mpp = g.mpp[None, :]
    u1, u2 = state.u[0], state.u[1]
    a1 = u1 - mp * u2
    a2 = u2

    def conv(f):
        return a1 * _upwind_y1(f, a1, h1, scheme) + a2 * _upwind_y2(f, a2, h2, scheme)

    def grad(f):
        f1 = d_y1(f, h1)
        return f1, d_y2(f, h2) - mp * f1

    def lap(f):
        f1 = d_y1(f, h1)
        f12 = d_y2(f1, h2)
        return (
            (1.0 + mp * mp) * d_y1_2(f, h1)
            - 2.0 * mp * f12
            + d_y2_2(f, h2)
            - mpp * f1
        )

    d1u1, d2u1 = grad(u1)
    d1u2, d2u2 = grad(u2)
    divu = d1u1 + d2u2

    drho = -(conv(rho) + rho * divu)

    p = R * rho * theta
    gp1, gp2 = grad(p)
    gd1, gd2 = mapped_grad_div(state.u, g)
    du1 = -conv(u1) + (-gp1 + mu * lap(u1) + (mu + lam) * gd1) / rho
    du2 = -conv(u2) + (-gp2 + mu * lap(u2) + (mu + lam) * gd2) / rho

    d12 = 0.5 * (d2u1 + d1u2)
    strain_sq = d1u1 * d1u1 + 2.0 * d12 * d12 + d2u2 * d2u2
    dth = -conv(theta) + (
        -p * divu + kappa * lap(theta) + 2.0 * mu * strain_sq + lam * divu * divu
    ) / (c_v * rho)
    return drho, np.stack([du1, du2]), dth


# ---------------------------------------------------------------------------
# time stepping

def stable_dt(state: FieldState, problem: OutflowProblem, cfl: float) -> float:
    """CFL-limited step: convective h/(|u|+c) and explicit diffusive bound.

    In 1-D the diffusive bound is h^2 / (2 max(mu1/rho, kappa/(c_v rho)));
    in 2-D both directions and the metric weight (1 + max M'^2) on the normal
    direction enter the denominator.
    """
    if cfl <= 0.0:
        raise DomainError(f"cfl must be positive, got {cfl}")
    g = state.grid
    gas = problem.gas
    speed = np.sqrt(np.sum(state.u**2, axis=0)) + sound_speed(state.theta, gas)
    nu = np.maximum(gas.mu1 / state.rho, gas.kappa / (gas.c_v * state.rho))
    nu_max = float(np.max(nu))
    if g.dimension == 1:
        conv = g.h1 / float(np.max(speed))
        diff = g.h1 * g.h1 / (2.0 * nu_max)
    else:
        conv = min(g.h1, g.h2) / float(np.max(speed))
        w1 = 1.0 + float(np.max(g.mp**2))
        diff = 1.0 / (2.0 * nu_max * (w1 / g.h1**2 + 1.0 / g.h2**2))
    return cfl * min(conv, diff)


def apply_boundary_conditions(state: FieldState, problem: OutflowProblem):
    """Dirichlet wall data for (u, theta) at y1 = 0, far field at y1 = L."""
    ff = problem.far_field
    if state.grid.dimension == 1:
        state.u[0, 0] = problem.u_b[0]
        state.theta[0] = problem.theta_b
        state.rho[-1] = ff.rho_plus
        state.u[0, -1] = ff.u_plus
        state.theta[-1] = ff.theta_plus
    else:
        state.u[0, 0, :] = problem.u_b[0]
        state.u[1, 0, :] = problem.u_b[1]
        state.theta[0, :] = problem.theta_b
        state.rho[-1, :] = ff.rho_plus
        state.u[0, -1, :] = ff.u_plus
        state.u[1, -1, :] = 0.0
        state.theta[-1, :] = ff.theta_plus
    return state


def step(state: FieldState, problem: OutflowProblem, dt: float) -> FieldState:
    """One SSP-RK2 (Heun) step with boundary data reimposed per stage."""
    drho, du, dth = rhs_eval(state, problem)
    s1 = FieldState(
        state.t + dt,
        state.rho + dt * drho,
        state.u + dt * du,
        state.theta + dt * dth,
        state.grid,
    )
    apply_boundary_conditions(s1, problem)
    drho1, du1, dth1 = rhs_eval(s1, problem)
    s2 = FieldState(
        state.t + dt,
        0.5 * (state.rho + s1.rho + dt * drho1),
        0.5 * (state.u + s1.u + dt * du1),
        0.5 * (state.theta + s1.theta + dt * dth1),
        state.grid,
    )
    apply_boundary_conditions(s2, problem)
    return s2


@dataclass
class EvolveResult:
    status: str  # "completed" | "blowup"
    state: FieldState
    snapshots: list
    dt: float
    n_steps: int
    failure: str | None = None


def evolve(state0: FieldState, problem: OutflowProblem, cfg: SolverConfig, monitor=None):
    """March to t_end, returning snapshots at the configured cadence.

    ``monitor`` is called as monitor(state) at every snapshot time. A
    positivity or NaN failure ends the run with status "blowup" and the last
    good state preserved.
    """
    state = state0.copy()
    apply_boundary_conditions(state, problem)
    dt = stable_dt(state, problem, cfg.cfl)
    n_total = int(np.ceil((cfg.t_end - state.t) / dt - 1e-12))
    if n_total > cfg.max_steps:
        raise DomainError(f"run needs {n_total} steps, above max_steps={cfg.max_steps}")
    every = max(1, int(round(cfg.snapshot_interval / dt)))
    snapshots = [state.copy()]
    if monitor is not None:
        monitor(state)
    last_good = state
    n = 0
    try:
        while n < n_total:
            state = step(state, problem, dt)
            n += 1
            if n % every == 0 or n == n_total:
                if state.positivity_violation() is not None:
                    raise BlowUpError(
                        "positivity lost", last_state=last_good, time=state.t
                    )
                snapshots.append(state.copy())
                if monitor is not None:
                    monitor(state)
                last_good = snapshots[-1]
    except BlowUpError as exc:
        return EvolveResult(
            status="blowup",
            state=last_good,
            snapshots=snapshots,
            dt=dt,
            n_steps=n,
            failure=str(exc),
        )
    return EvolveResult(
        status="completed", state=state, snapshots=snapshots, dt=dt, n_steps=n
    )
