"""Energy forms, weighted norms, decay fitting, and inequality audits.

The relative-entropy energy density and the weighted norms mirror the
quantities controlled by the stability theory; the audits (energy identity,
Hardy inequality, equivalence ratios) check measured values and report
ratios instead of asserting any theoretical constants.
"""

from dataclasses import dataclass

import numpy as np

from .background import BackgroundState, Perturbation, extract_perturbation
from .errors import DomainError
from .gas import GasParams
from .geometry import FlattenedGrid, d_y1, d_y1_2, integrate, mapped_gradient
from .state import FieldState

__all__ = [
    "relative_entropy",
    "weighted_norm",
    "perturbation_weighted_norm",
    "perturbation_energy",
    "EnergyWeights",
    "energy_density",
    "fit_decay_rate",
    "contraction_functional",
    "hardy_check",
    "energy_identity_residual",
    "EnergyReport",
    "energy_report",
]


def relative_entropy(r):
    """eta(r) = r - log r - 1: nonnegative, zero only at r = 1, strictly convex."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("relative entropy undefined for nonpositive arguments")
    return r - np.log(r) - 1.0


def _weight(beta, grid: FlattenedGrid):
    if beta < 0:
        raise DomainError(f"weight exponent must be nonnegative, got {beta}")
    if beta * grid.length > 500.0:
        raise DomainError(
            f"weight exp({beta * grid.length:.0f}) would overflow; reduce beta or L",
            kind="overflow_guard",
        )
    w = np.exp(beta * grid.y1)
    if grid.dimension == 2:
        w = w[:, None]
    return w


def weighted_norm(field, beta, grid: FlattenedGrid) -> float:
    """Exponentially weighted L2 norm (weight exp(beta*y1), trapezoid rule).

    Accepts a scalar field or a stack of components (leading axes summed).
    beta = 0 reduces to the plain L2 norm.
    """
    field = np.asarray(field)
    sq = field * field
    while sq.ndim > grid.dimension:
        sq = np.sum(sq, axis=0)
    return float(np.sqrt(integrate(_weight(beta, grid) * sq, grid)))


def perturbation_weighted_norm(pert: Perturbation, beta, grid: FlattenedGrid) -> float:
    sq = pert.phi**2 + np.sum(pert.psi**2, axis=0) + pert.zeta**2
    return float(np.sqrt(integrate(_weight(beta, grid) * sq, grid)))


def perturbation_energy(pert: Perturbation, grid: FlattenedGrid, m: int, beta) -> float:
    """Discrete E_{m,beta} = |Phi|^2_{L2_e,beta} + |Phi|^2_{H^m} for m in {0, 1}."""
    if m not in (0, 1):
        raise DomainError(f"energy norms implemented for m in {{0,1}}, got {m}")
    total = perturbation_weighted_norm(pert, beta, grid) ** 2
    comps = [pert.phi, *pert.psi, pert.zeta]
    for f in comps:
        total += weighted_norm(f, 0.0, grid) ** 2
        if m == 1:
            total += weighted_norm(mapped_gradient(f, grid), 0.0, grid) ** 2
    return total


@dataclass
class EnergyWeights:
    """Reference fields entering the energy form and contraction functional."""

    rho_ref: np.ndarray
    theta_ref: np.ndarray
    theta_full: np.ndarray

    @classmethod
    def from_background(cls, bg: BackgroundState):
        prof_theta = bg.theta - bg.extensions.theta.values
        return cls(rho_ref=bg.rho, theta_ref=prof_theta, theta_full=bg.theta)

    @classmethod
    def from_state(cls, state: FieldState):
        """Weights taken from a (stationary) solution state."""
        return cls(rho_ref=state.rho, theta_ref=state.theta, theta_full=state.theta)


def energy_density(pert: Perturbation, weights: EnergyWeights, gas: GasParams, grid):
    """Pointwise energy form rho*E and its integral.

    rho*E = R rho theta_ref eta(rho_ref/rho) + rho |psi|^2 / 2
            + c_v rho theta_full eta(theta/theta_full),

    with rho = rho_ref + phi and theta = theta_full + zeta. Nonnegative, zero
    exactly where the perturbation vanishes.
    """
    rho = weights.rho_ref + pert.phi
    theta = weights.theta_full + pert.zeta
    if np.any(rho <= 0) or np.any(theta <= 0):
        raise DomainError("energy form requires positive density and temperature")
    dens = (
        gas.R * rho * weights.theta_ref * relative_entropy(weights.rho_ref / rho)
        + 0.5 * rho * np.sum(pert.psi**2, axis=0)
        + gas.c_v * rho * weights.theta_full * relative_entropy(theta / weights.theta_full)
    )
    return dens, integrate(dens, grid)


def contraction_functional(
    diff: Perturbation, weights: EnergyWeights, beta, grid: FlattenedGrid, gas: GasParams
) -> float:
    """Weighted quadratic distance functional between two perturbations.

    (1/2) integral of e^{beta y1} [ (R theta_ref / rho_ref) phi^2
      + rho_ref |psi|^2 + (c_v / theta_ref) rho_ref zeta^2 ].

    Positive definite; along two co-evolved solutions of the same problem its
    time series is the computable shadow of the uniqueness contraction.
    """
    w = _weight(beta, grid)
    dens = (
        gas.R * weights.theta_ref / weights.rho_ref * diff.phi**2
        + weights.rho_ref * np.sum(diff.psi**2, axis=0)
        + gas.c_v / weights.theta_ref * weights.rho_ref * diff.zeta**2
    )
    return 0.5 * integrate(w * dens, grid)


def fit_decay_rate(times, values, window=None):
    """Log-linear fit values ~ C exp(-sigma t) on the window; returns (sigma, C, R^2)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        mask = (times >= window[0]) & (times <= window[1])
        times, values = times[mask], values[mask]
    if times.size < 3:
        raise DomainError("need at least 3 samples in the fit window", kind="fit")
    if np.any(values <= 0):
        raise DomainError("decay fit requires positive values", kind="fit")
    y = np.log(values)
    coef = np.polyfit(times, y, 1)
    resid = y - np.polyval(coef, times)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-300 else 1.0 - ss_res / ss_tot
    return -float(coef[0]), float(np.exp(coef[1])), r2


def hardy_check(f, alpha, grid: FlattenedGrid):
    """Both sides of the weighted trace inequality
    int e^{-alpha y1} f^2 <= C (|grad f|^2 + |f at y1=0|^2) and their ratio.

    The flag threshold 10 is an implementation constant for the audit, not a
    theoretical value.
    """
    if alpha <= 0:
        raise DomainError(f"weight rate must be positive, got {alpha}")
    f = np.asarray(f, dtype=float)
    w = np.exp(-alpha * grid.y1)
    if grid.dimension == 2:
        w = w[:, None]
    lhs = integrate(w * f * f, grid)
    grad_sq = np.sum(mapped_gradient(f, grid) ** 2, axis=0)
    if grid.dimension == 1:
        trace = float(f[0] ** 2)
    else:
        trace = float(np.sum(f[0, :] ** 2) * grid.h2)
    rhs = integrate(grad_sq, grid) + trace
    ratio = 0.0 if lhs == 0.0 else (np.inf if rhs == 0.0 else lhs / rhs)
    return lhs, rhs, ratio, bool(ratio > 10.0)


# ---------------------------------------------------------------------------
# energy identity (1-D, flat boundary)

def _identity_terms(state: FieldState, bg: BackgroundState, gas: GasParams, problem):
    """Pointwise ingredients of the energy balance for one 1-D snapshot."""
    from .solver import rhs_eval

    g = state.grid
    h = g.h1
    pert = extract_perturbation(state, bg)
    phi, psi, zeta = pert.phi, pert.psi[0], pert.zeta
    rho, u, theta = state.rho, state.u[0], state.theta
    der = bg.profile.derivatives()
    theta_t = bg.theta - bg.extensions.theta.values  # profile temperature
    dtheta_tilde = der["theta"][0]
    drho_tilde = der["rho"][0]
    Theta = bg.extensions.theta.values
    dTheta = bg.extensions.theta.d1()
    theta_full = theta_t + Theta

    dphi = d_y1(phi, h)
    dpsi = d_y1(psi, h)
    dzeta = d_y1(zeta, h)
    dtheta = d_y1(theta, h)
    mu1 = gas.mu1

    weights = EnergyWeights.from_background(bg)
    dens, total = energy_density(pert, weights, gas, g)

    diss = mu1 * dpsi**2 + gas.kappa / theta * dzeta**2
    # flux fields: G1 + B1 (first/only component); rho*u*E written as u*(rho E)
    g1 = -u * dens - gas.R * theta_t * phi * psi - gas.R * rho * zeta * psi
    b1 = mu1 * psi * dpsi + gas.kappa * zeta / theta * dzeta
    flux_total = float((g1 + b1)[-1] - (g1 + b1)[0])

    # equation combinations in place of the inhomogeneous/homogeneous split
    drho_t, du_t, dth_t = rhs_eval(state, problem)
    f_comb = drho_t + u * dphi + rho * dpsi
    g_comb = rho * (du_t[0] + u * dpsi) - mu1 * d_y1_2(psi, h) + gas.R * theta * dphi + gas.R * rho * dzeta
    h_comb = (
        gas.c_v * rho * (dth_t + u * dzeta)
        + gas.R * rho * theta * dpsi
        - gas.kappa * d_y1_2(zeta, h)
        - (2.0 * gas.mu + gas.lam) * dpsi**2
    )

    r11 = (
        gas.R * theta_t * phi / rho * f_comb
        + psi * g_comb
        + zeta / theta * h_comb
        + gas.R * phi * psi * dtheta_tilde
        - gas.R * Theta * psi * dphi
        + gas.R * zeta * psi * drho_tilde
        + gas.R * rho * relative_entropy(bg.rho / rho) * u * dtheta_tilde
        - gas.R * theta_t * phi**2 / (rho * bg.rho) * u * drho_tilde
        + gas.c_v * rho * relative_entropy(theta / theta_full) * u * (dtheta_tilde + dTheta)
        - gas.c_v * rho * theta_full / theta * zeta**2 * u * (dtheta_tilde + dTheta) / theta_full**2
        + gas.kappa * zeta / theta**2 * dtheta * dzeta
        + zeta / theta * (2.0 * gas.mu + gas.lam) * dpsi**2
    )
    return {
        "energy": total,
        "dissipation": integrate(diss, g),
        "flux": flux_total,
        "remainder": integrate(r11, g),
    }


def energy_identity_residual(snapshots, bg: BackgroundState, gas: GasParams, problem):
    """Per-interval residual of the energy balance along a 1-D flat run.

    d/dt int rho*E + int dissipation - boundary flux - int remainder should
    vanish; the returned residuals shrink at the combined discretization
    order under simultaneous space/time refinement.
    """
    if bg.grid.dimension != 1 or not bg.grid.shape.is_flat:
        raise DomainError("energy identity audit is defined for flat 1-D runs")
    if len(snapshots) < 3:
        raise DomainError("snapshot cadence too coarse for the identity audit", kind="cadence")
    terms = [_identity_terms(s, bg, gas, problem) for s in snapshots]
    out = []
    for k in range(len(snapshots) - 1):
        dt = snapshots[k + 1].t - snapshots[k].t
        if dt <= 0:
            raise DomainError("snapshots must be strictly increasing in time")
        de = (terms[k + 1]["energy"] - terms[k]["energy"]) / dt
        avg = lambda key: 0.5 * (terms[k][key] + terms[k + 1][key])  # noqa: E731
        resid = de + avg("dissipation") - avg("flux") - avg("remainder")
        scale = max(
            abs(de), abs(avg("dissipation")), abs(avg("flux")), abs(avg("remainder")), 1e-300
        )
        out.append(
            {
                "t_mid": 0.5 * (snapshots[k].t + snapshots[k + 1].t),
                "residual": resid,
                "scale": scale,
            }
        )
    return out


@dataclass
class EnergyReport:
    """One diagnostics row along a trajectory."""

    t: float
    weighted_norm: float
    e0: float
    e1: float
    energy_integral: float
    contraction: float
    dissipation: float | None = None
    boundary_flux: float | None = None
    remainder: float | None = None


def energy_report(
    state: FieldState,
    bg: BackgroundState,
    beta: float,
    gas: GasParams,
    problem=None,
) -> EnergyReport:
    """Standard diagnostics row; the identity budget is filled on flat 1-D
    grids when the problem (for rhs evaluation) is supplied."""
    grid = state.grid
    pert = extract_perturbation(state, bg)
    weights = EnergyWeights.from_background(bg)
    _, total = energy_density(pert, weights, gas, grid)
    rep = EnergyReport(
        t=state.t,
        weighted_norm=perturbation_weighted_norm(pert, beta, grid),
        e0=perturbation_energy(pert, grid, 0, beta),
        e1=perturbation_energy(pert, grid, 1, beta),
        energy_integral=total,
        contraction=contraction_functional(pert, weights, beta, grid, gas),
    )
    if problem is not None and grid.dimension == 1 and grid.shape.is_flat:
        t = _identity_terms(state, bg, gas, problem)
        rep.dissipation = t["dissipation"]
        rep.boundary_flux = t["flux"]
        rep.remainder = t["remainder"]
    return rep
