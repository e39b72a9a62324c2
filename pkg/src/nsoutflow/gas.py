"""Ideal-gas closure, far-field classification, and the boundary-flux quadratic form.

All quantities are nondimensional. The test fixtures fix a canonical gas
(R=1, gamma=5/3, mu=1, lambda=0, kappa=1); nothing here depends on units.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError

__all__ = [
    "GasParams",
    "FarFieldState",
    "pressure",
    "sound_speed",
    "mach_number",
    "flow_regime",
    "is_supersonic",
    "boundary_flux_form",
    "boundary_flux_det",
]


@dataclass(frozen=True)
class GasParams:
    """Transport and thermodynamic constants of the fluid.

    mu, lam are the viscosity coefficients (mu > 0, 2*mu + 3*lam >= 0),
    kappa the heat-conductivity ratio, R the gas constant, gamma > 1 the
    adiabatic exponent. Derived: c_v = R/(gamma-1) and mu1 = 2*mu + lam
    (the longitudinal viscosity entering the planar profile equations).
    """

    mu: float
    lam: float
    kappa: float
    R: float = 1.0
    gamma: float = 5.0 / 3.0
    c_v: float = field(init=False)
    mu1: float = field(init=False)

    def __post_init__(self):
        if self.mu <= 0:
            raise DomainError(f"viscosity mu must be positive, got {self.mu}")
        if 2 * self.mu + 3 * self.lam < 0:
            raise DomainError(f"2*mu + 3*lam must be >= 0, got {2 * self.mu + 3 * self.lam}")
        if self.kappa <= 0:
            raise DomainError(f"heat conductivity kappa must be positive, got {self.kappa}")
        if self.R <= 0:
            raise DomainError(f"gas constant R must be positive, got {self.R}")
        if self.gamma <= 1:
            raise DomainError(f"adiabatic exponent gamma must exceed 1, got {self.gamma}")
        object.__setattr__(self, "c_v", self.R / (self.gamma - 1.0))
        object.__setattr__(self, "mu1", 2.0 * self.mu + self.lam)


@dataclass(frozen=True)
class FarFieldState:
    """End state (rho_plus, u_plus, theta_plus) far downstream of the boundary.

    u_plus < 0: the flow comes in from infinity and leaves through the boundary.
    """

    rho_plus: float
    u_plus: float
    theta_plus: float

    def __post_init__(self):
        if self.rho_plus <= 0:
            raise DomainError(f"far-field density must be positive, got {self.rho_plus}")
        if self.theta_plus <= 0:
            raise DomainError(f"far-field temperature must be positive, got {self.theta_plus}")
        if self.u_plus >= 0:
            raise DomainError(f"far-field normal velocity must be negative, got {self.u_plus}")


def pressure(rho, theta, gas: GasParams):
    """Ideal-gas pressure R*rho*theta. Rejects nonpositive density or temperature."""
    if np.any(np.asarray(rho) <= 0):
        raise DomainError("pressure undefined for nonpositive density")
    if np.any(np.asarray(theta) <= 0):
        raise DomainError("pressure undefined for nonpositive temperature")
    return gas.R * rho * theta


def sound_speed(theta, gas: GasParams):
    """Adiabatic sound speed sqrt(gamma*R*theta)."""
    return np.sqrt(gas.gamma * gas.R * theta)


def mach_number(ff: FarFieldState, gas: GasParams) -> float:
    """Far-field Mach number |u_plus| / sqrt(gamma*R*theta_plus)."""
    return abs(ff.u_plus) / math.sqrt(gas.gamma * gas.R * ff.theta_plus)


def is_supersonic(ff: FarFieldState, gas: GasParams) -> bool:
    """Strictly supersonic far field: Mach > 1. Sonic states are rejected."""
    return mach_number(ff, gas) > 1.0


def flow_regime(ff: FarFieldState, gas: GasParams) -> str:
    """Classify the far field: 'supersonic' or 'sonic_or_subsonic' (strict inequality)."""
    return "supersonic" if is_supersonic(ff, gas) else "sonic_or_subsonic"


def boundary_flux_form(ff: FarFieldState, gas: GasParams) -> np.ndarray:
    """Symmetric matrix of the boundary-flux quadratic form.

    Acting on perturbations (density, normal velocity, temperature), the form is

        (R th |u| / 2 rho) a^2 + (rho |u| / 2) b^2 + (c_v rho |u| / 2 th) c^2
            - R th a b - R rho c b,

    with (rho, u, th) the far-field values. Its positive definiteness is
    equivalent to the far field being strictly supersonic, which is what makes
    weighted-norm decay possible; see :func:`boundary_flux_det`.
    """
    rho, u, th = ff.rho_plus, ff.u_plus, ff.theta_plus
    R, c_v = gas.R, gas.c_v
    au = abs(u)
    return np.array(
        [
            [R * th * au / (2 * rho), -R * th / 2, 0.0],
            [-R * th / 2, rho * au / 2, -R * rho / 2],
            [0.0, -R * rho / 2, c_v * rho * au / (2 * th)],
        ]
    )


def boundary_flux_det(ff: FarFieldState, gas: GasParams) -> float:
    """Closed-form determinant of :func:`boundary_flux_form`.

    det = (R c_v rho |u| / 8) (|u|^2 - gamma R theta); it vanishes exactly at
    Mach 1 and has the sign of (Mach - 1).
    """
    rho, u, th = ff.rho_plus, ff.u_plus, ff.theta_plus
    au = abs(u)
    return gas.R * gas.c_v * rho * au / 8.0 * (au * au - gas.gamma * gas.R * th)
