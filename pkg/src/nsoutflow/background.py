"""Background state, perturbation bookkeeping, and the stationary forcing terms.

The background is the planar profile carried over to the perturbed domain
(in flattened coordinates the profile is simply sampled in y1) plus the
collar extensions of the boundary-data deviation. Subtracting it from a
primitive state gives the perturbation the stability theory works with.

The forcing fields quantify how far the background is from solving the
stationary equations; they are diagnostics only and are never injected into
time stepping. All profile, extension, and geometry derivatives entering
them are exact, so the fields carry no discretization error of their own.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .extension import ExtensionField, Extensions
from .gas import GasParams
from .geometry import FlattenedGrid
from .profile import PlanarProfile
from .state import FieldState

__all__ = [
    "BackgroundState",
    "Perturbation",
    "assemble_background",
    "extract_perturbation",
    "embed",
    "forcing_terms",
]


@dataclass
class BackgroundState:
    """Profile-plus-extension reference state on a flattened grid."""

    grid: FlattenedGrid
    profile: PlanarProfile
    extensions: Extensions
    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray

    def as_state(self, t=0.0) -> FieldState:
        return FieldState(t, self.rho.copy(), self.u.copy(), self.theta.copy(), self.grid)


@dataclass
class Perturbation:
    """Difference (phi, psi, zeta) between a state and the background."""

    phi: np.ndarray
    psi: np.ndarray
    zeta: np.ndarray

    def boundary_residual(self) -> float:
        """Max violation of the homogeneous wall values psi = zeta = 0 at y1 = 0."""
        return max(float(np.max(np.abs(self.psi[:, 0]))), float(np.max(np.abs(self.zeta[0]))))

    def sup_norm(self) -> float:
        return max(
            float(np.max(np.abs(self.phi))),
            float(np.max(np.abs(self.psi))),
            float(np.max(np.abs(self.zeta))),
        )


def _lift(profile_values, grid: FlattenedGrid):
    """Broadcast a profile sample (function of y1) over the tangential nodes."""
    if grid.dimension == 1:
        return np.array(profile_values, copy=True)
    return np.repeat(profile_values[:, None], grid.n2, axis=1)


def assemble_background(
    profile: PlanarProfile, extensions: Extensions, grid: FlattenedGrid
) -> BackgroundState:
    """Compose profile and extensions into the background state."""
    if profile.x1.size != grid.n1 or abs(profile.length - grid.length) > 1e-12:
        raise DomainError(
            "profile grid does not match the flattened grid", kind="grid_mismatch"
        )
    if not np.allclose(profile.x1, grid.y1, atol=1e-12):
        raise DomainError("profile samples are not at the grid nodes", kind="grid_mismatch")
    rho = _lift(profile.rho, grid)
    theta = _lift(profile.theta, grid) + extensions.theta.values
    u = np.zeros((grid.dimension,) + grid.node_shape)
    u[0] = _lift(profile.u1, grid)
    for i, ext in enumerate(extensions.u):
        u[i] = u[i] + ext.values
    if np.any(rho <= 0) or np.any(theta <= 0):
        raise DomainError("background state lost positivity", kind="positivity")
    return BackgroundState(grid, profile, extensions, rho, u, theta)


def extract_perturbation(state: FieldState, bg: BackgroundState) -> Perturbation:
    if not state.grid.compatible(bg.grid):
        raise DomainError("state and background grids disagree", kind="grid_mismatch")
    return Perturbation(
        phi=state.rho - bg.rho,
        psi=state.u - bg.u,
        zeta=state.theta - bg.theta,
    )


def embed(bg: BackgroundState, pert: Perturbation, t=0.0) -> FieldState:
    return FieldState(
        t, bg.rho + pert.phi, bg.u + pert.psi, bg.theta + pert.zeta, bg.grid
    )


def forcing_terms(
    profile: PlanarProfile,
    extensions: Extensions,
    grid: FlattenedGrid,
    gas: GasParams,
):
    """Stationary forcing fields (F, G, H) of the perturbation equations.

    F enters the mass equation, G (one component per dimension) the momentum
    equation, H the energy equation. They vanish identically when the
    boundary is flat and the extensions are zero, and when the profile is
    constant; with a curved boundary the profile-curvature terms survive and
    are what drives multidirectional flow.
    """
    d = grid.dimension
    der = profile.derivatives()
    r = _lift(profile.rho, grid)
    rp = _lift(der["rho"][0], grid)
    u1p = _lift(der["u1"][0], grid)
    u1pp = _lift(der["u1"][1], grid)
    th = _lift(profile.theta, grid)
    thp = _lift(der["theta"][0], grid)
    thpp = _lift(der["theta"][1], grid)
    R, c_v, mu, lam, kappa = gas.R, gas.c_v, gas.mu, gas.lam, gas.kappa

    u_ext = extensions.u
    Th = extensions.theta
    u1 = _lift(profile.u1, grid)

    if d == 1:
        U = u_ext[0]
        Uv, dU, d2U = U.values, U.d1(), U.d11()
        Tv, dT, d2T = Th.values, Th.d1(), Th.d11()
        F = -rp * Uv - r * dU
        G = (
            -r * (u1 + Uv) * dU
            - r * Uv * u1p
            + gas.mu1 * d2U
            - R * r * dT
            - R * Tv * rp
        )[None]
        H = (
            -c_v * r * Uv * thp
            - c_v * r * (u1 + Uv) * dT
            - R * r * Tv * u1p
            - R * r * (th + Tv) * dU
            + kappa * d2T
            + (2 * mu + lam) * dU * dU
            + (4 * mu + 2 * lam) * u1p * dU
        )
        return F, G, H

    mp = grid.mp[None, :]
    mpp = grid.mpp[None, :]
    U1, U2 = u_ext
    U1v, U2v, Tv = U1.values, U2.values, Th.values

    gradU1 = U1.grad()
    gradU2 = U2.grad()
    gradT = Th.grad()

    div_u = U1.d1() + U2.d2() - mp * U2.d1()
    # grid derivatives of div_u for the (mu + lam) grad(div) term
    d1_div = U1.d11() + U2.d12() - mp * U2.d11()
    d2_div = U1.d12() + U2.d22() - mpp * U2.d1() - mp * U2.d12()
    grad_div = np.stack([d1_div, d2_div - mp * d1_div])

    # physical gradients of the composed profile quantities
    grad_rho = np.stack([rp, -mp * rp])
    grad_th = np.stack([thp, -mp * thp])

    F = -(grad_rho[0] * U1v + grad_rho[1] * U2v) - r * div_u

    adv = u1 + U1v  # tangential background velocity is U2 alone
    G = np.empty((2,) + grid.node_shape)
    lap_u = [U1.laplacian(), U2.laplacian()]
    conv_profile = [U1v * u1p + U2v * (-mp * u1p), 0.0]
    corr = [
        mu * u1pp * mp**2 - mu * u1p * mpp,
        (R * th * rp + R * r * thp - (mu + lam) * u1pp) * mp,
    ]
    for i, (gU, lap) in enumerate(((gradU1, lap_u[0]), (gradU2, lap_u[1]))):
        G[i] = (
            -r * (adv * gU[0] + U2v * gU[1])
            - r * conv_profile[i]
            + mu * lap
            + (mu + lam) * grad_div[i]
            - R * r * gradT[i]
            - R * Tv * grad_rho[i]
            + corr[i]
        )

    d11 = gradU1[0]
    d22 = gradU2[1]
    d12 = 0.5 * (gradU1[1] + gradU2[0])
    strain_sq = d11 * d11 + 2.0 * d12 * d12 + d22 * d22
    # profile strain: diag (u1', 0) with off-diagonal -mp u1' / 2
    strain_cross = u1p * d11 - mp * u1p * d12

    H = (
        -c_v * r * (U1v * grad_th[0] + U2v * grad_th[1])
        - c_v * r * (adv * gradT[0] + U2v * gradT[1])
        - R * r * Tv * u1p
        - R * r * (th + Tv) * div_u
        + kappa * thpp * mp**2
        - kappa * thp * mpp
        + kappa * Th.laplacian()
        + 2.0 * mu * strain_sq
        + 4.0 * mu * strain_cross
        + lam * div_u * div_u
        + 2.0 * lam * u1p * div_u
        + mu * u1p**2 * mp**2
    )
    return F, G, H
