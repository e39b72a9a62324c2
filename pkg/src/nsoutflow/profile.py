"""Planar stationary profile on the half-line.

The steady planar flow (rho, u1, theta)(x1) satisfies a third-order ODE
system whose first integrals (taken with the far-field values) reduce it to
an explicit autonomous system for (u1, theta) plus the algebraic relation
rho*u1 = rho_plus*u_plus. Under the supersonic condition the end state is a
stable node of the reduced system, so forward integration from the boundary
data converges without shooting.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import DomainError, subsonic_far_field
from .gas import FarFieldState, GasParams, is_supersonic, mach_number

__all__ = [
    "PlanarBoundaryData",
    "PlanarProfile",
    "boundary_strength",
    "profile_rhs",
    "EndStateLinearization",
    "endstate_jacobian",
    "solve_profile",
    "profile_tail_bound",
    "write_profile_csv",
]

#: default integrator tolerances (adaptive RK45)
RTOL_DEFAULT = 1e-10
ATOL_DEFAULT = 1e-12

#: default admissibility threshold on the boundary strength
DELTA_MAX_DEFAULT = 0.1


@dataclass(frozen=True)
class PlanarBoundaryData:
    """Scalar boundary values (u_b, theta_b) for the planar problem."""

    u_b: float
    theta_b: float

    def __post_init__(self):
        if self.theta_b <= 0:
            raise DomainError(f"boundary temperature must be positive, got {self.theta_b}")
        if self.u_b >= 0:
            raise DomainError(
                f"planar boundary velocity must be negative (outflow), got {self.u_b}"
            )


def boundary_strength(bd: PlanarBoundaryData, ff: FarFieldState) -> float:
    """|u_b - u_plus| + |theta_b - theta_plus|."""
    return abs(bd.u_b - ff.u_plus) + abs(bd.theta_b - ff.theta_plus)


def profile_rhs(u1, theta, ff: FarFieldState, gas: GasParams):
    """Right-hand side (du1/dx1, dtheta/dx1) of the reduced profile system.

    With m = rho_plus * u_plus:

        mu1 * u1'   = m (u1 - u_plus) + m R (theta/u1 - theta_plus/u_plus)
        kappa * th' = m [c_v (th - th_plus) + (u1^2 - u_plus^2)/2]
                      + m R (th - th_plus) - mu1 * u1 * u1'

    Both derivatives vanish identically at the end state.
    """
    if u1 == 0.0:
        raise DomainError("reduced profile system singular at u1 = 0", kind="singularity")
    m = ff.rho_plus * ff.u_plus
    up, thp = ff.u_plus, ff.theta_plus
    du1 = (m * (u1 - up) + m * gas.R * (theta / u1 - thp / up)) / gas.mu1
    dth = (
        m * (gas.c_v * (theta - thp) + 0.5 * (u1 * u1 - up * up))
        + m * gas.R * (theta - thp)
        - gas.mu1 * u1 * du1
    ) / gas.kappa
    return du1, dth


def _rhs_partials(u1, theta, ff: FarFieldState, gas: GasParams):
    """Analytic partial derivatives of :func:`profile_rhs` wrt (u1, theta)."""
    m = ff.rho_plus * ff.u_plus
    du1, _ = profile_rhs(u1, theta, ff, gas)
    d11 = (m - m * gas.R * theta / (u1 * u1)) / gas.mu1
    d12 = m * gas.R / (u1 * gas.mu1)
    d21 = (m * u1 - gas.mu1 * (du1 + u1 * d11)) / gas.kappa
    d22 = (m * (gas.c_v + gas.R) - gas.mu1 * u1 * d12) / gas.kappa
    return np.array([[d11, d12], [d21, d22]])


@dataclass(frozen=True)
class EndStateLinearization:
    """Jacobian of the reduced system at the end state, with its spectrum."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    all_stable: bool
    #: slowest decay rate min |Re lambda| when all eigenvalues are stable, else None
    slow_rate: float | None


def endstate_jacobian(ff: FarFieldState, gas: GasParams) -> EndStateLinearization:
    """Linearize the reduced system at (u_plus, theta_plus).

    For a supersonic end state both eigenvalues have negative real part, and
    the slowest one is the exponential decay rate of the profile tail.
    A nonnegative real part (sonic/subsonic input) is flagged, not raised.
    """
    jac = _rhs_partials(ff.u_plus, ff.theta_plus, ff, gas)
    eig = np.linalg.eigvals(jac)
    # sonic end states produce a zero eigenvalue up to rounding; classify it
    # as not strictly stable rather than trusting its sign bit
    tol = 1e-12 * max(1.0, float(np.max(np.abs(eig))))
    stable = bool(np.all(eig.real < -tol))
    slow = float(np.min(-eig.real)) if stable else None
    return EndStateLinearization(jac, eig, stable, slow)


@dataclass
class PlanarProfile:
    """Sampled planar profile on a uniform grid over [0, length].

    ``alpha_fit`` is the decay rate of the tail obtained by log-linear
    regression; it is None for a constant profile (zero boundary strength).
    """

    x1: np.ndarray
    rho: np.ndarray
    u1: np.ndarray
    theta: np.ndarray
    delta_tilde: float
    alpha_fit: float | None
    fit_r2: float | None
    far_field: FarFieldState
    gas: GasParams

    @property
    def length(self) -> float:
        return float(self.x1[-1])

    def deviation(self) -> np.ndarray:
        """|u1 - u_plus| + |theta - theta_plus| at every sample."""
        return np.abs(self.u1 - self.far_field.u_plus) + np.abs(
            self.theta - self.far_field.theta_plus
        )

    def derivatives(self):
        """Exact first and second x1-derivatives of (rho, u1, theta).

        First derivatives come from the reduced system itself, second ones
        from its analytic partials; no numerical differentiation of the
        profile is involved.
        """
        ff, gas = self.far_field, self.gas
        m = ff.rho_plus * ff.u_plus
        u, th = self.u1, self.theta
        up, thp = ff.u_plus, ff.theta_plus
        du1 = (m * (u - up) + m * gas.R * (th / u - thp / up)) / gas.mu1
        dth = (
            m * (gas.c_v * (th - thp) + 0.5 * (u * u - up * up))
            + m * gas.R * (th - thp)
            - gas.mu1 * u * du1
        ) / gas.kappa
        p11 = (m - m * gas.R * th / (u * u)) / gas.mu1
        p12 = m * gas.R / (u * gas.mu1)
        p21 = (m * u - gas.mu1 * (du1 + u * p11)) / gas.kappa
        p22 = (m * (gas.c_v + gas.R) - gas.mu1 * u * p12) / gas.kappa
        d2u1 = p11 * du1 + p12 * dth
        d2th = p21 * du1 + p22 * dth
        drho = -m * du1 / u**2
        d2rho = -m * d2u1 / u**2 + 2 * m * du1**2 / u**3
        return {
            "rho": (drho, d2rho),
            "u1": (du1, d2u1),
            "theta": (dth, d2th),
        }


def solve_profile(
    bd: PlanarBoundaryData,
    ff: FarFieldState,
    gas: GasParams,
    length: float,
    n: int,
    tail_tol: float = 1e-8,
    delta_max: float = DELTA_MAX_DEFAULT,
    rtol: float = RTOL_DEFAULT,
    atol: float = ATOL_DEFAULT,
) -> PlanarProfile:
    """Integrate the reduced system from the boundary and resample uniformly.

    Raises DomainError for subsonic far fields, boundary strengths beyond
    ``delta_max``, trajectories leaving the admissible region (u1 >= 0 or
    theta <= 0), and tails that have not settled below ``tail_tol`` at
    x1 = length.
    """
    if not is_supersonic(ff, gas):
        raise subsonic_far_field(mach_number(ff, gas))
    delta = boundary_strength(bd, ff)
    if delta > delta_max:
        raise DomainError(
            f"boundary strength {delta:.4g} exceeds admissible {delta_max:.4g}",
            kind="boundary_strength",
        )
    if n < 4:
        raise DomainError(f"profile grid needs at least 4 samples, got {n}")

    x = np.linspace(0.0, length, n)
    m = ff.rho_plus * ff.u_plus

    if delta == 0.0:
        const = np.ones(n)
        return PlanarProfile(
            x1=x,
            rho=ff.rho_plus * const,
            u1=ff.u_plus * const,
            theta=ff.theta_plus * const,
            delta_tilde=0.0,
            alpha_fit=None,
            fit_r2=None,
            far_field=ff,
            gas=gas,
        )

    def rhs(_x, y):
        return profile_rhs(y[0], y[1], ff, gas)

    def leaves_admissible(_x, y):
        return min(-y[0], y[1]) - 1e-12

    leaves_admissible.terminal = True
    leaves_admissible.direction = -1

    # keep integrator nodes at least twice as dense as the target grid so the
    # cubic resampling error stays far below the downstream O(h^2) truncation
    h_grid = length / (n - 1)
    sol = solve_ivp(
        rhs,
        (0.0, length),
        [bd.u_b, bd.theta_b],
        method="RK45",
        rtol=rtol,
        atol=atol,
        max_step=0.5 * h_grid,
        events=leaves_admissible,
    )
    if sol.status == 1 or not sol.success:
        raise DomainError(
            "profile trajectory left the admissible region (u1 < 0, theta > 0)",
            kind="divergence",
        )

    u1 = CubicSpline(sol.t, sol.y[0])(x)
    theta = CubicSpline(sol.t, sol.y[1])(x)
    rho = m / u1

    tail = abs(u1[-1] - ff.u_plus) + abs(theta[-1] - ff.theta_plus)
    if tail > tail_tol:
        raise DomainError(
            f"profile deviation {tail:.3g} at x1 = {length} exceeds tail tolerance "
            f"{tail_tol:.3g}; increase the domain length",
            kind="domain_too_short",
        )
    if np.any(u1 >= 0) or np.any(theta <= 0) or np.any(rho <= 0):
        raise DomainError("resampled profile violates positivity", kind="divergence")

    alpha, r2 = _fit_tail(x, np.abs(u1 - ff.u_plus) + np.abs(theta - ff.theta_plus), length)
    return PlanarProfile(
        x1=x,
        rho=rho,
        u1=u1,
        theta=theta,
        delta_tilde=delta,
        alpha_fit=alpha,
        fit_r2=r2,
        far_field=ff,
        gas=gas,
    )


def _fit_tail(x, dev, length):
    """Log-linear fit of the deviation on the window [L/2, 0.9 L]."""
    mask = (x >= 0.5 * length) & (x <= 0.9 * length) & (dev > 0)
    if mask.sum() < 3:
        raise DomainError("tail window too small for a decay fit", kind="tail_fit")
    slope, _, r2 = _linear_fit(x[mask], np.log(dev[mask]))
    return -slope, r2


def _linear_fit(x, y):
    """Least-squares line fit returning (slope, intercept, R^2)."""
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-300 else 1.0 - ss_res / ss_tot
    return float(coef[0]), float(coef[1]), r2


def profile_tail_bound(profile: PlanarProfile, k: int = 0):
    """Fit (C, alpha) with |d^k(profile - end state)/dx1^k| <= C * delta * exp(-alpha*x1).

    Derivatives are taken by centered differences so the bound is checked
    against the sampled profile itself, independently of the analytic
    derivative path. Verified pointwise on all samples with x1 > 1.
    """
    if k not in (0, 1, 2):
        raise DomainError(f"derivative order must be 0, 1 or 2, got {k}")
    if profile.delta_tilde == 0.0:
        raise DomainError("constant profile has no tail to fit", kind="tail_fit")
    ff = profile.far_field
    h = profile.x1[1] - profile.x1[0]
    dev = 0.0
    for values, far in (
        (profile.rho, ff.rho_plus),
        (profile.u1, ff.u_plus),
        (profile.theta, ff.theta_plus),
    ):
        f = values - far
        if k == 1:
            f = np.gradient(values, h, edge_order=2)
        elif k == 2:
            f = np.empty_like(values)
            f[1:-1] = (values[2:] - 2 * values[1:-1] + values[:-2]) / h**2
            f[0], f[-1] = f[1], f[-2]
        dev = dev + np.abs(f)

    mask = profile.x1 > 1.0
    x, d = profile.x1[mask], dev[mask]
    floor = max(d.max() * 1e-12, 1e-300)
    good = d > floor
    if good.sum() < 3:
        raise DomainError("tail below noise floor, nothing to fit", kind="tail_fit")
    slope, _, _ = _linear_fit(x[good], np.log(d[good]))
    alpha = -slope
    if alpha <= 0:
        raise DomainError("tail is not decaying, fit failed", kind="tail_fit")
    c = float(np.max(d[good] * np.exp(alpha * x[good]))) / profile.delta_tilde
    return c, alpha


def write_profile_csv(profile: PlanarProfile, path):
    """Export the sampled profile with header columns x1, rho, u1, theta."""
    with open(path, "w") as fh:
        fh.write("x1,rho,u1,theta\n")
        for i in range(profile.x1.size):
            fh.write(
                f"{float(profile.x1[i])!r},{float(profile.rho[i])!r},"
                f"{float(profile.u1[i])!r},{float(profile.theta[i])!r}\n"
            )
