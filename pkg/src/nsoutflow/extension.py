"""Collar extensions of the boundary-data deviation into the domain.

The deviation of (u_b, theta_b) from the planar boundary values is lifted
into the domain as (deviation at y2) * cutoff(y1): exact trace at y1 = 0,
identically zero past the unit collar y1 > 1, and smooth enough (C^4) for
second-order stencils to see clean truncation errors across the collar edge.
Both factors have closed-form derivatives, so extension derivatives used by
the forcing diagnostics are exact.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import BoundaryShape, FlattenedGrid, integrate, normal_vector, trig_eval
from .profile import PlanarBoundaryData

__all__ = [
    "cutoff",
    "cutoff_prime",
    "cutoff_second",
    "BoundaryData",
    "ExtensionField",
    "Extensions",
    "build_extension",
    "check_outflow",
    "total_boundary_deviation",
    "normal_outflow_modes",
]

#: default admissibility floors for u_b . n and theta_b
C1_DEFAULT = 1e-6
C2_DEFAULT = 1e-6


def _smoothstep9(t):
    # 9th-order smoothstep: 4 vanishing derivatives at both ends (C^4 overall)
    return t**5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t))))


def cutoff(s):
    """Monotone C^4 cutoff: 1 for s <= 0, 0 for s >= 1, value 1/2 at s = 1/2."""
    t = np.clip(s, 0.0, 1.0)
    return 1.0 - _smoothstep9(t)


def cutoff_prime(s):
    s = np.asarray(s, dtype=float)
    t = np.clip(s, 0.0, 1.0)
    d = -630.0 * t**4 * (1.0 - t) ** 4
    return np.where((s > 0.0) & (s < 1.0), d, 0.0)


def cutoff_second(s):
    s = np.asarray(s, dtype=float)
    t = np.clip(s, 0.0, 1.0)
    d = -2520.0 * t**3 * (1.0 - t) ** 3 * (1.0 - 2.0 * t)
    return np.where((s > 0.0) & (s < 1.0), d, 0.0)


@dataclass(frozen=True)
class BoundaryData:
    """Boundary values per tangential node, defined by trigonometric series.

    ``u_modes`` holds one mode list per velocity component and ``theta_modes``
    the temperature series, both absolute (not deviations); the planar
    reference enters through ``reference``. In 1-D the k = 0 cosine terms are
    the scalar boundary values.
    """

    reference: PlanarBoundaryData
    u_modes: tuple
    theta_modes: tuple

    @classmethod
    def planar(cls, reference: PlanarBoundaryData, dimension: int):
        """Tangentially constant data equal to the planar values."""
        u_modes = tuple(
            ((0, reference.u_b if i == 0 else 0.0, 0.0),) for i in range(dimension)
        )
        return cls(reference=reference, u_modes=u_modes, theta_modes=((0, reference.theta_b, 0.0),))

    @property
    def dimension(self) -> int:
        return len(self.u_modes)

    def u_values(self, grid: FlattenedGrid) -> np.ndarray:
        return np.stack(
            [trig_eval(m, grid.ell, grid.y2) for m in self.u_modes]
        )

    def theta_values(self, grid: FlattenedGrid) -> np.ndarray:
        return trig_eval(self.theta_modes, grid.ell, grid.y2)


def normal_outflow_modes(u_b: float, shape: BoundaryShape, n_modes: int = 8):
    """Velocity series for purely normal outflow of speed |u_b|.

    Returns mode lists representing -u_b * n(y2) (n the outward normal), so
    that u_b . n = |u_b| > 0 at every point. Obtained by projecting the two
    components onto the first ``n_modes`` Fourier modes.
    """
    if u_b >= 0:
        raise DomainError("normal outflow requires a negative planar velocity")
    n_quad = max(256, 16 * n_modes)
    y2 = np.arange(n_quad) * (shape.ell / n_quad)
    nvec = normal_vector(shape, y2)
    comps = []
    for i in range(2):
        vals = -u_b * nvec[i]
        modes = []
        for k in range(n_modes + 1):
            w = 2.0 * np.pi * k / shape.ell
            ck = float(np.mean(vals * np.cos(w * y2))) * (1.0 if k == 0 else 2.0)
            sk = 0.0 if k == 0 else 2.0 * float(np.mean(vals * np.sin(w * y2)))
            if abs(ck) > 1e-14 or abs(sk) > 1e-14:
                modes.append((k, ck, sk))
        comps.append(tuple(modes) if modes else ((0, 0.0, 0.0),))
    return tuple(comps)


def check_outflow(bd: BoundaryData, grid: FlattenedGrid, c1=C1_DEFAULT, c2=C2_DEFAULT):
    """Reject boundary data violating u_b . n >= c1 or theta_b >= c2 anywhere."""
    theta_b = bd.theta_values(grid)
    bad = np.where(theta_b < c2)[0]
    if bad.size:
        raise DomainError(
            f"boundary temperature {theta_b[bad[0]]:.4g} < {c2:g} at tangential node "
            f"{bad[0]} (y2 = {grid.y2[bad[0]]:.4g})",
            kind="boundary_temperature",
        )
    u_b = bd.u_values(grid)
    if grid.dimension == 1:
        un = -u_b[0]
    else:
        nvec = normal_vector(grid.shape, grid.y2)
        un = u_b[0] * nvec[0] + u_b[1] * nvec[1]
    bad = np.where(un < c1)[0]
    if bad.size:
        raise DomainError(
            f"outflow violated: u_b . n = {un[bad[0]]:.4g} < {c1:g} at tangential node "
            f"{bad[0]} (y2 = {grid.y2[bad[0]]:.4g})",
            kind="outflow_violation",
        )


class ExtensionField:
    """Product field g(y2) * c(y1) with exact factor derivatives.

    ``values`` has the grid node shape; derivative methods return physical
    (mapped) derivatives assembled from the exact factor derivatives and the
    exact shape derivatives, not from finite differences.
    """

    def __init__(self, grid: FlattenedGrid, tangential_modes):
        self.grid = grid
        self.modes = tuple(tangential_modes)
        y1 = grid.y1
        self._c = cutoff(y1)
        self._cp = cutoff_prime(y1)
        self._cpp = cutoff_second(y1)
        self._g = trig_eval(self.modes, grid.ell, grid.y2)
        self._gp = trig_eval(self.modes, grid.ell, grid.y2, 1)
        self._gpp = trig_eval(self.modes, grid.ell, grid.y2, 2)
        if grid.dimension == 1:
            self._g = np.atleast_1d(self._g)

    def _outer(self, radial, tangential):
        if self.grid.dimension == 1:
            return radial * tangential[0]
        return np.outer(radial, tangential)

    @property
    def values(self):
        return self._outer(self._c, self._g)

    # plain grid derivatives of the product
    def d1(self):
        return self._outer(self._cp, self._g)

    def d2(self):
        if self.grid.dimension == 1:
            return np.zeros(self.grid.node_shape)
        return self._outer(self._c, self._gp)

    def d11(self):
        return self._outer(self._cpp, self._g)

    def d22(self):
        if self.grid.dimension == 1:
            return np.zeros(self.grid.node_shape)
        return self._outer(self._c, self._gpp)

    def d12(self):
        if self.grid.dimension == 1:
            return np.zeros(self.grid.node_shape)
        return self._outer(self._cp, self._gp)

    # physical-space derivatives on the flattened grid
    def grad(self):
        g = self.grid
        if g.dimension == 1:
            return self.d1()[None]
        return np.stack([self.d1(), self.d2() - g.mp * self.d1()])

    def laplacian(self):
        g = self.grid
        if g.dimension == 1:
            return self.d11()
        return (
            (1.0 + g.mp**2) * self.d11()
            - 2.0 * g.mp * self.d12()
            + self.d22()
            - g.mpp * self.d1()
        )

    def is_zero(self) -> bool:
        return all(a == 0.0 and b == 0.0 for _, a, b in self.modes)


@dataclass
class Extensions:
    """Extension bundle: velocity components U, temperature Theta, norm report."""

    u: tuple
    theta: ExtensionField
    h2_norm: float
    delta: float


def build_extension(
    bd: BoundaryData,
    grid: FlattenedGrid,
    c1=C1_DEFAULT,
    c2=C2_DEFAULT,
) -> Extensions:
    """Lift the boundary-data deviation into the unit collar.

    U_i(y) = (u_b,i(y2) - planar value) * cutoff(y1) and similarly Theta; the
    traces at y1 = 0 are exact and all fields vanish for y1 > 1. The discrete
    H^2 norm of the bundle is reported for the linear-scaling audits.
    """
    if bd.dimension != grid.dimension:
        raise DomainError("boundary data and grid dimensions disagree")
    check_outflow(bd, grid, c1, c2)
    ref = bd.reference
    u_fields = []
    for i, modes in enumerate(bd.u_modes):
        dev = _subtract_constant(modes, ref.u_b if i == 0 else 0.0)
        u_fields.append(ExtensionField(grid, dev))
    theta_field = ExtensionField(grid, _subtract_constant(bd.theta_modes, ref.theta_b))
    fields = (*u_fields, theta_field)
    h2 = float(np.sqrt(sum(_h2_sq(f, grid) for f in fields)))
    return Extensions(
        u=tuple(u_fields),
        theta=theta_field,
        h2_norm=h2,
        delta=total_boundary_deviation(bd, grid),
    )


def _subtract_constant(modes, value):
    out = []
    found = False
    for k, a, b in modes:
        if k == 0:
            out.append((0, a - value, b))
            found = True
        else:
            out.append((k, a, b))
    if not found and value != 0.0:
        out.append((0, -value, 0.0))
    return tuple(out)


def _h2_sq(f: ExtensionField, grid: FlattenedGrid) -> float:
    parts = [f.values, f.d1(), f.d2(), f.d11(), f.d12(), f.d22()]
    return sum(float(integrate(p * p, grid)) for p in parts)


def total_boundary_deviation(bd: BoundaryData, grid: FlattenedGrid) -> float:
    """Boundary strength plus tangential H^1 norms of the data deviation."""
    ref = bd.reference
    delta = 0.0
    for i, modes in enumerate(bd.u_modes):
        dev = _subtract_constant(modes, ref.u_b if i == 0 else 0.0)
        delta += _tangential_h1(dev, grid)
    delta += _tangential_h1(_subtract_constant(bd.theta_modes, ref.theta_b), grid)
    return delta


def _tangential_h1(modes, grid: FlattenedGrid) -> float:
    if grid.dimension == 1:
        return abs(trig_eval(modes, 1.0, 0.0))
    v = trig_eval(modes, grid.ell, grid.y2)
    dv = trig_eval(modes, grid.ell, grid.y2, 1)
    return float(np.sqrt(grid.h2 * np.sum(v * v + dv * dv)))
