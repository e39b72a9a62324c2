"""Perturbed half-space geometry and derivatives in boundary-flattened coordinates.

The domain {x1 > M(x2)} is flattened by x1 = y1 + M(y2), x2 = y2, which maps
the uniform grid on [0, L] x [0, ell) onto the physical domain. Physical-space
derivatives become combinations of grid derivatives with the (exact) shape
derivatives M', M'': for a scalar f,

    grad_x f = (D1 f, D2 f - M' D1 f)
    lap_x  f = (1 + M'^2) D11 f - 2 M' D12 f + D22 f - M'' D1 f

where D1, D2 are plain grid derivatives. The shape is a finite trigonometric
series, so M and its derivatives are evaluated in closed form; only the field
derivatives are discretized (2nd-order centered stencils, one-sided at the
y1 ends, periodic wrap in y2; 4th-order variants for residual cross-checks).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "BoundaryShape",
    "FlattenedGrid",
    "trig_eval",
    "normal_vector",
    "gamma_map",
    "gamma_inverse",
    "mapped_gradient",
    "mapped_divergence",
    "mapped_laplacian",
    "mapped_grad_div",
    "mapped_vector_gradient",
    "strain_tensor",
    "plain_gradient",
    "plain_divergence",
    "plain_laplacian",
    "d_y1",
    "d_y2",
    "d_y1_2",
    "d_y2_2",
]

MAX_MODES = 16


def trig_eval(modes, ell, x, order=0):
    """Evaluate a finite trigonometric series (or its derivative) at x.

    ``modes`` is a sequence of (wavenumber k, cosine amplitude, sine amplitude)
    over the period ``ell``; ``order`` in {0, 1, 2} selects the derivative.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for k, a, b in modes:
        w = 2.0 * np.pi * k / ell
        ph = w * x
        if order == 0:
            out = out + a * np.cos(ph) + b * np.sin(ph)
        elif order == 1:
            out = out + w * (-a * np.sin(ph) + b * np.cos(ph))
        elif order == 2:
            out = out + w * w * (-a * np.cos(ph) - b * np.sin(ph))
        else:
            raise DomainError(f"unsupported series derivative order {order}")
    return out


@dataclass(frozen=True)
class BoundaryShape:
    """Boundary graph x1 = M(x2), M a finite trigonometric series.

    ``modes`` is a sequence of (wavenumber k, cosine amplitude, sine amplitude)
    with k a nonnegative integer; the period is ``ell``. For dimension 1 the
    boundary is the single point x1 = 0 and M vanishes identically.
    """

    dimension: int
    ell: float = 1.0
    modes: tuple = ()

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise DomainError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.dimension == 2 and self.ell <= 0:
            raise DomainError(f"tangential period must be positive, got {self.ell}")
        if len(self.modes) > MAX_MODES:
            raise DomainError(f"shape series capped at {MAX_MODES} modes, got {len(self.modes)}")
        object.__setattr__(self, "modes", tuple((int(k), float(a), float(b)) for k, a, b in self.modes))
        for k, _, _ in self.modes:
            if k < 0:
                raise DomainError(f"wavenumbers must be nonnegative, got {k}")

    def m(self, x2):
        return self._eval(x2, 0)

    def m_prime(self, x2):
        return self._eval(x2, 1)

    def m_second(self, x2):
        return self._eval(x2, 2)

    def _eval(self, x2, order):
        if self.dimension == 1:
            return np.zeros_like(np.asarray(x2, dtype=float))
        return trig_eval(self.modes, self.ell, x2, order)

    @property
    def is_flat(self) -> bool:
        return self.dimension == 1 or all(a == 0 and b == 0 for _, a, b in self.modes)


def normal_vector(shape: BoundaryShape, x2=0.0) -> np.ndarray:
    """Unit outward normal of the boundary at tangential position x2.

    (-1, M')/sqrt(1 + M'^2) in 2-D, (-1,) in 1-D; |n| = 1 to rounding.
    """
    if shape.dimension == 1:
        return np.array([-1.0])
    mp = shape.m_prime(x2)
    norm = np.sqrt(1.0 + mp * mp)
    return np.array([-1.0 / norm, mp / norm])


def gamma_map(shape: BoundaryShape, y1, y2=None):
    """Flattened -> physical coordinates: x1 = y1 + M(y2), x2 = y2."""
    if shape.dimension == 1:
        return np.asarray(y1, dtype=float)
    return np.asarray(y1, dtype=float) + shape.m(y2), np.asarray(y2, dtype=float)


def gamma_inverse(shape: BoundaryShape, x1, x2=None):
    """Physical -> flattened coordinates: y1 = x1 - M(x2), y2 = x2."""
    if shape.dimension == 1:
        return np.asarray(x1, dtype=float)
    return np.asarray(x1, dtype=float) - shape.m(x2), np.asarray(x2, dtype=float)


@dataclass(frozen=True)
class FlattenedGrid:
    """Uniform grid in flattened coordinates with precomputed shape data.

    Fields live on arrays of shape (n1,) in 1-D and (n1, n2) in 2-D with y1
    along axis 0. y2 is periodic with spacing ell/n2 (no duplicated endpoint).
    The transform matrix A(y2) is lower-triangular with unit diagonal; its
    only nontrivial entry, A[1,0] = -M'(y2), is held in ``mp``.
    """

    dimension: int
    n1: int
    length: float
    shape: BoundaryShape
    n2: int = 1
    y1: np.ndarray = field(init=False, repr=False)
    y2: np.ndarray = field(init=False, repr=False)
    h1: float = field(init=False)
    h2: float = field(init=False)
    m: np.ndarray = field(init=False, repr=False)
    mp: np.ndarray = field(init=False, repr=False)
    mpp: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.dimension != self.shape.dimension:
            raise DomainError("grid and shape dimensions disagree")
        if self.n1 < 5:
            raise DomainError(f"need at least 5 normal nodes, got {self.n1}")
        if self.length <= 0:
            raise DomainError(f"domain length must be positive, got {self.length}")
        if self.dimension == 2 and self.n2 < 4:
            raise DomainError(f"need at least 4 tangential nodes, got {self.n2}")
        object.__setattr__(self, "y1", np.linspace(0.0, self.length, self.n1))
        object.__setattr__(self, "h1", self.length / (self.n1 - 1))
        if self.dimension == 2:
            y2 = np.arange(self.n2) * (self.shape.ell / self.n2)
            object.__setattr__(self, "y2", y2)
            object.__setattr__(self, "h2", self.shape.ell / self.n2)
        else:
            object.__setattr__(self, "y2", np.zeros(1))
            object.__setattr__(self, "h2", 0.0)
        object.__setattr__(self, "m", self.shape.m(self.y2))
        object.__setattr__(self, "mp", self.shape.m_prime(self.y2))
        object.__setattr__(self, "mpp", self.shape.m_second(self.y2))

    @property
    def ell(self) -> float:
        return self.shape.ell

    @property
    def node_shape(self):
        return (self.n1,) if self.dimension == 1 else (self.n1, self.n2)

    def zeros(self):
        return np.zeros(self.node_shape)

    def a_matrix(self) -> np.ndarray:
        """A(y2) per tangential node, shape (d, d, n2)."""
        d = self.dimension
        a = np.zeros((d, d, self.n2 if d == 2 else 1))
        for i in range(d):
            a[i, i] = 1.0
        if d == 2:
            a[1, 0] = -self.mp
        return a

    def compatible(self, other) -> bool:
        return (
            self.dimension == other.dimension
            and self.n1 == other.n1
            and self.n2 == other.n2
            and self.length == other.length
            and self.shape == other.shape
        )


# ---------------------------------------------------------------------------
# finite-difference primitives

def _fornberg(x0, xs, m):
    """Finite-difference weights for the m-th derivative at x0 on nodes xs."""
    n = len(xs)
    c = np.zeros((n, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = xs[0] - x0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            for k in range(mn, 0, -1):
                c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
            c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def _edge_weights(der, order):
    """One-sided stencil weights for the y1 edge rows not covered by the
    centered interior stencil. First-derivative edges carry one node more
    than needed for the nominal order: operator compositions such as
    grad(div .) divide the edge error by h, and the extra order keeps the
    composed operator at the nominal accuracy."""
    npts = der + order + (1 if der == 1 else 0)
    nrows = order // 2
    return [_fornberg(float(r), np.arange(npts, dtype=float), der) for r in range(nrows)]


_EDGE = {
    (1, 2): _edge_weights(1, 2),
    (2, 2): _edge_weights(2, 2),
    (1, 4): _edge_weights(1, 4),
    (2, 4): _edge_weights(2, 4),
}


def _apply_edges(out, f, h, der, order):
    rows = _EDGE[(der, order)]
    scale = h**der
    for r, w in enumerate(rows):
        k = w.size
        out[r] = np.tensordot(w, f[:k], axes=(0, 0)) / scale
        out[-1 - r] = ((-1) ** der) * np.tensordot(w[::-1], f[-k:], axes=(0, 0)) / scale
    return out


def d_y1(f, h, order=2):
    """d/dy1, centered interior, one-sided at the y1 ends."""
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    if order == 2:
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    elif order == 4:
        out[2:-2] = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)
    else:
        raise DomainError(f"unsupported order {order}")
    return _apply_edges(out, f, h, 1, order)


def d_y1_2(f, h, order=2):
    """d^2/dy1^2, compact centered interior, one-sided at the y1 ends."""
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    if order == 2:
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    elif order == 4:
        out[2:-2] = (
            -f[4:] + 16.0 * f[3:-1] - 30.0 * f[2:-2] + 16.0 * f[1:-3] - f[:-4]
        ) / (12.0 * h * h)
    else:
        raise DomainError(f"unsupported order {order}")
    return _apply_edges(out, f, h, 2, order)


def d_y2(f, h, order=2):
    """d/dy2 with periodic wrap (fields of shape (n1, n2), axis 1)."""
    if order == 2:
        return (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2.0 * h)
    if order == 4:
        return (
            -np.roll(f, -2, axis=1)
            + 8.0 * np.roll(f, -1, axis=1)
            - 8.0 * np.roll(f, 1, axis=1)
            + np.roll(f, 2, axis=1)
        ) / (12.0 * h)
    raise DomainError(f"unsupported order {order}")


def d_y2_2(f, h, order=2):
    """d^2/dy2^2 with periodic wrap."""
    if order == 2:
        return (np.roll(f, -1, axis=1) - 2.0 * f + np.roll(f, 1, axis=1)) / (h * h)
    if order == 4:
        return (
            -np.roll(f, -2, axis=1)
            + 16.0 * np.roll(f, -1, axis=1)
            - 30.0 * f
            + 16.0 * np.roll(f, 1, axis=1)
            - np.roll(f, 2, axis=1)
        ) / (12.0 * h * h)
    raise DomainError(f"unsupported order {order}")


# ---------------------------------------------------------------------------
# mapped (physical-space) operators on the flattened grid

def mapped_gradient(f, grid: FlattenedGrid, order=2) -> np.ndarray:
    """Physical gradient of a scalar field, shape (d,) + node_shape."""
    if grid.dimension == 1:
        return d_y1(f, grid.h1, order)[None]
    f1 = d_y1(f, grid.h1, order)
    f2 = d_y2(f, grid.h2, order)
    return np.stack([f1, f2 - grid.mp * f1])


def mapped_divergence(v, grid: FlattenedGrid, order=2) -> np.ndarray:
    """Physical divergence of a vector field v of shape (d,) + node_shape."""
    if grid.dimension == 1:
        return d_y1(v[0], grid.h1, order)
    d1v2 = d_y1(v[1], grid.h1, order)
    return d_y1(v[0], grid.h1, order) + d_y2(v[1], grid.h2, order) - grid.mp * d1v2


def mapped_laplacian(f, grid: FlattenedGrid, order=2) -> np.ndarray:
    """Physical Laplacian of a scalar field on the flattened grid."""
    f11 = d_y1_2(f, grid.h1, order)
    if grid.dimension == 1:
        return f11
    f1 = d_y1(f, grid.h1, order)
    f12 = d_y2(d_y1(f, grid.h1, order), grid.h2, order)
    f22 = d_y2_2(f, grid.h2, order)
    mp = grid.mp
    return (1.0 + mp * mp) * f11 - 2.0 * mp * f12 + f22 - grid.mpp * f1


def mapped_grad_div(v, grid: FlattenedGrid, order=2) -> np.ndarray:
    """Physical gradient of the physical divergence of a vector field.

    Assembled from direct second-derivative stencils rather than by composing
    two first-derivative applications: same-axis composition differentiates
    across the switch from centered to one-sided stencils at the y1 edge rows
    and would lose an order of accuracy there.
    """
    if grid.dimension == 1:
        return d_y1_2(v[0], grid.h1, order)[None]
    mp, mpp = grid.mp, grid.mpp
    h1, h2 = grid.h1, grid.h2

    def d12(f):
        return d_y2(d_y1(f, h1, order), h2, order)

    g1 = d_y1_2(v[0], h1, order) + d12(v[1]) - mp * d_y1_2(v[1], h1, order)
    d2_div = (
        d12(v[0])
        + d_y2_2(v[1], h2, order)
        - mpp * d_y1(v[1], h1, order)
        - mp * d12(v[1])
    )
    return np.stack([g1, d2_div - mp * g1])


def mapped_vector_gradient(v, grid: FlattenedGrid, order=2) -> np.ndarray:
    """G[i, j] = physical d_j of component v_i, shape (d, d) + node_shape."""
    return np.stack([mapped_gradient(v[i], grid, order) for i in range(grid.dimension)])


def strain_tensor(v, grid: FlattenedGrid, order=2) -> np.ndarray:
    """Symmetrized physical velocity gradient (deformation tensor)."""
    g = mapped_vector_gradient(v, grid, order)
    return 0.5 * (g + np.swapaxes(g, 0, 1))


def integrate(f, grid: FlattenedGrid) -> float:
    """Quadrature over the flattened domain: trapezoid in y1, exact-weight
    rectangle rule in the periodic y2 direction. The flattening map has unit
    Jacobian, so this is also the physical-domain integral."""
    w1 = np.full(grid.n1, grid.h1)
    w1[0] = w1[-1] = 0.5 * grid.h1
    if grid.dimension == 1:
        return float(np.sum(w1 * f))
    return float(np.sum(w1[:, None] * f) * grid.h2)


# plain flat-space counterparts (reference for the M == 0 degeneracy checks)

def plain_gradient(f, grid: FlattenedGrid, order=2) -> np.ndarray:
    if grid.dimension == 1:
        return d_y1(f, grid.h1, order)[None]
    return np.stack([d_y1(f, grid.h1, order), d_y2(f, grid.h2, order)])


def plain_divergence(v, grid: FlattenedGrid, order=2) -> np.ndarray:
    if grid.dimension == 1:
        return d_y1(v[0], grid.h1, order)
    return d_y1(v[0], grid.h1, order) + d_y2(v[1], grid.h2, order)


def plain_laplacian(f, grid: FlattenedGrid, order=2) -> np.ndarray:
    if grid.dimension == 1:
        return d_y1_2(f, grid.h1, order)
    return d_y1_2(f, grid.h1, order) + d_y2_2(f, grid.h2, order)
