"""Primitive field state on a flattened grid."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import FlattenedGrid

__all__ = ["FieldState"]


@dataclass
class FieldState:
    """Primitive fields (rho, u, theta) at one time on a FlattenedGrid.

    ``u`` is stacked component-first: shape (d,) + node_shape. Positivity of
    rho and theta is a solver invariant, checked where it matters rather than
    on every construction.
    """

    t: float
    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    grid: FlattenedGrid

    def __post_init__(self):
        shape = self.grid.node_shape
        if self.rho.shape != shape or self.theta.shape != shape:
            raise DomainError("field arrays do not match the grid", kind="grid_mismatch")
        if self.u.shape != (self.grid.dimension,) + shape:
            raise DomainError("velocity array does not match the grid", kind="grid_mismatch")

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.rho.copy(), self.u.copy(), self.theta.copy(), self.grid)

    def positivity_violation(self):
        """Index of the first node with rho <= 0 or theta <= 0, or None."""
        bad = np.argwhere(~((self.rho > 0) & (self.theta > 0) & np.isfinite(self.rho)
                            & np.isfinite(self.theta)))
        if bad.size:
            return tuple(bad[0])
        return None

    def max_abs_diff(self, other: "FieldState") -> float:
        return max(
            float(np.max(np.abs(self.rho - other.rho))),
            float(np.max(np.abs(self.u - other.u))),
            float(np.max(np.abs(self.theta - other.theta))),
        )
