"""Binary field snapshots with a text sidecar header.

One snapshot is two files: ``<base>.bin`` holding the raw row-major float64
field data (concatenated in the documented field order) and ``<base>.meta.json``
holding dimensions, spacings, time, and the field order. The layout is fixed
so write -> read round-trips are bit-exact.
"""

import json
import os

import numpy as np

from .errors import DomainError
from .geometry import BoundaryShape, FlattenedGrid
from .state import FieldState

__all__ = ["write_snapshot", "read_snapshot", "snapshot_fields"]

FORMAT_NAME = "nsoutflow-snapshot"
FORMAT_VERSION = 1


def snapshot_fields(dimension: int):
    return ["rho", "u1", "theta"] if dimension == 1 else ["rho", "u1", "u2", "theta"]


def write_snapshot(state: FieldState, base):
    """Write ``<base>.bin`` + ``<base>.meta.json``; returns the .bin path."""
    g = state.grid
    fields = snapshot_fields(g.dimension)
    arrays = [state.rho, *state.u, state.theta]
    bin_path = f"{base}.bin"
    with open(bin_path, "wb") as fh:
        for a in arrays:
            np.ascontiguousarray(a, dtype="<f8").tofile(fh)
    meta = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "dimension": g.dimension,
        "n1": g.n1,
        "n2": g.n2 if g.dimension == 2 else 1,
        "length": g.length,
        "ell": g.ell if g.dimension == 2 else None,
        "shape_modes": [list(m) for m in g.shape.modes],
        "h1": g.h1,
        "h2": g.h2 if g.dimension == 2 else None,
        "time": state.t,
        "fields": fields,
        "dtype": "<f8",
        "order": "C",
    }
    with open(f"{base}.meta.json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return bin_path


def read_snapshot(base, grid: FlattenedGrid | None = None) -> FieldState:
    """Read a snapshot pair; reconstructs the grid from the sidecar if needed."""
    with open(f"{base}.meta.json") as fh:
        meta = json.load(fh)
    if meta.get("format") != FORMAT_NAME:
        raise DomainError(f"not a snapshot sidecar: {base}.meta.json", kind="snapshot_format")
    d = meta["dimension"]
    if grid is None:
        shape = BoundaryShape(
            d,
            ell=meta["ell"] if d == 2 else 1.0,
            modes=tuple(tuple(m) for m in meta["shape_modes"]),
        )
        grid = FlattenedGrid(d, meta["n1"], meta["length"], shape, n2=meta["n2"] if d == 2 else 1)
    node_count = grid.n1 * (grid.n2 if d == 2 else 1)
    fields = meta["fields"]
    data = np.fromfile(f"{base}.bin", dtype="<f8")
    if data.size != node_count * len(fields):
        raise DomainError(
            f"snapshot payload has {data.size} values, expected {node_count * len(fields)}",
            kind="snapshot_format",
        )
    arrays = data.reshape(len(fields), *grid.node_shape)
    u = np.stack([arrays[fields.index("u1")]] + ([arrays[fields.index("u2")]] if d == 2 else []))
    return FieldState(
        meta["time"], arrays[fields.index("rho")].copy(), u.copy(),
        arrays[fields.index("theta")].copy(), grid,
    )


def list_snapshots(directory):
    """Sorted snapshot bases (paths without extension) in a directory."""
    bases = []
    for name in sorted(os.listdir(directory)):
        if name.endswith(".meta.json"):
            bases.append(os.path.join(directory, name[: -len(".meta.json")]))
    return bases
