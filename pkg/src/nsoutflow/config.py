"""Run configuration: a single JSON document validated against the module
invariants, plus builders that assemble the simulation objects from it.

Every default is listed in DEFAULTS; ``reference_text()`` renders them so a
run can be reproduced from its config alone. All randomness used by a run is
derived from the single ``seed`` entry.
"""

import copy
import json

import numpy as np

from .background import assemble_background
from .errors import ConfigError, DomainError
from .extension import BoundaryData, build_extension, cutoff
from .gas import FarFieldState, GasParams
from .geometry import BoundaryShape, FlattenedGrid
from .profile import PlanarBoundaryData, solve_profile
from .solver import SCHEMES, OutflowProblem, SolverConfig
from .steady import SteadyConfig

__all__ = ["RunConfig", "DEFAULTS", "load_config", "reference_text"]

SCHEMA_VERSION = 1

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "seed": 0,
    "gas": {"mu": 1.0, "lambda": 0.0, "kappa": 1.0, "R": 1.0, "gamma": 5.0 / 3.0},
    "far_field": {"rho_plus": 1.0, "u_plus": -2.0, "theta_plus": 1.0},
    "planar_boundary": {"u_b": -1.99, "theta_b": 1.0},
    "shape": {"dimension": 1, "ell": 1.0, "modes": []},
    "boundary_data": {"u_modes": None, "theta_modes": None},
    "grid": {"n1": 201, "n2": 64, "length": 35.0},
    "profile": {"tail_tol": 1e-6, "delta_max": 0.1},
    "solver": {
        "cfl": 0.4,
        "t_end": 10.0,
        "snapshot_interval": 1.0,
        "scheme": "upwind1",
        "backend": "auto",
    },
    "steady": {"steady_tol": 1e-9, "t_max": 300.0, "t_star": 1.0},
    "diagnostics": {"beta": "auto", "fit_window": None},
    "initial": {
        "kind": "background",  # background | far_field | bump
        "bump_amplitude": 1e-3,
        "bump_center": 8.0,
        "bump_width": 4.0,
        "bump_field": "u1",
    },
    "output": {"directory": "out"},
}

_INITIAL_KINDS = ("background", "far_field", "bump")
_BUMP_FIELDS = ("rho", "u1", "u2", "theta")


def _merge(defaults, given, path=""):
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(defaults[key], dict) and not isinstance(defaults[key], list):
            if not isinstance(value, dict):
                raise ConfigError(f"config section {path + key!r} must be an object")
            out[key] = _merge(defaults[key], value, path + key + ".")
        else:
            out[key] = value
    return out


class RunConfig:
    """Validated run configuration with lazy builders for the run objects."""

    def __init__(self, data: dict):
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        self.data = _merge(DEFAULTS, data)
        if self.data["schema_version"] != SCHEMA_VERSION:
            raise ConfigError(
                f"unsupported schema_version {self.data['schema_version']}"
            )
        self._validate()
        self._profile = None
        self._grid = None

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls(data)

    def _validate(self):
        d = self.data
        try:
            self.gas = GasParams(
                mu=d["gas"]["mu"],
                lam=d["gas"]["lambda"],
                kappa=d["gas"]["kappa"],
                R=d["gas"]["R"],
                gamma=d["gas"]["gamma"],
            )
            self.far_field = FarFieldState(**d["far_field"])
            self.planar_boundary = PlanarBoundaryData(
                u_b=d["planar_boundary"]["u_b"], theta_b=d["planar_boundary"]["theta_b"]
            )
            self.shape = BoundaryShape(
                dimension=d["shape"]["dimension"],
                ell=d["shape"]["ell"],
                modes=tuple(tuple(m) for m in d["shape"]["modes"]),
            )
        except DomainError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
        if d["solver"]["scheme"] not in SCHEMES:
            raise ConfigError(f"unknown scheme {d['solver']['scheme']!r}")
        if d["initial"]["kind"] not in _INITIAL_KINDS:
            raise ConfigError(f"unknown initial state kind {d['initial']['kind']!r}")
        if d["initial"]["bump_field"] not in _BUMP_FIELDS:
            raise ConfigError(f"unknown bump field {d['initial']['bump_field']!r}")
        beta = d["diagnostics"]["beta"]
        if beta != "auto" and (not isinstance(beta, (int, float)) or beta < 0):
            raise ConfigError("diagnostics.beta must be 'auto' or a nonnegative number")
        if self.shape.dimension == 2 and d["grid"]["n2"] < 4:
            raise ConfigError("2-D runs need grid.n2 >= 4")

    # ------------------------------------------------------------------
    # builders (cached where reuse matters)

    def grid(self) -> FlattenedGrid:
        if self._grid is None:
            d = self.data["grid"]
            self._grid = FlattenedGrid(
                self.shape.dimension,
                d["n1"],
                d["length"],
                self.shape,
                n2=d["n2"] if self.shape.dimension == 2 else 1,
            )
        return self._grid

    def profile(self):
        if self._profile is None:
            d = self.data
            self._profile = solve_profile(
                self.planar_boundary,
                self.far_field,
                self.gas,
                d["grid"]["length"],
                d["grid"]["n1"],
                tail_tol=d["profile"]["tail_tol"],
                delta_max=d["profile"]["delta_max"],
            )
        return self._profile

    def boundary_data(self) -> BoundaryData:
        d = self.data["boundary_data"]
        dim = self.shape.dimension
        if d["u_modes"] is None and d["theta_modes"] is None:
            return BoundaryData.planar(self.planar_boundary, dim)
        planar = BoundaryData.planar(self.planar_boundary, dim)
        u_modes = (
            tuple(tuple(tuple(m) for m in comp) for comp in d["u_modes"])
            if d["u_modes"] is not None
            else planar.u_modes
        )
        theta_modes = (
            tuple(tuple(m) for m in d["theta_modes"])
            if d["theta_modes"] is not None
            else planar.theta_modes
        )
        if len(u_modes) != dim:
            raise ConfigError(f"boundary_data.u_modes needs {dim} component lists")
        return BoundaryData(self.planar_boundary, u_modes, theta_modes)

    def extensions(self):
        return build_extension(self.boundary_data(), self.grid())

    def background(self):
        return assemble_background(self.profile(), self.extensions(), self.grid())

    def beta(self) -> float:
        """Diagnostics weight rate; 'auto' resolves to alpha_fit/2 and explicit
        values are validated against it (weighted decay needs beta <= alpha/2)."""
        conf = self.data["diagnostics"]["beta"]
        alpha = self.profile().alpha_fit
        if conf == "auto":
            if alpha is None:
                return 0.0
            return 0.5 * alpha
        if alpha is not None and conf > 0.5 * alpha + 1e-12:
            raise ConfigError(
                f"diagnostics.beta = {conf} exceeds alpha_fit/2 = {0.5 * alpha:.6g}"
            )
        return float(conf)

    def problem(self) -> OutflowProblem:
        bd = self.boundary_data()
        grid = self.grid()
        if grid.dimension == 1:
            u_b = np.array([bd.u_values(grid)[0]]).reshape(1)
            theta_b = np.asarray(bd.theta_values(grid)).reshape(())
        else:
            u_b = bd.u_values(grid)
            theta_b = bd.theta_values(grid)
        return OutflowProblem(
            grid,
            self.gas,
            self.far_field,
            u_b,
            theta_b,
            scheme=self.data["solver"]["scheme"],
            backend=self.data["solver"]["backend"],
        )

    def solver_config(self) -> SolverConfig:
        s = self.data["solver"]
        return SolverConfig(
            cfl=s["cfl"],
            t_end=s["t_end"],
            snapshot_interval=s["snapshot_interval"],
            steady_tol=self.data["steady"]["steady_tol"],
            scheme=s["scheme"],
            backend=s["backend"],
        )

    def steady_config(self) -> SteadyConfig:
        s = self.data["steady"]
        return SteadyConfig(
            steady_tol=s["steady_tol"],
            t_max=s["t_max"],
            t_star=s["t_star"],
            cfl=self.data["solver"]["cfl"],
            beta=self.beta(),
        )

    def initial_state(self, problem: OutflowProblem):
        """Initial data: background, far field, or background plus a compact bump."""
        kind = self.data["initial"]["kind"]
        if kind == "far_field":
            return problem.far_state()
        bg = self.background()
        state = bg.as_state()
        if kind == "bump":
            ini = self.data["initial"]
            grid = self.grid()
            prof = cutoff(np.abs(grid.y1 - ini["bump_center"]) / ini["bump_width"])
            bump = ini["bump_amplitude"] * prof
            if grid.dimension == 2:
                bump = bump[:, None] * np.ones((1, grid.n2))
            target = ini["bump_field"]
            if target == "rho":
                state.rho = state.rho + bump
            elif target == "theta":
                state.theta = state.theta + bump
            elif target == "u1":
                state.u[0] = state.u[0] + bump
            else:
                if grid.dimension == 1:
                    raise ConfigError("bump_field u2 needs a 2-D grid")
                state.u[1] = state.u[1] + bump
        return state

    def rng(self):
        return np.random.default_rng(self.data["seed"])


def load_config(path) -> RunConfig:
    return RunConfig.from_file(path)


def reference_text() -> str:
    """Render every default; written alongside run outputs for reproducibility."""
    return json.dumps(DEFAULTS, indent=2, sort_keys=True) + "\n"
