"""Stationary supersonic outflow of a viscous heat-conductive ideal gas over
a perturbed half-space: planar profiles, boundary-flattened evolution,
time-marched stationary solutions, and stability diagnostics."""

from .errors import BlowUpError, ConfigError, DomainError
from .gas import (
    FarFieldState,
    GasParams,
    boundary_flux_det,
    boundary_flux_form,
    flow_regime,
    is_supersonic,
    mach_number,
    pressure,
    sound_speed,
)
from .geometry import BoundaryShape, FlattenedGrid, gamma_inverse, gamma_map, normal_vector
from .profile import (
    PlanarBoundaryData,
    PlanarProfile,
    boundary_strength,
    endstate_jacobian,
    profile_rhs,
    profile_tail_bound,
    solve_profile,
)
from .extension import BoundaryData, build_extension, cutoff
from .background import (
    BackgroundState,
    Perturbation,
    assemble_background,
    embed,
    extract_perturbation,
    forcing_terms,
)
from .state import FieldState
from .solver import EvolveResult, OutflowProblem, SolverConfig, evolve, rhs_eval, stable_dt, step
from .diagnostics import (
    EnergyWeights,
    contraction_functional,
    energy_density,
    energy_identity_residual,
    energy_report,
    fit_decay_rate,
    hardy_check,
    perturbation_weighted_norm,
    relative_entropy,
    weighted_norm,
)
from .steady import (
    SteadyConfig,
    StationaryResult,
    march_to_steady,
    multidirectional_audit,
    stationary_residual,
    two_solution_contraction,
)
from .snapshots import read_snapshot, write_snapshot
from .config import RunConfig, load_config

__version__ = "0.1.0"
