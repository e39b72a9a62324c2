"""Self-contained property audits: the numeric checks behind `verify`.

Each audit returns an AuditResult with measured values in ``details``;
thresholds follow the acceptance criteria (refinement ratios, factor-2
linearity, flag ceilings). The same functions back the acceptance tests.
"""

from dataclasses import dataclass, field

import numpy as np

from .background import assemble_background, forcing_terms
from .diagnostics import (
    EnergyWeights,
    energy_density,
    energy_identity_residual,
    hardy_check,
    weighted_norm,
)
from .errors import DomainError
from .extension import BoundaryData, build_extension, cutoff
from .gas import (
    FarFieldState,
    GasParams,
    boundary_flux_det,
    boundary_flux_form,
    mach_number,
    sound_speed,
)
from .geometry import (
    BoundaryShape,
    FlattenedGrid,
    mapped_divergence,
    mapped_gradient,
    mapped_laplacian,
    plain_divergence,
    plain_gradient,
    plain_laplacian,
)
from .profile import PlanarBoundaryData, solve_profile
from .solver import OutflowProblem, SolverConfig, evolve, rhs_eval

__all__ = ["AuditResult", "run_all_audits"]

CANONICAL_GAS = GasParams(mu=1.0, lam=0.0, kappa=1.0, R=1.0, gamma=5.0 / 3.0)
CANONICAL_FF = FarFieldState(rho_plus=1.0, u_plus=-2.0, theta_plus=1.0)
#: low-viscosity fixture: profile decay rate 2, short domains, mild time steps
FAST_GAS = GasParams(mu=0.25, lam=0.0, kappa=0.5, R=1.0, gamma=5.0 / 3.0)

MACH_SCAN = (0.5, 0.9, 0.99, 1.01, 1.5, 2.0)


@dataclass
class AuditResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)


def audit_flux_form(gas: GasParams = CANONICAL_GAS) -> AuditResult:
    """Sign of the flux-form minimum eigenvalue tracks sign(Mach - 1) and the
    determinant matches its closed-form factorization to 1e-12."""
    rows = []
    ok = True
    for mach in MACH_SCAN:
        u = -mach * float(sound_speed(1.0, gas))
        ff = FarFieldState(1.0, u, 1.0)
        mat = boundary_flux_form(ff, gas)
        eig = np.linalg.eigvalsh(mat)
        det = float(np.linalg.det(mat))
        det_formula = boundary_flux_det(ff, gas)
        sign_ok = np.sign(eig.min()) == np.sign(mach - 1.0)
        det_ok = abs(det - det_formula) <= 1e-12
        ok = ok and sign_ok and det_ok
        rows.append(
            {
                "mach": mach,
                "min_eig": float(eig.min()),
                "det": det,
                "det_formula": det_formula,
                "sign_ok": bool(sign_ok),
                "det_ok": bool(det_ok),
            }
        )
    return AuditResult("flux_form_vs_supersonic", ok, {"scan": rows})


def _manufactured_fields(ell):
    """Three smooth fields with closed-form physical derivatives."""
    w = 2.0 * np.pi / ell

    def trig(x1, x2):
        f = np.sin(x1) * np.cos(w * x2)
        return {
            "f": f,
            "grad": (np.cos(x1) * np.cos(w * x2), -w * np.sin(x1) * np.sin(w * x2)),
            "lap": -(1.0 + w * w) * f,
        }

    def decay(x1, x2):
        e = np.exp(-0.5 * x1)
        s = 1.0 + 0.3 * np.sin(w * x2)
        return {
            "f": e * s,
            "grad": (-0.5 * e * s, 0.3 * w * e * np.cos(w * x2)),
            "lap": 0.25 * e * s - 0.3 * w * w * e * np.sin(w * x2),
        }

    def poly(x1, x2):
        c = np.cos(w * x2)
        return {
            "f": (x1**2) * c,
            "grad": (2.0 * x1 * c, -w * x1**2 * np.sin(w * x2)),
            "lap": 2.0 * c - w * w * x1**2 * c,
        }

    return {"trig": trig, "decay": decay, "poly": poly}


def audit_transform_order(
    shape_amp=0.1, ell=1.0, length=4.0, coarse=(65, 24), band=(3.2, 4.8)
) -> AuditResult:
    """Mapped operators converge at order 2 (halving ratio 4 +- 20%) on three
    manufactured fields, and reduce bit-for-bit to plain operators at M = 0."""
    shape = BoundaryShape(2, ell=ell, modes=[(1, 0.0, shape_amp)])
    fields = _manufactured_fields(ell)
    ratios = {}
    ok = True
    for name, make in fields.items():
        errs = []
        for level in range(2):
            n1 = (coarse[0] - 1) * 2**level + 1
            n2 = coarse[1] * 2**level
            grid = FlattenedGrid(2, n1, length, shape, n2=n2)
            y1 = grid.y1[:, None]
            y2 = grid.y2[None, :]
            x1 = y1 + shape.m(grid.y2)[None, :]
            ref = make(x1, np.broadcast_to(y2, x1.shape))
            g = mapped_gradient(ref["f"], grid)
            e_grad = max(
                float(np.max(np.abs(g[0] - ref["grad"][0]))),
                float(np.max(np.abs(g[1] - ref["grad"][1]))),
            )
            e_lap = float(np.max(np.abs(mapped_laplacian(ref["f"], grid) - ref["lap"])))
            v = np.stack([ref["f"], 2.0 * ref["f"]])
            div_ref = ref["grad"][0] + 2.0 * ref["grad"][1]
            e_div = float(np.max(np.abs(mapped_divergence(v, grid) - div_ref)))
            errs.append((e_grad, e_div, e_lap))
        r = tuple(errs[0][k] / errs[1][k] for k in range(3))
        ratios[name] = {"gradient": r[0], "divergence": r[1], "laplacian": r[2]}
        ok = ok and all(band[0] <= x <= band[1] for x in r)

    # flat-boundary degeneracy: mapped == plain, bit for bit
    flat = BoundaryShape(2, ell=ell, modes=[(1, 0.0, 0.0)])
    grid = FlattenedGrid(2, coarse[0], length, flat, n2=coarse[1])
    rng = np.random.default_rng(7)
    f = rng.standard_normal(grid.node_shape)
    v = rng.standard_normal((2,) + grid.node_shape)
    exact = (
        np.array_equal(mapped_gradient(f, grid), plain_gradient(f, grid))
        and np.array_equal(mapped_divergence(v, grid), plain_divergence(v, grid))
        and np.array_equal(mapped_laplacian(f, grid), plain_laplacian(f, grid))
    )
    ok = ok and exact
    return AuditResult(
        "transform_order", ok, {"ratios": ratios, "flat_degeneracy_bitexact": bool(exact)}
    )


def _consistency_fixture(delta_scale=1.0):
    bd = PlanarBoundaryData(-2.0 + 0.006 * delta_scale, 1.0 + 0.004 * delta_scale)
    shape = BoundaryShape(2, ell=1.0, modes=[(1, 0.0, 0.02)])
    u2_amp = 0.003 * delta_scale
    th_amp = 0.002 * delta_scale
    return bd, shape, u2_amp, th_amp


def _build_consistency(n1, n2, length, gas, ff, delta_scale=1.0):
    bd, shape, u2_amp, th_amp = _consistency_fixture(delta_scale)
    grid = FlattenedGrid(2, n1, length, shape, n2=n2)
    prof = solve_profile(bd, ff, gas, length, n1)
    bdata = BoundaryData(
        bd,
        u_modes=(((0, bd.u_b, 0.0),), ((1, 0.0, u2_amp),)),
        theta_modes=((0, bd.theta_b, 0.0), (1, th_amp, 0.0)),
    )
    ext = build_extension(bdata, grid)
    bg = assemble_background(prof, ext, grid)
    problem = OutflowProblem(
        grid, gas, ff, bdata.u_values(grid), bdata.theta_values(grid),
        scheme="upwind2", backend="numpy",
    )
    return grid, prof, ext, bg, problem


def audit_background_consistency(
    gas: GasParams = FAST_GAS, ff: FarFieldState = CANONICAL_FF, length=10.0
) -> AuditResult:
    """Applying the solver rhs to the background reproduces the forcing
    composition (F, G/rho, H/(c_v rho)) to discretization order."""
    errs = {}
    scale = None
    for n1, n2 in ((101, 32), (201, 64)):
        grid, prof, ext, bg, problem = _build_consistency(n1, n2, length, gas, ff)
        drho, du, dth = rhs_eval(bg.as_state(), problem)
        F, G, H = forcing_terms(prof, ext, grid, gas)
        e = [np.abs(drho - F)[:-1]]
        for i in range(2):
            e.append(np.abs(du[i] - G[i] / bg.rho)[1:-1])
        e.append(np.abs(dth - H / (gas.c_v * bg.rho))[1:-1])
        errs[(n1, n2)] = max(float(np.max(x)) for x in e)
        scale = max(float(np.max(np.abs(F))), float(np.max(np.abs(G))), float(np.max(np.abs(H))))
    ratio = errs[(101, 32)] / errs[(201, 64)]
    rel = errs[(201, 64)] / scale
    ok = ratio >= 2.8 and rel <= 0.05
    return AuditResult(
        "background_forcing_consistency",
        bool(ok),
        {
            "err_coarse": errs[(101, 32)],
            "err_fine": errs[(201, 64)],
            "refinement_ratio": ratio,
            "relative_to_forcing_scale": rel,
        },
    )


def audit_forcing_bound(
    gas: GasParams = FAST_GAS, ff: FarFieldState = CANONICAL_FF, length=10.0
) -> AuditResult:
    """|(F, G, H)| in the 3 alpha / 2 weighted norm scales linearly with the
    boundary deviation: the ratio over a decade of delta stays within x2."""
    ratios = {}
    for delta_scale in (0.1, 1.0):
        grid, prof, ext, bg, _problem = _build_consistency(201, 64, length, gas, ff, delta_scale)
        F, G, H = forcing_terms(prof, ext, grid, gas)
        stacked = np.concatenate([F[None], G, H[None]], axis=0)
        w_rate = 1.5 * prof.alpha_fit
        norm = weighted_norm(stacked, w_rate, grid)
        delta = prof.delta_tilde + ext.delta
        ratios[delta_scale] = norm / delta
    spread = max(ratios.values()) / min(ratios.values())
    ok = spread <= 2.0
    return AuditResult(
        "forcing_linear_bound",
        bool(ok),
        {"norm_over_delta": {str(k): v for k, v in ratios.items()}, "spread": spread},
    )


def audit_hardy(alpha=1.0, length=20.0, n=401) -> AuditResult:
    """The weighted trace inequality holds with ratio <= 10 on a family of
    profiles including the constant (trace-dominated) and boundary-vanishing
    (gradient-dominated) extremes."""
    grid = FlattenedGrid(1, n, length, BoundaryShape(1))
    y = grid.y1
    family = {
        "constant": np.ones_like(y),
        "exp_decay": np.exp(-0.5 * y),
        "boundary_zero": y * np.exp(-y),
        "slow_oscillation": np.cos(0.4 * y) * np.exp(-0.3 * y),
    }
    rows = {}
    ok = True
    for name, f in family.items():
        lhs, rhs, ratio, flagged = hardy_check(f, alpha, grid)
        rows[name] = {"lhs": lhs, "rhs": rhs, "ratio": ratio, "flagged": flagged}
        ok = ok and not flagged and lhs <= 10.0 * rhs
    return AuditResult("hardy_inequality", ok, {"cases": rows})


def audit_equivalence(
    gas: GasParams = CANONICAL_GAS,
    ff: FarFieldState = CANONICAL_FF,
    n_states=100,
    amplitude=0.05,
    seed=0,
    bounds=(0.05, 20.0),
) -> AuditResult:
    """Pointwise two-sided equivalence of the energy form with |Phi|^2 over
    random small states: the min ratio stays away from 0, the max bounded."""
    from .background import Perturbation

    bd = PlanarBoundaryData(-1.99, 1.004)
    grid = FlattenedGrid(1, 101, 35.0, BoundaryShape(1))
    prof = solve_profile(bd, ff, gas, 35.0, 101)
    ext = build_extension(BoundaryData.planar(bd, 1), grid)
    bg = assemble_background(prof, ext, grid)
    weights = EnergyWeights.from_background(bg)
    rng = np.random.default_rng(seed)
    rmin, rmax = np.inf, 0.0
    for _ in range(n_states):
        phi = amplitude * rng.uniform(-1, 1, grid.node_shape)
        psi = amplitude * rng.uniform(-1, 1, (1,) + grid.node_shape)
        zeta = amplitude * rng.uniform(-1, 1, grid.node_shape)
        pert = Perturbation(phi, psi, zeta)
        dens, _ = energy_density(pert, weights, gas, grid)
        sq = phi**2 + psi[0] ** 2 + zeta**2
        mask = sq > 1e-30
        ratio = dens[mask] / sq[mask]
        rmin = min(rmin, float(ratio.min()))
        rmax = max(rmax, float(ratio.max()))
    ok = bounds[0] <= rmin and rmax <= bounds[1]
    return AuditResult(
        "energy_form_equivalence",
        bool(ok),
        {"ratio_min": rmin, "ratio_max": rmax, "samples": n_states * grid.n1},
    )


def audit_energy_identity(
    gas: GasParams = CANONICAL_GAS, ff: FarFieldState = CANONICAL_FF
) -> AuditResult:
    """The discrete energy balance residual shrinks under joint refinement."""
    bd = PlanarBoundaryData(-1.99, 1.004)

    def run(n):
        grid = FlattenedGrid(1, n, 35.0, BoundaryShape(1))
        prof = solve_profile(bd, ff, gas, 35.0, n)
        ext = build_extension(BoundaryData.planar(bd, 1), grid)
        bg = assemble_background(prof, ext, grid)
        problem = OutflowProblem(
            grid, gas, ff, np.array([bd.u_b]), np.array(bd.theta_b),
            scheme="upwind2", backend="numpy",
        )
        state = bg.as_state()
        state.u[0] = state.u[0] + 1e-3 * cutoff(np.abs(grid.y1 - 8.0) / 4.0)
        cfg = SolverConfig(
            cfl=0.4, t_end=0.4, snapshot_interval=0.05, backend="numpy", scheme="upwind2"
        )
        res = evolve(state, problem, cfg)
        if res.status != "completed":
            raise DomainError("identity audit run failed: " + str(res.failure))
        rows = energy_identity_residual(res.snapshots, bg, gas, problem)
        return (
            max(abs(r["residual"]) for r in rows),
            max(r["scale"] for r in rows),
            all(r["residual"] == r["residual"] for r in rows),
        )

    coarse, scale_c, _ = run(101)
    fine, scale_f, _ = run(201)
    ratio = coarse / fine
    rel = fine / scale_f
    ok = ratio >= 2.5 and rel <= 0.05
    return AuditResult(
        "energy_identity",
        bool(ok),
        {
            "residual_coarse": coarse,
            "residual_fine": fine,
            "refinement_ratio": ratio,
            "relative_residual_fine": rel,
        },
    )


def run_all_audits(seed=0):
    """The verify suite: flux-form scan, forcing bound, Hardy, transform
    order, energy identity, consistency, equivalence."""
    return [
        audit_flux_form(),
        audit_transform_order(),
        audit_background_consistency(),
        audit_forcing_bound(),
        audit_hardy(),
        audit_equivalence(seed=seed),
        audit_energy_identity(),
    ]
