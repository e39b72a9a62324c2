"""Command-line entry points: profile, evolve, steady, verify, report.

Exit codes: 0 success, 1 configuration error, 2 domain error (including
failed verification audits), 3 runtime blow-up. Failures print a single
machine-readable JSON object; outputs are deterministic for a fixed config
and seed.
"""

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .audits import run_all_audits
from .background import extract_perturbation
from .config import RunConfig, load_config, reference_text
from .diagnostics import energy_report, fit_decay_rate
from .errors import BlowUpError, ConfigError, DomainError
from .profile import profile_tail_bound, write_profile_csv
from .snapshots import write_snapshot
from .steady import march_to_steady, multidirectional_audit, stationary_residual
from .solver import evolve

__all__ = ["main"]


def _fail(kind, message, code, extra=None):
    payload = {"error": {"kind": kind, "message": message}}
    if extra:
        payload["error"].update(extra)
    print(json.dumps(payload, sort_keys=True))
    return code


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _prepare(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.data["seed"] = args.seed
    out_dir = args.out or cfg.data["output"]["directory"]
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config_used.json"), "w") as fh:
        json.dump(cfg.data, fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "defaults_reference.json"), "w") as fh:
        fh.write(reference_text())
    return cfg, out_dir


def cmd_profile(args):
    cfg, out = _prepare(args)
    prof = cfg.profile()
    csv_path = os.path.join(out, "profile.csv")
    write_profile_csv(prof, csv_path)
    fit = {
        "delta_tilde": prof.delta_tilde,
        "alpha_fit": prof.alpha_fit,
        "fit_r2": prof.fit_r2,
        "length": prof.length,
        "samples": int(prof.x1.size),
    }
    if prof.alpha_fit is None:
        fit["tail_fit"] = "absent (zero boundary strength)"
    else:
        c0, a0 = profile_tail_bound(prof, 0)
        fit["tail_bound"] = {"C": c0, "alpha": a0}
    _write_json(os.path.join(out, "profile_fit.json"), fit)
    print(f"profile written to {csv_path}")
    return 0


def _diagnostics_rows(cfg: RunConfig, problem, bg, beta):
    rows = []

    def monitor(state):
        rows.append(energy_report(state, bg, beta, cfg.gas, problem=problem))

    return rows, monitor


def _write_diagnostics_csv(path, rows):
    cols = [
        "t",
        "weighted_norm",
        "e0",
        "e1",
        "energy_integral",
        "contraction",
        "dissipation",
        "boundary_flux",
        "remainder",
    ]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            vals = []
            for c in cols:
                v = getattr(r, c)
                vals.append("" if v is None else repr(float(v)))
            fh.write(",".join(vals) + "\n")


def cmd_evolve(args):
    cfg, out = _prepare(args)
    problem = cfg.problem()
    bg = cfg.background()
    beta = cfg.beta()
    state0 = cfg.initial_state(problem)
    rows, monitor = _diagnostics_rows(cfg, problem, bg, beta)
    result = evolve(state0, problem, cfg.solver_config(), monitor=monitor)
    snap_dir = os.path.join(out, "snapshots")
    os.makedirs(snap_dir, exist_ok=True)
    paths = []
    for k, snap in enumerate(result.snapshots):
        paths.append(write_snapshot(snap, os.path.join(snap_dir, f"snap_{k:06d}")))
    _write_diagnostics_csv(os.path.join(out, "diagnostics.csv"), rows)
    summary = {
        "status": result.status,
        "dt": result.dt,
        "n_steps": result.n_steps,
        "t_final": result.state.t,
        "beta": beta,
        "snapshots": len(paths),
    }
    window = cfg.data["diagnostics"]["fit_window"]
    series = [(r.t, r.weighted_norm) for r in rows if r.weighted_norm > 0]
    if window and len(series) >= 3:
        t, v = zip(*series)
        try:
            sigma, c0, r2 = fit_decay_rate(t, v, window)
            summary["decay_fit"] = {"sigma": sigma, "prefactor": c0, "r2": r2}
        except DomainError as exc:
            summary["decay_fit"] = {"error": str(exc)}
    _write_json(os.path.join(out, "summary.json"), summary)
    if result.status == "blowup":
        return _fail(
            "blowup",
            result.failure or "time integration failed",
            3,
            {"last_snapshot": paths[-1] if paths else None},
        )
    print(f"evolved to t = {result.state.t:.6g} in {result.n_steps} steps")
    return 0


def cmd_steady(args):
    cfg, out = _prepare(args)
    problem = cfg.problem()
    bg = cfg.background()
    beta = cfg.beta()
    steady_cfg = cfg.steady_config()
    state0 = cfg.initial_state(problem)
    result = march_to_steady(state0, problem, steady_cfg, bg=bg)
    snap_base = os.path.join(out, "stationary")
    write_snapshot(result.state, snap_base)
    certificate = {
        "converged": result.converged,
        "t_converged": result.t_converged,
        "final_rate": result.final_rate,
        "steady_tol": steady_cfg.steady_tol,
        "dt": result.dt,
        "n_steps": result.n_steps,
        "beta": beta,
        "shift_series": [
            {"k": k, "t": t, "s_k": s} for k, t, s in result.shift_series
        ],
        "multidirectional": multidirectional_audit(result.state),
    }
    if result.phi_s is not None:
        from .diagnostics import perturbation_weighted_norm

        certificate["phi_s_weighted_norm"] = perturbation_weighted_norm(
            result.phi_s, beta, cfg.grid()
        )
    certificate["residuals"] = stationary_residual(result.state, problem, cfg.gas)
    shifts = [s for _, _, s in result.shift_series if s > 0]
    if len(shifts) >= 4:
        ks = np.arange(1, len(shifts) + 1, dtype=float)
        try:
            sigma, c0, r2 = fit_decay_rate(ks, shifts)
            certificate["shift_fit"] = {"rate_per_period": sigma, "r2": r2}
        except DomainError as exc:
            certificate["shift_fit"] = {"error": str(exc)}
    _write_json(os.path.join(out, "certificate.json"), certificate)
    if not result.converged:
        return _fail(
            "steady_not_converged",
            f"rate {result.final_rate:.3g} above tolerance {steady_cfg.steady_tol:g} "
            f"at t_max = {steady_cfg.t_max:g}",
            2,
            {"certificate": os.path.join(out, "certificate.json")},
        )
    print(f"stationary state written to {snap_base}.bin (t = {result.t_converged:.6g})")
    return 0


def cmd_verify(args):
    cfg, out = _prepare(args)
    results = run_all_audits(seed=cfg.data["seed"])
    payload = {
        "all_passed": all(r.passed for r in results),
        "audits": [
            {"name": r.name, "passed": r.passed, "details": r.details} for r in results
        ],
    }
    _write_json(os.path.join(out, "verify.json"), payload)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}")
    if not payload["all_passed"]:
        return _fail("verification_failed", "one or more audits failed", 2)
    return 0


def cmd_report(args):
    out = args.out or "."
    if not os.path.isdir(out):
        return _fail("config", f"no run directory {out!r}", 1)
    found = False
    for name in ("profile_fit.json", "summary.json", "certificate.json", "verify.json"):
        path = os.path.join(out, name)
        if not os.path.exists(path):
            continue
        found = True
        with open(path) as fh:
            data = json.load(fh)
        print(f"== {name} ==")
        print(json.dumps(data, indent=1, sort_keys=True)[:4000])
    if not found:
        return _fail("config", f"no run artifacts found in {out!r}", 1)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="nsoutflow",
        description="Supersonic outflow over a perturbed half-space: profiles, "
        "evolution, stationary construction, verification",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, needs_config in (
        ("profile", cmd_profile, True),
        ("evolve", cmd_evolve, True),
        ("steady", cmd_steady, True),
        ("verify", cmd_verify, True),
        ("report", cmd_report, False),
    ):
        p = sub.add_parser(name)
        if needs_config:
            p.add_argument("--config", required=True, help="path to the run config JSON")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.set_defaults(fn=fn)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        return _fail(getattr(exc, "kind", "config"), str(exc), 1)
    except BlowUpError as exc:
        return _fail("blowup", str(exc), 3)
    except DomainError as exc:
        return _fail(exc.kind, str(exc), 2)


if __name__ == "__main__":
    sys.exit(main())
