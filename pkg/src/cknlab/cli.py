"""Batch command-line front end.

Each subcommand reads a JSON run configuration, executes the corresponding
module pipeline, writes a JSON report (schema "ckn-lab/1"), and optionally
dumps CSV curves plus rendered figures into --csv-dir.  Exit codes: 0 when
every check lands inside its tolerance, 1 with a machine-readable violation
list otherwise, 2 for configuration errors.

Configuration skeleton:

    {
      "problem":     {"N": 3, "alpha": 0.0, "beta": 0.15, "lambda": 0.0},
      "coefficient": {"kind": "self_dual_bump", "A": 0.5},
      "grid":        {"S": null, "n": 2048},
      "melnikov":    {"tau_min": 1e-3, "tau_max": 1e3, "n_tau": 241},
      "reduce":      {"t": [1e-3], "mu_min": 0.5, "mu_max": 2.0, "n_mu": 17},
      "continue":    {"t_start": 0.01, "n_checkpoints": 12},
      "pohozaev":    {"sigmas": [0.5, 1.0, 2.0], "mu": 1.0, "t": 0.0}
    }

Derived exponents (a, b, p) are emitted in reports and never accepted in
configuration files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance, melnikov, plots, reduction, solver
from .coeff import coeff_from_json
from .efgrid import default_grid, norm_Da, profile_to_csv
from .errors import CknLabError, ConfigError, ConstraintViolation, DomainError
from .instanton import green_profile, kelvin, make_instanton, pde_residual
from .params import Level, check_admissible, params_from_json
from .pohozaev import boundary_term_B, global_identity, local_identity

SCHEMA = "ckn-lab/1"


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _build(config: dict, args):
    try:
        params = params_from_json(config["problem"])
    except KeyError as exc:
        raise ConfigError(f"config missing block: {exc}") from exc
    except ConstraintViolation as exc:
        raise ConfigError(str(exc)) from exc
    coeff_block = config.get("coefficient", {"kind": "constant", "c": 1.0})
    try:
        K = coeff_from_json(coeff_block)
    except (DomainError, KeyError) as exc:
        raise ConfigError(f"bad coefficient block: {exc}") from exc
    grid_block = dict(config.get("grid", {}))
    n = args.grid_n or grid_block.get("n") or 2048
    S = args.grid_S or grid_block.get("S")
    try:
        grid = default_grid(params, n=int(n), S=S)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return params, K, grid


class Report:
    def __init__(self, command: str, config: dict, params):
        self.doc = {"schema": SCHEMA, "command": command, "config": config,
                    "params": params.to_json(), "checks": [], "data": {},
                    "artifacts": []}

    def check(self, name: str, passed: bool, value, tolerance=None):
        self.doc["checks"].append({
            "name": name, "passed": bool(passed),
            "value": value if isinstance(value, (int, float, str, bool)) else str(value),
            "tolerance": tolerance})

    def violations(self):
        return [c for c in self.doc["checks"] if not c["passed"]]

    def finish(self, args) -> int:
        self.doc["passed"] = not self.violations()
        text = json.dumps(self.doc, indent=2, default=_json_default)
        if args.out:
            Path(args.out).write_text(text + "\n")
        else:
            print(text)
        return 0 if self.doc["passed"] else 1


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _csv_dir(args) -> Path | None:
    if not args.csv_dir:
        return None
    d = Path(args.csv_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


# ----------------------------------------------------------------- commands
def cmd_params(config, args) -> int:
    params, K, grid = _build(config, args)
    report = Report("params", config, params)
    for level in (Level.CKN_BASIC, Level.COMPACTNESS, Level.EXISTENCE):
        adm = check_admissible(params, level)
        report.doc["data"][f"admissibility_{level.value}"] = adm.to_json()
    report.check("constraints_basic", True, "derived exponents populated")
    return report.finish(args)


def cmd_instanton(config, args) -> int:
    params, K, grid = _build(config, args)
    report = Report("instanton", config, params)
    tol = args.tol_scale
    z = make_instanton(params, grid)
    from .coeff import constant as const_coeff
    residual = pde_residual(z, const_coeff(1.0), 0.0)
    sup_res = float(np.max(np.abs(residual.psi)))
    report.check("pde_residual_sup", sup_res <= 1e-8 * tol, sup_res, 1e-8 * tol)
    zk = kelvin(z)
    norm_dev = abs(norm_Da(zk) / norm_Da(z) - 1.0)
    report.check("kelvin_norm_dev", norm_dev <= 1e-10 * tol, norm_dev, 1e-10 * tol)
    report.doc["data"]["norm_Da"] = norm_Da(z)
    report.doc["data"]["value_at_origin_limit"] = float(z.psi[0] * np.exp(params.nu * grid.S))
    out = _csv_dir(args)
    if out:
        profile_to_csv(z, out / "instanton_profile.csv")
        report.doc["artifacts"].append(str(out / "instanton_profile.csv"))
        report.doc["artifacts"].append(
            plots.save_profile_figure(z, residual, out / "instanton_profile.png"))
    return report.finish(args)


def cmd_pohozaev(config, args) -> int:
    params, K, grid = _build(config, args)
    report = Report("pohozaev", config, params)
    opts = config.get("pohozaev", {})
    sigmas = opts.get("sigmas", [0.5, 1.0, 2.0])
    mu = opts.get("mu", 1.0)
    t = opts.get("t", 0.0)
    tol = args.tol_scale

    ga = green_profile(params, grid)
    green_vals = [boundary_term_B(ga, s) for s in sigmas]
    worst = max(abs(v) for v in green_vals)
    report.check("green_boundary_term", worst <= 1e-10 * tol, worst, 1e-10 * tol)

    z = make_instanton(params, grid, mu=mu)
    reports = [local_identity(z, K, s, t) for s in sigmas]
    report.doc["data"]["local_identities"] = [r.to_json() for r in reports]
    if K.kind == "constant" or t == 0.0:
        worst_rel = max(r.relative_residual for r in reports)
        report.check("local_identity_residual", worst_rel <= 1e-6 * tol,
                     worst_rel, 1e-6 * tol)
    report.doc["data"]["global_identity_on_instanton"] = global_identity(z, K, t)

    out = _csv_dir(args)
    if out:
        rows = np.column_stack([sigmas, green_vals,
                                [r.relative_residual for r in reports]])
        np.savetxt(out / "pohozaev_checks.csv", rows, delimiter=",",
                   header="sigma,green_boundary,identity_rel_residual", comments="")
        report.doc["artifacts"].append(str(out / "pohozaev_checks.csv"))
        report.doc["artifacts"].append(plots.save_boundary_figure(
            sigmas, green_vals, reports, out / "pohozaev_boundary.png"))
    return report.finish(args)


def cmd_melnikov(config, args) -> int:
    params, K, grid = _build(config, args)
    report = Report("melnikov", config, params)
    opts = config.get("melnikov", {})
    tau_range = (opts.get("tau_min", 1e-3), opts.get("tau_max", 1e3))
    n_tau = opts.get("n_tau", 241)
    tol = args.tol_scale

    curve = melnikov.sample_curve(K, params, grid, tau_range, n_tau)
    report.doc["data"]["curve"] = {
        "critical_points": [c.to_json() for c in curve.critical_points],
        "gamma_at_zero": curve.gamma_at_zero,
        "scale": curve.scale,
        "degenerate_flat": curve.degenerate_flat,
    }
    Kt = K.tilde()
    taus = np.geomspace(max(tau_range[0] * 10, 1e-2), min(tau_range[1] / 10, 1e2), 20)
    sym = max(abs(melnikov.gamma(K, x, params, grid)
                  - melnikov.gamma(Kt, 1.0 / x, params, grid)) for x in taus)
    report.check("kelvin_symmetry", sym <= 1e-8 * tol * curve.scale,
                 sym, 1e-8 * tol * curve.scale)
    try:
        deg = melnikov.degree_report(K, params, grid, tau_range)
        report.doc["data"]["degree"] = deg.to_json()
        if deg.consistent is not None:
            report.check("degree_cross_validation", deg.consistent, deg.value)
    except CknLabError as exc:
        report.doc["data"]["degree"] = {"error": str(exc)}

    out = _csv_dir(args)
    if out:
        rows = np.column_stack([curve.tau, curve.gamma, curve.gamma_prime])
        np.savetxt(out / "melnikov_gamma.csv", rows, delimiter=",",
                   header="tau,gamma,gamma_prime", comments="")
        report.doc["artifacts"].append(str(out / "melnikov_gamma.csv"))
        report.doc["artifacts"].append(
            plots.save_gamma_figure(curve, out / "melnikov_gamma.png"))
    return report.finish(args)


def cmd_reduce(config, args) -> int:
    params, K, grid = _build(config, args)
    report = Report("reduce", config, params)
    opts = config.get("reduce", {})
    ts = opts.get("t", [1e-3])
    if isinstance(ts, (int, float)):
        ts = [ts]
    mu_range = (opts.get("mu_min", 0.5), opts.get("mu_max", 2.0))
    n_mu = opts.get("n_mu", 17)

    curves = []
    for t in ts:
        curve = reduction.phi_critical_points(t, K, params, grid, mu_range, n_mu)
        curves.append(curve)
        report.doc["data"][f"phi_t_{t:g}"] = curve.to_json()
        for cp in curve.critical_points:
            sol = reduction.solve_w_eta(cp.mu_t, t, K, params, grid)
            wnorm = norm_Da(sol.w)
            report.check(f"orthogonality_t{t:g}_mu{cp.mu_t:.4f}",
                         abs(sol.orthogonality) <= 1e-10 * max(wnorm, 1e-30),
                         sol.orthogonality)
    out = _csv_dir(args)
    if out:
        for curve in curves:
            rows = np.column_stack([curve.mu, curve.phi, curve.phi_prime])
            name = f"reduction_phi_t{curve.t:g}.csv"
            np.savetxt(out / name, rows, delimiter=",",
                       header="mu,phi,phi_prime", comments="")
            report.doc["artifacts"].append(str(out / name))
        report.doc["artifacts"].append(
            plots.save_phi_figure(curves, out / "reduction_phi.png"))
    return report.finish(args)


def cmd_continue(config, args) -> int:
    params, K, grid = _build(config, args)
    report = Report("continue", config, params)
    opts = config.get("continue", {})
    t_start = opts.get("t_start", 0.01)
    n_pts = opts.get("n_checkpoints", 12)
    tol = args.tol_scale
    schedule = np.geomspace(t_start, 1.0, n_pts)
    schedule[-1] = 1.0

    run = solver.continuation(K, schedule, params, grid)
    report.doc["data"]["run"] = run.to_json()
    report.check("status_completed", run.status is solver.RunStatus.COMPLETED,
                 run.status.value)
    if run.states:
        worst_res = max(s.residual for s in run.states)
        report.check("stored_residuals", worst_res <= 1e-8 * tol, worst_res, 1e-8 * tol)
        finite = all(np.isfinite(s.diagnostics.sandwich_C) for s in run.states)
        report.check("sandwich_finite", finite, max(s.diagnostics.sandwich_C
                                                    for s in run.states))
        from .pohozaev import global_identity_scale
        final = run.final
        poho = abs(final.diagnostics.pohozaev_global)
        scale = global_identity_scale(final.profile, K, final.t)
        report.check("global_pohozaev", poho <= 1e-6 * tol * max(scale, 1e-30),
                     poho, 1e-6 * tol * max(scale, 1e-30))
    out = _csv_dir(args)
    if out and run.states:
        rows = np.column_stack([[s.t for s in run.states],
                                [s.diagnostics.norm_E for s in run.states],
                                [s.diagnostics.sandwich_C for s in run.states],
                                [s.diagnostics.pohozaev_global for s in run.states]])
        np.savetxt(out / "continuation_diagnostics.csv", rows, delimiter=",",
                   header="t,norm_E,sandwich_C,pohozaev_global", comments="")
        report.doc["artifacts"].append(str(out / "continuation_diagnostics.csv"))
        profile_to_csv(run.final.profile, out / "continuation_final_profile.csv")
        report.doc["artifacts"].append(str(out / "continuation_final_profile.csv"))
        report.doc["artifacts"].append(plots.save_continuation_figure(
            run, out / "continuation_diagnostics.png"))
    return report.finish(args)


def cmd_verify(config, args) -> int:
    params, K, grid = _build(config, args)
    report = Report("verify", config, params)
    results = acceptance.run_all(n=grid.n, tol_scale=args.tol_scale, echo=True)
    for res in results:
        report.check(f"criterion_{res.number}_{res.name}", res.passed, res.message)
    report.doc["data"]["criteria"] = [r.to_json() for r in results]
    return report.finish(args)


COMMANDS = {
    "params": cmd_params,
    "instanton": cmd_instanton,
    "pohozaev": cmd_pohozaev,
    "melnikov": cmd_melnikov,
    "reduce": cmd_reduce,
    "continue": cmd_continue,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cknlab",
        description="Numerical laboratory for weighted critical elliptic equations.")
    parser.add_argument("command", choices=sorted(COMMANDS),
                        help="pipeline to run")
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="write the JSON report here (default stdout)")
    parser.add_argument("--csv-dir",
                        help="directory for CSV curves and rendered figures")
    parser.add_argument("--grid-n", type=int, default=None,
                        help="override grid size (default 2048)")
    parser.add_argument("--grid-S", type=float, default=None,
                        help="override grid half-width (default 20/(N-2-2a))")
    parser.add_argument("--tol-scale", type=float, default=1.0,
                        help="multiply all default tolerances")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        return COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(json.dumps({"schema": SCHEMA, "error": str(exc), "exit": 2}),
              file=sys.stderr)
        return 2
    except CknLabError as exc:
        print(json.dumps({"schema": SCHEMA, "error": str(exc), "exit": 1}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
