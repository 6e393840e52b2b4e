"""Command line entry point.

Subcommands: twobody, gp, trial-energy, sweep, mu-c, verify.  Each run
writes a JSON report (resolved configuration, versions, seed, results) and,
where tabular output makes sense, a CSV with the unified column schema
h, E_bcs, E_gp, residual, residual_stderr, lambda, s1, D_c.

Exit codes: 0 success, 1 configuration or input errors, 2 numerical failure
(no bound state, violated gap, inadmissible trial state, non-convergence).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import tempfile

import numpy as np
import yaml

from . import __version__, asymptotics, gp, oracles, pairing, twobody
from .config import build_interaction, build_trap, load_config
from .grids import ConfigurationError, EigensolverError, NoSignChangeError, build_radial_grid

CSV_COLUMNS = ["h", "E_bcs", "E_gp", "residual", "residual_stderr", "lambda", "s1", "D_c"]

_NUMERICAL_ERRORS = (
    twobody.NoBoundStateError,
    twobody.GapViolatedError,
    pairing.InadmissibleStateError,
    gp.NonConvergedError,
    gp.DomainError,
    asymptotics.DegenerateFitError,
    EigensolverError,
    NoSignChangeError,
)


def _atomic_write(path: str, text: str):
    """Write via a temporary file and rename, so readers never see partial output."""
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if dataclasses.is_dataclass(obj):
        return {k: v for k, v in dataclasses.asdict(obj).items()}
    return str(obj)


def write_report(out_dir: str, name: str, cfg: dict, results: dict, rows: list | None = None):
    report = {
        "command": name,
        "package_version": __version__,
        "numpy_version": np.__version__,
        "config": cfg,
        "results": results,
    }
    _atomic_write(
        os.path.join(out_dir, f"{name}.json"),
        json.dumps(report, indent=2, default=_json_default) + "\n",
    )
    if rows is not None:
        import io

        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        _atomic_write(os.path.join(out_dir, f"{name}.csv"), buf.getvalue())


def _setup(cfg):
    micro = cfg["grids"]["micro"]
    sol = twobody.solve_two_body(
        interaction=build_interaction(cfg),
        n=micro["n"],
        r_max=micro["r_max"],
        epsilon=cfg["twobody"]["epsilon"],
        ell_max=cfg["twobody"]["ell_max"],
        p_max=cfg["twobody"]["p_max"],
        n_p=cfg["twobody"]["n_p"],
    )
    return sol


def _macro_grid(cfg):
    macro = cfg["grids"]["macro"]
    return build_radial_grid(macro["r_max"], macro["n"], "uniform")


def cmd_twobody(cfg, out_dir):
    sol = _setup(cfg)
    results = {
        "e0": sol.e0,
        "gap": sol.gap,
        "gap_epsilon": sol.gap_epsilon,
        "g_bcs": sol.g_bcs,
        "decay_rate": sol.decay_rate,
        "moments": sol.moments,
        "interaction": repr(sol.interaction),
    }
    write_report(out_dir, "twobody", cfg, results)
    print(f"e0 = {sol.e0:.12g}  gap = {sol.gap:.6g}  g_bcs = {sol.g_bcs:.12g}")
    return 0


def cmd_gp(cfg, out_dir):
    sol = _setup(cfg)
    trap = build_trap(cfg)
    grid = _macro_grid(cfg)
    res = gp.minimize_gp_unconstrained(
        trap, cfg["model"]["d"], sol.g_bcs, grid,
        tol=cfg["gp"]["tol"], max_iter=cfg["gp"]["max_iter"],
    )
    results = {
        "e_w": res.e_w,
        "d": res.d,
        "energy": res.energy,
        "mass": res.mass,
        "grad_residual": res.grad_residual,
        "n_iter": res.n_iter,
        "converged": res.converged,
        "bounds": gp.apriori_bounds_check(res),
    }
    if res.mass > 0:
        split = gp.gl_split(res)
        results["gl_split"] = {
            "shell_energy": split.shell.energy,
            "mu0": split.shell.mu0,
            "e_ring": split.e_ring,
            "identity_residual": split.identity_residual,
        }
    if not res.converged:
        raise gp.NonConvergedError(f"minimizer residual {res.grad_residual:.3e}")
    write_report(out_dir, "gp", cfg, results)
    print(f"E_W = {res.e_w:.10g}  E_gp = {res.energy:.10g}  mass = {res.mass:.6g}")
    return 0


def cmd_trial_energy(cfg, out_dir):
    sol = _setup(cfg)
    trap = build_trap(cfg)
    grid = _macro_grid(cfg)
    d, h = cfg["model"]["d"], cfg["model"]["h"]
    res = gp.minimize_gp_unconstrained(trap, d, sol.g_bcs, grid)
    bd = asymptotics.evaluate_trial_energy(
        sol, res, h,
        samples=cfg["mc"]["samples"], seed=cfg["mc"]["seed"], batch=cfg["mc"]["batch"],
    )
    results = {
        "h": h,
        "e_gp": res.energy,
        "e_bcs": bd.total,
        "e_bcs_stderr": bd.total_stderr,
        "residual": bd.total / h - res.energy,
        "lambda": bd.lam,
        "s1": bd.s1,
        "quadratic": dataclasses.asdict(bd.quadratic),
        "quartic": dataclasses.asdict(bd.quartic),
    }
    row = {
        "h": h, "E_bcs": bd.total, "E_gp": res.energy,
        "residual": bd.total / h - res.energy,
        "residual_stderr": bd.total_stderr / h,
        "lambda": bd.lam, "s1": bd.s1,
    }
    write_report(out_dir, "trial-energy", cfg, results, rows=[row])
    print(
        f"E_bcs = {bd.total:.8g} +- {bd.total_stderr:.2g}  "
        f"E_bcs/h - E_gp = {bd.total / h - res.energy:+.6g}"
    )
    return 0


def cmd_sweep(cfg, out_dir):
    sol = _setup(cfg)
    trap = build_trap(cfg)
    grid = _macro_grid(cfg)
    res = gp.minimize_gp_unconstrained(trap, cfg["model"]["d"], sol.g_bcs, grid)
    record = asymptotics.h_sweep(
        sol, res, cfg["sweep"]["h_values"],
        samples=cfg["mc"]["samples"], seed=cfg["mc"]["seed"], batch=cfg["mc"]["batch"],
    )
    rows = []
    for i, h in enumerate(record.h_values):
        rows.append({
            "h": h,
            "E_bcs": record.breakdowns[i].total,
            "E_gp": record.gp_energy,
            "residual": record.residuals[i],
            "residual_stderr": record.residual_stderrs[i],
            "lambda": record.lambdas[i],
            "s1": record.s1_values[i],
        })
    results = {
        "e_gp": record.gp_energy,
        "residuals": record.residuals,
        "residual_stderrs": record.residual_stderrs,
        "fit": dataclasses.asdict(record.fit) if record.fit else None,
    }
    write_report(out_dir, "sweep", cfg, results, rows=rows)
    if record.fit:
        print(
            f"residual ~ {record.fit.prefactor:.4g} * h^{record.fit.exponent:.3f}  "
            f"(R^2 = {record.fit.r_squared:.4f}, {record.fit.n_used} points)"
        )
    return 0


def cmd_mu_c(cfg, out_dir):
    sol = _setup(cfg)
    trap = build_trap(cfg)
    grid = _macro_grid(cfg)
    point = asymptotics.estimate_mu_c(
        sol, trap, grid, cfg["model"]["h"], tuple(cfg["mu_c"]["bracket"]),
        samples=cfg["mc"]["samples"], seed=cfg["mc"]["seed"], tol=cfg["mu_c"]["tol"],
    )
    results = dataclasses.asdict(point)
    row = {"h": point.h, "D_c": point.d_c}
    write_report(out_dir, "mu-c", cfg, results, rows=[row])
    print(
        f"D_c = {point.d_c:.6g} (bracket {point.bracket}, E_W = {point.e_w:.8g})  "
        f"mu_c = {point.mu_c:.8g}"
    )
    return 0


def cmd_verify(cfg, out_dir):
    """Check the numerical pipeline against closed-form reference values."""
    from .model import SphericalWell
    from .grids import RadialFunction
    from .twobody import TwoBodySolution

    checks = []

    def record(name, got, want, tol):
        ok = abs(got - want) <= tol * max(1.0, abs(want))
        checks.append({"name": name, "got": got, "want": want, "tol": tol, "ok": ok})
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {got:.10g} vs {want:.10g}")

    grid = build_radial_grid(20.0, 4000, "uniform")
    e_exact = oracles.square_well_binding(4.0, 1.0)
    sol = twobody.solve_ground_state(SphericalWell(4.0, 1.0), grid)
    record("square_well_binding", sol.e0, e_exact, 1e-8)

    e_h, rate = oracles.harmonic_ground(0.25, 1.0)
    e_w, _ = gp.solve_trap_ground(lambda r: np.asarray(r) ** 2, grid)
    record("harmonic_trap_ground", e_w, e_h, 1e-8)

    case = oracles.GaussianCase()
    micro = build_radial_grid(14.0, 2800, "uniform")
    a0 = RadialFunction(micro, case.alpha0(micro.nodes))
    f1 = RadialFunction(
        micro,
        (6 * case.gamma_0 + case.e0 - 4 * case.gamma_0**2 * micro.nodes**2)
        * case.alpha0(micro.nodes),
    )
    gsol = TwoBodySolution(
        lambda r: np.zeros_like(np.asarray(r, dtype=float)), micro, case.e0, a0, f1
    )
    record("gaussian_g_bcs", twobody.compute_g_bcs(gsol), oracles.gaussian_g_bcs(case), 1e-9)

    macro = build_radial_grid(12.0, 2400, "uniform")
    psi = RadialFunction(macro, case.psi(macro.nodes))
    kernel = pairing.build_pair_kernel(psi, gsol, case.h, psi_laplacian=case.psi_laplacian)
    record("gaussian_s1", pairing.top_singular_value(kernel), oracles.gaussian_s1(case), 1e-9)

    quad = pairing.quadratic_energy(kernel, case.trap, case.d)
    oq = oracles.gaussian_quadratic(case)
    record("gaussian_quadratic_total", quad.total, sum(oq.values()), 1e-4)

    mc = pairing.quartic_trace_mc(kernel, case.trap, case.d, samples=400_000, seed=1)
    ot = oracles.gaussian_quartic_traces(case)
    z = abs(mc.tr_hbar[0] - ot["tr_hbar"]) / mc.tr_hbar[1]
    ok = z < 4.0
    checks.append({"name": "gaussian_quartic_mc", "z": z, "ok": ok})
    print(f"{'PASS' if ok else 'FAIL'}  gaussian_quartic_mc: z = {z:.2f}")

    write_report(out_dir, "verify", cfg, {"checks": checks})
    if not all(c["ok"] for c in checks):
        raise gp.NonConvergedError("verification failed")
    return 0


COMMANDS = {
    "twobody": cmd_twobody,
    "gp": cmd_gp,
    "trial-energy": cmd_trial_energy,
    "sweep": cmd_sweep,
    "mu-c": cmd_mu_c,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bcsgp",
        description="Pairing functional solvers and their macroscopic limit",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="YAML configuration file")
    parser.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="override a configuration entry, e.g. --set model.h=0.25",
    )
    parser.add_argument("--out", help="output directory (default from configuration)")
    parser.add_argument("--seed", type=int, help="override mc.seed")
    parser.add_argument("--threads", type=int, help="limit BLAS/OpenMP thread pools")
    args = parser.parse_args(argv)

    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
        try:
            from threadpoolctl import threadpool_limits

            threadpool_limits(args.threads)
        except ImportError:
            pass

    try:
        cfg = load_config(args.config, args.set)
        if args.seed is not None:
            cfg["mc"]["seed"] = args.seed
        out_dir = args.out or cfg["output"]["directory"]
        return COMMANDS[args.command](cfg, out_dir)
    except (ConfigurationError, OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
