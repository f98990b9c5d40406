"""Command-line orchestration: validate, solve, diagnose, emit CSVs.

Subcommands:

* ``validate``          audit a configuration; exit 1 listing violations.
* ``solve-location``    one location against a fixed externality path.
* ``solve-equilibrium`` the damped fixed-point sweep over all locations.
* ``diagnose``          robustness suites (tail fuzz, h-sweep, continuity).

Exit codes: 0 success, 1 config rejection, 2 solver failure,
3 non-convergence.  Every run writes a manifest, even failed ones.
All floating-point output carries 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import sys
import time as _time
from pathlib import Path

import numpy as np

from .config import ConfigRejection, RunConfig, build_manifest, load_config, validate_config
from .economy import Economy
from .equilibrium import continuity_probe, solve_equilibrium
from .grids import tail_bound_phi
from .primitives import eval_U
from .ramsey import (
    LocationProblem,
    ShootingError,
    MaxIterations,
    check_consumption_bounds,
    discount_weights,
    h_regularization_sweep,
    random_admissible_paths,
    solve_direct_oracle,
    solve_shooting,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_NONCONV = 3


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(outdir: Path, manifest: dict) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")


def _location_problem(cfg: RunConfig, economy: Economy) -> LocationProblem:
    loc = cfg.location
    t = economy.time.nodes
    mode = loc["K_mode"]
    if mode == "constant":
        K = np.full(t.size, float(loc["K_value"]))
    elif mode == "table":
        tbl = np.loadtxt(loc["K_table"], delimiter=",", skiprows=1)
        K = np.interp(t, tbl[:, 0], tbl[:, 1])
    else:
        raise ConfigRejection([f"location: unknown K_mode '{mode}'"])
    lo, hi = economy.kernel.I_lo, economy.kernel.I_hi
    if np.any(K < lo) or np.any(K > hi):
        raise ConfigRejection(
            [f"location: externality trajectory leaves the interval [{lo}, {hi}]"]
        )
    return LocationProblem(
        K_traj=K, k0=float(loc["k0"]), primitives=economy.primitives, times=t
    )


def _path_rows(path):
    dyn = np.append(path.dynamics_residuals(), 0.0)
    eul = np.append(path.euler_residuals(), 0.0)
    for i, t in enumerate(path.times):
        yield (t, path.k[i], path.c[i], path.theta[i], dyn[i], eul[i])


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    economy = validate_config(cfg)
    manifest = build_manifest(cfg, economy, command="validate")
    if args.out:
        _write_manifest(Path(args.out), manifest)
    print(
        f"config accepted: T={economy.time.horizon_T:g}, "
        f"phi(T)={economy.tail_phi:.6g}, M={economy.schauder_M:g}, "
        f"L_S={economy.lipschitz_S:.6g}"
    )
    return EXIT_OK


def cmd_solve_location(args) -> int:
    t_val = _time.perf_counter()
    cfg = load_config(args.config)
    economy = validate_config(cfg)
    outdir = Path(args.out or cfg.output["directory"])
    manifest = build_manifest(cfg, economy, command="solve-location")
    manifest["timings_s"]["validate"] = _time.perf_counter() - t_val
    t0 = _time.perf_counter()
    try:
        prob = _location_problem(cfg, economy)
        path = solve_shooting(prob, economy.solver)
    except (ShootingError, MaxIterations) as exc:
        manifest["error"] = str(exc)
        _write_manifest(outdir, manifest)
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    manifest["timings_s"]["solve"] = _time.perf_counter() - t0

    outdir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        outdir / "path.csv",
        ["t", "k", "c", "theta", "dynamics_residual", "euler_residual"],
        _path_rows(path),
    )
    rep = check_consumption_bounds(path)
    _write_csv(
        outdir / "bounds.csv",
        ["c_min", "c_max", "positive", "sum_abs_dk", "mass_bound", "mass_ok"],
        [(rep.c_min, rep.c_max, rep.positive, rep.sum_abs_dk,
          rep.mass_bound, rep.mass_ok)],
    )
    manifest["objective"] = path.objective
    manifest["tail_bound"] = path.tail_bound
    manifest["max_dynamics_residual"] = path.max_dynamics_residual

    if args.oracle or economy.solver.run_oracle_check:
        t1 = _time.perf_counter()
        try:
            oracle = solve_direct_oracle(prob, economy.solver)
        except (ShootingError, MaxIterations) as exc:
            manifest["error"] = f"oracle cross-check failed: {exc}"
            _write_manifest(outdir, manifest)
            print(manifest["error"], file=sys.stderr)
            return EXIT_SOLVER
        manifest["timings_s"]["oracle"] = _time.perf_counter() - t1
        n = oracle.c.size - 1
        manifest["oracle_objective_gap_rel"] = abs(
            oracle.objective - path.objective
        ) / max(1e-300, abs(oracle.objective))
        manifest["oracle_path_sup_gap"] = max(
            float(np.max(np.abs(oracle.k - path.k))),
            float(np.max(np.abs(oracle.c[:n] - path.c[:n]))),
        )
        _write_csv(
            outdir / "path_oracle.csv",
            ["t", "k", "c", "theta", "dynamics_residual", "euler_residual"],
            _path_rows(oracle),
        )
    _write_manifest(outdir, manifest)
    print(f"solved: J_T = {path.objective:.12g} (phi(T) = {path.tail_bound:.6g})")
    return EXIT_OK


def _long_rows(values, times, locations):
    for i, t in enumerate(times):
        for j, z in enumerate(locations):
            yield (t, z, values[i, j])


def cmd_solve_equilibrium(args) -> int:
    t_val = _time.perf_counter()
    cfg = load_config(args.config)
    economy = validate_config(cfg)
    outdir = Path(args.out or cfg.output["directory"])
    manifest = build_manifest(cfg, economy, command="solve-equilibrium")
    manifest["timings_s"]["validate"] = _time.perf_counter() - t_val
    max_sweeps = args.max_sweeps if args.max_sweeps else None
    t0 = _time.perf_counter()
    try:
        result = solve_equilibrium(economy, max_sweeps=max_sweeps)
    except (ShootingError, MaxIterations) as exc:
        manifest["error"] = str(exc)
        _write_manifest(outdir, manifest)
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    manifest["timings_s"]["solve"] = _time.perf_counter() - t0

    outdir.mkdir(parents=True, exist_ok=True)
    t = economy.time.nodes
    z = economy.space.locations
    state = result.state
    wanted = set(cfg.output["fields"])
    if "k" in wanted:
        _write_csv(outdir / "fields_k.csv", ["t", "z", "value"],
                   _long_rows(state.k_field, t, z))
    if "c" in wanted:
        _write_csv(outdir / "fields_c.csv", ["t", "z", "value"],
                   _long_rows(state.c_field, t, z))
    if "K" in wanted:
        _write_csv(outdir / "fields_K.csv", ["t", "z", "value"],
                   _long_rows(state.K_field.values, t, z))
    _write_csv(
        outdir / "residuals.csv",
        ["sweep", "y_norm_residual"],
        list(enumerate(state.residual_history)),
    )
    cert = result.diagnostics["certification"]
    _write_csv(
        outdir / "certification.csv",
        ["name", "value"],
        [
            ("fixed_point_sup", cert.fixed_point_sup),
            ("dynamics_sup", cert.dynamics_sup),
            ("euler_sup", cert.euler_sup),
        ],
    )
    manifest.update(
        converged=bool(result.converged),
        sweeps=state.sweep_count,
        final_residual=result.final_residual,
        sup_residual=result.sup_residual,
        contraction_ratio=result.diagnostics["contraction_ratio"],
        plateaued=bool(result.plateaued),
        schauder_ball_ok=bool(result.diagnostics["schauder_ball_ok"]),
        certification={
            "fixed_point_sup": cert.fixed_point_sup,
            "dynamics_sup": cert.dynamics_sup,
            "euler_sup": cert.euler_sup,
        },
    )
    if args.oracle or economy.solver.run_oracle_check:
        t1 = _time.perf_counter()
        gaps = []
        for j in range(economy.space.n):
            prob = LocationProblem(
                K_traj=state.K_field.values[:, j],
                k0=float(economy.k0_values[j]),
                primitives=economy.primitives,
                times=t,
            )
            oracle = solve_direct_oracle(prob, economy.solver)
            n = oracle.c.size - 1
            gaps.append(max(
                float(np.max(np.abs(oracle.k - state.k_field[:, j]))),
                float(np.max(np.abs(oracle.c[:n] - state.c_field[:n, j]))),
            ))
        manifest["oracle_max_path_gap"] = max(gaps)
        manifest["timings_s"]["oracle"] = _time.perf_counter() - t1
    _write_manifest(outdir, manifest)
    if not result.converged:
        print(
            f"non-convergence after {state.sweep_count} sweeps: "
            f"residual {result.final_residual:.6g}"
            + (" (plateau detected)" if result.plateaued else ""),
            file=sys.stderr,
        )
        return EXIT_NONCONV
    print(
        f"converged in {state.sweep_count} sweeps: "
        f"Y-residual {result.final_residual:.6g}, "
        f"certification ({cert.fixed_point_sup:.3g}, "
        f"{cert.dynamics_sup:.3g}, {cert.euler_sup:.3g})"
    )
    return EXIT_OK


def cmd_diagnose(args) -> int:
    t_val = _time.perf_counter()
    cfg = load_config(args.config)
    economy = validate_config(cfg)
    outdir = Path(args.out or cfg.output["directory"])
    manifest = build_manifest(cfg, economy, command="diagnose")
    manifest["timings_s"]["validate"] = _time.perf_counter() - t_val
    t_solve = _time.perf_counter()
    seed = args.seed if args.seed is not None else cfg.seed
    rng = np.random.default_rng(seed)
    rows = []
    ok = True
    try:
        prob = _location_problem(cfg, economy)

        # tail-bound dominance on random admissible paths extended to 4T
        T = economy.time.horizon_T
        times4 = np.linspace(0.0, 4.0 * T, 4 * (economy.time.n_nodes - 1) + 1)
        K4 = np.full(times4.size, float(np.max(prob.K_traj)))
        ks, cs = random_admissible_paths(
            economy.primitives.production, K4, prob.k0, times4, rng, 50
        )
        w4 = discount_weights(times4, economy.r)
        Uc = np.asarray(eval_U(cs[:, :-1], economy.primitives.utility))
        beyond = times4[:-1] >= T - 1e-12
        gaps = Uc[:, beyond] @ w4[beyond]
        phi = tail_bound_phi(T, prob.tail_params())
        rows.append(("tail", "max_J4T_minus_JT", float(np.max(gaps)), True))
        dominated = bool(np.all(gaps <= phi))
        rows.append(("tail", "phi_dominates", phi, dominated))
        ok &= dominated

        # regularization sweep
        rep = h_regularization_sweep(prob, [1e-1, 1e-2, 1e-3, 1e-4], economy.solver)
        for h, gap in zip(rep.h_values, rep.c_gaps):
            rows.append(("h_sweep", f"c_gap_h={h:g}", gap, True))
        rows.append(("h_sweep", "monotone", float(rep.monotone), rep.monotone))
        rows.append(("h_sweep", "final_ok", rep.final_gap, rep.final_ok))
        ok &= rep.monotone and rep.final_ok

        # consumption bounds on the base solve
        path = solve_shooting(prob, economy.solver)
        rep_b = check_consumption_bounds(path)
        rows.append(("bounds", "c_min", rep_b.c_min, rep_b.positive))
        rows.append(("bounds", "c_max", rep_b.c_max, True))
        rows.append(("bounds", "mass", rep_b.sum_abs_dk, rep_b.mass_ok))
        ok &= rep_b.positive and rep_b.mass_ok

        # continuity of the best response under field perturbations
        from .equilibrium import initial_field

        devs = continuity_probe(
            economy, initial_field(economy), [1e-1, 1e-2, 1e-3], rng
        )
        mono = all(devs[i + 1] <= devs[i] for i in range(len(devs) - 1))
        for eps, dev in zip([1e-1, 1e-2, 1e-3], devs):
            rows.append(("continuity", f"dev_eps={eps:g}", dev, True))
        rows.append(("continuity", "monotone", float(mono), mono))
        ok &= mono
    except (ShootingError, MaxIterations) as exc:
        manifest["error"] = str(exc)
        _write_manifest(outdir, manifest)
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    manifest["timings_s"]["solve"] = _time.perf_counter() - t_solve
    outdir.mkdir(parents=True, exist_ok=True)
    _write_csv(outdir / "diagnose.csv", ["suite", "name", "value", "ok"], rows)
    manifest["diagnostics_ok"] = bool(ok)
    _write_manifest(outdir, manifest)
    print("diagnostics " + ("passed" if ok else "FAILED") + f"; {len(rows)} checks")
    return EXIT_OK if ok else EXIT_SOLVER


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sree",
        description="spatial rational expectations equilibrium solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="TOML configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="RNG seed override")

    p = sub.add_parser("validate", help="audit a configuration")
    add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve-location", help="solve one location")
    add_common(p)
    p.add_argument("--oracle", action="store_true",
                   help="cross-check with the direct oracle")
    p.set_defaults(func=cmd_solve_location)

    p = sub.add_parser("solve-equilibrium", help="run the fixed-point sweep")
    add_common(p)
    p.add_argument("--oracle", action="store_true",
                   help="cross-check the final best response per location")
    p.add_argument("--max-sweeps", type=int, default=None)
    p.set_defaults(func=cmd_solve_equilibrium)

    p = sub.add_parser("diagnose", help="run the robustness suites")
    add_common(p)
    p.set_defaults(func=cmd_diagnose)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigRejection as exc:
        for violation in exc.violations:
            print(f"config rejected: {violation}", file=sys.stderr)
        if getattr(args, "out", None):
            from . import __version__

            _write_manifest(Path(args.out), {
                "tool_version": __version__,
                "command": args.command,
                "error": "config rejected",
                "violations": exc.violations,
                "timings_s": {},
            })
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config rejected: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
