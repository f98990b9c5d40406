"""Run configuration: TOML ingestion, audits, and economy assembly.

A run configuration bundles the primitive parameters, the kernel, the
grids and the solver tolerances.  ``validate_config`` runs every
structural audit and returns either the assembled immutable economy or
the complete list of violations; it never stops at the first failure.
Environment variables prefixed ``SREE_`` override file values, e.g.
``SREE_SOLVER__MAX_SWEEPS=10`` overrides ``[solver] max_sweeps``.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .economy import Economy, SolverOptions
from .externality import (
    ExternalityKernel,
    audit_kernel,
    kernel_violations,
    lipschitz_constant,
    schauder_bound_M,
)
from .grids import SpatialGrid, TailBoundParams, choose_horizon, tail_bound_phi
from .primitives import (
    ModelPrimitives,
    ProductionParams,
    UtilityParams,
    audit_production,
    audit_utility,
    production_violations,
    utility_violations,
)

__all__ = [
    "ConfigRejection",
    "RunConfig",
    "load_config",
    "validate_config",
    "build_manifest",
]

ENV_PREFIX = "SREE_"


class ConfigRejection(ValueError):
    """Raised when a configuration fails its audits; carries all violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


_DEFAULTS = {
    "primitives": {
        "A": 1.0, "alpha": 0.3, "beta": 0.2, "delta": 0.05,
        "sigma": 0.5, "r": 0.03,
    },
    "kernel": {
        "family": "gaussian", "ell": 0.2, "ell_wide": 0.4, "amp_wide": 0.5,
        "psi_a": 0.25, "psi_b": 0.5, "I_lo": 0.1, "I_hi": 4.0,
    },
    "grid": {
        "locations": 16, "periodic": False, "time_nodes": 400,
        "tail_epsilon": 250.0, "horizon_floor": 10.0,
    },
    "k0": {
        "kind": "constant", "value": 4.0,
        "a": 3.0, "b": 2.0,
        "base": 3.0, "amp": 2.0, "center": 0.5, "width": 0.15,
    },
    "solver": {
        "shoot_rel_tol": 1e-6, "bisect_iters": 80, "bracket_doublings": 10,
        "oracle_grad_tol": 1e-8, "oracle_max_iters": 200_000,
        "gamma": 0.5, "y_tol": 1e-8, "max_sweeps": 50,
        "plateau_window": 10, "oracle": False,
    },
    "location": {
        "k0": 4.0, "K_mode": "constant", "K_value": 1.0, "K_table": "",
    },
    "output": {
        "directory": "out", "fields": ["k", "c", "K"],
    },
    "seed": 12345,
}


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration with defaults filled in."""

    primitives: dict
    kernel: dict
    grid: dict
    k0: dict
    solver: dict
    location: dict
    output: dict
    seed: int

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        merged = {}
        for section, defaults in _DEFAULTS.items():
            if section == "seed":
                continue
            body = dict(defaults)
            user = raw.get(section, {})
            if not isinstance(user, dict):
                raise ConfigRejection([f"config section [{section}] must be a table"])
            unknown = set(user) - set(defaults)
            if unknown:
                raise ConfigRejection(
                    [f"config section [{section}] has unknown keys {sorted(unknown)}"]
                )
            body.update(user)
            merged[section] = body
        seed = int(raw.get("seed", _DEFAULTS["seed"]))
        return cls(seed=seed, **merged)


def _apply_env_overrides(raw: dict, environ=None) -> dict:
    env = os.environ if environ is None else environ
    out = json.loads(json.dumps(raw))  # deep copy of plain data
    for key, val in env.items():
        if not key.startswith(ENV_PREFIX):
            continue
        spec = key[len(ENV_PREFIX):].lower()
        try:
            parsed = json.loads(val)
        except json.JSONDecodeError:
            parsed = val
        if "__" in spec:
            section, name = spec.split("__", 1)
            out.setdefault(section, {})[name] = parsed
        else:
            out[spec] = parsed
    return out


def load_config(path: str, environ=None) -> RunConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    return RunConfig.from_dict(_apply_env_overrides(raw, environ))


def _k0_field(cfg_k0: dict, grid: SpatialGrid) -> np.ndarray:
    z = grid.locations
    kind = cfg_k0["kind"]
    if kind == "constant":
        return np.full(grid.n, float(cfg_k0["value"]))
    if kind == "linear":
        return float(cfg_k0["a"]) + float(cfg_k0["b"]) * z
    if kind == "gaussian_bump":
        return float(cfg_k0["base"]) + float(cfg_k0["amp"]) * np.exp(
            -((z - float(cfg_k0["center"])) ** 2) / (2.0 * float(cfg_k0["width"]) ** 2)
        )
    raise ConfigRejection([f"k0: unknown kind '{kind}'"])


def validate_config(cfg: RunConfig) -> Economy:
    """Run every audit; assemble the economy or raise with all violations."""
    v: list[str] = []
    p = cfg.primitives
    v += production_violations(p["A"], p["alpha"], p["beta"], p["delta"])
    v += utility_violations(p["sigma"])
    if not p["r"] > 0:
        v.append(f"primitives: discount rate r = {p['r']} must be positive")
    kc = cfg.kernel
    v += kernel_violations(
        kc["family"], kc["ell"], kc["ell_wide"], kc["amp_wide"],
        kc["psi_a"], kc["psi_b"], kc["I_lo"], kc["I_hi"],
    )
    g = cfg.grid
    if int(g["locations"]) < 2:
        v.append("grid: need at least 2 locations")
    if int(g["time_nodes"]) < 2:
        v.append("grid: need at least 2 time nodes")
    if not g["tail_epsilon"] > 0:
        v.append("grid: tail_epsilon must be positive")
    if not g["horizon_floor"] > 0:
        v.append("grid: horizon_floor must be positive")
    s = cfg.solver
    if not 0.0 < s["gamma"] <= 1.0:
        v.append(f"solver: damping gamma = {s['gamma']} must lie in (0, 1]")
    if v:
        raise ConfigRejection(v)

    production = ProductionParams(A=p["A"], alpha=p["alpha"], beta=p["beta"],
                                  delta=p["delta"])
    utility = UtilityParams(sigma=p["sigma"])
    primitives = ModelPrimitives(production=production, utility=utility, r=p["r"])
    kernel = ExternalityKernel(
        family=kc["family"], ell=kc["ell"], ell_wide=kc["ell_wide"],
        amp_wide=kc["amp_wide"], psi_a=kc["psi_a"], psi_b=kc["psi_b"],
        I_lo=kc["I_lo"], I_hi=float(kc["I_hi"]),
    )

    space = SpatialGrid.uniform(int(g["locations"]), periodic=bool(g["periodic"]))
    v += audit_production(production, kernel.I_lo, kernel.I_hi)
    v += audit_utility(utility)
    v += audit_kernel(kernel, space)
    if v:
        raise ConfigRejection(v)

    k0_values = _k0_field(cfg.k0, space)
    if np.any(k0_values <= 0):
        raise ConfigRejection(["k0: initial capital must be positive everywhere"])

    try:
        L_S = lipschitz_constant(kernel, space)
        M = schauder_bound_M(kernel, space, float(np.max(k0_values)), production)
        K_sup = float(min(kernel.I_hi, M))
        tail = TailBoundParams.for_problem(
            production, utility, p["r"],
            k0_sup=float(np.max(k0_values)), K_sup=K_sup,
        )
        time = choose_horizon(
            float(g["tail_epsilon"]), tail, int(g["time_nodes"]),
            floor=float(g["horizon_floor"]),
        )
    except ValueError as exc:
        raise ConfigRejection([f"derived constants: {exc}"]) from exc
    solver = SolverOptions(
        shoot_rel_tol=float(s["shoot_rel_tol"]),
        bisect_iters=int(s["bisect_iters"]),
        bracket_doublings=int(s["bracket_doublings"]),
        oracle_grad_tol=float(s["oracle_grad_tol"]),
        oracle_max_iters=int(s["oracle_max_iters"]),
        gamma=float(s["gamma"]),
        y_tol=float(s["y_tol"]),
        max_sweeps=int(s["max_sweeps"]),
        plateau_window=int(s["plateau_window"]),
        run_oracle_check=bool(s["oracle"]),
    )
    return Economy(
        primitives=primitives,
        kernel=kernel,
        space=space,
        time=time,
        k0_values=k0_values,
        tail=tail,
        tail_phi=tail_bound_phi(time.horizon_T, tail),
        lipschitz_S=L_S,
        schauder_M=M,
        solver=solver,
    )


def _checksum(arr: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr, dtype=float).tobytes()).hexdigest()[:16]


def build_manifest(cfg: RunConfig, economy: Economy, **extra) -> dict:
    """Run manifest: resolved constants, checksums and caller extras."""
    from . import __version__

    # spatial uniformity of all emitted fields needs identical location
    # problems (constant k0) and a location-blind kernel
    uniform_expected = (
        cfg.kernel["family"] == "uniform" and cfg.k0["kind"] == "constant"
    )
    manifest = {
        "tool_version": __version__,
        "seed": cfg.seed,
        "horizon_T": economy.time.horizon_T,
        "tail_phi": economy.tail_phi,
        "tail_epsilon": cfg.grid["tail_epsilon"],
        "schauder_M": economy.schauder_M,
        "lipschitz_S": economy.lipschitz_S,
        "K_sup_effective": economy.K_sup_effective,
        "n_locations": economy.space.n,
        "n_time_nodes": economy.time.n_nodes,
        "grid_checksums": {
            "locations": _checksum(economy.space.locations),
            "quad_weights": _checksum(economy.space.quad_weights),
            "time_nodes": _checksum(economy.time.nodes),
            "k0": _checksum(economy.k0_values),
        },
        "y_tol": economy.solver.y_tol,
        "expect_spatially_uniform": uniform_expected,
        "timings_s": {},
    }
    manifest.update(extra)
    return manifest
