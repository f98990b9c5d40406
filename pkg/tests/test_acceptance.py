"""Acceptance suite: every criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.  Timed criteria measure warm solves; the session
fixture compiles the kernels beforehand.
"""

import time

import numpy as np
import pytest

from sree.config import RunConfig, validate_config
from sree.equilibrium import (
    continuity_probe,
    initial_field,
    solve_equilibrium,
    y_norm,
)
from sree.grids import TailBoundParams, tail_bound_phi
from sree.primitives import (
    ModelPrimitives,
    ProductionParams,
    UtilityParams,
    eval_U,
    steady_state,
)
from sree.ramsey import (
    LocationProblem,
    check_consumption_bounds,
    discount_weights,
    h_regularization_sweep,
    oracle_value_and_grad,
    random_admissible_paths,
    solve_direct_oracle,
    solve_shooting,
)


def _report(name: str, ok: bool, detail: str = ""):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"{name}: {detail}"


PRIMS = ModelPrimitives(
    production=ProductionParams(A=0.8, alpha=0.3, beta=0.2, delta=0.1),
    utility=UtilityParams(sigma=0.5),
    r=0.05,
)


def _instances(rng, count=20):
    """Randomized single-location instances: constant, linear, sinusoidal."""
    out = []
    for i in range(count):
        kind = ("constant", "linear", "sinusoidal")[i % 3]
        T = float(rng.uniform(2.0, 2.6))
        n = int(rng.integers(170, 201))
        t = np.linspace(0.0, T, n)
        base = float(rng.uniform(0.9, 1.2))
        if kind == "constant":
            K = np.full(n, base)
        elif kind == "linear":
            K = base + float(rng.uniform(-0.1, 0.1)) * t / T
        else:
            K = base + 0.1 * np.sin(2 * np.pi * t / T)
        ss = steady_state(float(np.mean(K)), PRIMS.production, PRIMS.r)
        k0 = float(rng.uniform(0.75, 1.3)) * ss.k_star
        out.append(LocationProblem(K_traj=K, k0=k0, primitives=PRIMS, times=t))
    return out


@pytest.fixture(scope="module")
def equivalence_study():
    rng = np.random.default_rng(20260809)
    problems = _instances(rng)
    t0 = time.perf_counter()
    solved = []
    for prob in problems:
        shoot = solve_shooting(prob)
        oracle = solve_direct_oracle(prob)
        solved.append((prob, shoot, oracle))
    elapsed = time.perf_counter() - t0
    return solved, elapsed


def test_oracle_equivalence(equivalence_study):
    solved, elapsed = equivalence_study
    worst_obj, worst_path = 0.0, 0.0
    for _, shoot, oracle in solved:
        n = oracle.c.size - 1
        worst_obj = max(worst_obj, abs(oracle.objective - shoot.objective)
                        / abs(oracle.objective))
        worst_path = max(
            worst_path,
            float(np.max(np.abs(oracle.k - shoot.k))),
            float(np.max(np.abs(oracle.c[:n] - shoot.c[:n]))),
        )
    ok = worst_obj <= 1e-4 and worst_path <= 1e-3 and elapsed <= 60.0
    _report(
        "oracle-equivalence",
        ok,
        f"20 instances: obj gap {worst_obj:.2e} (<=1e-4), "
        f"path gap {worst_path:.2e} (<=1e-3), {elapsed:.1f}s (<=60s)",
    )


def test_saturation_and_positivity(equivalence_study):
    solved, _ = equivalence_study
    worst_dyn, min_k, min_c = 0.0, np.inf, np.inf
    for _, shoot, oracle in solved:
        for path in (shoot, oracle):
            worst_dyn = max(worst_dyn, path.max_dynamics_residual)
            min_k = min(min_k, float(np.min(path.k)))
            min_c = min(min_c, float(np.min(path.c)))
    ok = worst_dyn <= 1e-6 and min_k > 0 and min_c > 0
    _report(
        "saturation-positivity",
        ok,
        f"max dynamics residual {worst_dyn:.2e} (<=1e-6), "
        f"min k {min_k:.3g} > 0, min c {min_c:.3g} > 0",
    )


def test_mass_bound(equivalence_study):
    solved, _ = equivalence_study
    ok = True
    worst_slack = -np.inf
    for _, shoot, oracle in solved:
        for path in (shoot, oracle):
            rep = check_consumption_bounds(path)
            ok = ok and rep.mass_ok
            worst_slack = max(worst_slack, rep.sum_abs_dk - rep.mass_bound)
    _report(
        "mass-bound",
        ok,
        f"sum|dk| - (k0 + 2 C1 T + 1e-6) <= {worst_slack:.3g} on 40 paths",
    )


def test_tail_bound():
    rng = np.random.default_rng(7)
    T, k0, K_sup = 20.0, 2.0, 1.2
    times4 = np.linspace(0.0, 4 * T, 1601)
    K4 = np.full(times4.size, K_sup)
    params = TailBoundParams.for_problem(
        PRIMS.production, PRIMS.utility, PRIMS.r, k0_sup=k0, K_sup=K_sup
    )
    ks, cs = random_admissible_paths(PRIMS.production, K4, k0, times4, rng, 50)
    w = discount_weights(times4, PRIMS.r)
    beyond = times4[:-1] >= T - 1e-12
    tails = np.asarray(eval_U(cs[:, :-1], PRIMS.utility))[:, beyond] @ w[beyond]
    phi = tail_bound_phi(T, params)
    dominated = bool(np.all(tails <= phi))

    # doubling the horizon moves the solved objective by less than phi(T)
    ss = steady_state(1.0, PRIMS.production, PRIMS.r)
    J = {}
    for T_solve, n in ((20.0, 401), (40.0, 801)):
        t = np.linspace(0.0, T_solve, n)
        prob = LocationProblem(np.ones(n), 0.7 * ss.k_star, PRIMS, t)
        J[T_solve] = solve_shooting(prob).objective
    phi20 = tail_bound_phi(
        20.0,
        TailBoundParams.for_problem(PRIMS.production, PRIMS.utility, PRIMS.r,
                                    k0_sup=0.7 * ss.k_star, K_sup=1.0),
    )
    delta_ok = abs(J[40.0] - J[20.0]) <= phi20
    _report(
        "tail-bound",
        dominated and delta_ok,
        f"max tail mass {float(np.max(tails)):.3g} <= phi(T) {phi:.3g}; "
        f"|J(2T)-J(T)| = {abs(J[40.0] - J[20.0]):.3g} <= {phi20:.3g}",
    )


def test_stationary_exactness():
    ss = steady_state(1.0, PRIMS.production, PRIMS.r)
    t = np.linspace(0.0, 20.0, 401)
    prob = LocationProblem(np.ones(401), ss.k_star, PRIMS, t)
    t0 = time.perf_counter()
    path = solve_shooting(prob)
    elapsed = time.perf_counter() - t0
    dev = max(float(np.max(np.abs(path.k - ss.k_star))),
              float(np.max(np.abs(path.c - ss.c_star))))
    exact = float(np.asarray(eval_U(ss.c_star, PRIMS.utility))) * (
        1 - np.exp(-PRIMS.r * 20.0)
    ) / PRIMS.r
    rel = abs(path.objective - exact) / exact
    ok = dev <= 1e-6 and rel <= 1e-6 and elapsed <= 1.0
    _report(
        "stationary-exactness",
        ok,
        f"path dev {dev:.2e} (<=1e-6), objective rel {rel:.2e} (<=1e-6), "
        f"{elapsed * 1e3:.0f}ms (<=1s)",
    )


def test_regularization_convergence():
    ss = steady_state(1.0, PRIMS.production, PRIMS.r)
    t = np.linspace(0.0, 8.0, 321)
    prob = LocationProblem(np.ones(321), 0.8 * ss.k_star, PRIMS, t)
    rep = h_regularization_sweep(prob, [1e-1, 1e-2, 1e-3, 1e-4])
    decreasing = all(b < a for a, b in zip(rep.c_gaps, rep.c_gaps[1:]))
    ok = decreasing and rep.final_gap <= 1e-2
    _report(
        "regularization-convergence",
        ok,
        f"gaps {['%.2e' % g for g in rep.c_gaps]} decreasing, "
        f"final {rep.final_gap:.2e} (<=1e-2)",
    )


def test_continuity_of_best_response():
    eco = validate_config(RunConfig.from_dict({}))
    rng = np.random.default_rng(31)
    devs = continuity_probe(eco, initial_field(eco), [1e-1, 1e-2, 1e-3], rng)
    ok = devs[0] > devs[1] > devs[2]
    _report(
        "best-response-continuity",
        ok,
        f"deviations {['%.2e' % d for d in devs]} monotone in eps",
    )


def test_decoupled_equilibrium():
    eco = validate_config(RunConfig.from_dict({
        "primitives": {"beta": 0.0},
        "solver": {"gamma": 1.0},
        "grid": {"tail_epsilon": 280.0},
    }))
    assert eco.space.n == 16 and eco.time.n_nodes == 400
    t0 = time.perf_counter()
    res = solve_equilibrium(eco)
    elapsed = time.perf_counter() - t0
    cert = res.diagnostics["certification"]
    ok = (
        res.converged
        and res.state.sweep_count == 1
        and cert.fixed_point_sup <= 1e-6
        and cert.dynamics_sup <= 1e-6
        and cert.euler_sup <= 1e-6
        and elapsed <= 30.0
    )
    _report(
        "decoupled-equilibrium",
        ok,
        f"1 sweep ({res.state.sweep_count}), residuals "
        f"({cert.fixed_point_sup:.1e}, {cert.dynamics_sup:.1e}, "
        f"{cert.euler_sup:.1e}) <= 1e-6, {elapsed:.1f}s (<=30s)",
    )


def test_symmetric_equilibrium():
    eco = validate_config(RunConfig.from_dict({
        "kernel": {"family": "uniform"},
        "k0": {"kind": "constant", "value": 4.0},
    }))
    assert eco.space.n == 16
    res = solve_equilibrium(eco)
    K = res.state.K_field.values
    variation = float(np.max(K.max(axis=1) - K.min(axis=1)))
    ok = res.converged and variation <= 1e-6
    _report(
        "symmetric-equilibrium",
        ok,
        f"sup spatial variation {variation:.2e} (<=1e-6)",
    )


def test_self_map_and_certification():
    eco = validate_config(RunConfig.from_dict({}))
    assert eco.space.n == 16 and eco.time.n_nodes == 400
    t0 = time.perf_counter()
    res = solve_equilibrium(eco)
    elapsed = time.perf_counter() - t0
    cert = res.diagnostics["certification"]
    in_interval = bool(
        np.all(res.state.K_field.values >= eco.kernel.I_lo)
        and np.all(res.state.K_field.values <= eco.kernel.I_hi)
    )
    ok = (
        res.converged
        and res.state.sweep_count <= 50
        and res.diagnostics["schauder_ball_ok"]
        and in_interval
        and cert.fixed_point_sup <= 1e-4
        and cert.dynamics_sup <= 1e-3
        and cert.euler_sup <= 1e-2
        and elapsed <= 600.0
    )
    _report(
        "self-map-certification",
        ok,
        f"{res.state.sweep_count} sweeps (<=50), ball ok, residuals "
        f"({cert.fixed_point_sup:.1e}, {cert.dynamics_sup:.1e}, "
        f"{cert.euler_sup:.1e}) <= (1e-4, 1e-3, 1e-2), "
        f"{elapsed:.0f}s (<=600s)",
    )


def test_gradient_check(equivalence_study):
    solved, _ = equivalence_study
    rng = np.random.default_rng(41)
    worst = 0.0
    for prob, _, _ in solved:
        n = prob.times.size - 1
        ss = steady_state(float(np.mean(prob.K_traj)), PRIMS.production, PRIMS.r)
        base = np.log(np.full(n, 0.8 * ss.c_star))
        mu, rho = 0.5, 2.0
        for _ in range(10):
            u = base + rng.normal(0.0, 0.05, n)
            _, grad, _, feas = oracle_value_and_grad(u, prob, mu, rho)
            assert feas
            for i in rng.integers(0, n, 10):
                h = 1e-6 * max(1.0, abs(u[i]))
                up, um = u.copy(), u.copy()
                up[i] += h
                um[i] -= h
                fp = oracle_value_and_grad(up, prob, mu, rho)[0]
                fm = oracle_value_and_grad(um, prob, mu, rho)[0]
                fd = (fp - fm) / (2 * h)
                denom = max(abs(fd), 1e-8)
                worst = max(worst, abs(grad[i] - fd) / denom)
    ok = worst <= 1e-5
    _report("gradient-check", ok, f"max adjoint/FD relative error {worst:.2e} (<=1e-5)")


def test_y_norm_criterion():
    t = np.linspace(0.0, 40.0, 401)
    exact = y_norm(np.ones((401, 5)), t) == 2.0
    rng = np.random.default_rng(3)
    axioms = True
    for _ in range(20):
        a = rng.normal(size=(401, 5))
        b = rng.normal(size=(401, 5))
        s = rng.normal()
        axioms &= y_norm(a, t) >= 0.0
        axioms &= abs(y_norm(s * a, t) - abs(s) * y_norm(a, t)) <= 1e-12 * (
            1 + y_norm(a, t)
        )
        axioms &= y_norm(a + b, t) <= y_norm(a, t) + y_norm(b, t) + 1e-12
    ok = exact and axioms
    _report("y-norm", ok, "constant field -> 2 exactly; axioms hold on random triples")
