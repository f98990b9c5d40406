"""Best-response operator and the damped fixed-point sweep.

One sweep maps an externality field K to its best response: every
location solves its truncated problem against its own column of K, and
the externality operator is applied to the resulting capital field.  A
fixed point of that map is a spatial rational expectations equilibrium;
the driver iterates K <- (1 - gamma) K + gamma T(K) and measures
progress in the weighted sup norm

    ||y||_Y = sum_m 2^{-m} sup_{[0, m] x D} |y|,

with slabs beyond the truncation horizon carrying the terminal sup (the
geometric tail is summed in closed form).  Existence of a fixed point
does not imply this iteration converges; non-convergence is reported,
never raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .economy import Economy
from .externality import ExternalityField, apply_S
from .primitives import eval_f, eval_f_k, eval_U_prime, eval_U_prime_prime
from .ramsey import solve_shooting_batch

__all__ = [
    "EquilibriumState",
    "EquilibriumResult",
    "ResidualReport",
    "y_norm",
    "initial_field",
    "best_response",
    "solve_equilibrium",
    "equilibrium_residual",
]


@dataclass(eq=False)
class EquilibriumState:
    """Iterate of the sweep: externality field plus its best response."""

    K_field: ExternalityField
    k_field: np.ndarray
    c_field: np.ndarray
    residual_history: list
    sweep_count: int


@dataclass(eq=False)
class EquilibriumResult:
    state: EquilibriumState
    converged: bool
    final_residual: float
    euler_residual: float
    sup_residual: float
    plateaued: bool
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ResidualReport:
    """The three certification residuals of a candidate equilibrium."""

    fixed_point_sup: float      # sup |K - S(k)|
    dynamics_sup: float         # saturation residual against S(k)
    euler_sup: float            # Euler-equation residual against S(k)


def y_norm(values: np.ndarray, times: np.ndarray) -> float:
    """Weighted sup norm over expanding time slabs.

    The m-th slab is [0, m] x D (the m = 0 term is the spatial sup of the
    t = 0 slice); slabs beyond ceil(T) all see the global sup, and their
    geometric sum collapses to 2^{-ceil(T)} times that sup.
    """
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("y-norm needs finite values")
    t = np.asarray(times, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[0] != t.size:
        raise ValueError("one row of values per time node")
    g = np.max(np.abs(v), axis=1)
    running = np.maximum.accumulate(g)
    m_top = int(math.ceil(t[-1]))
    total = 0.0
    for m in range(m_top + 1):
        idx = np.searchsorted(t, m + 1e-12, side="right") - 1
        total += 2.0 ** (-m) * running[idx]
    total += 2.0 ** (-m_top) * running[-1]
    return float(total)


def initial_field(economy: Economy) -> ExternalityField:
    """Externality produced by extending k0 constant in time."""
    k0_const = np.tile(economy.k0_values, (economy.time.n_nodes, 1))
    return apply_S(k0_const, economy.kernel, economy.space)


def best_response(K_field: ExternalityField, economy: Economy):
    """Solve every location against K_field; return (k, c, S(k)).

    Location solves share the lockstep batched shooter; failures
    propagate with the offending lane (location) indices attached.
    """
    k, c, _ = solve_shooting_batch(
        K_field.values,
        economy.k0_values,
        economy.primitives,
        economy.time.nodes,
        economy.solver,
    )
    K_sharp = apply_S(k, economy.kernel, economy.space)
    return k, c, K_sharp


def solve_equilibrium(
    economy: Economy,
    gamma: float | None = None,
    tol: float | None = None,
    max_sweeps: int | None = None,
    K_init: ExternalityField | None = None,
) -> EquilibriumResult:
    """Damped Picard iteration on the best-response operator.

    Each evaluation measures the fixed-point residual in the Y norm
    before damping is applied, so ``sweep_count`` is the number of damped
    updates actually performed.  Non-convergence after ``max_sweeps``
    returns a result with ``converged=False`` (with plateau detection
    over a trailing window) rather than raising.
    """
    opts = economy.solver
    gamma = opts.gamma if gamma is None else gamma
    tol = opts.y_tol if tol is None else tol
    max_sweeps = opts.max_sweeps if max_sweeps is None else max_sweeps
    if not 0.0 < gamma <= 1.0:
        raise ValueError("damping gamma must lie in (0, 1]")

    K = initial_field(economy) if K_init is None else K_init
    times = economy.time.nodes
    lo, hi = economy.kernel.I_lo, economy.kernel.I_hi
    M = economy.schauder_M

    history: list[float] = []
    sup_history: list[float] = []
    ball_ok = True
    converged = False
    k_f = c_f = None
    K_sharp = None

    for _ in range(max_sweeps + 1):
        k_f, c_f, K_sharp = best_response(K, economy)
        diff = K_sharp.values - K.values
        resid = y_norm(diff, times)
        history.append(resid)
        sup_history.append(float(np.max(np.abs(diff))))
        ball_ok = ball_ok and K.sup <= M + 1e-9
        if resid <= tol:
            converged = True
            break
        if len(history) > max_sweeps:
            break
        updated = (1.0 - gamma) * K.values + gamma * K_sharp.values
        K = ExternalityField(np.clip(updated, lo, hi), lo, hi)

    state = EquilibriumState(
        K_field=K,
        k_field=k_f,
        c_field=c_f,
        residual_history=history,
        sweep_count=len(history) - 1,
    )
    plateaued = False
    w = opts.plateau_window
    if not converged and len(history) > w:
        recent = history[-w:]
        plateaued = min(recent) > 0.9 * max(recent)
    ratios = [b / a for a, b in zip(history[:-1], history[1:]) if a > 0]
    contraction = float(np.median(ratios)) if ratios else 0.0
    report = equilibrium_residual_from_state(state, economy)
    return EquilibriumResult(
        state=state,
        converged=converged,
        final_residual=history[-1],
        euler_residual=report.euler_sup,
        sup_residual=sup_history[-1],
        plateaued=plateaued,
        diagnostics={
            "sup_residual_history": sup_history,
            "schauder_ball_ok": ball_ok,
            "contraction_ratio": contraction,
            "certification": report,
        },
    )


def equilibrium_residual_from_state(state: EquilibriumState, economy: Economy) -> ResidualReport:
    """Certify a candidate (K, k, c) against the self-consistent system.

    Recomputes K~ = S(k) and reports the sup mismatch with the candidate
    K, then the saturation and Euler residuals of (k, c) evaluated with
    K~ in place of the candidate field.
    """
    K_tilde = apply_S(state.k_field, economy.kernel, economy.space).values
    fp = float(np.max(np.abs(state.K_field.values - K_tilde)))

    pr = economy.primitives
    dt = economy.time.steps[:, None]
    k, c = state.k_field, state.c_field
    k_mid = 0.5 * (k[:-1] + k[1:])
    c_mid = 0.5 * (c[:-1] + c[1:])
    K_mid = 0.5 * (K_tilde[:-1] + K_tilde[1:])
    dyn = np.abs(
        np.diff(k, axis=0) / dt - (eval_f(k_mid, K_mid, pr.production) - c_mid)
    )
    fk = eval_f_k(k_mid, K_mid, pr.production)
    eul = np.abs(
        eval_U_prime_prime(c_mid, pr.utility) * np.diff(c, axis=0) / dt
        - (pr.r - fk) * eval_U_prime(c_mid, pr.utility)
    )
    return ResidualReport(
        fixed_point_sup=fp,
        dynamics_sup=float(np.max(dyn)),
        euler_sup=float(np.max(eul)),
    )


def equilibrium_residual(result: EquilibriumResult, economy: Economy) -> ResidualReport:
    return equilibrium_residual_from_state(result.state, economy)


def continuity_probe(economy: Economy, K_field: ExternalityField, epsilons, rng):
    """Sup deviation of the best-response capital under K + eps * eta.

    A single bounded perturbation direction eta is shared across scales,
    so shrinking eps must shrink the response deviation.
    """
    eta = rng.uniform(-1.0, 1.0, K_field.values.shape)
    k_base, _, _ = best_response(K_field, economy)
    lo, hi = economy.kernel.I_lo, economy.kernel.I_hi
    devs = []
    for eps in epsilons:
        pert = ExternalityField(
            np.clip(K_field.values + eps * eta, lo, hi), lo, hi
        )
        k_pert, _, _ = best_response(pert, economy)
        devs.append(float(np.max(np.abs(k_pert - k_base))))
    return devs
