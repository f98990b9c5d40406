"""Single-location Ramsey solves for a given externality trajectory.

Two independent routes compute the optimal (k, c) pair for the truncated
problem with terminal capital pinned at the steady state of the frozen
terminal externality:

* ``solve_shooting`` integrates the consumption-capital ODE system

      k' = f(k, K(t)) - c
      c' = ((c + h) / sigma) * (f_k(k, K(t)) - r)

  with a classical fixed-step RK4 scheme and bisects on c(0).  The
  returned capital path is rebuilt through an implicit-midpoint
  saturation recursion driven by the integrated consumption, so the
  discrete budget identity holds to Newton tolerance at every step
  midpoint, and the bisection targets the rebuilt terminal capital.

* ``solve_direct_oracle`` maximizes the discretized objective directly:
  consumption is log-reparameterized (positivity is structural), capital
  follows the forward recursion k_{i+1} = k_i + dt (f(k_i, K_i) - c_i),
  and the binding terminal condition is enforced with an augmented
  Lagrangian; gradients come from the adjoint recursion and steps from
  Barzilai-Borwein seeding under a backtracking line search.

The discrete objective shared by both routes is
``sum_i w_i U(c_i)`` with exact per-interval discount weights
``w_i = (e^{-r t_i} - e^{-r t_{i+1}}) / r`` (piecewise-constant
consumption), so a constant path integrates its discounted flow exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .economy import SolverOptions
from .grids import TailBoundParams, tail_bound_phi
from .primitives import (
    DomainError,
    ModelPrimitives,
    UtilityParams,
    eval_f,
    eval_f_k,
    eval_U,
    eval_U_prime,
    eval_U_prime_prime,
    steady_state,
)

__all__ = [
    "ShootingError",
    "BracketFailure",
    "BlowUp",
    "TerminalMiss",
    "MaxIterations",
    "LocationProblem",
    "LocationPath",
    "BoundReport",
    "RegularizationReport",
    "euler_rhs",
    "discount_weights",
    "discrete_objective",
    "solve_shooting",
    "solve_shooting_batch",
    "solve_direct_oracle",
    "oracle_value_and_grad",
    "h_regularization_sweep",
    "random_admissible_paths",
    "check_consumption_bounds",
]


class ShootingError(RuntimeError):
    """Base class for location-solver failures."""


class BracketFailure(ShootingError):
    """No sign change found for the shooting map on the c(0) bracket."""


class BlowUp(ShootingError):
    """Every tested c(0) left the admissible region before T."""


class TerminalMiss(ShootingError):
    """Bracket exhausted without meeting the terminal tolerance."""


class MaxIterations(ShootingError):
    """The direct oracle hit its iteration cap before converging."""


@dataclass(frozen=True, eq=False)
class LocationProblem:
    """Parametric problem at one location: maximize discounted utility
    of consumption against a given externality trajectory."""

    K_traj: np.ndarray
    k0: float
    primitives: ModelPrimitives
    times: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.K_traj, dtype=float)
        t = np.asarray(self.times, dtype=float)
        if K.shape != t.shape:
            raise ValueError("one externality value per time node")
        if not np.all(np.isfinite(K)) or np.any(K <= 0):
            raise ValueError("externality trajectory must be positive and finite")
        if not self.k0 > 0:
            raise ValueError("initial capital must be positive")
        object.__setattr__(self, "K_traj", K)
        object.__setattr__(self, "times", t)

    @property
    def r(self) -> float:
        return self.primitives.r

    @property
    def horizon_T(self) -> float:
        return float(self.times[-1])

    def terminal_steady_state(self):
        return steady_state(
            float(self.K_traj[-1]), self.primitives.production, self.r
        )

    def tail_params(self) -> TailBoundParams:
        return TailBoundParams.for_problem(
            self.primitives.production,
            self.primitives.utility,
            self.r,
            k0_sup=self.k0,
            K_sup=float(np.max(self.K_traj)),
        )


@dataclass(eq=False)
class LocationPath:
    """Solved trajectory with the derived costate and objective.

    ``scheme`` records the discrete saturation convention the path was
    built with: "midpoint" for shooting paths, "forward" for oracle
    paths.  Residual checks are evaluated in that same convention.
    For oracle paths, c holds interval consumption with the final node
    carrying the last interval value.
    """

    problem: LocationProblem
    k: np.ndarray
    c: np.ndarray
    theta: np.ndarray
    objective: float
    tail_bound: float
    scheme: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.problem.times

    def _midpoint_pieces(self):
        pr = self.problem.primitives
        dt = np.diff(self.times)
        k_mid = 0.5 * (self.k[:-1] + self.k[1:])
        c_mid = 0.5 * (self.c[:-1] + self.c[1:])
        K_mid = 0.5 * (self.problem.K_traj[:-1] + self.problem.K_traj[1:])
        return pr, dt, k_mid, c_mid, K_mid

    def dynamics_residuals(self) -> np.ndarray:
        """Per-step saturation residual |dk/dt - (f - c)| in the path's scheme."""
        pr, dt, k_mid, c_mid, K_mid = self._midpoint_pieces()
        dkdt = np.diff(self.k) / dt
        if self.scheme == "forward":
            rhs = eval_f(self.k[:-1], self.problem.K_traj[:-1], pr.production)
            return np.abs(dkdt - (rhs - self.c[:-1]))
        rhs = eval_f(k_mid, K_mid, pr.production)
        return np.abs(dkdt - (rhs - c_mid))

    def euler_residuals(self) -> np.ndarray:
        """Midpoint residual of U''(c) c' = (r - f_k) U'(c); O(dt) diagnostic."""
        pr, dt, k_mid, c_mid, K_mid = self._midpoint_pieces()
        dcdt = np.diff(self.c) / dt
        fk = eval_f_k(k_mid, K_mid, pr.production)
        lhs = eval_U_prime_prime(c_mid, pr.utility) * dcdt
        rhs = (pr.r - fk) * eval_U_prime(c_mid, pr.utility)
        return np.abs(lhs - rhs)

    @property
    def max_dynamics_residual(self) -> float:
        return float(np.max(self.dynamics_residuals()))

    @property
    def max_euler_residual(self) -> float:
        return float(np.max(self.euler_residuals()))


@dataclass(frozen=True)
class BoundReport:
    """Empirical consumption bounds and the capital-variation mass check."""

    c_min: float
    c_max: float
    positive: bool
    sum_abs_dk: float
    mass_bound: float
    mass_ok: bool


@dataclass(frozen=True)
class RegularizationReport:
    """Gaps of shifted-utility solves against the unshifted solution."""

    h_values: tuple
    c_gaps: tuple
    objective_gaps: tuple
    objectives: tuple
    monotone: bool
    final_gap: float
    final_ok: bool


# ---------------------------------------------------------------------------
# shared discrete objective
# ---------------------------------------------------------------------------

def discount_weights(times: np.ndarray, r: float) -> np.ndarray:
    """Exact discounted measure of each step: (e^{-r t_i} - e^{-r t_{i+1}})/r."""
    e = np.exp(-r * np.asarray(times, dtype=float))
    return (e[:-1] - e[1:]) / r


def discrete_objective(c: np.ndarray, times: np.ndarray, primitives: ModelPrimitives) -> float:
    """Discounted utility of a piecewise-constant consumption path."""
    w = discount_weights(times, primitives.r)
    return float(w @ np.asarray(eval_U(c[: w.size], primitives.utility)))


def euler_rhs(state, t, prob: LocationProblem):
    """Right-hand side of the consumption-capital system at time t.

    K(t) is the linear interpolation of the problem's trajectory.
    """
    k, c = state
    pr = prob.primitives
    if k <= 0:
        raise DomainError("capital left (0, inf) during integration")
    if c + pr.utility.shift <= 0:
        raise DomainError("consumption left (0, inf) during integration")
    K = float(np.interp(t, prob.times, prob.K_traj))
    k_dot = float(eval_f(k, K, pr.production)) - c
    c_dot = (
        (c + pr.utility.shift)
        / pr.utility.sigma
        * (float(eval_f_k(k, K, pr.production)) - pr.r)
    )
    return (k_dot, c_dot)


# ---------------------------------------------------------------------------
# jitted kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _f_jit(k, K, A, al, be, de):
    return A * k**al * K**be - de * k


@njit(cache=True)
def _fk_jit(k, K, A, al, be, de):
    return A * al * k ** (al - 1.0) * K**be - de


@njit(cache=True)
def _shoot_kernel(k0, c0, Kn, Km, dt, A, al, be, de, sg, sh, r,
                  k_floor, k_ceil, c_floor, c_ceil):
    """Integrate all lanes from (k0, c0); rebuild saturated capital.

    Returns (c_path, k_sat, status) where status[j] is 0 for a lane that
    stayed admissible, +1 when it left through high capital / vanishing
    consumption (initial consumption too low), -1 through crashing
    capital / exploding consumption (too high).
    """
    N, J = Km.shape
    c_path = np.zeros((N + 1, J))
    k_sat = np.zeros((N + 1, J))
    status = np.zeros(J, dtype=np.int64)
    k_rk = np.empty(J)
    for j in range(J):
        k_rk[j] = k0[j]
        k_sat[0, j] = k0[j]
        c_path[0, j] = c0[j]
        if c0[j] <= 0.0:
            status[j] = 1
    for i in range(N):
        h = dt[i]
        for j in range(J):
            if status[j] != 0:
                k_sat[i + 1, j] = k_sat[i, j]
                c_path[i + 1, j] = c_path[i, j]
                continue
            Ka = Kn[i, j]
            Kb = Kn[i + 1, j]
            Km_ = Km[i, j]
            k = k_rk[j]
            c = c_path[i, j]

            s1k = _f_jit(k, Ka, A, al, be, de) - c
            s1c = ((c + sh) / sg) * (_fk_jit(k, Ka, A, al, be, de) - r)
            k2 = k + 0.5 * h * s1k
            c2 = c + 0.5 * h * s1c
            if k2 <= 0.0 or c2 + sh <= 0.0:
                status[j] = -1 if k2 <= 0.0 else 1
            else:
                s2k = _f_jit(k2, Km_, A, al, be, de) - c2
                s2c = ((c2 + sh) / sg) * (_fk_jit(k2, Km_, A, al, be, de) - r)
                k3 = k + 0.5 * h * s2k
                c3 = c + 0.5 * h * s2c
                if k3 <= 0.0 or c3 + sh <= 0.0:
                    status[j] = -1 if k3 <= 0.0 else 1
                else:
                    s3k = _f_jit(k3, Km_, A, al, be, de) - c3
                    s3c = ((c3 + sh) / sg) * (_fk_jit(k3, Km_, A, al, be, de) - r)
                    k4 = k + h * s3k
                    c4 = c + h * s3c
                    if k4 <= 0.0 or c4 + sh <= 0.0:
                        status[j] = -1 if k4 <= 0.0 else 1
                    else:
                        s4k = _f_jit(k4, Kb, A, al, be, de) - c4
                        s4c = ((c4 + sh) / sg) * (_fk_jit(k4, Kb, A, al, be, de) - r)
                        knew = k + h / 6.0 * (s1k + 2.0 * s2k + 2.0 * s3k + s4k)
                        cnew = c + h / 6.0 * (s1c + 2.0 * s2c + 2.0 * s3c + s4c)
                        if not (np.isfinite(knew) and np.isfinite(cnew)):
                            status[j] = -1
                        elif knew <= k_floor:
                            status[j] = -1
                        elif cnew >= c_ceil:
                            status[j] = -1
                        elif knew >= k_ceil[j]:
                            status[j] = 1
                        elif cnew <= c_floor:
                            status[j] = 1
                        else:
                            k_rk[j] = knew
                            c_path[i + 1, j] = cnew
                            # implicit-midpoint rebuild of the saturated k
                            ks = k_sat[i, j]
                            cm = 0.5 * (c + cnew)
                            x = ks + h * (_f_jit(ks, Ka, A, al, be, de) - cm)
                            if x <= k_floor:
                                status[j] = -1
                            else:
                                done = False
                                for _ in range(30):
                                    mid = 0.5 * (ks + x)
                                    if mid <= k_floor:
                                        break
                                    F = x - ks - h * (_f_jit(mid, Km_, A, al, be, de) - cm)
                                    dF = 1.0 - 0.5 * h * _fk_jit(mid, Km_, A, al, be, de)
                                    if dF < 0.25:
                                        dF = 0.25
                                    x = x - F / dF
                                    if x <= k_floor:
                                        break
                                    if abs(F) <= 1e-14 * max(1.0, abs(x)):
                                        done = True
                                        break
                                if not done or x >= k_ceil[j]:
                                    status[j] = -1 if x <= k_floor else (
                                        1 if x >= k_ceil[j] else -1)
                                else:
                                    k_sat[i + 1, j] = x
            if status[j] != 0:
                k_sat[i + 1, j] = k_sat[i, j]
                c_path[i + 1, j] = c_path[i, j]
    return c_path, k_sat, status


@njit(cache=True)
def _oracle_eval(u, k0, K, dt, w, A, al, be, de, sg, sh, mu, rho, k_target):
    """Augmented objective, adjoint gradient and capital path at u."""
    N = u.shape[0]
    c = np.empty(N)
    for i in range(N):
        ui = u[i]
        if ui > 60.0:
            ui = 60.0
        elif ui < -300.0:
            ui = -300.0
        c[i] = math.exp(ui)
    k = np.empty(N + 1)
    k[0] = k0
    grad = np.zeros(N)
    for i in range(N):
        k[i + 1] = k[i] + dt[i] * (_f_jit(k[i], K[i], A, al, be, de) - c[i])
        if not np.isfinite(k[i + 1]) or k[i + 1] <= 0.0:
            return -1e300, grad, k, False
    gN = k[N] - k_target
    phi = mu * gN - 0.5 * rho * gN * gN
    for i in range(N):
        phi += w[i] * (c[i] + sh) ** (1.0 - sg) / (1.0 - sg)
    lam = mu - rho * gN
    for i in range(N - 1, -1, -1):
        grad[i] = (w[i] * (c[i] + sh) ** (-sg) - dt[i] * lam) * c[i]
        lam = lam * (1.0 + dt[i] * _fk_jit(k[i], K[i], A, al, be, de))
    return phi, grad, k, True


# ---------------------------------------------------------------------------
# shooting driver
# ---------------------------------------------------------------------------

def _production_scalars(primitives: ModelPrimitives):
    p = primitives.production
    u = primitives.utility
    return p.A, p.alpha, p.beta, p.delta, u.sigma, u.shift, primitives.r


def solve_shooting_batch(
    K_mat: np.ndarray,
    k0_vec: np.ndarray,
    primitives: ModelPrimitives,
    times: np.ndarray,
    opts: SolverOptions = SolverOptions(),
):
    """Shoot all locations in lockstep against their externality columns.

    K_mat has shape (n_nodes, n_locations).  Returns (k, c, diag) where
    diag carries per-lane c(0), terminal gaps and the steady-state
    targets.  Raises BracketFailure / BlowUp / TerminalMiss with the
    offending lane indices.
    """
    K_mat = np.asarray(K_mat, dtype=float)
    k0_vec = np.asarray(k0_vec, dtype=float)
    times = np.asarray(times, dtype=float)
    n_nodes, J = K_mat.shape
    A, al, be, de, sg, sh, r = _production_scalars(primitives)
    dt = np.diff(times)
    Km = 0.5 * (K_mat[:-1] + K_mat[1:])

    K_term = K_mat[-1]
    k_star = (A * al * K_term**be / (r + de)) ** (1.0 / (1.0 - al))
    K_max = K_mat.max(axis=0)
    kbar = (A * K_max**be / de) ** (1.0 / (1.0 - al))
    k_ceil = opts.k_ceil_factor * np.maximum(kbar, k0_vec)

    def shoot(c0):
        c_path, k_sat, status = _shoot_kernel(
            k0_vec, c0, K_mat, Km, dt, A, al, be, de, sg, sh, r,
            opts.k_floor, k_ceil, opts.c_floor, opts.c_ceil,
        )
        g = k_sat[-1] - k_star
        g = np.where(status == 0, g, np.where(status > 0, np.inf, -np.inf))
        return c_path, k_sat, status, g

    f_k0 = eval_f(k0_vec, K_max, primitives.production)
    lo = np.full(J, 1e-9) * np.maximum(1.0, np.abs(f_k0))
    hi = f_k0 + (r + de) * k0_vec

    _, _, _, g_lo = shoot(lo)
    if np.any(g_lo <= 0):
        bad = np.flatnonzero(g_lo <= 0).tolist()
        raise BracketFailure(
            f"no positive-side bracket at near-zero consumption for lanes {bad}; "
            "the horizon may be too short to reach the terminal steady state"
        )
    _, _, _, g_hi = shoot(hi)
    for _ in range(opts.bracket_doublings):
        need = g_hi >= 0
        if not need.any():
            break
        hi = np.where(need, 2.0 * hi, hi)
        _, _, _, g_new = shoot(hi)
        g_hi = np.where(need, g_new, g_hi)
    if np.any(g_hi >= 0):
        bad = np.flatnonzero(g_hi >= 0).tolist()
        raise BracketFailure(
            f"no sign change found on the c(0) bracket for lanes {bad} "
            f"after {opts.bracket_doublings} doublings"
        )

    for _ in range(opts.bisect_iters):
        mid = 0.5 * (lo + hi)
        _, _, _, g = shoot(mid)
        pos = g > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)

    c0 = 0.5 * (lo + hi)
    c_path, k_sat, status, g = shoot(c0)
    if np.any(status != 0):
        # fall back to the surviving bracket endpoint
        for side in (lo, hi):
            c_try = np.where(status != 0, side, c0)
            c_path2, k_sat2, status2, g2 = shoot(c_try)
            fixed = (status != 0) & (status2 == 0)
            if fixed.any():
                c0 = np.where(fixed, c_try, c0)
                c_path = np.where(fixed[None, :], c_path2, c_path)
                k_sat = np.where(fixed[None, :], k_sat2, k_sat)
                g = np.where(fixed, g2, g)
                status = np.where(fixed, 0, status)
        if np.any(status != 0):
            bad = np.flatnonzero(status != 0).tolist()
            raise BlowUp(
                f"integration left the admissible region for lanes {bad} "
                "at the bracket midpoint; horizon or grid misconfiguration"
            )
    gap = np.abs(g)
    tol = opts.shoot_rel_tol * np.maximum(1.0, k_star)
    if np.any(gap > tol):
        bad = np.flatnonzero(gap > tol).tolist()
        raise TerminalMiss(
            f"terminal capital missed its steady-state target for lanes {bad}: "
            f"max gap {gap.max():.3e} > tol; the horizon is too long for a "
            "double-precision shooting bracket"
        )
    diag = {
        "c0": c0,
        "terminal_gap": gap,
        "k_star_T": k_star,
        "bisect_iters": opts.bisect_iters,
    }
    return k_sat, c_path, diag


def _theta_path(c: np.ndarray, times: np.ndarray, primitives: ModelPrimitives):
    return np.exp(-primitives.r * times) * np.asarray(
        eval_U_prime(c, primitives.utility)
    )


def solve_shooting(prob: LocationProblem, opts: SolverOptions = SolverOptions()) -> LocationPath:
    """Solve one location by RK4 shooting; see the module docstring."""
    k, c, diag = solve_shooting_batch(
        prob.K_traj[:, None], np.array([prob.k0]), prob.primitives, prob.times, opts
    )
    k = k[:, 0]
    c = c[:, 0]
    tail = tail_bound_phi(prob.horizon_T, prob.tail_params())
    return LocationPath(
        problem=prob,
        k=k,
        c=c,
        theta=_theta_path(c, prob.times, prob.primitives),
        objective=discrete_objective(c, prob.times, prob.primitives),
        tail_bound=tail,
        scheme="midpoint",
        diagnostics={
            "c0": float(diag["c0"][0]),
            "terminal_gap": float(diag["terminal_gap"][0]),
            "k_star_T": float(diag["k_star_T"][0]),
        },
    )


# ---------------------------------------------------------------------------
# direct oracle
# ---------------------------------------------------------------------------

def _oracle_scalars(prob: LocationProblem):
    A, al, be, de, sg, sh, r = _production_scalars(prob.primitives)
    dt = np.diff(prob.times)
    w = discount_weights(prob.times, r)
    return A, al, be, de, sg, sh, dt, w


def oracle_value_and_grad(u, prob: LocationProblem, mu: float, rho: float):
    """Augmented objective and adjoint gradient at log-consumption u."""
    A, al, be, de, sg, sh, dt, w = _oracle_scalars(prob)
    target = prob.terminal_steady_state().k_star
    phi, grad, k, feas = _oracle_eval(
        np.asarray(u, dtype=float), prob.k0, prob.K_traj[:-1], dt, w,
        A, al, be, de, sg, sh, mu, rho, target,
    )
    return phi, grad, k, feas


def _feasible_start(prob: LocationProblem):
    """A consumption guess whose forward capital path stays positive."""
    p = prob.primitives.production
    r = prob.r
    K = prob.K_traj[:-1]
    kst = (p.A * p.alpha * K**p.beta / (r + p.delta)) ** (1.0 / (1.0 - p.alpha))
    c = 0.75 * np.asarray(eval_f(kst, K, p))
    c = np.maximum(c, 1e-8)
    A, al, be, de, sg, sh, dt, w = _oracle_scalars(prob)
    target = prob.terminal_steady_state().k_star
    for _ in range(80):
        _, _, _, feas = _oracle_eval(
            np.log(c), prob.k0, K, dt, w, A, al, be, de, sg, sh, 0.0, 0.0, target
        )
        if feas:
            return np.log(c)
        c *= 0.7
    raise BlowUp("could not construct a feasible starting consumption path")


def solve_direct_oracle(
    prob: LocationProblem,
    opts: SolverOptions = SolverOptions(),
    u0: np.ndarray | None = None,
) -> LocationPath:
    """Maximize the discrete program directly; the slow reference route."""
    N = prob.times.size - 1
    if N > 5000:
        raise ValueError("direct oracle limited to 5000 time steps")
    A, al, be, de, sg, sh, dt, w = _oracle_scalars(prob)
    K = prob.K_traj[:-1]
    ss = prob.terminal_steady_state()
    target = ss.k_star
    mu = math.exp(-prob.r * prob.horizon_T) * float(
        eval_U_prime(ss.c_star, prob.primitives.utility)
    )
    rho = max(1.0, 10.0 * mu / max(1.0, target))

    u = _feasible_start(prob) if u0 is None else np.asarray(u0, dtype=float).copy()
    evals = 0
    gN_prev = np.inf
    converged = False
    phi = grad = kpath = None

    def evaluate(uv, mu_, rho_):
        nonlocal evals
        evals += 1
        return _oracle_eval(uv, prob.k0, K, dt, w, A, al, be, de, sg, sh,
                            mu_, rho_, target)

    for _outer in range(60):
        phi, grad, kpath, feas = evaluate(u, mu, rho)
        if not feas:
            raise BlowUp("oracle iterate became infeasible")
        step = 1.0 / max(1.0, float(np.max(np.abs(grad))))
        flat_streak = 0
        while evals < opts.oracle_max_iters:
            gnorm = float(np.max(np.abs(grad)))
            if gnorm <= opts.oracle_grad_tol:
                break
            g2 = float(grad @ grad)
            # once the predicted Armijo gain falls below the float
            # resolution of phi, comparisons are pure noise; accept the
            # (locally convergent) BB step as-is for a bounded streak
            noise_floor = 1e-14 * (1.0 + abs(phi))
            accepted = False
            for _bt in range(60):
                u_new = u + step * grad
                phi_new, grad_new, k_new, feas = evaluate(u_new, mu, rho)
                if feas and (
                    phi_new >= phi + 1e-4 * step * g2
                    or (1e-4 * step * g2 <= noise_floor
                        and phi_new >= phi - noise_floor)
                ):
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
            if 1e-4 * step * g2 <= noise_floor:
                flat_streak += 1
                if flat_streak > 400:
                    break
            else:
                flat_streak = 0
            s = u_new - u
            y = grad_new - grad
            sy = float(s @ y)
            ss_ = float(s @ s)
            u, phi, grad, kpath = u_new, phi_new, grad_new, k_new
            step = min(1e8, max(1e-12, -ss_ / sy)) if sy < 0 else 2.0 * step
        gN = float(kpath[-1]) - target
        gnorm = float(np.max(np.abs(grad)))
        if (
            abs(gN) <= opts.oracle_terminal_tol * max(1.0, target)
            and gnorm <= opts.oracle_grad_tol
        ):
            converged = True
            break
        mu = mu - rho * gN
        if abs(gN) > 0.25 * abs(gN_prev):
            rho = min(1e12, 10.0 * rho)
        gN_prev = abs(gN)
        if evals >= opts.oracle_max_iters:
            break

    gnorm = float(np.max(np.abs(grad)))
    if not converged:
        raise MaxIterations(
            f"direct oracle stopped after {evals} evaluations with gradient "
            f"sup-norm {gnorm:.3e} and terminal gap {float(kpath[-1]) - target:.3e}"
        )

    c = np.exp(u)
    c_full = np.append(c, c[-1])
    gN = float(kpath[-1]) - target
    mu_eff = mu - rho * gN
    lam = np.empty(N + 1)
    lam[N] = mu_eff
    fk = np.asarray(eval_f_k(kpath[:-1], K, prob.primitives.production))
    for i in range(N - 1, -1, -1):
        lam[i] = lam[i + 1] * (1.0 + dt[i] * fk[i])
    tail = tail_bound_phi(prob.horizon_T, prob.tail_params())
    return LocationPath(
        problem=prob,
        k=np.asarray(kpath),
        c=c_full,
        theta=_theta_path(c_full, prob.times, prob.primitives),
        objective=discrete_objective(c_full, prob.times, prob.primitives),
        tail_bound=tail,
        scheme="forward",
        diagnostics={
            "multipliers": lam,
            "mu": mu_eff,
            "grad_sup": gnorm,
            "evals": evals,
            "terminal_gap": gN,
            "k_star_T": target,
        },
    )


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def h_regularization_sweep(
    prob: LocationProblem,
    h_list,
    opts: SolverOptions = SolverOptions(),
    final_gap_threshold: float = 1e-2,
) -> RegularizationReport:
    """Re-solve with U(c + h) for each h and report gaps to the h = 0 path.

    Gaps must shrink as h does (10% slack per step) and the last gap must
    fall below the threshold.
    """
    h_list = [float(h) for h in h_list]
    if any(h < 0 for h in h_list):
        raise ValueError("shifts must be nonnegative")
    base = solve_shooting(prob, opts)
    c_gaps, obj_gaps, objs = [], [], []
    for h in h_list:
        if h == 0.0:
            c_gaps.append(0.0)
            obj_gaps.append(0.0)
            objs.append(base.objective)
            continue
        prims = ModelPrimitives(
            production=prob.primitives.production,
            utility=UtilityParams(sigma=prob.primitives.utility.sigma, shift=h),
            r=prob.r,
        )
        shifted = solve_shooting(
            LocationProblem(prob.K_traj, prob.k0, prims, prob.times), opts
        )
        c_gaps.append(float(np.max(np.abs(shifted.c - base.c))))
        obj_gaps.append(abs(shifted.objective - base.objective))
        objs.append(shifted.objective)
    monotone = all(
        c_gaps[i + 1] <= 1.1 * c_gaps[i] and obj_gaps[i + 1] <= 1.1 * obj_gaps[i]
        for i in range(len(h_list) - 1)
    )
    return RegularizationReport(
        h_values=tuple(h_list),
        c_gaps=tuple(c_gaps),
        objective_gaps=tuple(obj_gaps),
        objectives=tuple(objs),
        monotone=monotone,
        final_gap=c_gaps[-1],
        final_ok=c_gaps[-1] <= final_gap_threshold,
    )


def random_admissible_paths(production, K_traj, k0, times, rng, n_paths):
    """Random discrete paths satisfying k' + c <= f(k, K), k >= 0, c >= 0.

    Consumption draws a random fraction (possibly above 1) of available
    output, an extra slack term is thrown away with random intensity, and
    capital follows the saturated recursion clipped at zero; the clip
    preserves admissibility because consumption is capped at
    f + k/dt.  Returns (k, c) arrays of shape (n_paths, len(times)).
    """
    times = np.asarray(times, dtype=float)
    K = np.asarray(K_traj, dtype=float)
    dt = np.diff(times)
    N = dt.size
    ks = np.zeros((n_paths, N + 1))
    cs = np.zeros((n_paths, N + 1))
    frac = rng.uniform(0.0, 1.2, (n_paths, N))
    waste = rng.uniform(0.0, 0.2, (n_paths, N))
    ks[:, 0] = k0
    for i in range(N):
        f = np.asarray(eval_f(ks[:, i], K[i], production))
        fpos = np.maximum(f, 0.0)
        w_i = waste[:, i] * fpos
        c = frac[:, i] * fpos
        cap = f - w_i + ks[:, i] / dt[i]
        c = np.minimum(c, np.maximum(cap, 0.0))
        ks[:, i + 1] = np.maximum(ks[:, i] + dt[i] * (f - c - w_i), 0.0)
        cs[:, i] = c
    return ks, cs


def check_consumption_bounds(path: LocationPath) -> BoundReport:
    """Empirical min/max of c plus the a-priori capital-variation bound."""
    c_min = float(np.min(path.c))
    c_max = float(np.max(path.c))
    sum_abs_dk = float(np.sum(np.abs(np.diff(path.k))))
    tail = path.problem.tail_params()
    mass_bound = path.problem.k0 + 2.0 * tail.C1 * path.problem.horizon_T + 1e-6
    return BoundReport(
        c_min=c_min,
        c_max=c_max,
        positive=c_min > 0.0,
        sum_abs_dk=sum_abs_dk,
        mass_bound=mass_bound,
        mass_ok=sum_abs_dk <= mass_bound,
    )
