"""Economic primitives: Cobb-Douglas net output and CRRA utility.

Net output is Cobb-Douglas production net of depreciation,

    f(k, K) = A * k**alpha * K**beta - delta * k,

where k is own capital and K is the externality level the location takes
as given.  Utility is CRRA with curvature sigma in (0, 1), which keeps U
nonnegative with U(0) = 0, U'(0+) = inf and U'(inf) = 0.  An optional
additive shift evaluates U(c + h), used by the regularization sweep.

All evaluators are pure and accept scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "ProductionParams",
    "UtilityParams",
    "ModelPrimitives",
    "SteadyState",
    "production_violations",
    "utility_violations",
    "eval_f",
    "eval_f_k",
    "eval_f_kk",
    "eval_U",
    "eval_U_prime",
    "eval_U_prime_prime",
    "inverse_U_prime",
    "steady_state",
    "audit_production",
    "audit_utility",
]


class DomainError(ValueError):
    """An evaluator was called outside its admissible domain."""


def production_violations(A, alpha, beta, delta) -> list[str]:
    """Structural checks on the Cobb-Douglas parameters, as messages."""
    out = []
    if not np.isfinite(A) or A <= 0:
        out.append(f"production: A = {A} must be a positive finite scalar")
    if not 0.0 < alpha < 1.0:
        out.append(f"production: alpha = {alpha} must lie in (0, 1)")
    # beta = 0 is admitted: it decouples locations and is the reference
    # case for the decoupled-equilibrium diagnostics.
    if not 0.0 <= beta < 1.0:
        out.append(f"production: beta = {beta} must lie in [0, 1)")
    if np.isfinite(alpha) and np.isfinite(beta) and not alpha + beta < 1.0:
        out.append(f"production: alpha + beta = {alpha + beta} must be < 1")
    if not np.isfinite(delta) or delta <= 0:
        out.append(f"production: delta = {delta} must be a positive rate")
    return out


def utility_violations(sigma, shift=0.0) -> list[str]:
    out = []
    if not 0.0 < sigma < 1.0:
        out.append(
            f"utility: sigma = {sigma} must lie in (0, 1) so U is nonnegative"
        )
    if shift < 0:
        out.append(f"utility: shift = {shift} must be nonnegative")
    return out


@dataclass(frozen=True)
class ProductionParams:
    """Cobb-Douglas net output f(k, K) = A k^alpha K^beta - delta k."""

    A: float
    alpha: float
    beta: float
    delta: float

    def __post_init__(self):
        bad = production_violations(self.A, self.alpha, self.beta, self.delta)
        if bad:
            raise ValueError("; ".join(bad))

    def kbar(self, M: float) -> float:
        """Capital level beyond which f(k, K) <= 0 for every K <= M."""
        return (self.A * M**self.beta / self.delta) ** (1.0 / (1.0 - self.alpha))

    def k_peak(self, K: float) -> float:
        """Argmax of k -> f(k, K); the unique zero of f_k."""
        return (self.A * self.alpha * K**self.beta / self.delta) ** (
            1.0 / (1.0 - self.alpha)
        )

    def k1(self, I_lo: float) -> float:
        """Threshold below which f(k, K) > 0 for every K >= I_lo (needs I_lo > 0)."""
        if I_lo <= 0:
            raise DomainError("k1 requires the lower externality bound to be > 0")
        return self.kbar(I_lo)


@dataclass(frozen=True)
class UtilityParams:
    """CRRA utility U(c) = (c + shift)^(1-sigma) / (1-sigma), sigma in (0,1)."""

    sigma: float
    shift: float = 0.0

    def __post_init__(self):
        bad = utility_violations(self.sigma, self.shift)
        if bad:
            raise ValueError("; ".join(bad))


@dataclass(frozen=True)
class ModelPrimitives:
    """Bundle of the location-level primitives: f, U and the discount rate."""

    production: ProductionParams
    utility: UtilityParams
    r: float

    def __post_init__(self):
        if not np.isfinite(self.r) or self.r <= 0:
            raise ValueError(f"discount rate r = {self.r} must be positive")


@dataclass(frozen=True)
class SteadyState:
    """Stationary point of the consumption-capital system at a frozen K."""

    k_star: float
    c_star: float
    K_ref: float


def _check_kK(k, K):
    k = np.asarray(k, dtype=float)
    K = np.asarray(K, dtype=float)
    if np.any(k < 0):
        raise DomainError("capital k must be nonnegative")
    if np.any(K <= 0):
        raise DomainError("externality K must be positive")
    return k, K


def eval_f(k, K, p: ProductionParams):
    """Net output A k^alpha K^beta - delta k; exactly 0 at k = 0."""
    k, K = _check_kK(k, K)
    return p.A * k**p.alpha * K**p.beta - p.delta * k


def eval_f_k(k, K, p: ProductionParams):
    """Marginal product of own capital; unbounded as k -> 0."""
    k, K = _check_kK(k, K)
    if np.any(k == 0):
        raise DomainError("f_k is unbounded at k = 0")
    return p.A * p.alpha * k ** (p.alpha - 1.0) * K**p.beta - p.delta


def eval_f_kk(k, K, p: ProductionParams):
    """Second derivative in k; strictly negative on (0, inf)."""
    k, K = _check_kK(k, K)
    if np.any(k == 0):
        raise DomainError("f_kk is unbounded at k = 0")
    return p.A * p.alpha * (p.alpha - 1.0) * k ** (p.alpha - 2.0) * K**p.beta


def eval_U(c, u: UtilityParams):
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise DomainError("consumption must be nonnegative")
    return (c + u.shift) ** (1.0 - u.sigma) / (1.0 - u.sigma)


def eval_U_prime(c, u: UtilityParams):
    c = np.asarray(c, dtype=float)
    if np.any(c + u.shift <= 0):
        raise DomainError("marginal utility diverges at zero consumption")
    return (c + u.shift) ** (-u.sigma)


def eval_U_prime_prime(c, u: UtilityParams):
    c = np.asarray(c, dtype=float)
    if np.any(c + u.shift <= 0):
        raise DomainError("U'' diverges at zero consumption")
    return -u.sigma * (c + u.shift) ** (-u.sigma - 1.0)


def inverse_U_prime(m, u: UtilityParams):
    """Inverse marginal utility; round-trips with eval_U_prime."""
    m = np.asarray(m, dtype=float)
    if np.any(m <= 0):
        raise DomainError("inverse marginal utility needs a positive argument")
    return m ** (-1.0 / u.sigma) - u.shift


def steady_state(K_ref: float, p: ProductionParams, r: float) -> SteadyState:
    """Solve f_k(k*, K_ref) = r in closed form; c* = f(k*, K_ref).

    This is the stationary point of the consumption-capital dynamics at a
    frozen externality level, used as the terminal anchor of truncated
    solves.  c* > 0 always: k* sits strictly left of the zero of f.
    """
    if r + p.delta <= 0:
        raise DomainError("steady state needs r + delta > 0")
    if K_ref <= 0:
        raise DomainError("steady state needs K_ref > 0")
    k_star = (p.A * p.alpha * K_ref**p.beta / (r + p.delta)) ** (
        1.0 / (1.0 - p.alpha)
    )
    c_star = float(eval_f(k_star, K_ref, p))
    return SteadyState(k_star=float(k_star), c_star=c_star, K_ref=float(K_ref))


# ---------------------------------------------------------------------------
# Assumption audits.  These sample the closed forms over wide log grids and
# return the complete list of violations (empty when the configuration is
# admissible).  Items are labelled (i)..(vi) matching the structural
# requirements on f documented in the README.
# ---------------------------------------------------------------------------

_LOG_GRID = np.logspace(-6, 6, 25)


def audit_production(p: ProductionParams, I_lo: float, I_hi: float) -> list[str]:
    """Numerically audit the structural assumptions on f over (1e-6, 1e6)^2."""
    bad = []
    ks = _LOG_GRID
    Ks = _LOG_GRID

    # (i) continuity with f(0, K) = 0 for every K.
    f0 = eval_f(np.zeros_like(Ks), Ks, p)
    if np.any(f0 != 0.0):
        bad.append("f-assumption (i): f(0, K) != 0 at sampled K")

    # (iii) f_k >= -delta everywhere, bounded above away from k = 0.
    kk, KK = np.meshgrid(ks, Ks)
    fk = eval_f_k(kk, KK, p)
    if np.any(fk < -p.delta - 1e-12):
        bad.append("f-assumption (iii): f_k < -delta at a sampled point")
    if not np.all(np.isfinite(fk)):
        bad.append("f-assumption (iii): f_k not finite on the sample grid")

    # (iv) for every M, f(k, K) <= 0 once k >= kbar(M) and K <= M, and
    # kbar grows sublinearly in M.
    for M in (1e-3, 1.0, 1e3, 1e6):
        kb = p.kbar(M)
        test_k = kb * np.array([1.0, 1.5, 4.0])
        test_K = Ks[Ks <= M]
        fvals = eval_f(test_k[:, None], test_K[None, :], p)
        if np.any(fvals > 1e-9 * max(1.0, kb)):
            bad.append(f"f-assumption (iv): f > 0 beyond kbar({M})")
    if p.kbar(1e12) >= 1e12:
        bad.append("f-assumption (iv): kbar(M) fails to be o(M)")

    # (v) a positive k1 with f > 0 below it for every K in the interval;
    # requires the interval to stay away from zero.
    if not I_lo > 0:
        bad.append(
            f"f-assumption (v): inf of the externality interval is {I_lo}; "
            "requires a strictly positive lower bound"
        )
    else:
        k1 = p.k1(I_lo)
        test_k = k1 * np.array([1e-6, 1e-3, 0.5, 1.0 - 1e-9])
        K_hi = I_hi if np.isfinite(I_hi) else 1e6
        test_K = np.unique(np.clip(Ks, I_lo, K_hi))
        fvals = eval_f(test_k[:, None], test_K[None, :], p)
        if np.any(fvals <= 0.0):
            bad.append("f-assumption (v): f not positive below k1 on the interval")

    # (vi) strict concavity in k.
    fkk = eval_f_kk(kk, KK, p)
    if np.any(fkk >= 0.0):
        bad.append("f-assumption (vi): f not strictly concave in k")

    return bad


def audit_utility(u: UtilityParams) -> list[str]:
    """Audit the Inada-type conditions on U at extreme consumption levels."""
    bad = []
    if u.shift != 0.0:
        bad.append("utility: run configurations must use the unshifted utility")
        return bad
    if eval_U(0.0, u) != 0.0:
        bad.append("utility: U(0) != 0")
    if eval_U_prime(1e-12, u) < 1e3:
        bad.append("utility: U'(c) fails to diverge as c -> 0")
    if eval_U_prime(1e12, u) > 1e-3:
        bad.append("utility: U'(c) fails to vanish as c -> inf")
    cs = _LOG_GRID
    if np.any(eval_U_prime_prime(cs, u) >= 0):
        bad.append("utility: U not strictly concave at sampled points")
    if np.any(eval_U(cs, u) < 0):
        bad.append("utility: U negative at sampled points")
    return bad
