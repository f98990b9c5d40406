"""Discrete externality operator: kernel integral plus clamped nonlinearity.

The operator maps a capital field to an externality field, one time slice
at a time:

    K(t, z_j) = psi( sum_l weight_l * w(z_j, z_l) * k(t, z_l) ),

with psi(x) = clamp(a + b*x, I_lo, I_hi) so outputs always land in the
configured interval [I_lo, I_hi].  The identity variant is a = 0, b = 1.
Built-in kernels: uniform, Gaussian, and a signed Mexican-hat difference
of two Gaussians (spillover at short range, congestion at longer range).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import SpatialGrid
from .primitives import ProductionParams

__all__ = [
    "KERNEL_FAMILIES",
    "ExternalityKernel",
    "ExternalityField",
    "kernel_violations",
    "audit_kernel",
    "apply_S",
    "lipschitz_constant",
    "s_zero_sup",
    "schauder_bound_M",
]

KERNEL_FAMILIES = ("uniform", "gaussian", "mexican_hat")


def kernel_violations(
    family, ell, ell_wide, amp_wide, psi_a, psi_b, I_lo, I_hi
) -> list[str]:
    out = []
    if family not in KERNEL_FAMILIES:
        out.append(f"kernel: unknown family '{family}' (use one of {KERNEL_FAMILIES})")
    if family in ("gaussian", "mexican_hat") and not ell > 0:
        out.append(f"kernel: range ell = {ell} must be positive")
    if family == "mexican_hat" and not ell_wide > 0:
        out.append(f"kernel: ell_wide = {ell_wide} must be positive")
    if not I_lo > 0:
        out.append(
            f"f-assumption (v): inf of the externality interval is {I_lo}; "
            "requires a strictly positive lower bound"
        )
    if not I_lo <= I_hi:
        out.append(f"kernel: empty interval [{I_lo}, {I_hi}]")
    if not np.isfinite(psi_a) or not np.isfinite(psi_b):
        out.append("kernel: affine clamp coefficients must be finite")
    return out


@dataclass(frozen=True)
class ExternalityKernel:
    """Kernel w on D x D plus the clamped affine nonlinearity psi."""

    family: str = "gaussian"
    ell: float = 0.2
    ell_wide: float = 0.4
    amp_wide: float = 0.5
    psi_a: float = 0.0
    psi_b: float = 1.0
    I_lo: float = 1e-2
    I_hi: float = np.inf

    def __post_init__(self):
        bad = kernel_violations(
            self.family,
            self.ell,
            self.ell_wide,
            self.amp_wide,
            self.psi_a,
            self.psi_b,
            self.I_lo,
            self.I_hi,
        )
        if bad:
            raise ValueError("; ".join(bad))

    def distances(self, grid: SpatialGrid) -> np.ndarray:
        z = grid.locations
        d = np.abs(z[:, None] - z[None, :])
        if grid.periodic:
            d = np.minimum(d, 1.0 - d)
        return d

    def w_matrix(self, grid: SpatialGrid) -> np.ndarray:
        """Pairwise kernel values w(z_j, z_l) on the grid."""
        d = self.distances(grid)
        if self.family == "uniform":
            return np.ones_like(d)
        if self.family == "gaussian":
            return np.exp(-(d**2) / (2.0 * self.ell**2))
        # mexican hat: narrow positive lobe minus a wide negative lobe
        return np.exp(-(d**2) / (2.0 * self.ell**2)) - self.amp_wide * np.exp(
            -(d**2) / (2.0 * self.ell_wide**2)
        )

    def psi(self, x):
        return np.clip(self.psi_a + self.psi_b * np.asarray(x, dtype=float),
                       self.I_lo, self.I_hi)

    @property
    def psi_lipschitz(self) -> float:
        # clamping is 1-Lipschitz, so the affine slope is the constant
        return abs(self.psi_b)

    def sup_w(self, grid: SpatialGrid) -> float:
        return float(np.max(np.abs(self.w_matrix(grid))))


@dataclass(frozen=True, eq=False)
class ExternalityField:
    """Externality values K(t_i, z_j) over a space-time grid."""

    values: np.ndarray
    I_lo: float
    I_hi: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("field values must be a (time, location) matrix")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if np.any(v < self.I_lo - 1e-12) or np.any(v > self.I_hi + 1e-12):
            raise ValueError("field values leave the externality interval")
        object.__setattr__(self, "values", v)

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


def audit_kernel(kernel: ExternalityKernel, grid: SpatialGrid) -> list[str]:
    """Sampled checks of the nonlinearity's range and Lipschitz constant,
    and boundedness of the kernel on the grid."""
    bad = []
    xs = np.concatenate([
        [0.0], 10.0 ** np.linspace(-8, 8, 33), -(10.0 ** np.linspace(-8, 8, 33)),
    ])
    vals = kernel.psi(xs)
    if np.any(vals < kernel.I_lo) or np.any(vals > kernel.I_hi):
        bad.append("kernel: psi output leaves [I_lo, I_hi] at sampled points")
    L = kernel.psi_lipschitz
    diffs = np.abs(np.subtract.outer(vals, vals))
    gaps = np.abs(np.subtract.outer(xs, xs))
    if np.any(diffs > L * gaps + 1e-9 * np.maximum(1.0, np.abs(diffs))):
        bad.append("kernel: psi violates its reported Lipschitz constant")
    if not np.all(np.isfinite(kernel.w_matrix(grid))):
        bad.append("kernel: w is not bounded on the grid")
    return bad


def _weighted_kernel(kernel: ExternalityKernel, grid: SpatialGrid) -> np.ndarray:
    # row j holds weight_l * w(z_j, z_l)
    return kernel.w_matrix(grid) * grid.quad_weights[None, :]


def apply_S(k_field, kernel: ExternalityKernel, grid: SpatialGrid) -> ExternalityField:
    """Apply the externality operator slice-wise in time.

    k_field is a (time, location) matrix of nonnegative capital values;
    a single slice may be passed as a 1-row matrix.
    """
    k = np.asarray(k_field, dtype=float)
    if k.ndim == 1:
        k = k[None, :]
    if k.shape[1] != grid.n:
        raise ValueError(f"expected {grid.n} locations, got {k.shape[1]}")
    if not np.all(np.isfinite(k)):
        raise ValueError("capital field must be finite")
    if np.any(k < 0):
        raise ValueError("capital field must be nonnegative")
    integrals = k @ _weighted_kernel(kernel, grid).T
    return ExternalityField(
        values=kernel.psi(integrals), I_lo=kernel.I_lo, I_hi=kernel.I_hi
    )


def lipschitz_constant(kernel: ExternalityKernel, grid: SpatialGrid) -> float:
    """Certified sup-norm Lipschitz bound of the discrete operator.

    L_S = L_psi * max_z sum_l weight_l |w(z, z_l)| dominates the ratio
    ||S k1 - S k2||_inf / ||k1 - k2||_inf for any pair of fields.
    """
    M = _weighted_kernel(kernel, grid)
    return kernel.psi_lipschitz * float(np.max(np.sum(np.abs(M), axis=1)))


def s_zero_sup(kernel: ExternalityKernel) -> float:
    """Sup norm of the operator applied to the zero field: |psi(0)|."""
    return float(np.abs(kernel.psi(0.0)))


def schauder_bound_M(
    kernel: ExternalityKernel,
    grid: SpatialGrid,
    k0_sup: float,
    p: ProductionParams,
) -> float:
    """Smallest power-of-two radius M with a self-mapped externality ball.

    The doubling search finds the least M = 2^j satisfying

        L_S * max(k0_sup, kbar(M)) + |S(0)| < M,

    which guarantees best responses to fields bounded by M map back into
    the M-ball.  Feasible for large M because kbar(M) = o(M).
    """
    L = lipschitz_constant(kernel, grid)
    S0 = s_zero_sup(kernel)
    M = 1.0
    for _ in range(65):
        if L * max(k0_sup, p.kbar(M)) + S0 < M:
            return M
        M *= 2.0
    raise ValueError("no admissible externality ball up to 2^64; "
                     "kernel mass or k0 too large")
