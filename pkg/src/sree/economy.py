"""Immutable bundle of a validated economy, shared by the solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .externality import ExternalityKernel
from .grids import SpatialGrid, TailBoundParams, TimeGrid
from .primitives import ModelPrimitives

__all__ = ["SolverOptions", "Economy"]


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and caps for the location solver and the sweep driver."""

    # shooting
    shoot_rel_tol: float = 1e-6       # |k(T) - k_star| <= tol * max(1, k_star)
    bisect_iters: int = 80            # always run to bracket exhaustion
    bracket_doublings: int = 10       # c_hi growth cap: 2^10 * initial
    k_floor: float = 1e-10            # blow-up guards on an integration attempt
    c_floor: float = 1e-12
    c_ceil: float = 1e10
    k_ceil_factor: float = 10.0       # k guard = factor * kbar(sup K)
    # direct oracle
    oracle_grad_tol: float = 1e-8
    oracle_max_iters: int = 200_000
    oracle_terminal_tol: float = 1e-9
    # equilibrium sweep
    gamma: float = 0.5
    y_tol: float = 1e-8
    max_sweeps: int = 50
    plateau_window: int = 10
    run_oracle_check: bool = False

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"damping gamma = {self.gamma} must be in (0, 1]")


@dataclass(frozen=True, eq=False)
class Economy:
    """Validated primitives, grids, kernel and derived run constants."""

    primitives: ModelPrimitives
    kernel: ExternalityKernel
    space: SpatialGrid
    time: TimeGrid
    k0_values: np.ndarray             # initial capital per location
    tail: TailBoundParams
    tail_phi: float                   # phi(T) at the chosen horizon
    lipschitz_S: float
    schauder_M: float
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        k0 = np.asarray(self.k0_values, dtype=float)
        if k0.shape != self.space.locations.shape:
            raise ValueError("one initial capital value per location")
        if np.any(k0 <= 0):
            raise ValueError("initial capital must be positive everywhere")
        object.__setattr__(self, "k0_values", k0)

    @property
    def r(self) -> float:
        return self.primitives.r

    @property
    def K_sup_effective(self) -> float:
        """Largest externality value reachable in runs: min(I_hi, M)."""
        return float(min(self.kernel.I_hi, self.schauder_M))
