"""Discrete space and time grids, and the horizon-truncation rule.

Space is the unit interval, optionally periodic, discretized with
trapezoid quadrature (positive weights, exact on linear functions).
Time is a uniform grid on [0, T].  The horizon T is selected by the
computable tail bound phi(T): discounted utility mass beyond T, over
*all* admissible paths, is at most phi(T), so truncating at the first T
with phi(T) <= epsilon loses at most epsilon of objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .primitives import (
    ProductionParams,
    UtilityParams,
    eval_U,
    eval_U_prime,
    eval_f,
)

__all__ = [
    "SpatialGrid",
    "TimeGrid",
    "TailBoundParams",
    "tail_bound_phi",
    "choose_horizon",
    "quadrature_apply",
]


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """Ordered locations in [0, 1] with trapezoid quadrature weights."""

    locations: np.ndarray
    quad_weights: np.ndarray
    periodic: bool = False

    def __post_init__(self):
        z = np.asarray(self.locations, dtype=float)
        w = np.asarray(self.quad_weights, dtype=float)
        if z.ndim != 1 or z.size < 2:
            raise ValueError("need at least 2 locations")
        if np.any(np.diff(z) <= 0):
            raise ValueError("locations must be strictly increasing")
        if w.shape != z.shape:
            raise ValueError("one quadrature weight per location")
        if np.any(w < 0):
            raise ValueError("quadrature weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("quadrature weights must sum to the domain length 1")
        object.__setattr__(self, "locations", z)
        object.__setattr__(self, "quad_weights", w)

    @property
    def n(self) -> int:
        return self.locations.size

    @classmethod
    def uniform(cls, n: int, periodic: bool = False) -> "SpatialGrid":
        """Uniform grid: trapezoid weights, or equal weights on the circle."""
        if periodic:
            z = np.arange(n) / n
            w = np.full(n, 1.0 / n)
        else:
            z = np.linspace(0.0, 1.0, n)
            h = 1.0 / (n - 1)
            w = np.full(n, h)
            w[0] = w[-1] = h / 2.0
        return cls(locations=z, quad_weights=w, periodic=periodic)


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing time nodes t_0 = 0, ..., t_N = T."""

    nodes: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.nodes, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("need at least 2 time nodes")
        if t[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time nodes must be strictly increasing")
        object.__setattr__(self, "nodes", t)

    @property
    def horizon_T(self) -> float:
        return float(self.nodes[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @classmethod
    def uniform(cls, T: float, n_nodes: int) -> "TimeGrid":
        return cls(nodes=np.linspace(0.0, float(T), int(n_nodes)))


@dataclass(frozen=True)
class TailBoundParams:
    """Constants feeding the tail bound phi(T).

    C1 bounds net output along admissible paths; the mass of consumption
    (and of capital variation) over [0, t] is at most Cbar0 + Cbar1 * t;
    U is dominated by the affine function C3 + C4 * c (tangent of the
    concave U at c = 1, which dominates globally).  C5 and C6 are the
    assembled coefficients of the dyadic-block estimate; the doubling
    T_{k+1} = 2 T_k contributes the factor 2 inside C6.
    """

    C1: float
    Cbar0: float
    Cbar1: float
    C3: float
    C4: float
    r: float

    def __post_init__(self):
        for name in ("C1", "Cbar0", "Cbar1", "C3", "C4"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"tail constant {name} = {v} must be >= 0")
        if self.r <= 0:
            raise ValueError("tail bound needs r > 0")

    @property
    def C5(self) -> float:
        return self.C4 * self.Cbar0

    @property
    def C6(self) -> float:
        return 2.0 * (self.C3 + self.C4 * self.Cbar1)

    @classmethod
    def for_problem(
        cls,
        production: ProductionParams,
        utility: UtilityParams,
        r: float,
        k0_sup: float,
        K_sup: float,
    ) -> "TailBoundParams":
        """Assemble conservative constants for a given economy.

        C1 = max_k f(k, K_sup) (f is increasing in K), evaluated at the
        interior peak of f.  The consumption/variation mass bound uses
        Cbar0 = k0_sup and Cbar1 = 2 C1.
        """
        k_pk = production.k_peak(K_sup)
        C1 = float(eval_f(k_pk, K_sup, production)) if k_pk > 0 else 0.0
        C1 = max(C1, 0.0)
        C4 = float(eval_U_prime(1.0, utility))
        C3 = float(eval_U(1.0, utility)) - C4
        return cls(C1=C1, Cbar0=float(k0_sup), Cbar1=2.0 * C1, C3=C3, C4=C4, r=r)


def tail_bound_phi(T: float, p: TailBoundParams) -> float:
    """Bound on discounted utility mass beyond T over admissible paths.

    phi(T) = C5 e^{-rT} sum_k e^{-rT(2^k - 1)}
           + C6 e^{-rT} T sum_k e^{-rT(2^k - 1)} 2^k,

    summed over dyadic blocks [2^k T, 2^{k+1} T).  The series is
    truncated once a term drops below 1e-16 of the partial sum.
    """
    if T <= 0:
        raise ValueError("tail bound needs T > 0")
    r = p.r
    total = 0.0
    for k in range(256):
        a_k = math.exp(-r * T * 2.0**k)
        term = p.C5 * a_k + p.C6 * T * a_k * 2.0**k
        total += term
        if term <= 1e-16 * total:
            return total
        if k >= 64:
            raise ValueError(
                "tail series failed to decay within 64 terms; "
                "check that r * T is positive"
            )
    return total


def choose_horizon(
    epsilon: float,
    p: TailBoundParams,
    n_nodes: int,
    floor: float = 10.0,
) -> TimeGrid:
    """Smallest T in a doubling search from the floor with phi(T) <= epsilon."""
    if epsilon <= 0:
        raise ValueError("tail tolerance must be positive")
    T = float(floor)
    for _ in range(256):
        if tail_bound_phi(T, p) <= epsilon:
            return TimeGrid.uniform(T, n_nodes)
        T *= 2.0
    raise ValueError("horizon search did not terminate; tail constants degenerate")


def quadrature_apply(g, grid: SpatialGrid) -> float:
    """Integral of per-location values against the grid weights."""
    g = np.asarray(g, dtype=float)
    if g.shape != grid.quad_weights.shape:
        raise ValueError(
            f"expected {grid.quad_weights.size} values, got shape {g.shape}"
        )
    return float(grid.quad_weights @ g)
