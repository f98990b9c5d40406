import numpy as np
import pytest

from sree.economy import SolverOptions
from sree.primitives import (
    ModelPrimitives,
    ProductionParams,
    UtilityParams,
    steady_state,
)
from sree.ramsey import LocationProblem, solve_direct_oracle, solve_shooting


@pytest.fixture(scope="session")
def canonical_production():
    return ProductionParams(A=1.0, alpha=0.3, beta=0.2, delta=0.05)


@pytest.fixture(scope="session")
def canonical_utility():
    return UtilityParams(sigma=0.5)


@pytest.fixture(scope="session")
def canonical_primitives(canonical_production, canonical_utility):
    return ModelPrimitives(
        production=canonical_production, utility=canonical_utility, r=0.03
    )


@pytest.fixture(scope="session")
def small_primitives():
    # O(1) capital scale keeps absolute path-gap tolerances meaningful
    return ModelPrimitives(
        production=ProductionParams(A=0.8, alpha=0.3, beta=0.2, delta=0.1),
        utility=UtilityParams(sigma=0.5),
        r=0.05,
    )


@pytest.fixture(scope="session", autouse=True)
def _warm_jit(small_primitives):
    """Compile the numba kernels once so timed tests measure solves only."""
    ss = steady_state(1.0, small_primitives.production, small_primitives.r)
    t = np.linspace(0.0, 1.0, 11)
    prob = LocationProblem(
        K_traj=np.ones_like(t), k0=ss.k_star,
        primitives=small_primitives, times=t,
    )
    solve_shooting(prob, SolverOptions())
    solve_direct_oracle(prob, SolverOptions())
