import numpy as np
import pytest

from sree.config import RunConfig, validate_config
from sree.equilibrium import (
    best_response,
    continuity_probe,
    equilibrium_residual,
    initial_field,
    solve_equilibrium,
    y_norm,
)
from sree.externality import ExternalityField, lipschitz_constant, s_zero_sup


def economy_for(overrides=None):
    return validate_config(RunConfig.from_dict(overrides or {}))


@pytest.fixture(scope="module")
def canonical_economy():
    return economy_for()


@pytest.fixture(scope="module")
def decoupled_economy():
    return economy_for({"primitives": {"beta": 0.0}, "solver": {"gamma": 1.0}})


@pytest.fixture(scope="module")
def canonical_result(canonical_economy):
    return solve_equilibrium(canonical_economy)


# ---------------------------------------------------------------------------
# Y norm
# ---------------------------------------------------------------------------

def test_y_norm_constant_field_is_two():
    t = np.linspace(0.0, 40.0, 401)
    v = np.ones((401, 7))
    assert y_norm(v, t) == 2.0


def test_y_norm_zero_field():
    t = np.linspace(0.0, 10.0, 101)
    assert y_norm(np.zeros((101, 3)), t) == 0.0


def test_y_norm_unit_bump_in_late_slab():
    # support strictly inside (m0, m0+1): slabs up to m0 see nothing,
    # all later slabs see sup 1, and the closed-form tail gives 2^{-m0}
    t = np.linspace(0.0, 8.0, 801)
    for m0 in (2, 5):
        v = np.zeros((801, 2))
        inside = (t > m0 + 0.25) & (t < m0 + 0.75)
        v[inside, :] = 1.0
        assert y_norm(v, t) == pytest.approx(2.0 ** (-m0), abs=1e-15)


def test_y_norm_axioms_on_random_triples():
    rng = np.random.default_rng(9)
    t = np.linspace(0.0, 12.0, 241)
    for _ in range(25):
        a = rng.normal(size=(241, 4))
        b = rng.normal(size=(241, 4))
        s = rng.normal()
        assert y_norm(a, t) >= 0.0
        assert y_norm(s * a, t) == pytest.approx(abs(s) * y_norm(a, t), rel=1e-12)
        assert y_norm(a + b, t) <= y_norm(a, t) + y_norm(b, t) + 1e-12


def test_y_norm_rejects_nonfinite():
    t = np.linspace(0.0, 1.0, 11)
    v = np.zeros((11, 2))
    v[3, 1] = np.nan
    with pytest.raises(ValueError):
        y_norm(v, t)


# ---------------------------------------------------------------------------
# best response
# ---------------------------------------------------------------------------

def test_best_response_ignores_field_when_beta_zero(decoupled_economy):
    eco = decoupled_economy
    lo, hi = eco.kernel.I_lo, eco.kernel.I_hi
    shape = (eco.time.n_nodes, eco.space.n)
    K1 = ExternalityField(np.full(shape, 1.0), lo, hi)
    K2 = ExternalityField(np.full(shape, 2.5), lo, hi)
    k1, c1, _ = best_response(K1, eco)
    k2, c2, _ = best_response(K2, eco)
    assert np.array_equal(k1, k2)
    assert np.array_equal(c1, c2)


def test_best_response_uniform_inputs_give_uniform_fields():
    eco = economy_for({"kernel": {"family": "uniform"},
                       "k0": {"kind": "constant", "value": 4.0}})
    K = initial_field(eco)
    assert np.max(K.values.max(axis=1) - K.values.min(axis=1)) == 0.0
    k, c, K_sharp = best_response(K, eco)
    for arr in (k, c, K_sharp.values):
        assert np.max(arr.max(axis=1) - arr.min(axis=1)) == 0.0


def test_best_response_self_map_bound(canonical_economy):
    eco = canonical_economy
    M = eco.schauder_M
    K = initial_field(eco)
    assert K.sup <= M
    k, _, K_sharp = best_response(K, eco)
    L = lipschitz_constant(eco.kernel, eco.space)
    bound = L * max(float(np.max(eco.k0_values)),
                    eco.primitives.production.kbar(M)) + s_zero_sup(eco.kernel)
    assert K_sharp.sup <= bound < M


# ---------------------------------------------------------------------------
# fixed-point sweep
# ---------------------------------------------------------------------------

def test_decoupled_sweep_converges_in_one_update(decoupled_economy):
    res = solve_equilibrium(decoupled_economy)
    assert res.converged
    assert res.state.sweep_count == 1
    assert res.state.residual_history[-1] == 0.0


def test_symmetric_equilibrium_is_spatially_constant():
    eco = economy_for({"kernel": {"family": "uniform"},
                       "k0": {"kind": "constant", "value": 4.0}})
    res = solve_equilibrium(eco)
    assert res.converged
    K = res.state.K_field.values
    assert np.max(K.max(axis=1) - K.min(axis=1)) <= 1e-6


def test_canonical_sweep_contracts_and_certifies(canonical_result):
    res = canonical_result
    assert res.converged
    hist = res.state.residual_history
    # geometric decay of the recorded residuals
    ratios = [b / a for a, b in zip(hist[:-2], hist[1:-1])]
    assert max(ratios) < 0.9
    assert res.diagnostics["schauder_ball_ok"]
    cert = res.diagnostics["certification"]
    assert cert.fixed_point_sup <= 1e-4
    assert cert.dynamics_sup <= 1e-3
    assert cert.euler_sup <= 1e-2


def test_fixed_point_consistency_and_damping_neutrality(canonical_economy, canonical_result):
    eco = canonical_economy
    K_fix = canonical_result.state.K_field
    for gamma in (0.25, 0.5, 1.0):
        again = solve_equilibrium(eco, gamma=gamma, K_init=K_fix)
        assert again.converged
        assert again.state.sweep_count == 0
        assert again.final_residual <= eco.solver.y_tol


def test_every_iterate_stays_in_ball_and_interval(canonical_economy, canonical_result):
    eco = canonical_economy
    res = canonical_result
    # iterate fields are validated into [I_lo, I_hi] on construction; the
    # ball containment flag certifies the Schauder bound along the sweep
    assert res.diagnostics["schauder_ball_ok"]
    K = res.state.K_field.values
    assert np.all(K >= eco.kernel.I_lo) and np.all(K <= eco.kernel.I_hi)
    assert res.state.K_field.sup <= eco.schauder_M


def test_nonconvergence_is_reported_not_raised(canonical_economy):
    res = solve_equilibrium(canonical_economy, max_sweeps=2)
    assert not res.converged
    assert res.state.sweep_count == 2
    assert res.final_residual > 0


def test_equilibrium_residual_detects_perturbation(canonical_economy, canonical_result):
    import copy

    eco = canonical_economy
    base = equilibrium_residual(canonical_result, eco)
    res = copy.deepcopy(canonical_result)
    bumped = res.state.K_field.values.copy()
    bumped[5, 3] += 0.1
    res.state.K_field = ExternalityField(bumped, eco.kernel.I_lo, eco.kernel.I_hi)
    pert = equilibrium_residual(res, eco)
    assert pert.fixed_point_sup >= base.fixed_point_sup + 0.099


def test_periodic_grid_preserves_translation_invariance():
    # on the circle with uniform k0, every location faces the same
    # problem, so all fields stay spatially constant
    eco = economy_for({
        "grid": {"periodic": True, "time_nodes": 200},
        "k0": {"kind": "constant", "value": 4.0},
    })
    res = solve_equilibrium(eco)
    assert res.converged
    K = res.state.K_field.values
    assert np.max(K.max(axis=1) - K.min(axis=1)) <= 1e-12


def test_signed_kernel_clamps_externality_into_interval():
    eco = economy_for({
        "kernel": {"family": "mexican_hat", "ell": 0.1, "ell_wide": 0.3,
                   "amp_wide": 0.6},
        "grid": {"time_nodes": 200},
    })
    res = solve_equilibrium(eco)
    assert res.converged
    K = res.state.K_field.values
    # congestion-dominated integrals push psi against its lower clamp
    assert np.min(K) == eco.kernel.I_lo
    assert np.max(K) <= eco.kernel.I_hi
    cert = res.diagnostics["certification"]
    assert cert.fixed_point_sup <= 1e-4


def test_continuity_of_best_response(canonical_economy):
    eco = canonical_economy
    rng = np.random.default_rng(31)
    devs = continuity_probe(eco, initial_field(eco), [1e-1, 1e-2, 1e-3], rng)
    assert devs[0] > devs[1] > devs[2]
    sensitivity = devs[0] / 1e-1
    assert devs[2] <= 10.0 * 1e-3 * sensitivity
