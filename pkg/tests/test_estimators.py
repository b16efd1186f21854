import numpy as np
import pytest

from phasesync.bounds import crude_loss_bound
from phasesync.estimators import (apply_f1, apply_fm, brute_force_mle,
                                  quadratic_objective, solve_bm, solve_mle,
                                  spectral_init_columns, spectral_init_vector)
from phasesync.linops import operator_norm
from phasesync.losses import frob_discrepancy, loss_ell1, loss_ellm
from phasesync.model import (NoiseMatrix, Observation, PhaseVector,
                             UnitColumnMatrix, assemble_observation,
                             derive_rng, generate_truth, make_instance,
                             sample_noise, truth_ones)


def _hand_instance_2x2():
    """Y = [[1, i], [-i, 1]], encoded as truth = (1, 1) with the fitting noise."""
    y = np.array([[1.0, 1j], [-1j, 1.0]], dtype=complex)
    wfit = y - np.ones((2, 2), dtype=complex)
    np.fill_diagonal(wfit, 0.0)
    return Observation(y=y, sigma=1.0, truth=truth_ones(2),
                       noise=NoiseMatrix(wfit, seed=0))


def test_apply_f1_noiseless_fixed_point():
    obs = make_instance(40, 0.0, seed=2)
    out = apply_f1(obs, obs.truth)
    assert np.max(np.abs(out.entries - obs.truth.entries)) < 1e-12


def test_apply_f1_hand_example():
    obs = _hand_instance_2x2()
    out = apply_f1(obs, PhaseVector(np.ones(2, dtype=complex)))
    expect = np.array([(1 + 1j) / np.sqrt(2), (1 - 1j) / np.sqrt(2)])
    assert np.max(np.abs(out.entries - expect)) < 1e-14


def test_apply_f1_zero_fallback():
    # sigma = 0 with all-ones truth gives Y z = 0 for z = (1, -1)
    obs = assemble_observation(truth_ones(2), 0.0, sample_noise(2, 0))
    z = PhaseVector(np.array([1.0 + 0j, -1.0 + 0j]))
    out = apply_f1(obs, z)
    assert np.array_equal(out.entries, z.entries)


def test_apply_fm_noiseless_fixed_point():
    obs = make_instance(30, 0.0, seed=3)
    rng = derive_rng(0xCA, 3)
    a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    a /= np.linalg.norm(a)
    v = UnitColumnMatrix(np.outer(a, np.conj(obs.truth.entries)))
    out = apply_fm(obs, v)
    assert np.max(np.abs(out.columns - v.columns)) < 1e-12


def test_apply_fm_rank_one_matches_apply_f1():
    obs = make_instance(50, 1.2, seed=4)
    z = generate_truth(50, 99)
    v = np.conj(z.entries)[None, :]
    via_rows = apply_fm(obs, v).columns[0]
    via_vec = apply_f1(obs, z).entries
    assert np.max(np.abs(via_rows - np.conj(via_vec))) < 1e-12


def test_apply_fm_zero_fallback():
    obs = assemble_observation(truth_ones(2), 0.0, sample_noise(2, 1))
    v = UnitColumnMatrix(np.array([[1.0 + 0j, -1.0 + 0j]]))
    out = apply_fm(obs, v)
    assert np.array_equal(out.columns, v.columns)


def test_solve_mle_noiseless():
    obs = make_instance(25, 0.0, seed=5)
    init = generate_truth(25, 123)  # generic: not orthogonal to the truth
    run = solve_mle(obs, init=init)
    assert run.converged
    assert loss_ell1(run.iterate, obs.truth) < 1e-12


def test_solve_mle_moderate_noise_contract():
    obs = make_instance(200, 1.0, seed=6)
    run = solve_mle(obs)
    assert run.converged
    assert run.residual < 1e-10
    opn = operator_norm(obs.noise.entries, tol=1e-10).value
    assert loss_ell1(run.iterate, obs.truth) <= crude_loss_bound(1.0, opn, 200) + 1e-6


def test_solve_mle_objective_recomputed_independently():
    obs = make_instance(60, 0.8, seed=7)
    run = solve_mle(obs)
    z = run.iterate.entries
    oracle = np.einsum("j,jk,k->", np.conj(z), obs.y, z).real
    assert abs(run.objective - oracle) <= 1e-9 * max(1.0, abs(oracle))


def test_solve_mle_gauge_covariance():
    obs = make_instance(40, 0.7, seed=8)
    init = spectral_init_vector(obs)
    a = np.exp(0.9j)
    r1 = solve_mle(obs, init=init)
    r2 = solve_mle(obs, init=PhaseVector(a * init.entries))
    assert r1.converged and r2.converged
    if r1.iterations == r2.iterations:
        assert loss_ell1(r1.iterate, r2.iterate) < 1e-10


def test_fixed_point_certificate():
    obs = make_instance(80, 1.0, seed=9)
    tol = 1e-12 * np.sqrt(80)
    run = solve_mle(obs, tol=tol)
    assert run.converged
    fresh = apply_f1(obs, run.iterate)
    assert np.linalg.norm(fresh.entries - run.iterate.entries) <= 10 * tol
    runb = solve_bm(obs, 3, tol=tol)
    assert runb.converged
    freshb = apply_fm(obs, runb.iterate)
    assert np.linalg.norm(freshb.columns - runb.iterate.columns) <= 10 * tol


def test_solve_bm_noiseless_any_rank():
    obs = make_instance(20, 0.0, seed=10)
    for m in (1, 2, 5, 20):
        run = solve_bm(obs, m)
        assert run.converged
        assert frob_discrepancy(run.iterate, obs.truth) < 1e-12


def test_solve_bm_tight_regime_matches_mle():
    obs = make_instance(200, 1.5, seed=11)
    mle = solve_mle(obs)
    bm2 = solve_bm(obs, 2)
    assert mle.converged and bm2.converged
    assert loss_ellm(bm2.iterate, mle.iterate) < 1e-9
    sdp = solve_bm(obs, 200)
    assert sdp.converged
    d2 = loss_ellm(bm2.iterate, mle.iterate)
    dn = loss_ellm(sdp.iterate, mle.iterate)
    assert abs(d2 - dn) < 1e-8


def test_spectral_init_columns_shape_and_norms():
    obs = make_instance(30, 1.0, seed=12)
    for m in (1, 2, 3, 7, 30):
        v = spectral_init_columns(obs, m)
        assert v.columns.shape == (m, 30)
        assert np.max(np.abs(np.linalg.norm(v.columns, axis=0) - 1)) < 1e-12


def test_brute_force_noiseless_grid():
    obs = make_instance(3, 0.0, seed=13)
    res = brute_force_mle(obs, grid_size=64, refine=False)
    assert res.maximizer.entries[0] == 1.0
    assert res.objective >= 9.0 - 2 * 9.0 * (2 * np.pi / 64)
    # maximizer phases land within one grid cell of the gauge-fixed truth
    target = obs.truth.entries / obs.truth.entries[0]
    dphi = np.angle(res.maximizer.entries * np.conj(target))
    assert np.max(np.abs(dphi)) <= 2 * np.pi / 64 + 1e-12


def test_brute_force_vs_solver_objective():
    obs = make_instance(4, 0.5, seed=14)
    grid = brute_force_mle(obs, grid_size=72, refine=False)
    run = solve_mle(obs)
    slack = 2 * 16 * (2 * np.pi / 72)
    assert grid.objective >= run.objective - slack
    refined = brute_force_mle(obs, grid_size=72, refine=True)
    assert refined.objective >= grid.objective
    assert abs(refined.objective - run.objective) < 1e-8


def test_brute_force_degenerate_and_guards():
    obs = make_instance(1, 0.5, seed=15)
    res = brute_force_mle(obs, grid_size=8)
    assert np.array_equal(res.maximizer.entries, np.ones(1, dtype=complex))
    assert res.objective == 1.0
    with pytest.raises(ValueError):
        brute_force_mle(make_instance(7, 0.1, seed=0), grid_size=4)
    with pytest.raises(ValueError):
        brute_force_mle(make_instance(6, 0.1, seed=0), grid_size=100)


def test_objective_types():
    obs = make_instance(10, 0.5, seed=16)
    z = generate_truth(10, 5)
    v = spectral_init_columns(obs, 2)
    assert isinstance(quadratic_objective(obs, z), float)
    assert isinstance(quadratic_objective(obs, v), float)
