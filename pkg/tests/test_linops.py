import numpy as np
import pytest

from phasesync.linops import hermitian_matvec, leading_eigenvector, operator_norm
from phasesync.losses import loss_ell1
from phasesync.model import derive_rng, generate_truth, make_instance, sample_noise


def _random_hermitian(n, seed):
    rng = derive_rng(0xAB, seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2.0


def test_matvec_identity_and_rank_one():
    x = generate_truth(7, 0).entries
    assert np.allclose(hermitian_matvec(np.eye(7, dtype=complex), x), x)
    z = generate_truth(9, 1).entries
    a = np.outer(z, z.conj())
    assert np.allclose(hermitian_matvec(a, z), 9 * z, atol=1e-12)
    with pytest.raises(ValueError):
        hermitian_matvec(np.eye(3, dtype=complex), np.ones(4, dtype=complex))


def test_matvec_adjoint_identity():
    rng = derive_rng(0xAC, 0)
    for seed in range(5):
        a = _random_hermitian(20, seed)
        x = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        y = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        lhs = np.vdot(hermitian_matvec(a, x), y)
        rhs = np.vdot(x, hermitian_matvec(a, y))
        scale = np.linalg.norm(a) * np.linalg.norm(x) * np.linalg.norm(y)
        assert abs(lhs - rhs) < 1e-10 * scale


def test_operator_norm_diagonal():
    a = np.diag([3.0, -5.0, 1.0]).astype(complex)
    est = operator_norm(a)
    assert est.converged
    assert abs(est.value - 5.0) < 1e-9
    assert est.residual < 1e-9


def test_operator_norm_rank_one():
    z = generate_truth(30, 4).entries
    est = operator_norm(np.outer(z, z.conj()))
    assert abs(est.value - 30.0) < 1e-8


def test_operator_norm_rejects_non_hermitian():
    with pytest.raises(ValueError):
        operator_norm(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


def test_operator_norm_wigner_edge():
    w = sample_noise(1000, 0).entries
    est = operator_norm(w, tol=1e-8)
    assert 1.9 <= est.value / np.sqrt(1000) <= 2.1


def test_operator_norm_lower_bound_witness():
    a = _random_hermitian(40, 7)
    est = operator_norm(a)
    rng = derive_rng(0xAD, 7)
    for _ in range(20):
        u = rng.standard_normal(40) + 1j * rng.standard_normal(40)
        u /= np.linalg.norm(u)
        assert np.linalg.norm(a @ u) <= est.value * (1 + 1e-8)


def test_leading_eigenvector_noiseless_alignment():
    obs = make_instance(50, 0.0, seed=3)
    est = leading_eigenvector(obs)
    assert est.converged
    align = abs(np.vdot(est.vector, obs.truth.entries)) / np.sqrt(50)
    assert align > 1 - 1e-10


def test_leading_eigenvector_residual_contract():
    obs = make_instance(80, 1.0, seed=5)
    tol = 1e-10
    est = leading_eigenvector(obs, tol=tol)
    assert est.converged
    fnorm = np.linalg.norm(obs.y)
    resid = np.linalg.norm(obs.y @ est.vector - est.value * est.vector)
    assert resid <= tol * fnorm


def test_leading_eigenvector_shift_invariance():
    obs = make_instance(60, 1.0, seed=9)
    e1 = leading_eigenvector(obs)
    e2 = leading_eigenvector(obs, beta=3.0 * np.linalg.norm(obs.y))
    assert abs(np.vdot(e1.vector, e2.vector)) > 1 - 1e-8


def test_leading_eigenvector_orthogonal_start_recovers():
    obs = make_instance(40, 0.5, seed=11)
    ref = leading_eigenvector(obs)
    # a start orthogonal to the top eigenvector still converges: floating
    # point injects a component along it immediately
    rng = derive_rng(0xAE, 11)
    v0 = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    v0 -= ref.vector * np.vdot(ref.vector, v0)
    v0 /= np.linalg.norm(v0)
    ymat, beta = obs.y, np.linalg.norm(obs.y)
    v = v0
    for _ in range(4000):
        w = ymat @ v + beta * v
        v = w / np.linalg.norm(w)
    assert abs(np.vdot(v, ref.vector)) > 1 - 1e-8


def test_spectral_method_error_scale():
    from phasesync.estimators import spectral_init_vector
    obs = make_instance(300, 1.0, seed=13)
    z0 = spectral_init_vector(obs)
    assert loss_ell1(z0, obs.truth) < 0.1
