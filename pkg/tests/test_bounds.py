import math

import numpy as np
import pytest
from scipy import integrate

from phasesync.bounds import (chain_parameters, corollary1_precondition_ok,
                              corollary1_rhs, crude_loss_bound, exp_bound,
                              gaussian_tail_envelope, gaussian_upper_tail,
                              make_bound_inputs, tightness_threshold)
from phasesync.estimators import solve_bm, solve_mle
from phasesync.linops import operator_norm
from phasesync.losses import loss_ell1, loss_ellm
from phasesync.model import make_instance


def test_exp_bound_arithmetic():
    n, sigma = 800, math.sqrt(800 / 40)
    expect = math.exp(-5.0) + 2 * 800.0**-10
    assert abs(exp_bound(n, sigma, 1.0) - expect) < 1e-12 * expect
    big = exp_bound(10, 1e9, 3.0)
    assert abs(big - (3.0 + 2 * 10.0**-10)) < 1e-9


def test_exp_bound_monotone_in_snr():
    n = 500
    vals = [exp_bound(n, math.sqrt(n / r)) for r in (1, 5, 20, 80)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        exp_bound(0, 1.0)
    with pytest.raises(ValueError):
        exp_bound(10, -1.0)


def test_tightness_threshold_values():
    assert abs(tightness_threshold(300) - 2.417) < 5e-4
    n = round(math.e**9)
    assert abs(tightness_threshold(n) - math.sqrt(n / 81.0)) < 1e-3 * math.sqrt(n / 81.0)
    vals = [tightness_threshold(n) for n in range(3, 50)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        tightness_threshold(1)


def test_crude_loss_bound_values():
    assert crude_loss_bound(0.0, 123.0, 10) == 0.0
    n = 400
    assert abs(crude_loss_bound(1.0, 2 * math.sqrt(n), n) - 16 / math.sqrt(n)) < 1e-12


def test_gaussian_tail_against_quadrature():
    # independent oracle: numerical integration of the normal density
    for x in (0.0, 0.5, 1.0, 1.96, 3.0, 5.0):
        oracle, err = integrate.quad(
            lambda u: math.exp(-0.5 * u * u) / math.sqrt(2 * math.pi), x, np.inf)
        assert err < 1e-8
        assert abs(gaussian_upper_tail(x) - oracle) < 1e-9
    assert gaussian_upper_tail(0.0) == 0.5
    assert abs(gaussian_upper_tail(1.96) - 0.0250) < 1e-4


def test_gaussian_tail_high_precision():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    for x in (0.1, 1.0, 2.5, 4.0, 7.0):
        oracle = float(0.5 * mp.erfc(x / mp.sqrt(2)))
        got = gaussian_upper_tail(x)
        assert abs(got - oracle) <= 1e-12 * max(oracle, 1e-300)


def test_gaussian_tail_envelope_dominates():
    assert abs(gaussian_tail_envelope(1.0) - 0.6844) < 1e-4
    assert gaussian_tail_envelope(1.0) >= gaussian_upper_tail(1.0)
    for x in np.logspace(-3, 1, 60):
        assert gaussian_upper_tail(x) <= gaussian_tail_envelope(x)
    for x in (0.1, 0.7, 2.3, 6.0):
        assert abs(gaussian_upper_tail(x) + gaussian_upper_tail(-x) - 1.0) < 1e-12


def test_chain_parameters_formulas():
    n, sigma, opn = 400, 0.5, 40.0
    eps, delta, h = chain_parameters(n, sigma, opn)
    c0 = opn / math.sqrt(n)
    assert abs(eps - math.sqrt(8 * c0 * sigma / math.sqrt(n))) < 1e-15
    assert abs(delta - 49 * math.sqrt(c0 * sigma / math.sqrt(n))) < 1e-14
    assert abs(h - delta * math.sqrt(n)) < 1e-12
    _, _, h2 = chain_parameters(n, sigma, opn, expectation_route=True)
    assert abs(h2 - n * math.exp(-n / (8 * sigma**2))) < 1e-12
    bi = make_bound_inputs(n, sigma, opn)
    assert abs(bi.c0 - c0) < 1e-12


def test_corollary1_rhs_extremes():
    obs = make_instance(50, 0.2, seed=31)
    run = solve_mle(obs)
    assert run.converged
    # a huge threshold counts every coordinate
    assert corollary1_rhs(obs, run.iterate, 50.0) == 8.0
    # low noise leaves no small coordinate at a sub-unit threshold
    assert corollary1_rhs(obs, run.iterate, 0.5) == 0.0


def test_corollary1_dominates_measured_loss():
    obs = make_instance(120, 0.4, seed=32)
    opn = operator_norm(obs.noise.entries, tol=1e-10).value
    mle = solve_mle(obs)
    bm = solve_bm(obs, 2)
    assert mle.converged and bm.converged
    eps = math.sqrt(max(loss_ell1(mle.iterate, obs.truth),
                        loss_ellm(bm.iterate, obs.truth), 1e-30)) * 1.0001
    delta = 2 * math.sqrt(2) * (6 * eps + obs.sigma * opn / obs.n) * 1.000001
    assert corollary1_precondition_ok(delta, eps, obs.sigma, opn, obs.n)
    lhs = loss_ellm(bm.iterate, mle.iterate)
    assert lhs <= corollary1_rhs(obs, mle.iterate, delta) + 1e-9


def test_corollary1_precondition_flag():
    assert not corollary1_precondition_ok(0.1, 0.6, 1.0, 20.0, 100)
    assert not corollary1_precondition_ok(0.1, 0.3, 1.0, 20.0, 100)
    assert corollary1_precondition_ok(10.0, 0.3, 1.0, 20.0, 100)
