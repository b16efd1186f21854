"""Hermitian linear-operator kernels shared by all estimators.

Only the top eigenpair is ever needed, so everything here is plain power
iteration; no sparse formats, no Lanczos.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Observation, derive_rng

_OPNORM_TAG = 0x4F504E
_EIG_TAG = 0x454947

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10000


@dataclass(frozen=True)
class SpectralEstimate:
    """Top-eigenpair estimate: value is the (nonnegative) norm estimate,
    vector the unit eigenvector estimate, residual the eigenpair defect
    ``||A v - lam v||`` with lam the signed Rayleigh quotient of vector."""

    value: float
    vector: np.ndarray
    iterations: int
    residual: float
    converged: bool

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.complex128)
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("eigenvector estimate must be unit norm")
        object.__setattr__(self, "vector", v)


def _check_hermitian(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    return a


def hermitian_matvec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Product A @ x for Hermitian A."""
    a = np.asarray(a, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or x.shape != (a.shape[1],):
        raise ValueError("dimension mismatch in matrix-vector product")
    return a @ x


def _unit_start(n: int, seed: int, tag: int) -> np.ndarray:
    rng = derive_rng(tag, seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def operator_norm(a: np.ndarray, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER, seed: int = 0) -> SpectralEstimate:
    """Estimate ||A|| (largest |eigenvalue|) of Hermitian A.

    Power iteration on A^2, stopping when the norm estimate is stable to a
    relative ``tol`` over three consecutive sweeps.  The value estimate is
    ``||A v||`` for the final unit iterate, hence always a valid lower
    bound on ||A||.  When the two spectral edges of A nearly coincide in
    magnitude the vector may mix both edge eigenvectors; the value is still
    accurate but the reported eigenpair residual need not be small.
    """
    a = _check_hermitian(a)
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = a.shape[0]
    v = _unit_start(n, seed, _OPNORM_TAG)
    iters = 0
    converged = False
    for _ in range(max_iter):
        w = a @ (a @ v)
        iters += 1
        nu = float(np.real(np.vdot(v, w)))  # Rayleigh quotient of a^2, >= 0
        if nu == 0.0:
            # v sits in the kernel of a^2, hence of a
            return SpectralEstimate(0.0, v, iters, 0.0, True)
        if np.linalg.norm(w - nu * v) <= tol * nu:
            converged = True
            break
        v = w / np.linalg.norm(w)
    av = a @ v
    value = float(np.linalg.norm(av))
    lam = float(np.real(np.vdot(v, av)))
    residual = float(np.linalg.norm(av - lam * v))
    return SpectralEstimate(value, v, iters, residual, converged)


def leading_eigenvector(y: Observation, tol: float = DEFAULT_TOL,
                        max_iter: int = DEFAULT_MAX_ITER,
                        beta: float | None = None,
                        seed: int | None = None) -> SpectralEstimate:
    """Top eigenvector of Y via power iteration on the shifted matrix Y + beta*I.

    The default shift beta = ||Y||_F makes the shifted matrix positive
    definite, so its top eigenpair is the algebraically largest eigenpair
    of Y.  Success means ``||Y v - lam v|| <= tol * ||Y||_F``.
    """
    ymat = np.asarray(y.y, dtype=np.complex128)
    if tol <= 0:
        raise ValueError("tol must be positive")
    fnorm = float(np.linalg.norm(ymat))
    if beta is None:
        beta = fnorm
    elif beta < fnorm:
        raise ValueError("shift must be at least ||Y||_F")
    if seed is None:
        seed = y.noise.seed
    n = ymat.shape[0]
    v = _unit_start(n, seed, _EIG_TAG)
    iters = 0
    converged = False
    lam = 0.0
    residual = np.inf
    for _ in range(max_iter):
        bv = ymat @ v + beta * v
        iters += 1
        yv = bv - beta * v
        lam = float(np.real(np.vdot(v, yv)))
        residual = float(np.linalg.norm(yv - lam * v))
        if residual <= tol * fnorm:
            converged = True
            break
        nb = np.linalg.norm(bv)
        if nb == 0.0:
            break
        v = bv / nb
    return SpectralEstimate(float(lam), v, iters, residual, converged)
