"""Alignment losses between phase vectors and unit-column factor matrices.

Both losses minimize a normalized squared Frobenius distance over a global
unit alignment and have closed forms:

    ell1(z', z) = min_{|a|=1} (1/n) ||z' - a z||^2
                = (||z'||^2 + ||z||^2)/n - (2/n) |z'^H z|
    ellm(V, z)  = min_{||a||=1} (1/n) ||V - a z^H||_F^2
                = (||V||_F^2 + ||z||^2)/n - (2/n) ||V z||

For unimodular z and unit-column V these reduce to 2 - (2/n)|z'^H z| and
2 - (2/n)||V z||.  The aggregate in ellm is s(V, z) = sum_j z_j V_j = V z
(no conjugation on z); the optimal alignment is a* = V z / ||V z||.  The
general forms are kept because the matrix-multiplication stage of the
analysis applies the losses to Y z and V Y^H, which are not normalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TIGHTNESS_TOL = 1e-9


def _vec(z) -> np.ndarray:
    arr = getattr(z, "entries", z)
    return np.asarray(arr, dtype=np.complex128)


def _mat(v) -> np.ndarray:
    arr = getattr(v, "columns", v)
    return np.asarray(arr, dtype=np.complex128)


def loss_ell1(zprime, z) -> float:
    """Squared distance between phase vectors, minimized over a global phase."""
    zp = _vec(zprime)
    zz = _vec(z)
    if zp.shape != zz.shape or zp.ndim != 1:
        raise ValueError("loss_ell1 requires two vectors of equal length")
    n = zp.size
    sq = (np.vdot(zp, zp).real + np.vdot(zz, zz).real) / n
    val = sq - 2.0 * abs(np.vdot(zp, zz)) / n
    return max(float(val), 0.0)


def loss_ellm(v, z) -> float:
    """Distance from a factor matrix to the rank-1 profile a z^H, minimized
    over unit a.  Returns 2 when ||V z|| = 0 (any unit a attains the min)."""
    vm = _mat(v)
    zz = _vec(z)
    if vm.ndim != 2 or zz.ndim != 1 or vm.shape[1] != zz.size:
        raise ValueError("loss_ellm requires an m x n matrix and a length-n vector")
    n = zz.size
    s = vm @ zz
    sq = (np.linalg.norm(vm) ** 2 + np.vdot(zz, zz).real) / n
    val = sq - 2.0 * np.linalg.norm(s) / n
    return max(float(val), 0.0)


def frob_discrepancy(v, z) -> float:
    """n^-2 ||V^H V - z z^H||_F^2, the normalized squared Frobenius gap
    between the lifted factorization and the rank-1 phase profile."""
    vm = _mat(v)
    zz = _vec(z)
    if vm.ndim != 2 or vm.shape[1] != zz.size:
        raise ValueError("frob_discrepancy dimension mismatch")
    n = zz.size
    d = vm.conj().T @ vm - np.outer(zz, zz.conj())
    return float(np.linalg.norm(d) ** 2) / n**2


@dataclass(frozen=True)
class LossReport:
    """Per-trial loss triple.  ``tight`` records whether the factorization
    discrepancy to the power-method estimate is numerically zero."""

    ell1_to_truth: float
    ellm_bm_to_mle: float
    frob_sq_normalized: float
    tight: bool

    def __post_init__(self):
        if self.frob_sq_normalized > 2.0 * self.ellm_bm_to_mle + 1e-9:
            raise ValueError("frobenius discrepancy exceeds 2x the alignment loss")


def make_loss_report(ell1_to_truth: float, ellm_bm_to_mle: float,
                     frob_sq_normalized: float,
                     tightness_tol: float = DEFAULT_TIGHTNESS_TOL) -> LossReport:
    return LossReport(
        ell1_to_truth=float(ell1_to_truth),
        ellm_bm_to_mle=float(ellm_bm_to_mle),
        frob_sq_normalized=float(frob_sq_normalized),
        tight=bool(ellm_bm_to_mle <= tightness_tol),
    )
