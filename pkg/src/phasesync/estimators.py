"""Estimation pipeline: normalized-multiplication fixed-point maps, the
generalized power-method drivers, spectral initialization, and a brute-force
grid oracle for tiny instances.

The rank-1 estimator iterates

    [F1(z)]_j = [Y z]_j / |[Y z]_j|        (z_j kept when [Y z]_j = 0)

and the rank-m factorization iterates the column-normalized analogue

    [Fm(V)]_j = [V Y^H]_j / ||[V Y^H]_j||  (V_j kept when the column is 0).

m = 1 recovers F1 under V = z^H, and m = n realizes the full semidefinite
relaxation.  The drivers compute fixed points reached from spectral
initialization; in the high-noise regime these are proxies for the global
optimizers, so the fixed-point residual and the objective are always
reported rather than hidden.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linops
from .model import Observation, PhaseVector, SoftPhaseVector, UnitColumnMatrix, derive_rng

# exact-zero fallback in the normalization maps, with a denormal guard
ZERO_THRESHOLD = 1e-300

_BM_INIT_TAG = 0x424D49
_RESTART_TAG = 0x525354

DEFAULT_MAX_ITER = 10000
BRUTE_FORCE_MAX_N = 6
BRUTE_FORCE_MAX_GRID = 10**8


def default_tol(n: int) -> float:
    return 1e-12 * np.sqrt(n)


@dataclass(frozen=True)
class FixedPointResult:
    """Outcome of a fixed-point driver.  ``residual`` is the step length
    ||x_{T+1} - x_T|| at the returned iterate; converged implies it is at
    or below the requested tolerance."""

    iterate: PhaseVector | UnitColumnMatrix | SoftPhaseVector
    iterations: int
    residual: float
    objective: float
    converged: bool


@dataclass(frozen=True)
class BruteForceResult:
    """Gauge-fixed grid maximizer (first coordinate exactly 1)."""

    maximizer: PhaseVector
    objective: float
    grid_size: int
    refined: bool

    def __post_init__(self):
        if self.maximizer.entries[0] != 1.0:
            raise ValueError("brute-force maximizer must be gauge fixed")


def _f1_raw(ymat: np.ndarray, z: np.ndarray) -> np.ndarray:
    u = ymat @ z
    mag = np.abs(u)
    keep = mag <= ZERO_THRESHOLD
    if np.any(keep):
        mag = np.where(keep, 1.0, mag)
        return np.where(keep, z, u / mag)
    return u / mag


def _fm_raw(ymat: np.ndarray, v: np.ndarray) -> np.ndarray:
    m = v @ ymat  # Y Hermitian, so V Y^H = V Y
    norms = np.linalg.norm(m, axis=0)
    keep = norms <= ZERO_THRESHOLD
    if np.any(keep):
        norms = np.where(keep, 1.0, norms)
        return np.where(keep, v, m / norms)
    return m / norms


def apply_f1(y: Observation, z) -> PhaseVector:
    """One entrywise-normalized multiplication step on a phase vector."""
    zz = np.asarray(getattr(z, "entries", z), dtype=np.complex128)
    if zz.shape != (y.n,):
        raise ValueError("dimension mismatch")
    return PhaseVector(_f1_raw(y.y, zz))


def apply_fm(y: Observation, v) -> UnitColumnMatrix:
    """One column-normalized multiplication step on a factor matrix."""
    vm = np.asarray(getattr(v, "columns", v), dtype=np.complex128)
    if vm.ndim != 2 or vm.shape[1] != y.n:
        raise ValueError("dimension mismatch")
    return UnitColumnMatrix(_fm_raw(y.y, vm))


def quadratic_objective(y: Observation, iterate) -> float:
    """<Y, Z Z^H> at a vector or factor iterate; real for Hermitian Y."""
    arr = getattr(iterate, "entries", None)
    if arr is None:
        arr = getattr(iterate, "columns", iterate)
    arr = np.asarray(arr, dtype=np.complex128)
    if arr.ndim == 1:
        val = np.vdot(arr, y.y @ arr)
    else:
        val = np.sum((arr @ y.y) * arr.conj())
    if abs(val.imag) > 1e-9 * (abs(val.real) + 1.0):
        raise ArithmeticError("objective has a non-negligible imaginary part")
    return float(val.real)


def _top_eigpairs(y: Observation, k: int, tol: float = 1e-8,
                  max_iter: int = 5000) -> list[tuple[float, np.ndarray]]:
    """Top-k eigenpairs of Y via shifted power iteration with deflation."""
    ymat = y.y
    n = y.n
    beta = float(np.linalg.norm(ymat))
    scale = max(beta, 1.0)
    rng = derive_rng(_BM_INIT_TAG, y.noise.seed)
    pairs: list[tuple[float, np.ndarray]] = []
    for _ in range(min(k, n)):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        for _, u in pairs:
            v -= u * np.vdot(u, v)
        nv = np.linalg.norm(v)
        v = v / nv if nv > 0 else np.ones(n, dtype=np.complex128) / np.sqrt(n)
        lam_b = beta
        for _ in range(max_iter):
            w = ymat @ v + beta * v
            for lam_p, u in pairs:
                w -= (lam_p + beta) * u * np.vdot(u, v)
            lam_b = float(np.real(np.vdot(v, w)))
            if np.linalg.norm(w - lam_b * v) <= tol * scale:
                break
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
            for _, u in pairs:
                v -= u * np.vdot(u, v)
            nv = np.linalg.norm(v)
            if nv == 0.0:
                break
            v = v / nv
        pairs.append((lam_b - beta, v))
    return pairs


def spectral_init_vector(y: Observation, tol: float = 1e-10,
                         max_iter: int = 5000) -> PhaseVector:
    """Entrywise-normalized leading eigenvector of Y (eigenvector method)."""
    est = linops.leading_eigenvector(y, tol=tol, max_iter=max_iter)
    v = est.vector
    mag = np.abs(v)
    keep = mag <= ZERO_THRESHOLD
    mag = np.where(keep, 1.0, mag)
    z0 = np.where(keep, 1.0 + 0.0j, v / mag)
    return PhaseVector(z0)


def spectral_init_columns(y: Observation, m: int, tol: float = 1e-8,
                          max_iter: int = 5000) -> UnitColumnMatrix:
    """Initial factor matrix built from the top-min(m, 3) spectral subspace.

    The k eigenvector rows (conjugated, so m = 1 matches the z^H
    correspondence) are cycled into the m rows with geometrically decaying
    scales, then columns are normalized; an exactly zero column is replaced
    by the first standard basis direction.
    """
    if m < 1:
        raise ValueError("rank budget m must be at least 1")
    k = min(m, 3, y.n)
    pairs = _top_eigpairs(y, k, tol=tol, max_iter=max_iter)
    n = y.n
    v0 = np.empty((m, n), dtype=np.complex128)
    for i in range(m):
        _, u = pairs[i % k]
        v0[i] = np.conj(u) * 2.0 ** (-(i // k))
    norms = np.linalg.norm(v0, axis=0)
    dead = norms <= ZERO_THRESHOLD
    if np.any(dead):
        v0[:, dead] = 0.0
        v0[0, dead] = 1.0
        norms = np.where(dead, 1.0, norms)
    return UnitColumnMatrix(v0 / norms)


def solve_mle(y: Observation, init: PhaseVector | None = None,
              tol: float | None = None,
              max_iter: int = DEFAULT_MAX_ITER) -> FixedPointResult:
    """Generalized power method on phase vectors.

    Iterates F1 from ``init`` (spectral initialization by default) until the
    step ||F1(z) - z|| falls to ``tol``.  The returned iterate is the point
    whose fixed-point residual is reported.  Non-convergence is a reported
    state, not an exception.
    """
    if tol is None:
        tol = default_tol(y.n)
    z = (init if init is not None else spectral_init_vector(y)).entries
    ymat = y.y
    iters = 0
    res = np.inf
    converged = False
    while iters < max_iter:
        w = _f1_raw(ymat, z)
        iters += 1
        res = float(np.linalg.norm(w - z))
        if res <= tol:
            converged = True
            break
        z = w
    iterate = PhaseVector(z)
    return FixedPointResult(iterate, iters, res, quadratic_objective(y, iterate), converged)


def solve_bm(y: Observation, m: int, init: UnitColumnMatrix | None = None,
             tol: float | None = None,
             max_iter: int = DEFAULT_MAX_ITER) -> FixedPointResult:
    """Generalized power method on rank-m factor matrices (m = n gives the
    semidefinite relaxation)."""
    if m < 1:
        raise ValueError("rank budget m must be at least 1")
    if tol is None:
        tol = default_tol(y.n)
    v = (init if init is not None else spectral_init_columns(y, m)).columns
    if v.shape != (m, y.n):
        raise ValueError("initial factor matrix has the wrong shape")
    ymat = y.y
    iters = 0
    res = np.inf
    converged = False
    while iters < max_iter:
        w = _fm_raw(ymat, v)
        iters += 1
        res = float(np.linalg.norm(w - v))
        if res <= tol:
            converged = True
            break
        v = w
    iterate = UnitColumnMatrix(v)
    return FixedPointResult(iterate, iters, res, quadratic_objective(y, iterate), converged)


def random_phase_init(n: int, seed: int) -> PhaseVector:
    rng = derive_rng(_RESTART_TAG, seed)
    return PhaseVector(np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n)))


def _gauge_fix(z: np.ndarray) -> np.ndarray:
    a = z[0]
    out = z * (np.conj(a) / abs(a))
    out[0] = 1.0
    return out


def brute_force_mle(y: Observation, grid_size: int, refine: bool = True) -> BruteForceResult:
    """Exhaustive phase-grid maximizer of <Y, z z^H> with z_1 = 1 fixed.

    Independent oracle for small instances: enumerates grid_size^(n-1)
    phase tuples; with ``refine`` the driver is run from the best grid point
    and the refined point is reported when its objective is higher.
    """
    n = y.n
    k = int(grid_size)
    if k < 1:
        raise ValueError("grid_size must be at least 1")
    if n > BRUTE_FORCE_MAX_N or k ** max(n - 1, 0) > BRUTE_FORCE_MAX_GRID:
        raise ValueError("instance too large for the brute-force oracle")
    ymat = y.y
    if n == 1:
        z = np.ones(1, dtype=np.complex128)
        return BruteForceResult(PhaseVector(z), float(ymat[0, 0].real), k, False)

    phases = np.exp(2j * np.pi * np.arange(k) / k)
    total = k ** (n - 1)
    best_obj = -np.inf
    best_z: np.ndarray | None = None
    chunk = 1 << 14
    shape = (k,) * (n - 1)
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        idx = np.unravel_index(np.arange(lo, hi), shape)
        zs = np.empty((n, hi - lo), dtype=np.complex128)
        zs[0] = 1.0
        for j in range(1, n):
            zs[j] = phases[idx[j - 1]]
        objs = np.einsum("jb,jk,kb->b", zs.conj(), ymat, zs).real
        pos = int(np.argmax(objs))
        if objs[pos] > best_obj:
            best_obj = float(objs[pos])
            best_z = zs[:, pos].copy()

    assert best_z is not None
    maximizer = best_z
    refined = False
    if refine:
        run = solve_mle(y, init=PhaseVector(best_z))
        obj_refined = run.objective
        if obj_refined > best_obj:
            maximizer = run.iterate.entries
            best_obj = obj_refined
            refined = True
    z = _gauge_fix(maximizer)
    pv = PhaseVector(z)
    return BruteForceResult(pv, quadratic_objective(y, pv), k, refined)
