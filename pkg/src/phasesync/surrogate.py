"""Lipschitz-surrogate machinery: the floor-normalization map, the scalar
surrogate of the power-method map, leave-one-out counterparts, and the
scalar grid.

The surrogate replaces the entrywise normalization x -> x/|x| by the
Lipschitz floor map g_t(x) = x / max(|x|, t) and iterates

    [G(z, s, t)]_j = g_t(z*_j s + sigma [W z]_j)

over vectors of modulus at most 1.  For t >= 2 sigma ||W|| the map is a
1/2-contraction: successive gaps halve, the fixed point is unique, and it
is reached by iterating from the truth vector.  The leave-one-out variant
G^(-j) uses the noise matrix with row and column j zeroed, so its fixed
point is independent of that row; the two iterate sequences stay within
distance 3 uniformly.

All drivers refuse to run when the contraction precondition fails, because
every downstream inequality is conditional on it.  The measured operator
norm is inflated by 1 percent to absorb estimator error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linops
from .estimators import FixedPointResult, quadratic_objective
from .model import Observation, SoftPhaseVector

OPNORM_INFLATION = 1.01


class ContractViolation(ValueError):
    """A driver was invoked outside its guaranteed-contraction region, or a
    guaranteed contraction property failed during iteration."""


@dataclass(frozen=True)
class SurrogateParams:
    """Scalar knobs of the surrogate analysis: the alignment scalar s, the
    normalization floor t, and (when a chain computation needs them) the
    closeness delta/epsilon and the grid spacing h."""

    s: complex
    t: float
    delta: float | None = None
    epsilon: float | None = None
    h: float | None = None

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("floor t must be positive")
        if self.delta is not None and self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.epsilon is not None and not 0.0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")
        if self.h is not None and self.h <= 0:
            raise ValueError("grid spacing h must be positive")


@dataclass(frozen=True)
class LeaveOneOutBundle:
    """Leave-one-out fixed point for one index, the masked noise matrix it
    was computed from, and (optionally) the per-iteration gaps to the
    unmasked sequence."""

    index: int
    masked_noise: np.ndarray
    fixed_point: SoftPhaseVector
    iterate_trace_norm_gaps: np.ndarray | None = field(default=None)


def contraction_floor(sigma: float, opnorm_w: float) -> float:
    """Smallest floor t accepted by the fixed-point drivers."""
    return 2.0 * float(sigma) * OPNORM_INFLATION * float(opnorm_w)


def _require_contraction(t: float, sigma: float, opnorm_w: float, factor: float = 2.0):
    floor = factor * sigma * OPNORM_INFLATION * opnorm_w
    if t < floor * (1.0 - 1e-12):
        raise ContractViolation(
            f"floor t={t:.6g} is below {factor:g}*sigma*||W|| = {floor:.6g}")


def g_floor(x, t: float):
    """Floor normalization x / max(|x|, t); modulus of the result is <= 1."""
    if t <= 0:
        raise ValueError("floor t must be positive")
    xa = np.asarray(x, dtype=np.complex128)
    out = xa / np.maximum(np.abs(xa), t)
    if xa.ndim == 0:
        return complex(out)
    return out


def _soft(z) -> np.ndarray:
    return np.asarray(getattr(z, "entries", z), dtype=np.complex128)


def _drive_field(obs: Observation, z: np.ndarray, s: complex,
                 noise: np.ndarray | None = None) -> np.ndarray:
    w = obs.noise.entries if noise is None else noise
    return obs.truth.entries * s + obs.sigma * (w @ z)


def apply_f1_prime(z, s: complex, obs: Observation) -> SoftPhaseVector:
    """One step of the scalar-pinned normalization map: coordinate j is
    z*_j s + sigma [W z]_j normalized, with z_j kept on an exact zero."""
    zz = _soft(z)
    if zz.shape != (obs.n,):
        raise ValueError("dimension mismatch")
    u = _drive_field(obs, zz, s)
    mag = np.abs(u)
    keep = mag <= 1e-300
    mag = np.where(keep, 1.0, mag)
    return SoftPhaseVector(np.where(keep, zz, u / mag))


def apply_g(z, params: SurrogateParams, obs: Observation) -> SoftPhaseVector:
    """One step of the floor-normalized surrogate map."""
    zz = _soft(z)
    if zz.shape != (obs.n,):
        raise ValueError("dimension mismatch")
    u = _drive_field(obs, zz, params.s)
    return SoftPhaseVector(u / np.maximum(np.abs(u), params.t))


def mask_noise(w, j: int) -> np.ndarray:
    """Copy of the noise matrix with row and column j zeroed."""
    wm = np.array(getattr(w, "entries", w), dtype=np.complex128, copy=True)
    n = wm.shape[0]
    if not 0 <= j < n:
        raise IndexError(f"index {j} out of range for n={n}")
    wm[j, :] = 0.0
    wm[:, j] = 0.0
    return wm


def count_small_coordinates(vec, threshold: float) -> int:
    """#{j : |vec_j| < threshold}, with a strict inequality."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    v = np.asarray(getattr(vec, "entries", vec))
    return int(np.count_nonzero(np.abs(v) < threshold))


def grid_scalars(n: int, epsilon: float, h: float) -> np.ndarray:
    """Descending grid s_k = n - k h for k = 0 .. ceil(n*epsilon/h); the last
    point is at least (1 - epsilon) n - h, so the grid covers the interval
    where the alignment scalar of a close estimate can live."""
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    if h <= 0:
        raise ValueError("grid spacing h must be positive")
    kmax = int(np.ceil(n * epsilon / h))
    return n - h * np.arange(kmax + 1, dtype=float)


def _iterate_to_fixed_point(obs: Observation, params: SurrogateParams,
                            noise: np.ndarray, tol: float, max_iter: int):
    """Shared contraction loop from z^(0) = z*; enforces gap halving."""
    z = obs.truth.entries.astype(np.complex128, copy=True)
    truth_s = obs.truth.entries * params.s
    sigma = obs.sigma
    t = params.t
    gaps: list[float] = []
    iterates = [z]
    gap_prev = None
    for _ in range(max_iter):
        u = truth_s + sigma * (noise @ z)
        w = u / np.maximum(np.abs(u), t)
        gap = float(np.linalg.norm(w - z))
        if gap_prev is not None and gap > 0.5 * gap_prev + 1e-12:
            raise ContractViolation(
                f"gap failed to halve: {gap:.3e} after {gap_prev:.3e}")
        gaps.append(gap)
        iterates.append(w)
        z = w
        if gap <= tol:
            return z, gaps, iterates
        gap_prev = gap
    raise ContractViolation(
        f"no convergence within {max_iter} iterations despite the contraction "
        f"precondition (last gap {gaps[-1]:.3e})")


def _resolve_opnorm(obs: Observation, opnorm_w: float | None) -> float:
    if opnorm_w is not None:
        return float(opnorm_w)
    return linops.operator_norm(obs.noise.entries, tol=1e-10).value


def fixed_point_g(params: SurrogateParams, obs: Observation,
                  tol: float | None = None, max_iter: int = 10000,
                  opnorm_w: float | None = None) -> FixedPointResult:
    """Unique fixed point of the surrogate map, reached from the truth
    vector.  Requires the contraction precondition t >= 2 sigma ||W||."""
    opn = _resolve_opnorm(obs, opnorm_w)
    _require_contraction(params.t, obs.sigma, opn)
    if tol is None:
        tol = 1e-12 * np.sqrt(obs.n)
    z, gaps, _ = _iterate_to_fixed_point(obs, params, obs.noise.entries, tol, max_iter)
    iterate = SoftPhaseVector(z)
    return FixedPointResult(iterate, len(gaps), gaps[-1],
                            quadratic_objective(obs, iterate), True)


def fixed_point_g_loo(params: SurrogateParams, obs: Observation, j: int,
                      tol: float | None = None, max_iter: int = 10000,
                      record_trace: bool = False,
                      opnorm_w: float | None = None) -> LeaveOneOutBundle:
    """Fixed point of the leave-one-out surrogate map for index j.

    With ``record_trace`` the unmasked sequence is run in lockstep and the
    per-iteration gaps ||z^(T) - z^(T,-j)|| are stored; after the shorter
    sequence converges its last iterate is held fixed.
    """
    opn = _resolve_opnorm(obs, opnorm_w)
    _require_contraction(params.t, obs.sigma, opn)
    if tol is None:
        tol = 1e-12 * np.sqrt(obs.n)
    masked = mask_noise(obs.noise, j)
    z_loo, _, iter_loo = _iterate_to_fixed_point(obs, params, masked, tol, max_iter)
    trace = None
    if record_trace:
        _, _, iter_plain = _iterate_to_fixed_point(
            obs, params, obs.noise.entries, tol, max_iter)
        horizon = max(len(iter_plain), len(iter_loo))
        gaps = np.empty(horizon - 1)
        for t_idx in range(1, horizon):
            a = iter_plain[min(t_idx, len(iter_plain) - 1)]
            b = iter_loo[min(t_idx, len(iter_loo) - 1)]
            gaps[t_idx - 1] = np.linalg.norm(a - b)
        trace = gaps
    return LeaveOneOutBundle(index=j, masked_noise=masked,
                             fixed_point=SoftPhaseVector(z_loo),
                             iterate_trace_norm_gaps=trace)
