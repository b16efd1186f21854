"""Domain types for the phase-synchronization model and seeded instance generation.

The observation model is

    Y = z z^H + sigma * W,    diag(Y) = 1,

with z a length-n vector of unit complex numbers and W an n x n Hermitian
noise matrix whose upper-triangle entries are i.i.d. standard complex
Gaussian (real and imaginary parts independent N(0, 1/2), so E|W_jk|^2 = 1).

All randomness flows through :func:`derive_rng`, a counter-based Philox
generator keyed by integer tuples, so any worker can rebuild stream
``(seed, tag)`` without coordination.  Normal variates come from numpy's
ziggurat; bitwise reproducibility therefore holds per platform and numpy
version.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-12

# stream tags so that generate_truth(n, s) and sample_noise(n, s) draw from
# disjoint streams even when handed the same seed
_TRUTH_TAG = 0x545255
_NOISE_TAG = 0x4E4F49


def derive_rng(*keys: int) -> np.random.Generator:
    """Philox generator for an integer key tuple (order matters)."""
    ss = np.random.SeedSequence([int(k) & 0xFFFFFFFFFFFFFFFF for k in keys])
    return np.random.Generator(np.random.Philox(seed=ss))


def derive_seed(*keys: int) -> int:
    """64-bit child seed derived from a key tuple (the documented
    ``seed_trial = hash(master_seed, trial_index)`` rule)."""
    ss = np.random.SeedSequence([int(k) & 0xFFFFFFFFFFFFFFFF for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _as_complex_vector(x) -> np.ndarray:
    z = np.asarray(x, dtype=np.complex128)
    if z.ndim != 1 or z.size < 1:
        raise ValueError("expected a nonempty 1-d complex vector")
    return z


@dataclass(frozen=True)
class PhaseVector:
    """Length-n complex vector with unit-modulus entries."""

    entries: np.ndarray

    def __post_init__(self):
        z = _as_complex_vector(self.entries)
        if np.max(np.abs(np.abs(z) - 1.0)) > UNIT_TOL:
            raise ValueError("PhaseVector entries must have unit modulus")
        object.__setattr__(self, "entries", z)

    @property
    def n(self) -> int:
        return self.entries.size


@dataclass(frozen=True)
class SoftPhaseVector:
    """Length-n complex vector with entries of modulus at most 1."""

    entries: np.ndarray

    def __post_init__(self):
        z = _as_complex_vector(self.entries)
        if np.max(np.abs(z)) > 1.0 + UNIT_TOL:
            raise ValueError("SoftPhaseVector entries must have modulus <= 1")
        object.__setattr__(self, "entries", z)

    @property
    def n(self) -> int:
        return self.entries.size


@dataclass(frozen=True)
class UnitColumnMatrix:
    """m x n complex matrix with unit-norm columns."""

    columns: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.columns, dtype=np.complex128)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("expected a nonempty 2-d complex matrix")
        norms = np.linalg.norm(v, axis=0)
        if np.max(np.abs(norms - 1.0)) > UNIT_TOL:
            raise ValueError("UnitColumnMatrix columns must have unit norm")
        object.__setattr__(self, "columns", v)

    @property
    def rank_budget(self) -> int:
        return self.columns.shape[0]

    @property
    def n(self) -> int:
        return self.columns.shape[1]


@dataclass(frozen=True)
class NoiseMatrix:
    """Hermitian noise matrix with zero diagonal, plus its generating seed."""

    entries: np.ndarray
    seed: int

    def __post_init__(self):
        w = np.asarray(self.entries, dtype=np.complex128)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ValueError("noise matrix must be square and nonempty")
        if np.max(np.abs(np.diagonal(w))) != 0.0:
            raise ValueError("noise matrix must have an exactly zero diagonal")
        if np.max(np.abs(w - w.conj().T)) > UNIT_TOL:
            raise ValueError("noise matrix must be Hermitian")
        object.__setattr__(self, "entries", w)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class Observation:
    """Observed matrix Y together with the parameters that generated it."""

    y: np.ndarray
    sigma: float
    truth: PhaseVector
    noise: NoiseMatrix

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.complex128)
        n = self.truth.n
        if y.shape != (n, n) or self.noise.n != n:
            raise ValueError("observation dimensions do not match")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if np.max(np.abs(y - y.conj().T)) > UNIT_TOL:
            raise ValueError("Y must be Hermitian")
        if np.any(np.diagonal(y) != 1.0):
            raise ValueError("Y must have unit diagonal")
        z = self.truth.entries
        recon = np.outer(z, z.conj()) + self.sigma * self.noise.entries
        np.fill_diagonal(recon, 1.0)
        scale = 1.0 + self.sigma
        if np.max(np.abs(y - recon)) > 1e-9 * scale:
            raise ValueError("Y does not match truth*truth^H + sigma*noise")
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.truth.n


def generate_truth(n: int, seed: int) -> PhaseVector:
    """Sample a truth vector with i.i.d. uniform phases on [0, 2*pi)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = derive_rng(_TRUTH_TAG, seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return PhaseVector(np.exp(1j * theta))


def truth_ones(n: int) -> PhaseVector:
    """All-ones truth, a gauge-trivial instance useful for debugging."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return PhaseVector(np.ones(n, dtype=np.complex128))


def sample_noise(n: int, seed: int) -> NoiseMatrix:
    """Hermitian matrix with i.i.d. CN(0,1) entries above the diagonal."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = derive_rng(_NOISE_TAG, seed)
    rows, cols = np.triu_indices(n, k=1)
    count = rows.size
    re = rng.standard_normal(count)
    im = rng.standard_normal(count)
    w = np.zeros((n, n), dtype=np.complex128)
    w[rows, cols] = (re + 1j * im) / np.sqrt(2.0)
    w = w + w.conj().T
    return NoiseMatrix(w, seed=int(seed))


def assemble_observation(truth: PhaseVector, sigma: float, noise: NoiseMatrix) -> Observation:
    """Form Y = truth*truth^H + sigma*noise with the diagonal forced to 1."""
    if truth.n != noise.n:
        raise ValueError("truth and noise dimensions do not match")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    z = truth.entries
    outer = np.outer(z, z.conj())
    # numpy's vectorized complex multiply is not exactly conjugate-symmetric;
    # averaging restores bitwise Hermitian symmetry at 1 ulp cost
    outer = (outer + outer.conj().T) / 2.0
    y = outer + float(sigma) * noise.entries
    np.fill_diagonal(y, 1.0)
    return Observation(y=y, sigma=float(sigma), truth=truth, noise=noise)


def make_instance(n: int, sigma: float, seed: int, ones_truth: bool = False) -> Observation:
    """Generate a complete synthetic instance from a single seed."""
    truth = truth_ones(n) if ones_truth else generate_truth(n, seed)
    noise = sample_noise(n, seed)
    return assemble_observation(truth, sigma, noise)
