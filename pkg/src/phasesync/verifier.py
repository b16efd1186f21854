"""Randomized verification suite for every quantitative claim the library
is built on: contraction inequalities for the normalized-multiplication
maps, properties of the floor surrogate and its leave-one-out variants,
count-transfer bounds connecting the estimators, and the end-to-end
discrepancy chain.

Each registered check states the inequality it exercises, samples inputs
that satisfy the claim's preconditions (resampling on a miss, up to a cap),
evaluates both sides, and records the worst slack ``bound - observed``
seen.  A trial fails when the slack drops below ``-tolerance``.  Checks are
deterministic given the master seed, and instances are shared across
checks through a keyed pool so the expensive pieces (operator norms,
estimator fixed points) are computed once.

In adversarial mode the floor parameter is pushed just below the
contraction threshold; contraction-dependent checks then only verify that
the drivers refuse to run, and report a precondition-unmet status instead
of asserting anything.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bounds, linops
from .estimators import (FixedPointResult, apply_f1, apply_fm, solve_bm,
                         solve_mle)
from .harness import worker_count
from .losses import frob_discrepancy, loss_ell1, loss_ellm
from .model import Observation, derive_rng, derive_seed, make_instance
from .surrogate import (ContractViolation, SurrogateParams, apply_f1_prime,
                        apply_g, count_small_coordinates, fixed_point_g,
                        fixed_point_g_loo, g_floor, grid_scalars, mask_noise)

_POOL_TAG = 0x504F4F4C
_CHECK_TAG = 0x434845

# Canonical names of the quantitative claims this suite must cover.  The
# completeness meta-test in the test suite fails the build if any claim
# has no registered check.
CLAIMS = (
    "matrix-multiplication-contraction",
    "normalization-distance-bound",
    "joint-contraction-with-count-error",
    "fixed-point-count-bound",
    "estimate-count-bound",
    "crude-accuracy-bound",
    "floor-map-lipschitz",
    "surrogate-map-lipschitz",
    "surrogate-gap-halving",
    "surrogate-unique-fixed-point",
    "surrogate-scalar-sensitivity",
    "floor-vs-exact-normalization-error",
    "estimate-to-surrogate-distance",
    "small-entry-count-transfer",
    "scalar-modulus-reduction",
    "scalar-grid-cover",
    "grid-tail-cover",
    "masked-fixed-point-limit",
    "masked-map-contraction",
    "leave-one-out-gap-bound",
    "tail-decoupling",
    "end-to-end-discrepancy-chain",
    "loss-domination",
    "operator-norm-concentration",
    "expected-discrepancy-decay",
    "tightness-region",
)


@dataclass(frozen=True)
class VerifierConfig:
    trials: int = 50
    sizes: tuple[int, ...] = (20, 100, 400)
    loo_samples: int = 10
    tolerance: float = 1e-9
    adversarial: bool = False
    max_workers: int | None = None

    def __post_init__(self):
        if self.trials < 1 or self.loo_samples < 1 or self.tolerance <= 0:
            raise ValueError("invalid verifier configuration")
        if not self.sizes or any(n < 5 for n in self.sizes):
            raise ValueError("check sizes must be at least 5")


@dataclass
class CheckResult:
    check_id: str
    trials: int
    failures: int
    worst_slack: float
    params_digest: str
    statement: str = ""
    status: str = "ok"
    precondition_misses: int = 0

    def to_json(self) -> str:
        d = dict(self.__dict__)
        if not math.isfinite(d["worst_slack"]):
            d["worst_slack"] = None
        return json.dumps(d, sort_keys=True)


class Tally:
    """Accumulates per-trial slacks for one check."""

    def __init__(self, tolerance: float):
        self.tolerance = tolerance
        self.trials = 0
        self.failures = 0
        self.worst = math.inf
        self.misses = 0
        self._trial_worst = math.inf

    def begin(self):
        self._trial_worst = math.inf

    def bound(self, observed: float, limit: float):
        slack = float(limit) - float(observed)
        self._trial_worst = min(self._trial_worst, slack)

    def require(self, ok: bool):
        self.bound(0.0 if ok else 1.0, 0.0)

    def miss(self):
        self.misses += 1

    def end(self):
        self.trials += 1
        if self._trial_worst < math.inf:
            self.worst = min(self.worst, self._trial_worst)
        if self._trial_worst < -self.tolerance:
            self.failures += 1


class _PoolEntry:
    """One cached instance with lazily computed expensive artifacts."""

    def __init__(self, n: int, sigma: float, seed: int):
        self.obs = make_instance(n, sigma, seed)
        self._lock = threading.Lock()
        self._opnorm: float | None = None
        self._mle: FixedPointResult | None = None
        self._bm: dict[int, FixedPointResult] = {}

    @property
    def opnorm(self) -> float:
        with self._lock:
            if self._opnorm is None:
                self._opnorm = linops.operator_norm(
                    self.obs.noise.entries, tol=1e-10).value
            return self._opnorm

    @property
    def mle(self) -> FixedPointResult:
        with self._lock:
            if self._mle is None:
                self._mle = solve_mle(self.obs)
            return self._mle

    def bm(self, m: int) -> FixedPointResult:
        with self._lock:
            if m not in self._bm:
                self._bm[m] = solve_bm(self.obs, m)
            return self._bm[m]

    @property
    def shat(self) -> complex:
        return complex(np.vdot(self.obs.truth.entries, self.mle.iterate.entries))


class InstancePool:
    def __init__(self, master_seed: int):
        self.master_seed = master_seed
        self._entries: dict[tuple, _PoolEntry] = {}
        self._locks: dict[tuple, threading.Lock] = {}
        self._mutex = threading.Lock()

    def entry(self, n: int, sigma: float, idx: int) -> _PoolEntry:
        key = (n, struct.pack("<d", sigma), idx)
        with self._mutex:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            if key not in self._entries:
                sbits = struct.unpack("<Q", struct.pack("<d", sigma))[0]
                seed = derive_seed(self.master_seed, _POOL_TAG, n, sbits, idx)
                self._entries[key] = _PoolEntry(n, sigma, seed)
            return self._entries[key]


@dataclass
class CheckContext:
    rng: np.random.Generator
    pool: InstancePool
    config: VerifierConfig
    tally: Tally

    def size(self, trial: int, sizes=None) -> int:
        choices = sizes if sizes is not None else self.config.sizes
        return choices[trial % len(choices)]


# ---------------------------------------------------------------------------
# samplers

def _near_truth_vector(rng, obs: Observation, epsilon: float, cap: int = 100):
    """Unimodular z with ell1(z, z*) <= epsilon^2, by perturb-and-project."""
    zs = obs.truth.entries
    n = zs.size
    for _ in range(cap):
        rho = 0.5 * epsilon * rng.uniform(0.2, 1.0)
        g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        pert = zs + rho * g
        mag = np.abs(pert)
        if np.min(mag) <= 1e-300:
            continue
        z = pert / mag
        if loss_ell1(z, zs) <= epsilon**2:
            return z
    return None


def _near_truth_columns(rng, obs: Observation, m: int, epsilon: float, cap: int = 100):
    """Unit-column V with ellm(V, z*) <= epsilon^2."""
    zs = obs.truth.entries
    n = zs.size
    for _ in range(cap):
        a = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        a /= np.linalg.norm(a)
        rho = 0.35 * epsilon * rng.uniform(0.2, 1.0)
        g = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        v = np.outer(a, np.conj(zs)) + rho * g
        norms = np.linalg.norm(v, axis=0)
        if np.min(norms) <= 1e-300:
            continue
        v = v / norms
        if loss_ellm(v, zs) <= epsilon**2:
            return v
    return None


def _soft_vector(rng, n: int) -> np.ndarray:
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    mag = np.abs(z)
    scale = rng.uniform(0.05, 1.0)
    return z / np.maximum(mag, 1e-12) * (scale * rng.uniform(0.0, 1.0, size=n))


def _sigma_tight(n: int, frac: float = 0.8) -> float:
    return frac * bounds.tightness_threshold(n)


def _adversarial_probe(ctx: CheckContext) -> bool:
    """In adversarial mode, verify the drivers refuse a floor just below the
    contraction threshold, then skip the check."""
    if not ctx.config.adversarial:
        return False
    entry = ctx.pool.entry(ctx.config.sizes[0], 1.0, 0)
    t_bad = 1.99 * entry.obs.sigma * entry.opnorm
    params = SurrogateParams(s=complex(entry.obs.n), t=t_bad)
    try:
        fixed_point_g(params, entry.obs, opnorm_w=entry.opnorm)
    except ContractViolation:
        return True
    raise AssertionError("driver accepted a floor below the contraction threshold")


# ---------------------------------------------------------------------------
# checks

def check_matmul_contraction(ctx: CheckContext):
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = (0.5, 2.0)[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        obs, opn = entry.obs, entry.opnorm
        epsilon = ctx.rng.uniform(0.05, 0.45)
        m = int(ctx.rng.integers(2, 6))
        z = _near_truth_vector(ctx.rng, obs, epsilon)
        v = _near_truth_columns(ctx.rng, obs, m, epsilon)
        if z is None or v is None:
            t.miss()
            t.end()
            continue
        lhs = loss_ellm(v @ obs.y, obs.y @ z)
        rhs = n**2 * (6.0 * epsilon + sigma * opn / n) ** 2 * loss_ellm(v, z)
        t.bound(lhs, rhs)
        t.end()


def check_normalization_bound(ctx: CheckContext):
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        m = int(ctx.rng.integers(1, 9))
        for _ in range(200):
            x = ctx.rng.standard_normal(m) + 1j * ctx.rng.standard_normal(m)
            y = ctx.rng.standard_normal(m) + 1j * ctx.rng.standard_normal(m)
            x *= 10.0 ** ctx.rng.uniform(-2, 2)
            y *= 10.0 ** ctx.rng.uniform(-2, 2)
            tt = 10.0 ** ctx.rng.uniform(-2, 2)
            lhs = np.linalg.norm(x / np.linalg.norm(x) - y / np.linalg.norm(y))
            rhs = 2.0 * np.linalg.norm(x - y) / tt + 2.0 * (np.linalg.norm(y) < tt)
            t.bound(lhs, rhs)
            # four-argument variant with possible exact zeros
            u = ctx.rng.standard_normal(m) + 1j * ctx.rng.standard_normal(m)
            v = ctx.rng.standard_normal(m) + 1j * ctx.rng.standard_normal(m)
            u /= max(np.linalg.norm(u), 1.0)
            v /= max(np.linalg.norm(v), 1.0)
            branch = ctx.rng.integers(0, 4)
            x2 = np.zeros(m, complex) if branch in (1, 3) else x
            y2 = np.zeros(m, complex) if branch in (2, 3) else y
            left = (x2 / np.linalg.norm(x2) if np.linalg.norm(x2) else u)
            right = (y2 / np.linalg.norm(y2) if np.linalg.norm(y2) else v)
            lhs2 = np.linalg.norm(left - right)
            rhs2 = 2.0 * np.linalg.norm(x2 - y2) / tt + 2.0 * (np.linalg.norm(y2) < tt)
            t.bound(lhs2, rhs2)
        t.end()


def check_joint_contraction(ctx: CheckContext):
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = (0.5, 2.0)[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        obs, opn = entry.obs, entry.opnorm
        epsilon = ctx.rng.uniform(0.05, 0.45)
        m = int(ctx.rng.integers(2, 6))
        z = _near_truth_vector(ctx.rng, obs, epsilon)
        v = _near_truth_columns(ctx.rng, obs, m, epsilon)
        if z is None or v is None:
            t.miss()
            t.end()
            continue
        tt = n * 10.0 ** ctx.rng.uniform(-2, 0.5)
        lhs = loss_ellm(apply_fm(obs, v).columns, apply_f1(obs, z).entries)
        count = count_small_coordinates(obs.y @ z, tt)
        rhs = (4.0 * n**2 / tt**2 * (6.0 * epsilon + sigma * opn / n) ** 2
               * loss_ellm(v, z) + 4.0 / n * count)
        t.bound(lhs, rhs)
        t.end()


def _fixed_point_pair(ctx: CheckContext, trial: int, sizes=None):
    """Converged estimator pair in a regime where both are near the truth."""
    n = ctx.size(trial, sizes)
    sigma = (0.02 * math.sqrt(n), _sigma_tight(n))[trial % 2]
    entry = ctx.pool.entry(n, sigma, trial)
    m = (2, 5)[(trial // 2) % 2]
    mle, bm = entry.mle, entry.bm(m)
    if not (mle.converged and bm.converged):
        return None
    obs = entry.obs
    e1 = loss_ell1(mle.iterate, obs.truth)
    em = loss_ellm(bm.iterate, obs.truth)
    eps = math.sqrt(max(e1, em, 1e-30)) * 1.000001
    if eps >= 0.5:
        return None
    return entry, m, eps


def check_fixed_point_count_bound(ctx: CheckContext):
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        got = _fixed_point_pair(ctx, trial)
        if got is None:
            t.miss()
            t.end()
            continue
        entry, m, eps = got
        obs, opn = entry.obs, entry.opnorm
        n = obs.n
        delta = (2.0 * math.sqrt(2.0) * (6.0 * eps + obs.sigma * opn / n)
                 * (1.0 + 1e-6) * ctx.rng.choice([1.0, 1.7]))
        lhs = loss_ellm(entry.bm(m).iterate, entry.mle.iterate)
        count = count_small_coordinates(obs.y @ entry.mle.iterate.entries, delta * n)
        t.bound(lhs, 8.0 / n * count)
        t.end()


def check_estimate_count_bound(ctx: CheckContext):
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        got = _fixed_point_pair(ctx, trial)
        if got is None:
            t.miss()
            t.end()
            continue
        entry, m, eps = got
        obs, opn = entry.obs, entry.opnorm
        delta = (2.0 * math.sqrt(2.0) * (6.0 * eps + obs.sigma * opn / obs.n)
                 * (1.0 + 1e-6))
        if not bounds.corollary1_precondition_ok(delta, eps, obs.sigma, opn, obs.n):
            t.miss()
            t.end()
            continue
        lhs = loss_ellm(entry.bm(m).iterate, entry.mle.iterate)
        t.bound(lhs, bounds.corollary1_rhs(obs, entry.mle.iterate, delta))
        t.end()


def check_crude_accuracy_bound(ctx: CheckContext):
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = _sigma_tight(n, (0.5, 0.8)[trial % 2])
        entry = ctx.pool.entry(n, sigma, trial)
        if not (entry.mle.converged and entry.bm(2).converged):
            t.miss()
            t.end()
            continue
        cap = bounds.crude_loss_bound(sigma, entry.opnorm, n) + 1e-6
        t.bound(loss_ell1(entry.mle.iterate, entry.obs.truth), cap)
        t.bound(loss_ellm(entry.bm(2).iterate, entry.obs.truth), cap)
        t.end()


def check_floor_lipschitz(ctx: CheckContext):
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        x = (ctx.rng.standard_normal(2000) + 1j * ctx.rng.standard_normal(2000))
        y = (ctx.rng.standard_normal(2000) + 1j * ctx.rng.standard_normal(2000))
        x *= 10.0 ** ctx.rng.uniform(-2, 2, size=2000)
        y *= 10.0 ** ctx.rng.uniform(-2, 2, size=2000)
        for tt in (0.1, 1.0, 10.0):
            lhs = np.abs(g_floor(x, tt) - g_floor(y, tt))
            rhs = np.abs(x - y) / tt
            t.bound(float(np.max(lhs - rhs)), 0.0)
        t.end()


def check_surrogate_lipschitz(ctx: CheckContext):
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = (1.0, 3.0)[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        obs, opn = entry.obs, entry.opnorm
        s = complex(n * ctx.rng.uniform(0.3, 1.0) * np.exp(1j * ctx.rng.uniform(0, 2 * np.pi)))
        tt = sigma * opn * 10.0 ** ctx.rng.uniform(-0.5, 1.0)
        params = SurrogateParams(s=s, t=tt)
        x = _soft_vector(ctx.rng, n)
        y = _soft_vector(ctx.rng, n)
        lhs = np.linalg.norm(apply_g(x, params, obs).entries
                             - apply_g(y, params, obs).entries)
        rhs = sigma * opn / tt * np.linalg.norm(x - y)
        t.bound(lhs, rhs)
        t.end()


def check_gap_halving(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = (1.0, 3.0)[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        obs, opn = entry.obs, entry.opnorm
        tt = (2.02, 5.0)[trial % 2] * sigma * opn
        params = SurrogateParams(s=complex(n * ctx.rng.uniform(0.5, 1.0)), t=tt)
        z = _soft_vector(ctx.rng, n)  # halving holds from any start in the ball
        gap_prev = None
        for _ in range(25):
            w = apply_g(z, params, obs).entries
            gap = float(np.linalg.norm(w - z))
            if gap_prev is not None:
                t.bound(gap, 0.5 * gap_prev)
            if gap <= 1e-14:
                break
            z, gap_prev = w, gap
        t.end()


def check_unique_fixed_point(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    tol = 1e-12
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = (1.0, 3.0)[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        obs, opn = entry.obs, entry.opnorm
        params = SurrogateParams(s=complex(n * ctx.rng.uniform(0.5, 1.0)),
                                 t=2.02 * sigma * opn)
        run = fixed_point_g(params, obs, tol=tol, opnorm_w=opn)
        # iteration budget implied by the geometric gap decay
        z1 = apply_g(obs.truth.entries, params, obs).entries
        gap1 = np.linalg.norm(z1 - obs.truth.entries)
        if gap1 > tol:
            t.bound(run.iterations, math.ceil(math.log2(gap1 / tol)) + 2)
        # a different admissible start reaches the same point
        z = _soft_vector(ctx.rng, n)
        for _ in range(10000):
            w = apply_g(z, params, obs).entries
            if np.linalg.norm(w - z) <= tol:
                z = w
                break
            z = w
        t.bound(np.linalg.norm(z - run.iterate.entries), 20.0 * tol)
        t.end()


def check_scalar_sensitivity(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = (1.0, 3.0)[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        obs, opn = entry.obs, entry.opnorm
        tt = 2.02 * sigma * opn * ctx.rng.uniform(1.0, 2.0)
        s1 = complex(n * ctx.rng.uniform(0.4, 1.0))
        s2 = s1 + (ctx.rng.standard_normal() + 1j * ctx.rng.standard_normal()) * 0.1 * n
        z1 = fixed_point_g(SurrogateParams(s=s1, t=tt), obs, opnorm_w=opn).iterate.entries
        z2 = fixed_point_g(SurrogateParams(s=s2, t=tt), obs, opnorm_w=opn).iterate.entries
        zs, w = obs.truth.entries, obs.noise.entries
        t.bound(np.linalg.norm(z1 - z2) ** 2, 4.0 * n / tt**2 * abs(s1 - s2) ** 2)
        f1 = zs * s1 + sigma * (w @ z1)
        f2 = zs * s2 + sigma * (w @ z2)
        t.bound(np.linalg.norm(f1 - f2) ** 2, 4.0 * n * abs(s1 - s2) ** 2)
        t.end()


def check_floor_approximation(ctx: CheckContext):
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = (1.0, 3.0)[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        obs = entry.obs
        s = complex(n * ctx.rng.uniform(0.0, 1.0) * np.exp(1j * ctx.rng.uniform(0, 2 * np.pi)))
        tt = 10.0 ** ctx.rng.uniform(-1, 0.7) * sigma * math.sqrt(n)
        z = _soft_vector(ctx.rng, n)
        lhs = np.linalg.norm(apply_f1_prime(z, s, obs).entries
                             - apply_g(z, SurrogateParams(s=s, t=tt), obs).entries) ** 2
        field = obs.truth.entries * s + sigma * (obs.noise.entries @ z)
        t.bound(lhs, 4.0 * count_small_coordinates(field, tt))
        t.end()


def check_estimate_surrogate_distance(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = _sigma_tight(n, (0.7, 0.95)[trial % 2])
        entry = ctx.pool.entry(n, sigma, trial)
        if not entry.mle.converged:
            t.miss()
            t.end()
            continue
        obs, opn = entry.obs, entry.opnorm
        shat = entry.shat
        tt = 4.04 * sigma * opn * ctx.rng.uniform(1.0, 1.5)
        zg = fixed_point_g(SurrogateParams(s=shat, t=tt), obs, opnorm_w=opn).iterate.entries
        zhat = entry.mle.iterate.entries
        field = obs.truth.entries * shat + sigma * (obs.noise.entries @ zg)
        lhs = np.linalg.norm(zhat - zg) ** 2
        t.bound(lhs, 32.0 * count_small_coordinates(field, tt))
        t.end()


def _count_lhs(entry: _PoolEntry, delta: float) -> float:
    obs = entry.obs
    yz = obs.y @ entry.mle.iterate.entries
    return count_small_coordinates(yz, delta * obs.n) / obs.n


def check_count_transfer(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = _sigma_tight(n, (0.7, 0.95)[trial % 2])
        entry = ctx.pool.entry(n, sigma, trial)
        if not entry.mle.converged:
            t.miss()
            t.end()
            continue
        obs, opn = entry.obs, entry.opnorm
        delta = 2.02 * sigma * opn / n * ctx.rng.choice([1.0, 2.5])
        shat = entry.shat
        z = fixed_point_g(SurrogateParams(s=shat, t=2.0 * delta * n),
                          obs, opnorm_w=opn).iterate.entries
        field = obs.truth.entries * shat + sigma * (obs.noise.entries @ z)
        rhs = 9.0 / n * count_small_coordinates(field, 2.0 * delta * n)
        t.bound(_count_lhs(entry, delta), rhs)
        t.end()


def check_scalar_modulus_reduction(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = _sigma_tight(n, (0.7, 0.95)[trial % 2])
        entry = ctx.pool.entry(n, sigma, trial)
        if not entry.mle.converged:
            t.miss()
            t.end()
            continue
        obs, opn = entry.obs, entry.opnorm
        delta = 2.02 * sigma * opn / n * ctx.rng.choice([1.0, 2.5])
        smod = abs(entry.shat)
        z = fixed_point_g(SurrogateParams(s=complex(smod), t=2.0 * delta * n),
                          obs, opnorm_w=opn).iterate.entries
        field = obs.truth.entries * smod + sigma * (obs.noise.entries @ z)
        rhs = 9.0 / n * count_small_coordinates(field, 2.0 * delta * n)
        t.bound(_count_lhs(entry, delta), rhs)
        # phase equivariance of a single application
        a = complex(np.exp(1j * ctx.rng.uniform(0, 2 * np.pi)))
        s = complex(n * ctx.rng.uniform(0.3, 1.0))
        zz = _soft_vector(ctx.rng, n)
        p = SurrogateParams(s=s, t=2.0 * delta * n)
        pa = SurrogateParams(s=a * s, t=2.0 * delta * n)
        lhs = np.linalg.norm(a * apply_g(zz, p, obs).entries
                             - apply_g(a * zz, pa, obs).entries)
        t.bound(lhs, 1e-12 * math.sqrt(n))
        t.end()


def _grid_fixed_points(ctx, obs, opn, eps, delta, h):
    scalars = grid_scalars(obs.n, eps, h)
    fps = []
    for sk in scalars:
        fps.append(fixed_point_g(SurrogateParams(s=complex(sk), t=2.0 * delta * obs.n),
                                 obs, opnorm_w=opn).iterate.entries)
    return scalars, fps


def _grid_setup(ctx: CheckContext, trial: int):
    n = ctx.size(trial)
    sigma = _sigma_tight(n, (0.7, 0.95)[trial % 2])
    entry = ctx.pool.entry(n, sigma, trial)
    if not entry.mle.converged:
        return None
    obs, opn = entry.obs, entry.opnorm
    e1 = loss_ell1(entry.mle.iterate, obs.truth)
    eps = min(math.sqrt(max(e1, 1e-30)) * 1.01 + 1e-12, 0.499)
    if e1 > eps**2:
        return None
    delta = 2.02 * sigma * opn / obs.n * ctx.rng.choice([1.0, 2.5])
    h = delta * math.sqrt(obs.n) * ctx.rng.choice([0.4, 1.0, 2.5])
    return entry, eps, delta, h


def check_scalar_grid_cover(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        got = _grid_setup(ctx, trial)
        if got is None:
            t.miss()
            t.end()
            continue
        entry, eps, delta, h = got
        obs, opn = entry.obs, entry.opnorm
        n = obs.n
        scalars, fps = _grid_fixed_points(ctx, obs, opn, eps, delta, h)
        total = 0.0
        for sk, z in zip(scalars, fps):
            field = obs.truth.entries * sk + obs.sigma * (obs.noise.entries @ z)
            total += count_small_coordinates(field, 4.0 * delta * n) / n
        rhs = 9.0 * total + 9.0 * h**2 / (delta**2 * n**2) * (h > delta * math.sqrt(n))
        t.bound(_count_lhs(entry, delta), rhs)
        t.end()


def check_grid_tail_cover(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        got = _grid_setup(ctx, trial)
        if got is None:
            t.miss()
            t.end()
            continue
        entry, eps, delta, h = got
        obs, opn = entry.obs, entry.opnorm
        n = obs.n
        scalars, fps = _grid_fixed_points(ctx, obs, opn, eps, delta, h)
        total = 0.0
        for sk, z in zip(scalars, fps):
            tail = obs.sigma * np.abs(obs.noise.entries @ z)
            total += float(np.count_nonzero(tail > sk - 4.0 * delta * n)) / n
        rhs = 9.0 * total + 9.0 * h**2 / (delta**2 * n**2) * (h > delta * math.sqrt(n))
        t.bound(_count_lhs(entry, delta), rhs)
        t.end()


def check_masked_fixed_point_limit(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = (1.0, 3.0)[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        obs, opn = entry.obs, entry.opnorm
        params = SurrogateParams(s=complex(n * ctx.rng.uniform(0.5, 1.0)),
                                 t=2.02 * sigma * opn)
        j = int(ctx.rng.integers(0, n))
        bundle = fixed_point_g_loo(params, obs, j, opnorm_w=opn)
        z = bundle.fixed_point.entries
        # the limit is a fixed point of the masked map
        u = obs.truth.entries * params.s + sigma * (bundle.masked_noise @ z)
        w = u / np.maximum(np.abs(u), params.t)
        t.bound(np.linalg.norm(w - z), 1e-11 * math.sqrt(n))
        # masked row and column are gone, so masking is idempotent
        t.bound(np.max(np.abs(mask_noise(bundle.masked_noise, j) - bundle.masked_noise)), 0.0)
        t.end()


def check_masked_map_contraction(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = (1.0, 3.0)[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        obs, opn = entry.obs, entry.opnorm
        j = int(ctx.rng.integers(0, n))
        masked = mask_noise(obs.noise, j)
        opn_masked = linops.operator_norm(masked, tol=1e-8).value
        t.bound(opn_masked, opn * (1.0 + 1e-6))
        # masked map contracts at the same rate
        tt = 2.02 * sigma * opn
        s = complex(n * ctx.rng.uniform(0.5, 1.0))
        x, y = _soft_vector(ctx.rng, n), _soft_vector(ctx.rng, n)
        zs = obs.truth.entries
        gx = (zs * s + sigma * (masked @ x))
        gy = (zs * s + sigma * (masked @ y))
        lhs = np.linalg.norm(gx / np.maximum(np.abs(gx), tt)
                             - gy / np.maximum(np.abs(gy), tt))
        t.bound(lhs, sigma * opn / tt * np.linalg.norm(x - y))
        t.end()


def check_leave_one_out_gap(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = (1.0, 3.0)[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        obs, opn = entry.obs, entry.opnorm
        params = SurrogateParams(s=complex(n * ctx.rng.uniform(0.5, 1.0)),
                                 t=2.02 * sigma * opn)
        plain = fixed_point_g(params, obs, opnorm_w=opn).iterate.entries
        count = min(ctx.config.loo_samples, n)
        for j in ctx.rng.choice(n, size=count, replace=False):
            bundle = fixed_point_g_loo(params, obs, int(j), record_trace=True,
                                       opnorm_w=opn)
            t.bound(float(np.max(bundle.iterate_trace_norm_gaps)), 3.0)
            t.bound(np.linalg.norm(plain - bundle.fixed_point.entries), 3.0)
        t.end()


def check_tail_decoupling(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial)
        sigma = (1.0, 3.0)[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        obs, opn = entry.obs, entry.opnorm
        s = complex(n * ctx.rng.uniform(0.5, 1.0)
                    * np.exp(1j * ctx.rng.uniform(0, 2 * np.pi)))
        params = SurrogateParams(s=s, t=2.02 * sigma * opn)
        z = fixed_point_g(params, obs, opnorm_w=opn).iterate.entries
        wz = sigma * np.abs(obs.noise.entries @ z)
        if n <= 120:
            indices = range(n)
        else:
            indices = [int(j) for j in
                       ctx.rng.choice(n, size=ctx.config.loo_samples, replace=False)]
        thresh = np.quantile(wz, ctx.rng.uniform(0.2, 0.95))
        r = abs(s) - thresh
        for j in indices:
            bundle = fixed_point_g_loo(params, obs, j, opnorm_w=opn)
            row_dot = sigma * abs(np.dot(obs.noise.entries[j], bundle.fixed_point.entries))
            lhs = float(wz[j] >= abs(s) - r)
            rhs = float(row_dot >= abs(s) - r - 3.0 * sigma * opn)
            t.bound(lhs, rhs)
        t.end()


def check_end_to_end_chain(ctx: CheckContext):
    if _adversarial_probe(ctx):
        return
    t = ctx.tally
    sizes = tuple(n for n in ctx.config.sizes if n <= 120) or (20,)
    for trial in range(ctx.config.trials):
        t.begin()
        n = ctx.size(trial, sizes)
        sigma = (2.1e-6 * n, 0.005 * math.sqrt(n))[trial % 2]
        entry = ctx.pool.entry(n, sigma, trial)
        if not (entry.mle.converged and entry.bm(2).converged):
            t.miss()
            t.end()
            continue
        obs, opn = entry.obs, entry.opnorm
        eps, delta, h = bounds.chain_parameters(n, sigma, opn)
        ok_pre = (
            0.0 < eps < 0.5
            and loss_ell1(entry.mle.iterate, obs.truth) <= eps**2
            and loss_ellm(entry.bm(2).iterate, obs.truth) <= eps**2
            and delta >= 2.0 * math.sqrt(2.0) * (6.0 * eps + sigma * opn / n)
        )
        if not ok_pre:
            t.miss()
            t.end()
            continue
        scalars = grid_scalars(n, eps, h)
        thr = (1.0 - eps - 4.0 * delta - 3.0 * sigma * opn / n) * n - h
        total = 0.0
        for sk in scalars:
            params = SurrogateParams(s=complex(sk), t=2.0 * delta * n)
            for j in range(n):
                bundle = fixed_point_g_loo(params, obs, j, opnorm_w=opn)
                row = sigma * abs(np.dot(obs.noise.entries[j],
                                         bundle.fixed_point.entries))
                total += float(row > thr) / n
        rhs = 72.0 * total + 72.0 * h**2 / (delta**2 * n**2) * (h > delta * math.sqrt(n))
        lhs = loss_ellm(entry.bm(2).iterate, entry.mle.iterate)
        t.bound(lhs, rhs)
        t.end()


def check_loss_domination(ctx: CheckContext):
    t = ctx.tally
    for trial in range(ctx.config.trials):
        t.begin()
        n = (5, 20, 100)[trial % 3]
        m = int(ctx.rng.integers(1, 7))
        for _ in range(20):
            v = ctx.rng.standard_normal((m, n)) + 1j * ctx.rng.standard_normal((m, n))
            v /= np.linalg.norm(v, axis=0)
            z = np.exp(1j * ctx.rng.uniform(0, 2 * np.pi, n))
            ell = loss_ellm(v, z)
            fro = frob_discrepancy(v, z)
            t.bound(fro, ell * (2.0 - 0.5 * ell))
            t.bound(fro, 2.0 * ell)
        t.end()


def check_opnorm_concentration(ctx: CheckContext):
    t = ctx.tally
    n = 400
    for trial in range(ctx.config.trials):
        t.begin()
        entry = ctx.pool.entry(n, 1.0, trial)
        ratio = entry.opnorm / math.sqrt(n)
        t.bound(ratio, 2.2)
        t.bound(1.8, ratio)
        t.end()


def check_expected_decay(ctx: CheckContext):
    t = ctx.tally
    n = 150
    per_cell = max(4, ctx.config.trials // 8)
    means = {}
    for ratio in (8.0, 50.0):
        sigma = math.sqrt(n / ratio)
        vals = []
        for idx in range(per_cell):
            entry = ctx.pool.entry(n, sigma, idx)
            vals.append(loss_ellm(entry.bm(2).iterate, entry.mle.iterate))
        means[ratio] = float(np.mean(vals))
    t.begin()
    t.bound(means[50.0], means[8.0])
    t.end()
    allowance = max(1, math.ceil(2.0 * per_cell / n))
    sigma50 = math.sqrt(n / 50.0)
    nontight = 0
    for idx in range(per_cell):
        entry = ctx.pool.entry(n, sigma50, idx)
        if loss_ellm(entry.bm(2).iterate, entry.mle.iterate) > 1e-9:
            nontight += 1
    t.begin()
    t.bound(nontight, allowance)
    t.end()


def check_tightness_region(ctx: CheckContext):
    t = ctx.tally
    n = 150
    sigma = 0.9 * bounds.tightness_threshold(n)
    nontight = 0
    total = 0
    for trial in range(ctx.config.trials):
        entry = ctx.pool.entry(n, sigma, trial)
        m = (2, 5)[trial % 2]
        if not (entry.mle.converged and entry.bm(m).converged):
            t.miss()
            continue
        total += 1
        if loss_ellm(entry.bm(m).iterate, entry.mle.iterate) > 1e-9:
            nontight += 1
    allowance = max(1, math.ceil(2.0 * total / n)) if total else 0
    t.begin()
    t.bound(nontight, allowance)
    t.end()


@dataclass(frozen=True)
class Check:
    check_id: str
    claims: tuple[str, ...]
    statement: str
    fn: object
    uses_contraction: bool = False


REGISTRY: tuple[Check, ...] = (
    Check("matmul_contraction", ("matrix-multiplication-contraction",),
          "ellm(V Y^H, Y z) <= n^2 (6 eps + sigma ||W||/n)^2 ellm(V, z) "
          "for z, V within eps^2 of the truth", check_matmul_contraction),
    Check("normalization_bound", ("normalization-distance-bound",),
          "||x/||x|| - y/||y|||| <= 2||x - y||/t + 2*1{||y|| < t}, "
          "including the zero-extended variant", check_normalization_bound),
    Check("joint_contraction", ("joint-contraction-with-count-error",),
          "ellm(Fm(V), F1(z)) <= (4n^2/t^2)(6 eps + sigma||W||/n)^2 ellm(V,z)"
          " + (4/n) #{j: |[Yz]_j| < t}", check_joint_contraction),
    Check("fixed_point_count_bound", ("fixed-point-count-bound",),
          "for fixed points: ellm(V, z) <= (8/n) #{j: |[Yz]_j| < delta n} "
          "whenever delta >= 2 sqrt(2)(6 eps + sigma||W||/n)",
          check_fixed_point_count_bound),
    Check("estimate_count_bound", ("estimate-count-bound",),
          "measured factorization-to-estimate loss is dominated by the "
          "count-based bound at the estimate", check_estimate_count_bound),
    Check("crude_accuracy_bound", ("crude-accuracy-bound",),
          "ell1(zhat, z*) and ellm(Vhat, z*) <= 8 sigma ||W|| / n",
          check_crude_accuracy_bound),
    Check("floor_lipschitz", ("floor-map-lipschitz",),
          "|g_t(x) - g_t(y)| <= |x - y| / t", check_floor_lipschitz),
    Check("surrogate_lipschitz", ("surrogate-map-lipschitz",),
          "||G(x,s,t) - G(y,s,t)|| <= (sigma ||W|| / t) ||x - y||",
          check_surrogate_lipschitz),
    Check("gap_halving", ("surrogate-gap-halving",),
          "successive iterate gaps halve once t >= 2 sigma ||W||",
          check_gap_halving, uses_contraction=True),
    Check("unique_fixed_point", ("surrogate-unique-fixed-point",),
          "the surrogate map has one fixed point, reached geometrically "
          "from the truth and from any admissible start",
          check_unique_fixed_point, uses_contraction=True),
    Check("scalar_sensitivity", ("surrogate-scalar-sensitivity",),
          "||z_s - z_s'||^2 <= 4 n t^-2 |s - s'|^2 and the drive-field "
          "variant with 4 n |s - s'|^2", check_scalar_sensitivity,
          uses_contraction=True),
    Check("floor_approximation", ("floor-vs-exact-normalization-error",),
          "||F1'(z,s) - G(z,s,t)||^2 <= 4 #{j: |z*_j s + sigma [Wz]_j| < t}",
          check_floor_approximation),
    Check("estimate_surrogate_distance", ("estimate-to-surrogate-distance",),
          "||zhat - z_G||^2 <= 32 #{j: |z*_j s + sigma [W z_G]_j| < t} for "
          "t >= 4 sigma ||W||", check_estimate_surrogate_distance,
          uses_contraction=True),
    Check("count_transfer", ("small-entry-count-transfer",),
          "(1/n)#{|[Y zhat]| < delta n} <= (9/n)#{|z* s + sigma W z| < 2 delta n} "
          "at the surrogate fixed point", check_count_transfer,
          uses_contraction=True),
    Check("scalar_modulus_reduction", ("scalar-modulus-reduction",),
          "the alignment scalar enters only through its modulus; single "
          "applications are phase-equivariant", check_scalar_modulus_reduction,
          uses_contraction=True),
    Check("scalar_grid_cover", ("scalar-grid-cover",),
          "grid version of the count transfer with spacing h and cost "
          "9 h^2/(delta^2 n^2) when h > delta sqrt(n)", check_scalar_grid_cover,
          uses_contraction=True),
    Check("grid_tail_cover", ("grid-tail-cover",),
          "same cover with tail indicators sigma|[W z_k]_j| > s_k - 4 delta n",
          check_grid_tail_cover, uses_contraction=True),
    Check("masked_fixed_point_limit", ("masked-fixed-point-limit",),
          "the masked iteration converges to a fixed point of the masked map; "
          "masking is idempotent", check_masked_fixed_point_limit,
          uses_contraction=True),
    Check("masked_map_contraction", ("masked-map-contraction",),
          "||W masked|| <= ||W|| and the masked map contracts at the same rate",
          check_masked_map_contraction, uses_contraction=True),
    Check("leave_one_out_gap", ("leave-one-out-gap-bound",),
          "||z^(T) - z^(T,-j)|| <= 3 for every T and in the limit",
          check_leave_one_out_gap, uses_contraction=True),
    Check("tail_decoupling", ("tail-decoupling",),
          "1{sigma|[Wz]_j| >= |s| - r} <= 1{sigma|W_j z^(-j)| >= |s| - r "
          "- 3 sigma ||W||}", check_tail_decoupling, uses_contraction=True),
    Check("end_to_end_chain", ("end-to-end-discrepancy-chain",),
          "ellm(Vhat, zhat) <= 72 sum_k (1/n) #{j: sigma|W_j z_k^(-j)| > "
          "(1 - eps - 4 delta - 3 sigma||W||/n) n - h} + 72 h^2/(delta^2 n^2)",
          check_end_to_end_chain, uses_contraction=True),
    Check("loss_domination", ("loss-domination",),
          "n^-2 ||V^H V - z z^H||_F^2 <= ellm (2 - ellm/2) <= 2 ellm",
          check_loss_domination),
    Check("opnorm_concentration", ("operator-norm-concentration",),
          "||W|| / sqrt(n) stays in [1.8, 2.2] at n = 400",
          check_opnorm_concentration),
    Check("expected_decay", ("expected-discrepancy-decay",),
          "mean discrepancy shrinks as n/sigma^2 grows and vanishes in the "
          "guaranteed region", check_expected_decay),
    Check("tightness_region", ("tightness-region",),
          "below the tightness threshold the factorization equals the "
          "rank-1 estimate in all but O(1/n) of trials", check_tightness_region),
)


def _digest(check: Check, config: VerifierConfig, master_seed: int) -> str:
    payload = repr((check.check_id, config, master_seed)).encode()
    return hashlib.sha256(payload).hexdigest()[:12]


def run_suite(config: VerifierConfig, master_seed: int) -> list[CheckResult]:
    """Run every registered check; deterministic for a fixed master seed."""
    pool = InstancePool(master_seed)

    def run_one(item):
        index, check = item
        tally = Tally(config.tolerance)
        ctx = CheckContext(rng=derive_rng(_CHECK_TAG, master_seed, index),
                           pool=pool, config=config, tally=tally)
        status = "ok"
        try:
            check.fn(ctx)
            if config.adversarial and check.uses_contraction:
                status = "precondition-unmet"
        except Exception as exc:  # infrastructure failure, not a violation
            return CheckResult(check.check_id, tally.trials, tally.failures,
                               -math.inf, _digest(check, config, master_seed),
                               check.statement, f"error: {exc!r}", tally.misses)
        return CheckResult(check.check_id, tally.trials, tally.failures,
                           tally.worst, _digest(check, config, master_seed),
                           check.statement, status, tally.misses)

    items = list(enumerate(REGISTRY))
    workers = config.max_workers or worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run_one, items))
    else:
        results = [run_one(it) for it in items]
    return results


def total_violations(results: list[CheckResult]) -> int:
    bad = sum(r.failures for r in results)
    bad += sum(1 for r in results if r.status.startswith("error"))
    return bad


def format_report(results: list[CheckResult]) -> str:
    lines = [f"{'check':<28} {'trials':>6} {'fail':>5} {'miss':>5} "
             f"{'worst_slack':>13}  status"]
    for r in results:
        slack = f"{r.worst_slack:.3e}" if math.isfinite(r.worst_slack) else "-"
        lines.append(f"{r.check_id:<28} {r.trials:>6} {r.failures:>5} "
                     f"{r.precondition_misses:>5} {slack:>13}  {r.status}")
    return "\n".join(lines)
