"""Closed-form theoretical quantities for overlays and per-trial checks:
the exponential discrepancy bound, the tightness threshold, the crude
accuracy bound, Gaussian tail helpers, and the count-based bound on the
factorization-to-estimate distance.

The absolute constants in the asymptotic statements are not knowable from
a finite run; they are exposed as plain scale parameters with default 1,
and nothing downstream depends on their true values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Observation
from .surrogate import count_small_coordinates


@dataclass(frozen=True)
class BoundInputs:
    """Measured inputs to the bound formulas; c0 is the measured ||W||/sqrt(n)
    standing in for the concentration constant."""

    n: int
    sigma: float
    opnorm_w: float
    c0: float
    delta: float
    epsilon: float

    def __post_init__(self):
        if self.opnorm_w < 0:
            raise ValueError("opnorm_w must be nonnegative")
        if abs(self.c0 - self.opnorm_w / math.sqrt(self.n)) > 1e-9 * (1.0 + self.c0):
            raise ValueError("c0 must equal opnorm_w / sqrt(n)")


def make_bound_inputs(n: int, sigma: float, opnorm_w: float) -> BoundInputs:
    c0 = opnorm_w / math.sqrt(n)
    epsilon, delta = chain_parameters(n, sigma, opnorm_w)[:2]
    return BoundInputs(n=n, sigma=sigma, opnorm_w=opnorm_w, c0=c0,
                       delta=delta, epsilon=epsilon)


def chain_parameters(n: int, sigma: float, opnorm_w: float,
                     expectation_route: bool = False) -> tuple[float, float, float]:
    """(epsilon, delta, h) for the inequality chain, with the concentration
    constant replaced by the measured ||W||/sqrt(n).

    epsilon = (8 c0 sigma / sqrt(n))^(1/2), delta = 49 (c0 sigma / sqrt(n))^(1/2);
    h = delta sqrt(n) on the in-probability route, n exp(-n/(8 sigma^2)) on the
    in-expectation route.
    """
    c0 = opnorm_w / math.sqrt(n)
    x = c0 * sigma / math.sqrt(n)
    epsilon = math.sqrt(8.0 * x)
    delta = 49.0 * math.sqrt(x)
    if expectation_route:
        h = n * math.exp(-n / (8.0 * sigma**2)) if sigma > 0 else 0.0
    else:
        h = delta * math.sqrt(n)
    return epsilon, delta, h


def exp_bound(n: int, sigma: float, c_scale: float = 1.0) -> float:
    """c_scale * exp(-n / (8 sigma^2)) + 2 n^-10."""
    if n < 1 or sigma <= 0 or c_scale <= 0:
        raise ValueError("need n >= 1, sigma > 0, c_scale > 0")
    return c_scale * math.exp(-n / (8.0 * sigma**2)) + 2.0 * float(n) ** -10


def tightness_threshold(n: int) -> float:
    """sqrt(n / (9 ln n)): below this noise level the factorization
    coincides with the power-method estimate with high probability."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return math.sqrt(n / (9.0 * math.log(n)))


def crude_loss_bound(sigma: float, opnorm_w: float, n: int) -> float:
    """8 sigma ||W|| / n, the unconditional accuracy bound for both
    estimators' distance to the truth."""
    if sigma < 0 or opnorm_w < 0 or n < 1:
        raise ValueError("inputs must be nonnegative, n >= 1")
    return 8.0 * sigma * opnorm_w / n


def gaussian_upper_tail(x: float) -> float:
    """P(N(0,1) > x), evaluated through the complementary error function."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def gaussian_tail_envelope(x: float) -> float:
    """(2/sqrt(pi)) exp(-x^2/2), an upper envelope of the tail for x > 0."""
    return 2.0 / math.sqrt(math.pi) * math.exp(-0.5 * x * x)


def corollary1_rhs(y: Observation, z_mle, delta: float) -> float:
    """(8/n) #{j : |[Y z]_j| < delta n} evaluated at the power-method
    estimate; under the closeness preconditions this dominates the
    factorization-to-estimate loss."""
    z = np.asarray(getattr(z_mle, "entries", z_mle), dtype=np.complex128)
    if z.shape != (y.n,):
        raise ValueError("dimension mismatch")
    return 8.0 / y.n * count_small_coordinates(y.y @ z, delta * y.n)


def corollary1_precondition_ok(delta: float, epsilon: float, sigma: float,
                               opnorm_w: float, n: int) -> bool:
    """Whether the count-based bound's conditions hold: epsilon in (0, 1/2)
    and delta >= 2 sqrt(2) (6 epsilon + sigma ||W|| / n)."""
    if not 0.0 < epsilon < 0.5:
        return False
    return delta >= 2.0 * math.sqrt(2.0) * (6.0 * epsilon + sigma * opnorm_w / n)
