"""Zero-mean, unit-variance sub-Gaussian laws and their median-split halves.

Each kind carries a declared sub-Gaussian parameter ``sigma`` and its median
``xi`` (0 for the three symmetric kinds provided here). The normalised law is
``Z / sqrt(n)``. Splitting at the median gives an upper half (supported on
``[xi/sqrt(n), inf)``) and a lower half, and a fair coin between the two
reproduces the normalised law. For a symmetric law with median 0 the halves
are ``+|Z|/sqrt(n)`` and ``-|Z|/sqrt(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from ripforge.rng import make_rng

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class SubGaussianDist:
    kind: str
    sigma: float
    xi: float
    half_mean: float  # E|Z| = sqrt(n) * E[upper half]
    _draw: Callable[[np.random.Generator, object], np.ndarray]
    _draw_abs: Callable[[np.random.Generator, object], np.ndarray]

    def __post_init__(self):
        if self.sigma < 1.0:
            raise ValueError("a unit-variance sub-Gaussian law needs sigma >= 1")

    def sample(self, rng, size=None):
        return self._draw(make_rng(rng), size)

    def sample_normalized(self, n: int, rng, size=None):
        if n < 1:
            raise ValueError("n must be >= 1")
        return self.sample(rng, size) / math.sqrt(n)

    def half(self, side: str, n: int) -> "HalfDist":
        return HalfDist(self, side, n)


@dataclass(frozen=True)
class HalfDist:
    parent: SubGaussianDist
    side: str
    n: int

    def __post_init__(self):
        if self.side not in ("upper", "lower"):
            raise ValueError(f"side must be 'upper' or 'lower', got {self.side!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    def sample(self, rng, size=None):
        r = self.parent._draw_abs(make_rng(rng), size) / math.sqrt(self.n)
        return r if self.side == "upper" else -r


def _gaussian(rng, size):
    return rng.standard_normal(size)


def _gaussian_abs(rng, size):
    return np.abs(rng.standard_normal(size))


def _rademacher(rng, size):
    return rng.integers(0, 2, size=size) * 2.0 - 1.0


def _rademacher_abs(rng, size):
    return np.ones(size) if size is not None else 1.0


def _uniform(rng, size):
    return rng.uniform(-SQRT3, SQRT3, size)


def _uniform_abs(rng, size):
    return rng.uniform(0.0, SQRT3, size)


GAUSSIAN = SubGaussianDist("gaussian", 1.0, 0.0, math.sqrt(2.0 / math.pi), _gaussian, _gaussian_abs)
RADEMACHER = SubGaussianDist("rademacher", 1.0, 0.0, 1.0, _rademacher, _rademacher_abs)
# sigma from the bounded-support (Hoeffding) bound on [-sqrt3, sqrt3]
UNIFORM = SubGaussianDist("uniform", SQRT3, 0.0, SQRT3 / 2.0, _uniform, _uniform_abs)

DISTRIBUTIONS = {d.kind: d for d in (GAUSSIAN, RADEMACHER, UNIFORM)}


def get_distribution(name) -> SubGaussianDist:
    if isinstance(name, SubGaussianDist):
        return name
    try:
        return DISTRIBUTIONS[name]
    except KeyError:
        raise ValueError(f"unknown distribution {name!r}; choose from {sorted(DISTRIBUTIONS)}") from None


def sample(Q: SubGaussianDist, rng) -> float:
    return float(Q.sample(rng))


def sample_normalized(Q: SubGaussianDist, n: int, rng) -> float:
    return float(Q.sample_normalized(n, rng))


def sample_half(H: HalfDist, rng) -> float:
    return float(H.sample(rng))


def halves_mean_constant(Q: SubGaussianDist) -> float:
    """The constant ``c1`` with ``E[upper half] = c1 / sqrt(n)``."""
    return Q.half_mean


def matrix_sample(Q, n: int, p: int, rng) -> np.ndarray:
    """n-by-p matrix with i.i.d. entries ``Z / sqrt(n)``."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be >= 1")
    return get_distribution(Q).sample_normalized(n, rng, (n, p))


class ProbabilityBound(NamedTuple):
    value: float
    exponent: float
    vacuous: bool


def rip_probability_lower_bound(n: int, p: int, k: int, theta: float, sigma: float) -> ProbabilityBound:
    """``1 - 2 exp{k log(9ep/k) - n theta^2 / (256 sigma^4)}``, unclamped."""
    if not 1 <= k <= p:
        raise ValueError(f"need 1 <= k <= p, got k={k}, p={p}")
    if theta <= 0:
        raise ValueError("theta must be positive")
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    exponent = k * math.log(9.0 * math.e * p / k) - n * theta**2 / (256.0 * sigma**4)
    value = 1.0 - 2.0 * math.exp(exponent) if exponent < 700 else -math.inf
    return ProbabilityBound(value, exponent, value <= 0.0)
