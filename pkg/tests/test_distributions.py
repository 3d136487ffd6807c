import math

import numpy as np
import pytest
from scipy import stats

from ripforge.distributions import (
    DISTRIBUTIONS,
    GAUSSIAN,
    RADEMACHER,
    UNIFORM,
    get_distribution,
    halves_mean_constant,
    matrix_sample,
    rip_probability_lower_bound,
    sample,
    sample_half,
    sample_normalized,
)

N = 10**5


def test_scalar_sample_is_deterministic():
    a = sample(GAUSSIAN, np.random.default_rng(3))
    b = sample(GAUSSIAN, np.random.default_rng(3))
    assert a == b and isinstance(a, float)


def test_rademacher_fair(rng):
    x = RADEMACHER.sample(rng, N)
    assert set(np.unique(x)) == {-1.0, 1.0}
    assert abs(np.mean(x == 1.0) - 0.5) <= 3 * math.sqrt(0.25 / N)


def test_gaussian_variance(rng):
    assert 0.98 <= np.var(GAUSSIAN.sample(rng, N)) <= 1.02


def test_uniform_support(rng):
    x = UNIFORM.sample(rng, N)
    assert np.all(np.abs(x) <= math.sqrt(3))


@pytest.mark.parametrize("Q", list(DISTRIBUTIONS.values()), ids=list(DISTRIBUTIONS))
def test_standardised_moments(Q):
    x = Q.sample(np.random.default_rng(11), 10**6)
    assert abs(x.mean()) <= 4 / math.sqrt(10**6)
    assert abs(x.var() - 1.0) <= 4 * math.sqrt(2 / 10**6)


def test_normalised_examples(rng):
    assert set(np.unique(RADEMACHER.sample_normalized(4, rng, 1000))) == {-0.5, 0.5}
    assert np.var(GAUSSIAN.sample_normalized(100, rng, N)) == pytest.approx(0.01, rel=0.02)
    assert sample_normalized(RADEMACHER, 1, rng) in (-1.0, 1.0)


@pytest.mark.parametrize("Q", list(DISTRIBUTIONS.values()), ids=list(DISTRIBUTIONS))
def test_normalised_n1_matches_raw(Q):
    a = Q.sample_normalized(1, np.random.default_rng(5), 20000)
    b = Q.sample(np.random.default_rng(6), 20000)
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_half_examples(rng):
    assert np.all(RADEMACHER.half("upper", 1).sample(rng, 1000) == 1.0)
    assert sample_half(RADEMACHER.half("lower", 1), rng) == -1.0
    x = GAUSSIAN.half("upper", 1).sample(rng, N)
    assert abs(x.mean() - math.sqrt(2 / math.pi)) <= 4 * x.std() / math.sqrt(N)


def test_half_mean_rejection_oracle(rng):
    z = GAUSSIAN.sample(rng, 4 * N)
    upper = z[z >= 0]
    x = GAUSSIAN.half("upper", 1).sample(rng, upper.size)
    assert stats.ks_2samp(x, upper).pvalue > 0.01


@pytest.mark.parametrize("n", [1, 16, 400])
@pytest.mark.parametrize("Q", list(DISTRIBUTIONS.values()), ids=list(DISTRIBUTIONS))
def test_half_mixing(Q, n):
    rng = np.random.default_rng(2000 + n)
    coin = rng.random(N) < 0.5
    mixed = np.where(coin, Q.half("upper", n).sample(rng, N), Q.half("lower", n).sample(rng, N))
    direct = Q.sample_normalized(n, rng, N)
    if Q is RADEMACHER:
        assert set(np.unique(mixed)) == set(np.unique(direct))
        table = [[np.sum(mixed > 0), np.sum(mixed < 0)], [np.sum(direct > 0), np.sum(direct < 0)]]
        assert stats.chi2_contingency(table).pvalue > 0.01
    else:
        assert stats.ks_2samp(mixed, direct).pvalue > 0.01


def test_half_sides_respect_median(rng):
    for Q in DISTRIBUTIONS.values():
        assert np.all(Q.half("upper", 9).sample(rng, 1000) >= 0)
        assert np.all(Q.half("lower", 9).sample(rng, 1000) <= 0)


def test_halves_mean_constant():
    assert halves_mean_constant(RADEMACHER) == 1.0
    assert halves_mean_constant(GAUSSIAN) == pytest.approx(0.79788, abs=1e-5)
    assert halves_mean_constant(UNIFORM) == pytest.approx(0.86603, abs=1e-5)
    rng = np.random.default_rng(8)
    for Q in DISTRIBUTIONS.values():
        c = halves_mean_constant(Q)
        assert c > 0
        x = math.sqrt(25) * Q.half("upper", 25).sample(rng, N)
        assert abs(x.mean() - c) <= 3 * x.std() / math.sqrt(N) + 1e-12


def test_matrix_sample():
    X = matrix_sample(RADEMACHER, 4, 2, 1)
    assert X.shape == (4, 2) and set(np.unique(X)) <= {-0.5, 0.5}
    G = matrix_sample(GAUSSIAN, 100, 50, 2)
    assert 0.009 <= G.var() <= 0.011
    assert np.array_equal(matrix_sample(GAUSSIAN, 5, 3, 9), matrix_sample(GAUSSIAN, 5, 3, 9))


def test_get_distribution():
    assert get_distribution("uniform") is UNIFORM
    with pytest.raises(ValueError):
        get_distribution("cauchy")


def test_rip_bound_examples():
    b = rip_probability_lower_bound(10000, 50, 2, 0.9, 1.0)
    assert b.exponent == pytest.approx(2 * math.log(9 * math.e * 25) - 10000 * 0.81 / 256)
    assert 1 - b.value == pytest.approx(1.4e-8, rel=0.05)
    assert not b.vacuous
    small = rip_probability_lower_bound(10, 50, 2, 0.9, 1.0)
    assert small.value < 0 and small.vacuous
    limit = 1 - 2 * math.exp(2 * math.log(9 * math.e * 25))
    assert rip_probability_lower_bound(10000, 50, 2, 1e-9, 1.0).value == pytest.approx(limit)


def test_rip_bound_monotonicity():
    base = dict(n=2000, p=40, k=3, theta=0.5, sigma=1.0)
    f = lambda **kw: rip_probability_lower_bound(**{**base, **kw}).value  # noqa: E731
    for n1, n2 in [(1000, 2000), (2000, 8000)]:
        assert f(n=n1) <= f(n=n2)
    for t1, t2 in [(0.2, 0.5), (0.5, 0.9)]:
        assert f(theta=t1) <= f(theta=t2)
    for p1, p2 in [(20, 40), (40, 200)]:
        assert f(p=p1) >= f(p=p2)
    for k1, k2 in [(1, 3), (3, 6)]:
        assert f(k=k1) >= f(k=k2)
    for s1, s2 in [(1.0, 1.2), (1.2, 2.0)]:
        assert f(sigma=s1) >= f(sigma=s2)
