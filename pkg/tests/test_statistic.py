import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from chisq_mdp.regimes import validate
from chisq_mdp.statistic import (
    SampleCounts,
    chi_square,
    chi_square_mean,
    chi_square_variance,
    conditional_variance_Y,
    decompose,
    empirical_frequencies,
    kernel_g,
    kernel_matrix,
    kernel_second_moment,
    normalize,
    studentize,
)

UNIFORM2 = validate([0.5, 0.5])
UNIFORM3 = validate([1 / 3] * 3)
UNIFORM4 = validate([0.25] * 4)
SKEW2 = validate([0.25, 0.75])
SKEW3 = validate([0.2, 0.3, 0.5])


def brute_moments(p, n):
    """Mean and variance of chi2 over all m**n paths, in exact rationals."""
    p = [Fraction(x).limit_denominator(10**6) for x in p]
    m = len(p)
    s1 = s2 = Fraction(0)
    for path in itertools.product(range(m), repeat=n):
        w = Fraction(1)
        for x in path:
            w *= p[x]
        counts = [path.count(i) for i in range(m)]
        chi2 = sum((c - n * q) ** 2 / (n * q) for c, q in zip(counts, p))
        s1 += w * chi2
        s2 += w * chi2 * chi2
    return s1, s2 - s1 * s1


@pytest.mark.parametrize("counts,n,expected", [
    ((3, 1), 4, (0.75, 0.25)),
    ((0, 4), 4, (0.0, 1.0)),
    ((1, 1, 2), 4, (0.25, 0.25, 0.5)),
])
def test_empirical_frequencies(counts, n, expected):
    f = empirical_frequencies(SampleCounts(counts, n))
    assert f.tolist() == list(expected)
    assert abs(math.fsum(f) - 1) <= 1e-12


def test_sample_counts_validation():
    with pytest.raises(ValueError):
        SampleCounts((1, 2), 4)
    with pytest.raises(ValueError):
        SampleCounts((-1, 5), 4)
    sc = SampleCounts.from_path([0, 2, 2, 1], 3)
    assert sc.counts.tolist() == [1, 1, 2] and sc.n == 4
    with pytest.raises(ValueError):
        SampleCounts.from_path([0, 3], 3)


@pytest.mark.parametrize("counts,n,expected", [
    ((2, 2), 4, 0.0),
    ((3, 1), 4, 1.0),
    ((2, 0), 2, 2.0),
])
def test_chi_square_hand_values(counts, n, expected):
    assert chi_square(SampleCounts(counts, n), UNIFORM2) == expected


def test_chi_square_dimension_mismatch():
    with pytest.raises(ValueError):
        chi_square(SampleCounts((1, 1, 2), 4), UNIFORM2)


def test_mean_values():
    assert chi_square_mean(validate([0.2] * 5)) == 4
    assert chi_square_mean(UNIFORM2) == 1
    # n=2, uniform m=2: paths (0,0),(1,1) give 2, the mixed ones 0
    vals = [chi_square(SampleCounts.from_path(path, 2), UNIFORM2)
            for path in itertools.product(range(2), repeat=2)]
    assert sum(vals) / 4 == 1.0


def test_variance_values():
    assert chi_square_variance(UNIFORM2, 2) == 1.0
    assert chi_square_variance(SKEW2, 1) == pytest.approx(4 / 3, rel=1e-15)
    for m, n in [(3, 5), (7, 11), (4, 1)]:
        d = validate([1 / m] * m)
        assert chi_square_variance(d, n) == pytest.approx(2 * (m - 1) * (n - 1) / n, abs=1e-12)
    with pytest.raises(ValueError):
        chi_square_variance(UNIFORM2, 0)


@pytest.mark.parametrize("dist", [UNIFORM2, UNIFORM3, SKEW2, SKEW3])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_moments_against_rational_enumeration(dist, n):
    mean, var = brute_moments(dist.p, n)
    assert float(mean) == pytest.approx(dist.m - 1, abs=1e-12)
    assert float(var) == pytest.approx(chi_square_variance(dist, n), abs=1e-10)


def test_normalize():
    assert normalize(4.0, validate([0.2] * 5), 1.7) == 0.0
    assert normalize(2.0, UNIFORM2, 1.0) == 0.5
    assert normalize(0.0, validate([0.2] * 5), 2.0) == pytest.approx(-4 / (2 * math.sqrt(10)), rel=1e-15)
    assert normalize(0.0, validate([0.2] * 5), 2.0) == pytest.approx(-0.63246, abs=1e-5)
    with pytest.raises(ValueError):
        normalize(1.0, UNIFORM2, 0.0)


def test_studentize_uses_exact_variance():
    # uniform m=2, n=2: variance 1, so studentize is plain centring
    assert studentize(2.0, UNIFORM2, 2) == 1.0


def test_decompose_uniform_has_zero_T():
    rng = np.random.default_rng(3)
    dec = decompose(rng.integers(0, 4, size=25), UNIFORM4)
    assert np.all(dec.T == 0)
    assert dec.linear_term == 0


def test_decompose_hand_cases():
    dec = decompose([0, 0], UNIFORM2)
    assert dec.Y[0] == 0.0
    assert dec.Y[1] == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert dec.chi2_centered == 1.0
    assert dec.quadratic_term == pytest.approx(1.0, rel=1e-15)

    dec = decompose([0, 1], UNIFORM2)
    assert dec.Y[1] == pytest.approx(-math.sqrt(0.5), rel=1e-15)
    assert dec.chi2_centered == -1.0
    assert dec.quadratic_term == pytest.approx(-1.0, rel=1e-15)


def test_decompose_matches_definition_sum():
    # Y_k from the O(k) definition, compared with the running-count version
    rng = np.random.default_rng(11)
    d = SKEW3
    X = rng.choice(3, size=40, p=d.p)
    n, m = X.size, d.m
    Y_def = [math.sqrt(2 / (n * m)) * sum((1 / d.p[X[k]] if X[k] == X[l] else 0) - 1 for l in range(k))
             for k in range(n)]
    dec = decompose(X, d)
    np.testing.assert_allclose(dec.Y, Y_def, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(dec.T, 1 / d.p[X] - m)
    assert abs(dec.residual) <= 1e-12 * max(1, abs(dec.chi2_centered))


def test_decompose_rejects_short_paths():
    with pytest.raises(ValueError):
        decompose([1], UNIFORM2)


def test_kernel_values():
    assert kernel_g(1, 1, UNIFORM4) == 3.0
    assert kernel_g(0, 2, UNIFORM4) == -1.0
    with pytest.raises(ValueError):
        kernel_g(0, 4, UNIFORM4)


@pytest.mark.parametrize("dist", [UNIFORM3, SKEW2, SKEW3, validate([0.05, 0.15, 0.3, 0.5])])
def test_kernel_degenerate_and_bounded(dist):
    G = kernel_matrix(dist)
    for c in range(dist.m):
        assert abs(math.fsum(dist.p[a] * G[a, c] for a in range(dist.m))) <= 1e-14
        assert abs(math.fsum(dist.p[a] * G[c, a] for a in range(dist.m))) <= 1e-14
    assert np.abs(G).max() <= 1 / dist.p_min


def test_kernel_degenerate_in_rationals():
    p = [Fraction(1, 7), Fraction(2, 7), Fraction(4, 7)]
    g = lambda a, c: (1 / p[a] if a == c else 0) - 1  # noqa: E731
    for c in range(3):
        assert sum(p[a] * g(a, c) for a in range(3)) == 0
    assert sum(p[a] * p[c] * g(a, c) ** 2 for a in range(3) for c in range(3)) == 2


def test_kernel_second_moment_values():
    assert kernel_second_moment(UNIFORM3) == pytest.approx(2, abs=1e-10)
    assert kernel_second_moment(SKEW2) == pytest.approx(1, abs=1e-10)
    assert kernel_second_moment(UNIFORM2) == pytest.approx(1, abs=1e-10)


def _enumerated_cond_var(prefix, dist, n):
    k = len(prefix) + 1
    total = 0.0
    for t in range(dist.m):
        y = math.sqrt(2 / (n * dist.m)) * sum((1 / dist.p[t] if t == x else 0) - 1 for x in prefix)
        total += dist.p[t] * y * y
    return total


def test_conditional_variance_hand_cases():
    assert conditional_variance_Y([0], 2, UNIFORM2, 2) == pytest.approx(0.5, abs=1e-15)
    assert _enumerated_cond_var([0], UNIFORM2, 2) == pytest.approx(0.5, abs=1e-15)
    assert conditional_variance_Y([0, 0], 3, UNIFORM2, 3) == pytest.approx(4 / 3, abs=1e-15)
    assert _enumerated_cond_var([0, 0], UNIFORM2, 3) == pytest.approx(4 / 3, abs=1e-15)
    for m, n in [(3, 5), (6, 9)]:
        d = validate([1 / m] * m)
        for x in range(m):
            assert conditional_variance_Y([x], 2, d, n) == pytest.approx(2 / (n * m) * (m - 1), rel=1e-14)


def test_conditional_variance_random_prefixes():
    rng = np.random.default_rng(5)
    for dist in (SKEW2, SKEW3):
        for k in (2, 5, 9):
            prefix = rng.choice(dist.m, size=k - 1, p=dist.p)
            assert conditional_variance_Y(prefix, k, dist, 12) == pytest.approx(
                _enumerated_cond_var(prefix, dist, 12), abs=1e-10)


def test_conditional_variance_errors():
    with pytest.raises(ValueError):
        conditional_variance_Y([0], 1, UNIFORM2, 3)
    with pytest.raises(ValueError):
        conditional_variance_Y([0, 1], 2, UNIFORM2, 3)
    with pytest.raises(ValueError):
        conditional_variance_Y([0], 4, UNIFORM2, 3)
