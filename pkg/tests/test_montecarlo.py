import math

import numpy as np
import pytest
from scipy import stats

from chisq_mdp.montecarlo import (
    STREAM_BLOCK,
    SimConfig,
    StateSpaceError,
    clopper_pearson,
    empirical_rate,
    enumerate_exact,
    estimate_tail,
    estimate_tails,
    ks_distance_normal,
    normality_diagnostic,
    rate_curve,
    simulate_chi2,
    tail_estimates,
)
from chisq_mdp.regimes import RegimeFamily, SchedulePoint, validate
from chisq_mdp.sampling import AliasTable, check_seed, sample_count_matrix, sample_counts, stream
from chisq_mdp.statistic import chi_square_variance

UNIFORM = RegimeFamily("uniform")


def cfg(n=2, m=2, b=1.0, reps=10_000, seed=7, th=(0.3,), family=UNIFORM, **kw):
    return SimConfig(SchedulePoint(n, m, b), family, reps, seed, th, **kw)


# --- sampling -----------------------------------------------------------

def test_alias_table_encodes_distribution():
    for p in ([0.5, 0.5], [0.1, 0.2, 0.7], np.random.default_rng(0).dirichlet(np.ones(200))):
        table = AliasTable(p)
        np.testing.assert_allclose(table.implied_probabilities(), np.asarray(p) / np.sum(p),
                                   rtol=0, atol=1e-12)


def test_sample_counts_conservation_and_spread():
    d = validate([0.1] * 10)
    n = 10**5
    sc = sample_counts(d, n, stream(123))
    assert sc.n == n and int(sc.counts.sum()) == n
    sd = math.sqrt(n * 0.1 * 0.9)
    assert np.all(np.abs(sc.counts - n / 10) <= 6 * sd)


def test_alias_sampler_chi_square_fit():
    d = validate([0.05, 0.15, 0.3, 0.5])
    counts = sample_count_matrix(d, 200_000, 1, stream(9), method="alias")[0]
    stat, pval = stats.chisquare(counts, 200_000 * d.p)
    assert pval > 1e-4


def test_seed_validation():
    assert check_seed(2**64 - 1) == 2**64 - 1
    for bad in (-1, 2**64, 1.5, True):
        with pytest.raises(ValueError):
            check_seed(bad)


def test_streams_differ_by_key():
    a = stream(1, 0).random(4)
    b = stream(1, 1).random(4)
    c = stream(1, 0).random(4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, c)


# --- exact enumeration --------------------------------------------------

def test_enumerate_exact_small_cases():
    law = enumerate_exact(validate([0.5, 0.5]), 2)
    assert list(law) == [(0.0, 0.5), (2.0, 0.5)]
    law = enumerate_exact(validate([0.5, 0.5]), 1)
    assert list(law) == [(1.0, 1.0)]


@pytest.mark.parametrize("p", [[0.5, 0.5], [0.25, 0.75], [0.2, 0.3, 0.5]])
@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_enumerate_exact_moments(p, n):
    d = validate(p)
    law = enumerate_exact(d, n)
    assert abs(math.fsum(law.probs) - 1) <= 1e-12
    assert law.mean() == pytest.approx(d.m - 1, abs=1e-10)
    assert law.variance() == pytest.approx(chi_square_variance(d, n), abs=1e-10)


def test_enumerate_exact_matches_multinomial_pmf():
    # independent oracle: group paths by count vector via the multinomial pmf
    d = validate([0.2, 0.3, 0.5])
    n = 5
    law = enumerate_exact(d, n)
    total = {}
    for a in range(n + 1):
        for b in range(n + 1 - a):
            c = (a, b, n - a - b)
            chi2 = sum((ci - n * pi) ** 2 / (n * pi) for ci, pi in zip(c, d.p))
            key = round(chi2, 9)
            total[key] = total.get(key, 0.0) + stats.multinomial.pmf(c, n, d.p)
    got = {round(v, 9): q for v, q in law}
    assert got.keys() == total.keys()
    for key in got:
        assert got[key] == pytest.approx(total[key], abs=1e-12)


def test_enumerate_exact_cap():
    with pytest.raises(StateSpaceError):
        enumerate_exact(validate([0.5, 0.5]), 21)
    with pytest.raises(StateSpaceError):
        enumerate_exact(validate([0.1] * 10), 7)


# --- tail estimation ----------------------------------------------------

def test_clopper_pearson_against_beta_quantiles():
    lo, hi = clopper_pearson(5, 50)
    assert lo == pytest.approx(stats.beta.ppf(0.025, 5, 46))
    assert hi == pytest.approx(stats.beta.ppf(0.975, 6, 45))
    lo, hi = clopper_pearson(0, 1000)
    assert lo == 0.0 and hi == pytest.approx(1 - 0.025 ** (1 / 1000), rel=1e-10)
    assert clopper_pearson(10, 10)[1] == 1.0


def test_clopper_pearson_exact_coverage():
    # coverage computed exactly over the Binomial(10^4, 1/2) outcomes
    reps, p = 10_000, 0.5
    k = np.arange(reps + 1)
    lo = np.where(k == 0, 0.0, stats.beta.ppf(0.025, k, reps - k + 1))
    hi = np.where(k == reps, 1.0, stats.beta.ppf(0.975, k + 1, reps - k))
    covered = (lo <= p) & (p <= hi)
    assert stats.binom.pmf(k, reps, p)[covered].sum() >= 0.95


def test_clopper_pearson_repeated_runs():
    runs, covered = 200, 0
    for seed in range(runs):
        est = estimate_tail(cfg(reps=10_000, seed=seed))[0]
        covered += est.ci_lo <= 0.5 <= est.ci_hi
    assert covered / runs >= 0.95


def test_impossible_threshold_gives_sentinel():
    # normalised statistic is +-1/2 at n=2, m=2, b=1
    est = estimate_tail(cfg(th=(0.6,)))[0]
    assert est.hits == 0 and est.p_hat == 0.0
    assert est.empirical_rate == math.inf
    assert est.ci_lo == 0.0 and 0 < est.ci_hi < 1e-3


def test_two_point_tail_rate():
    est = estimate_tail(cfg(reps=10**5))[0]
    assert est.ci_lo <= 0.5 <= est.ci_hi
    lo_rate, hi_rate = -math.log(est.ci_hi), -math.log(est.ci_lo)
    assert lo_rate <= math.log(2) <= hi_rate
    assert est.empirical_rate == pytest.approx(math.log(2), abs=0.02)
    assert est.reference_rate == 0.3**2 / 2


def test_empirical_rate():
    assert empirical_rate(0.0, 2.0) == math.inf
    assert empirical_rate(1.0, 2.0) == 0.0
    assert empirical_rate(math.exp(-8), 2.0) == pytest.approx(2.0)


def test_p_hat_monotone_in_r():
    c = cfg(n=200, m=20, b=1.0, reps=20_000, th=(0.1, 0.5, 1.0, 1.5, 2.5))
    upper, lower = estimate_tails(c)
    assert all(a.p_hat >= b.p_hat for a, b in zip(upper, upper[1:]))
    assert all(a.p_hat >= b.p_hat for a, b in zip(lower, lower[1:]))
    assert all(e.tail == "upper" for e in upper) and all(e.tail == "lower" for e in lower)


def test_lower_tail_against_exact():
    d = validate([0.25, 0.75])
    up, low = tail_estimates(d, 3, 1.0, (0.1, 0.3), 50_000, 5)
    law = enumerate_exact(d, 3)
    for e in low:
        exact = law.lower_tail((d.m - 1) - e.r * math.sqrt(2 * d.m))
        lo, hi = clopper_pearson(e.hits, e.reps, 0.999)
        assert lo <= exact <= hi


def test_batch_size_and_thread_invariance():
    base = cfg(n=300, m=12, reps=3 * STREAM_BLOCK + 17, th=(0.5, 1.0, 2.0),
               family=RegimeFamily("zipf-light", alpha=0.5))
    ref = estimate_tails(base)
    for batch in (1000, 4096, STREAM_BLOCK, 10**6):
        c = SimConfig(base.point, base.family, base.replicates, base.seed, base.thresholds, batch)
        assert estimate_tails(c) == ref
    assert estimate_tails(base, threads=4) == ref


def test_alias_sampler_batch_invariance():
    base = cfg(n=40, m=5, reps=5000, th=(0.5,), sampler="alias")
    ref = simulate_chi2(base.distribution, 40, 5000, 7, sampler="alias")
    for batch in (1, 333, 5000):
        got = simulate_chi2(base.distribution, 40, 5000, 7, sampler="alias", batch_size=batch)
        assert np.array_equal(got, ref)


def test_samplers_agree_in_distribution():
    d = validate([0.1, 0.2, 0.3, 0.4])
    a = simulate_chi2(d, 30, 20_000, 1, sampler="multinomial")
    b = simulate_chi2(d, 30, 20_000, 2, sampler="alias")
    assert stats.ks_2samp(a, b).pvalue > 1e-3


def test_simconfig_validation():
    with pytest.raises(ValueError):
        cfg(th=(0.5, 0.3))
    with pytest.raises(ValueError):
        cfg(th=(0.0,))
    with pytest.raises(ValueError):
        cfg(reps=0)
    with pytest.raises(ValueError):
        cfg(sampler="inverse-cdf")


def test_rate_curve_reference():
    sched = [SchedulePoint(100, 10, 1.0), SchedulePoint(400, 20, 1.2)]
    for r, ref in ((1.0, 0.5), (2.0, 2.0)):
        pts = rate_curve(sched, UNIFORM, r, 2000, 3)
        assert [p.reference_rate for p in pts] == [ref, ref]
        assert pts[1].condition_report.ratio_m_bn == pytest.approx(20 / 1.44)
    with pytest.raises(ValueError):
        rate_curve([], UNIFORM, 1.0, 100, 1)


# --- normality ------------------------------------------------------------

def test_ks_distance_on_exact_quantiles():
    N = 1000
    x = stats.norm.ppf((np.arange(1, N + 1) - 0.5) / N)
    assert ks_distance_normal(x) <= 0.5 / N + 1e-7


def test_normality_clt_regime():
    c = cfg(n=10**5, m=100, reps=10**4, seed=11)
    assert normality_diagnostic(c) < 0.05


def test_normality_sparse_regime_is_worse():
    dense = normality_diagnostic(cfg(n=10**5, m=100, reps=10**4, seed=11))
    sparse = normality_diagnostic(cfg(n=10, m=100, reps=10**4, seed=11))
    assert sparse > dense
    assert sparse > 0.1
    with pytest.raises(ValueError):
        normality_diagnostic(cfg(reps=50))
