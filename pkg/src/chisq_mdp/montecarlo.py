"""Tail-probability estimation for the normalised statistic, plus the exact
enumeration oracle used to check it.

Replicates are split into fixed blocks of :data:`STREAM_BLOCK`; block ``j``
draws from its own stream keyed by the seed and ``j`` and contributes integer hit
counts that are summed at the end. ``batch_size`` only controls how many
replicates are generated per call inside a block, and ``threads`` only how
many blocks run at once, so neither changes any result.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy import special, stats

from .regimes import (
    ConditionReport,
    Distribution,
    RegimeFamily,
    SchedulePoint,
    build_distribution,
    check_conditions,
)
from .sampling import AliasTable, check_seed, counts_from_paths, sample_count_matrix, stream
from .statistic import chi_square_batch, normalize

STREAM_BLOCK = 1 << 14
ENUMERATION_CAP = 10**6
SAMPLERS = ("multinomial", "alias")


class StateSpaceError(ValueError):
    """Raised when exact enumeration would exceed :data:`ENUMERATION_CAP` paths."""


@dataclass(frozen=True)
class SimConfig:
    point: SchedulePoint
    family: RegimeFamily
    replicates: int
    seed: int
    thresholds: Tuple[float, ...]
    batch_size: int = STREAM_BLOCK
    sampler: str = "multinomial"

    def __post_init__(self):
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ValueError("replicates must be a positive integer")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ValueError("batch_size must be a positive integer")
        check_seed(self.seed)
        th = tuple(float(r) for r in self.thresholds)
        if any(r <= 0 for r in th) or any(b <= a for a, b in zip(th, th[1:])):
            raise ValueError("thresholds must be positive and strictly increasing")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")
        object.__setattr__(self, "thresholds", th)

    @property
    def distribution(self) -> Distribution:
        return build_distribution(self.family, self.point)


@dataclass(frozen=True)
class TailEstimate:
    r: float
    hits: int
    reps: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    empirical_rate: float
    reference_rate: float
    tail: str = "upper"


@dataclass(frozen=True)
class RateCurvePoint:
    point: SchedulePoint
    r: float
    empirical_rate: float
    reference_rate: float
    condition_report: ConditionReport
    estimate: TailEstimate = field(repr=False, default=None)


def clopper_pearson(hits: int, reps: int, level: float = 0.95) -> Tuple[float, float]:
    """Exact binomial interval for ``hits`` successes out of ``reps``."""
    alpha = 1.0 - level
    lo = 0.0 if hits == 0 else float(stats.beta.ppf(alpha / 2, hits, reps - hits + 1))
    hi = 1.0 if hits == reps else float(stats.beta.ppf(1 - alpha / 2, hits + 1, reps - hits))
    return lo, hi


def empirical_rate(p_hat: float, b: float) -> float:
    """``-(1/b^2) log p_hat``; ``inf`` when nothing was observed."""
    if p_hat <= 0.0:
        return math.inf
    return -math.log(p_hat) / (b * b) + 0.0


def _blocks(replicates: int) -> List[Tuple[int, int]]:
    nblocks = -(-replicates // STREAM_BLOCK)
    return [(j, min(STREAM_BLOCK, replicates - j * STREAM_BLOCK)) for j in range(nblocks)]


def map_blocks(fn: Callable, replicates: int, threads: int) -> list:
    blocks = _blocks(replicates)
    if threads <= 1 or len(blocks) == 1:
        return [fn(j, size) for j, size in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda jb: fn(*jb), blocks))


def simulate_chi2(dist: Distribution, n: int, replicates: int, seed: int, *,
                  batch_size: int = STREAM_BLOCK, sampler: str = "multinomial",
                  threads: int = 1, tag: int = 0) -> np.ndarray:
    """All ``replicates`` chi-square values, in replicate order."""
    def run(j, size):
        return np.concatenate(list(_iter_block(dist, n, seed, tag, j, size, batch_size, sampler)))

    return np.concatenate(map_blocks(run, replicates, threads))


def _iter_block(dist, n, seed, tag, j, size, batch_size, sampler, table=None):
    rng = stream(seed, tag, j)
    if sampler == "alias" and table is None:
        table = AliasTable(dist.p)
    done = 0
    while done < size:
        step = min(batch_size, size - done)
        counts = sample_count_matrix(dist, n, step, rng, sampler, table)
        yield chi_square_batch(counts, dist.p, n)
        done += step


def tail_counts(dist: Distribution, n: int, b: float, thresholds: Sequence[float],
                replicates: int, seed: int, *, batch_size: int = STREAM_BLOCK,
                sampler: str = "multinomial", threads: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Upper and lower hit counts, one entry per threshold, in a single pass."""
    th = np.asarray(thresholds, dtype=np.float64)
    table = AliasTable(dist.p) if sampler == "alias" else None

    def run(j, size):
        up = np.zeros(th.size, dtype=np.int64)
        down = np.zeros(th.size, dtype=np.int64)
        for chi2 in _iter_block(dist, n, seed, 0, j, size, batch_size, sampler, table):
            z = np.sort(normalize(chi2, dist, b))
            up += z.size - np.searchsorted(z, th, side="right")
            down += np.searchsorted(z, -th, side="left")
        return up, down

    parts = map_blocks(run, replicates, threads)
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def _estimates(hits, thresholds, reps: int, b: float, tail: str) -> List[TailEstimate]:
    out = []
    for r, h in zip(thresholds, hits):
        h = int(h)
        p_hat = h / reps
        lo, hi = clopper_pearson(h, reps)
        out.append(TailEstimate(float(r), h, reps, p_hat, lo, hi,
                                empirical_rate(p_hat, b), r * r / 2.0, tail))
    return out


def tail_estimates(dist: Distribution, n: int, b: float, thresholds: Sequence[float],
                   replicates: int, seed: int, *, batch_size: int = STREAM_BLOCK,
                   sampler: str = "multinomial", threads: int = 1):
    """``(upper, lower)`` estimates for an arbitrary distribution and any ``n >= 1``."""
    up, down = tail_counts(dist, n, b, thresholds, replicates, seed, batch_size=batch_size,
                           sampler=sampler, threads=threads)
    return (_estimates(up, thresholds, replicates, b, "upper"),
            _estimates(down, thresholds, replicates, b, "lower"))


def estimate_tails(config: SimConfig, threads: int = 1):
    """``(upper, lower)`` estimates from one simulation."""
    return tail_estimates(config.distribution, config.point.n, config.point.b,
                          config.thresholds, config.replicates, config.seed,
                          batch_size=config.batch_size, sampler=config.sampler, threads=threads)


def estimate_tail(config: SimConfig, threads: int = 1, tail: str = "upper") -> List[TailEstimate]:
    """Monte Carlo estimate of ``P(normalised chi2 > r)`` for each threshold.

    ``tail="lower"`` gives ``P(normalised chi2 < -r)`` from the same pass;
    only the upper tail carries the reference rate ``r^2/2``.
    """
    if tail not in ("upper", "lower"):
        raise ValueError("tail must be 'upper' or 'lower'")
    upper, lower = estimate_tails(config, threads)
    return upper if tail == "upper" else lower


def rate_curve(schedule: Sequence[SchedulePoint], family: RegimeFamily, r: float,
               replicates: int, seed: int, threads: int = 1,
               batch_size: int = STREAM_BLOCK) -> List[RateCurvePoint]:
    if not schedule:
        raise ValueError("schedule must not be empty")
    if not r > 0:
        raise ValueError("r must be > 0")
    out = []
    for point in schedule:
        cfg = SimConfig(point, family, replicates, seed, (r,), batch_size)
        est = estimate_tail(cfg, threads)[0]
        report = check_conditions(point, cfg.distribution)
        out.append(RateCurvePoint(point, r, est.empirical_rate, r * r / 2.0, report, est))
    return out


@dataclass(frozen=True)
class ExactLaw:
    """Exact distribution of the statistic as sorted ``(value, probability)`` pairs."""

    values: np.ndarray
    probs: np.ndarray

    def __iter__(self):
        return iter(zip(self.values.tolist(), self.probs.tolist()))

    def __len__(self):
        return self.values.size

    def mean(self) -> float:
        return math.fsum(self.values * self.probs)

    def variance(self) -> float:
        mu = self.mean()
        return math.fsum((self.values - mu) ** 2 * self.probs)

    def tail(self, threshold: float) -> float:
        """``P(value > threshold)``."""
        return math.fsum(self.probs[self.values > threshold])

    def lower_tail(self, threshold: float) -> float:
        return math.fsum(self.probs[self.values < threshold])


def enumerate_paths(m: int, n: int) -> np.ndarray:
    """All ``m**n`` paths as rows, in lexicographic order."""
    if m**n > ENUMERATION_CAP:
        raise StateSpaceError(f"m^n = {m}^{n} exceeds the enumeration cap {ENUMERATION_CAP}")
    return np.stack(np.unravel_index(np.arange(m**n), (m,) * n), axis=1)


def enumerate_exact(dist: Distribution, n: int, atol: float = 1e-12) -> ExactLaw:
    """Exact law of chi2 at sample size ``n`` by visiting every path."""
    if n < 1:
        raise ValueError("n must be >= 1")
    paths = enumerate_paths(dist.m, n)
    path_prob = np.prod(dist.p[paths], axis=1)
    chi2 = chi_square_batch(counts_from_paths(paths, dist.m), dist.p, n)
    order = np.argsort(chi2, kind="stable")
    chi2, path_prob = chi2[order], path_prob[order]
    # values closer than atol to their sorted neighbour are merged
    cuts = np.flatnonzero(np.diff(chi2) > atol) + 1
    starts = np.concatenate([[0], cuts])
    probs = [math.fsum(chunk) for chunk in np.split(path_prob, cuts)]
    return ExactLaw(chi2[starts], np.array(probs))


def ks_distance_normal(samples) -> float:
    """``sup_x |F_hat(x) - Phi(x)|`` for the empirical CDF of ``samples``."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    N = x.size
    cdf = special.ndtr(x)
    above = np.arange(1, N + 1) / N - cdf
    below = cdf - np.arange(N) / N
    return float(max(above.max(), below.max()))


def normality_diagnostic(config: SimConfig, threads: int = 1) -> float:
    """KS distance between the b=1 normalised statistic and N(0, 1)."""
    if config.replicates < 100:
        raise ValueError("normality diagnostic needs at least 100 replicates")
    dist = config.distribution
    chi2 = simulate_chi2(dist, config.point.n, config.replicates, config.seed,
                         batch_size=config.batch_size, sampler=config.sampler, threads=threads)
    return ks_distance_normal(normalize(chi2, dist, 1.0))
