"""Pearson chi-square statistic, its exact moments and the martingale split.

For a path ``X_1..X_n`` the centred statistic splits as

    chi2 - (m - 1) = (1/n) * sum_k T_k + sqrt(2m/n) * sum_k Y_k

with ``T_k = 1/p(X_k) - m`` i.i.d. and ``Y_k`` a martingale difference
built from the degenerate kernel ``g(a, c) = 1{a == c}/p(a) - 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .regimes import Distribution


@dataclass(frozen=True)
class SampleCounts:
    counts: np.ndarray
    n: int

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        if c.ndim != 1 or np.any(c < 0):
            raise ValueError("counts must be a 1-d vector of non-negative integers")
        if int(c.sum()) != self.n or self.n < 1:
            raise ValueError(f"counts sum to {int(c.sum())}, expected n={self.n}")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def m(self) -> int:
        return int(self.counts.size)

    @classmethod
    def from_path(cls, path, m: int) -> "SampleCounts":
        path = _check_path(path, m)
        return cls(np.bincount(path, minlength=m), path.size)


def _check_path(path, m: int) -> np.ndarray:
    path = np.asarray(path, dtype=np.int64)
    if path.ndim != 1:
        raise ValueError("a sample path is a 1-d sequence of symbols")
    if path.size and (path.min() < 0 or path.max() >= m):
        raise ValueError(f"symbols must lie in 0..{m - 1}")
    return path


def empirical_frequencies(counts: SampleCounts) -> np.ndarray:
    return counts.counts / counts.n


def chi_square(counts: SampleCounts, dist: Distribution) -> float:
    """``n * sum_i (phat_i - p_i)^2 / p_i`` with compensated summation."""
    if counts.m != dist.m:
        raise ValueError(f"counts have {counts.m} cells but distribution has {dist.m}")
    expected = counts.n * dist.p
    dev = counts.counts - expected
    return math.fsum(dev * dev / expected)


def chi_square_batch(counts: np.ndarray, p: np.ndarray, n: int) -> np.ndarray:
    """Row-wise statistic for a ``(replicates, m)`` count matrix."""
    expected = n * np.asarray(p)
    dev = counts - expected
    return np.sum(dev * dev / expected, axis=-1)


def chi_square_mean(dist: Distribution) -> float:
    return float(dist.m - 1)


def chi_square_variance(dist: Distribution, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    m = dist.m
    inv_sum = math.fsum(1.0 / dist.p)
    return (2.0 * (m - 1) * (n - 1) + inv_sum - m * m) / n


def normalize(chi2, dist: Distribution, b: float):
    """Moderate-deviation scaling ``(chi2 - (m-1)) / (b * sqrt(2m))``."""
    if not b > 0:
        raise ValueError("b must be > 0")
    m = dist.m
    return (chi2 - (m - 1)) / (b * math.sqrt(2.0 * m))


def studentize(chi2, dist: Distribution, n: int):
    """Centre and divide by the exact standard deviation instead of ``sqrt(2m)``."""
    return (chi2 - (dist.m - 1)) / math.sqrt(chi_square_variance(dist, n))


@dataclass(frozen=True)
class Decomposition:
    T: np.ndarray
    Y: np.ndarray
    linear_term: float
    quadratic_term: float
    chi2_centered: float

    @property
    def residual(self) -> float:
        return self.chi2_centered - (self.linear_term + self.quadratic_term)


def _prior_occurrences(paths: np.ndarray, m: int) -> np.ndarray:
    # number of l < k with X_l == X_k, row-wise, via running counts
    reps, n = paths.shape
    running = np.zeros((reps, m), dtype=np.int64)
    rows = np.arange(reps)
    prior = np.empty_like(paths)
    for k in range(n):
        col = paths[:, k]
        prior[:, k] = running[rows, col]
        running[rows, col] += 1
    return prior


def decompose_paths(paths, dist: Distribution):
    """Vectorised decomposition of a ``(replicates, n)`` array of paths.

    Returns ``(T, Y, linear, quadratic)``; ``T`` and ``Y`` have the shape of
    ``paths``, the two terms one entry per row.
    """
    paths = np.asarray(paths, dtype=np.int64)
    if paths.ndim != 2:
        raise ValueError("paths must be 2-d (replicates, n)")
    reps, n = paths.shape
    m = dist.m
    if n < 2:
        raise ValueError("decomposition needs paths of length >= 2")
    if paths.min() < 0 or paths.max() >= m:
        raise ValueError(f"symbols must lie in 0..{m - 1}")
    inv_p = 1.0 / dist.p
    w = inv_p[paths]
    T = w - m
    prior = _prior_occurrences(paths, m)
    Y = math.sqrt(2.0 / (n * m)) * (prior * w - np.arange(n))
    linear = T.sum(axis=1) / n
    quadratic = math.sqrt(2.0 * m / n) * Y.sum(axis=1)
    return T, Y, linear, quadratic


def decompose(path, dist: Distribution) -> Decomposition:
    path = _check_path(path, dist.m)
    T, Y, lin, quad = decompose_paths(path[None, :], dist)
    counts = SampleCounts.from_path(path, dist.m)
    centred = chi_square(counts, dist) - (dist.m - 1)
    return Decomposition(T[0], Y[0], float(lin[0]), float(quad[0]), centred)


def kernel_g(a: int, c: int, dist: Distribution) -> float:
    m = dist.m
    if not (0 <= a < m and 0 <= c < m):
        raise ValueError(f"symbols must lie in 0..{m - 1}")
    return (1.0 / dist.p[a] if a == c else 0.0) - 1.0


def kernel_matrix(dist: Distribution) -> np.ndarray:
    """``G[a, c] = g(a, c)`` for all symbol pairs."""
    G = np.full((dist.m, dist.m), -1.0)
    G[np.diag_indices(dist.m)] += 1.0 / dist.p
    return G


def kernel_second_moment(dist: Distribution) -> float:
    """``E g(X, X')^2`` by the full double sum over symbol pairs."""
    G = kernel_matrix(dist)
    weights = np.outer(dist.p, dist.p)
    return math.fsum((weights * G * G).ravel())


def conditional_variance_Y(prefix, k: int, dist: Distribution, n: int) -> float:
    """``E(Y_k^2 | X_1..X_{k-1})`` from the closed form over the prefix."""
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    prefix = _check_path(prefix, dist.m)
    if prefix.size != k - 1:
        raise ValueError(f"prefix must have length k-1={k - 1}, got {prefix.size}")
    inv_p = 1.0 / dist.p
    c = np.bincount(prefix, minlength=dist.m)
    # sum over ordered pairs s != l of (1{X_s = X_l}/p(X_s) - 1)
    off_diag = math.fsum(c * (c - 1) * inv_p) - (k - 1) * (k - 2)
    diag = math.fsum(inv_p[prefix] - 1.0)
    return 2.0 / (n * dist.m) * (off_diag + diag)
