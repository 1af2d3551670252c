"""Reproducible random streams and categorical samplers.

Every stream is a Philox counter-based generator keyed by ``(seed, tag,
block)`` through :class:`numpy.random.SeedSequence`, so a block of replicates
always sees the same numbers no matter how work is split across batches or
threads.
"""
from __future__ import annotations

import numpy as np

from .regimes import Distribution
from .statistic import SampleCounts

U64_MAX = 2**64 - 1


def check_seed(seed) -> int:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= int(seed) <= U64_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


class AliasTable:
    """Vose alias table: O(m) construction, two uniforms per draw."""

    def __init__(self, p):
        p = np.asarray(p, dtype=np.float64)
        m = p.size
        scaled = p * m / p.sum()
        prob = np.ones(m)
        alias = np.arange(m)
        small = [i for i in range(m) if scaled[i] < 1.0]
        large = [i for i in range(m) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)
        # leftovers are 1 up to rounding
        self.prob = prob
        self.alias = alias
        self.m = m

    def implied_probabilities(self) -> np.ndarray:
        """Exact categorical law encoded by the table."""
        out = self.prob / self.m
        np.add.at(out, self.alias, (1.0 - self.prob) / self.m)
        return out

    def lookup(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms of shape ``(..., 2)`` to symbols of shape ``(...)``."""
        col = np.minimum((u[..., 0] * self.m).astype(np.int64), self.m - 1)
        keep = u[..., 1] < self.prob[col]
        return np.where(keep, col, self.alias[col])

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        size = (size,) if np.isscalar(size) else tuple(size)
        return self.lookup(rng.random(size + (2,)))


def sample_paths(dist: Distribution, n: int, replicates: int, rng, table=None) -> np.ndarray:
    """``(replicates, n)`` i.i.d. symbols; replicate ``j`` consumes uniforms
    ``[2n*j, 2n*(j+1))`` of the stream."""
    table = table or AliasTable(dist.p)
    return table.sample(rng, (replicates, n))


def counts_from_paths(paths: np.ndarray, m: int) -> np.ndarray:
    reps = paths.shape[0]
    offset = np.arange(reps)[:, None] * m
    return np.bincount((paths + offset).ravel(), minlength=reps * m).reshape(reps, m)


def sample_counts(dist: Distribution, n: int, rng, table=None) -> SampleCounts:
    if n < 1:
        raise ValueError("n must be >= 1")
    path = sample_paths(dist, n, 1, rng, table)[0]
    return SampleCounts(np.bincount(path, minlength=dist.m), n)


def sample_count_matrix(dist: Distribution, n: int, replicates: int, rng,
                        method: str = "multinomial", table=None) -> np.ndarray:
    """``(replicates, m)`` occupancy counts of ``n`` draws each.

    ``multinomial`` draws the count vector directly in O(m) per replicate;
    ``alias`` tallies ``n`` individual draws.
    """
    if method == "multinomial":
        return rng.multinomial(n, dist.p, size=replicates)
    if method == "alias":
        return counts_from_paths(sample_paths(dist, n, replicates, rng, table), dist.m)
    raise ValueError(f"unknown sampling method {method!r}")
