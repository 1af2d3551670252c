"""Hoeffding's inequality and the Houdre-Reynaud threshold for the degenerate
chi-square kernel, with Monte Carlo checks of both."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .montecarlo import map_blocks
from .regimes import Distribution
from .sampling import check_seed, stream

KAPPA = 4.0
HR_TAIL_FACTOR = 2.77

# stream tags keep validation draws apart from tail-estimation draws
_TAG_HOEFFDING = 1
_TAG_HR = 2


def hoeffding_bound(n: int, r: float, ranges: Sequence[Tuple[float, float]]) -> float:
    """Raw two-sided bound ``2 exp(-2 n^2 r^2 / sum (b_i - a_i)^2)`` on
    ``P(|sum X_i| > r n)``; not clamped to 1."""
    if not ranges:
        raise ValueError("ranges must not be empty")
    if len(ranges) != n:
        raise ValueError(f"expected {n} ranges, got {len(ranges)}")
    if not r > 0:
        raise ValueError("r must be > 0")
    widths = []
    for a, b in ranges:
        if not a < b:
            raise ValueError(f"range ({a}, {b}) is empty")
        widths.append((b - a) ** 2)
    return 2.0 * math.exp(-2.0 * n * n * r * r / math.fsum(widths))


@dataclass(frozen=True)
class HRConstants:
    epsilon: float
    kappa: float
    kappa_eps: float
    eta: float
    beta: float
    gamma: float


def hr_constants(epsilon: float) -> HRConstants:
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    eps = float(epsilon)
    kappa_eps = 2.5 + 32.0 / eps
    root = math.sqrt(2.0 * KAPPA) * (2.0 + eps + 1.0 / eps)
    lead = math.e * (1.0 + 1.0 / eps) ** 2 * kappa_eps
    return HRConstants(
        epsilon=eps,
        kappa=KAPPA,
        kappa_eps=kappa_eps,
        eta=root,
        beta=lead + max(root, (1.0 + eps) ** 2 / math.sqrt(2.0)),
        gamma=max(lead, (1.0 + eps) ** 2 / 3.0),
    )


@dataclass(frozen=True)
class HRParams:
    """Kernel parameters for ``U_k = sum_{s<k} sum_{l<s} g(X_s, X_l)``.

    ``U_k`` involves the draws ``X_1..X_{k-1}``, i.e. ``(k-1)(k-2)/2`` pairs.
    """

    A: float
    C2_exact: float
    C2_bound: float
    B2_exact: float
    B2_bound: float
    D_bound: float
    k: int = 0


def hr_params_for_kernel(dist: Distribution, k: int) -> HRParams:
    if k < 3:
        raise ValueError("k must be >= 3 so that U_k has at least one pair")
    m, inv_pmin = dist.m, 1.0 / dist.p_min
    pairs = (k - 1) * (k - 2) // 2
    return HRParams(
        A=inv_pmin,
        C2_exact=(m - 1) * pairs,
        C2_bound=float(m * k * k),
        # worst conditioning symbol, summed over the k-2 partners of the last draw
        B2_exact=(k - 2) * (inv_pmin - 1.0),
        B2_bound=k * inv_pmin,
        D_bound=2.0 * k,
        k=k,
    )


@dataclass(frozen=True)
class HRThreshold:
    u: float
    delta: float
    tail: float


def hr_threshold(params: HRParams, consts: HRConstants, u: float, use_exact: bool = True) -> HRThreshold:
    """Level ``Delta(u)`` with ``P(U >= Delta) <= 2.77 e^{-u}``."""
    if not u > 0:
        raise ValueError("u must be > 0")
    C = math.sqrt(params.C2_exact if use_exact else params.C2_bound)
    B = math.sqrt(params.B2_exact if use_exact else params.B2_bound)
    D, A, eps = params.D_bound, params.A, consts.epsilon
    delta = (
        2.0 * (1.0 + eps) ** 1.5 * C * math.sqrt(u)
        + consts.eta * D * u
        + consts.beta * B * u**1.5
        + consts.gamma * A * u * u
    )
    return HRThreshold(u, delta, HR_TAIL_FACTOR * math.exp(-u))


@dataclass(frozen=True)
class BoundCheck:
    """Empirical exceedance frequency next to the bound it must respect."""

    empirical: float
    bound: float
    replicates: int
    threshold: float = math.nan

    @property
    def stderr(self) -> float:
        p = self.empirical
        return math.sqrt(p * (1.0 - p) / self.replicates)

    def holds(self, n_se: float = 3.0) -> bool:
        return self.empirical <= self.bound + n_se * self.stderr

    def __iter__(self):
        # unpacks as (empirical, bound)
        return iter((self.empirical, self.bound))


def u_statistic_from_counts(counts: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``sum_{l<s} g(X_s, X_l)`` over all pairs of a sample, from its counts.

    Each symbol seen ``c`` times contributes ``c(c-1)/2`` coinciding pairs
    worth ``1/p`` each; every pair also contributes ``-1``.
    """
    K = counts.sum(axis=-1)
    coincide = (counts * (counts - 1) / (2.0 * p)).sum(axis=-1)
    return coincide - K * (K - 1) / 2.0


def simulate_u_statistic(dist: Distribution, k: int, replicates: int, seed: int,
                         threads: int = 1) -> np.ndarray:
    """Draws of ``U_k`` (built from ``k-1`` i.i.d. symbols)."""
    check_seed(seed)

    def run(j, size):
        rng = stream(seed, _TAG_HR, j)
        return u_statistic_from_counts(rng.multinomial(k - 1, dist.p, size=size), dist.p)

    return np.concatenate(map_blocks(run, replicates, threads))


def validate_hr_bound(dist: Distribution, k: int, u: float, replicates: int, seed: int,
                      epsilon: float = 1.0, use_exact: bool = True, threads: int = 1) -> BoundCheck:
    if replicates < 1000:
        raise ValueError("need at least 1000 replicates")
    th = hr_threshold(hr_params_for_kernel(dist, k), hr_constants(epsilon), u, use_exact)
    U = simulate_u_statistic(dist, k, replicates, seed, threads)
    return BoundCheck(float(np.mean(U >= th.delta)), th.tail, replicates, th.delta)


def simulate_bernoulli_sums(n: int, replicates: int, seed: int, p: float = 0.5,
                            threads: int = 1) -> np.ndarray:
    """Sums of ``n`` centred Bernoulli(p) variables."""
    check_seed(seed)

    def run(j, size):
        return stream(seed, _TAG_HOEFFDING, j).binomial(n, p, size=size) - n * p

    return np.concatenate(map_blocks(run, replicates, threads))


def validate_hoeffding(n: int, r: float, replicates: int, seed: int, p: float = 0.5,
                       threads: int = 1) -> BoundCheck:
    """``P(|S_n| > r n)`` for centred Bernoulli(p) sums against Hoeffding."""
    S = simulate_bernoulli_sums(n, replicates, seed, p, threads)
    bound = hoeffding_bound(n, r, [(-p, 1.0 - p)] * n)
    return BoundCheck(float(np.mean(np.abs(S) > r * n)), bound, replicates, r * n)

