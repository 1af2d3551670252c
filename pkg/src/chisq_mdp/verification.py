"""Enumeration-oracle checks of the exact identities behind the decomposition.

Every check compares a closed form from :mod:`chisq_mdp.statistic` against a
brute-force computation that shares no code with it, and records the largest
error seen.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from .montecarlo import enumerate_exact, enumerate_paths
from .regimes import Distribution, RegimeFamily, SchedulePoint, build_distribution, validate
from .sampling import AliasTable, counts_from_paths, stream
from .statistic import (
    chi_square_batch,
    chi_square_variance,
    conditional_variance_Y,
    decompose_paths,
    kernel_g,
    kernel_second_moment,
)

_TAG_VERIFY = 3


@dataclass(frozen=True)
class CheckResult:
    identity: str
    config: str
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance


def default_distributions() -> List[Distribution]:
    return [
        validate([0.5, 0.5]),
        validate([1 / 3, 1 / 3, 1 / 3]),
        validate([0.25, 0.75]),
        validate([0.2, 0.3, 0.5]),
    ]


def _label(dist: Distribution) -> str:
    return "p=(" + ",".join(f"{x:.6g}" for x in dist.p) + ")"


def check_moments(dists: Iterable[Distribution], sizes: Sequence[int] = (1, 2, 3, 4),
                  tol: float = 1e-10) -> List[CheckResult]:
    out = []
    for dist in dists:
        err_mean = err_var = 0.0
        for n in sizes:
            law = enumerate_exact(dist, n)
            err_mean = max(err_mean, abs(law.mean() - (dist.m - 1)))
            err_var = max(err_var, abs(law.variance() - chi_square_variance(dist, n)))
        cfg = f"{_label(dist)};n={','.join(map(str, sizes))}"
        out.append(CheckResult("exact_mean", cfg, err_mean, tol))
        out.append(CheckResult("exact_variance", cfg, err_var, tol))
    return out


def decomposition_error(paths: np.ndarray, dist: Distribution) -> np.ndarray:
    """Per-path ``|chi2 - (m-1) - (linear + quadratic)| / max(1, |chi2|)``."""
    n = paths.shape[1]
    chi2 = chi_square_batch(counts_from_paths(paths, dist.m), dist.p, n)
    _, _, lin, quad = decompose_paths(paths, dist)
    return np.abs(chi2 - (dist.m - 1) - (lin + quad)) / np.maximum(1.0, np.abs(chi2))


def check_decomposition(sizes=(2, 10, 100), alphabets=(2, 10), paths: int = 1000,
                        seed: int = 0, tol: float = 1e-9) -> List[CheckResult]:
    families = [RegimeFamily("uniform"), RegimeFamily("zipf-light", alpha=0.5)]
    out = []
    for fi, fam in enumerate(families):
        for n in sizes:
            for m in alphabets:
                dist = build_distribution(fam, SchedulePoint(max(n, 2), m, 1.0))
                rng = stream(seed, _TAG_VERIFY, fi, n, m)
                X = AliasTable(dist.p).sample(rng, (paths, n))
                err = float(decomposition_error(X, dist).max())
                out.append(CheckResult("decomposition", f"{fam.label};n={n};m={m};paths={paths}", err, tol))
    return out


def y_increment_table(prefixes: np.ndarray, dist: Distribution, n: int) -> np.ndarray:
    """``Y_k`` for every prefix (rows) and every value of ``X_k`` (columns),
    straight from the definition as a sum over earlier draws."""
    m = dist.m
    t = np.arange(m)
    same = prefixes[:, :, None] == t[None, None, :]
    terms = same / dist.p[None, None, :] - 1.0
    return math.sqrt(2.0 / (n * m)) * terms.sum(axis=1)


def check_martingale(dists: Iterable[Distribution], cap: int = 10**4,
                     tol_mean: float = 1e-12, tol_var: float = 1e-10) -> List[CheckResult]:
    """Zero conditional mean of ``Y_k`` and the conditional-variance formula,
    for every prefix with ``m**k <= cap``."""
    out = []
    for dist in dists:
        m = dist.m
        k_max = int(math.floor(math.log(cap) / math.log(m) + 1e-12))
        n = k_max
        err_mean = err_var = 0.0
        for k in range(2, k_max + 1):
            prefixes = enumerate_paths(m, k - 1)
            Y = y_increment_table(prefixes, dist, n)
            err_mean = max(err_mean, float(np.abs(Y @ dist.p).max()))
            enum_var = (Y * Y) @ dist.p
            closed = np.array([conditional_variance_Y(pre, k, dist, n) for pre in prefixes])
            err_var = max(err_var, float(np.abs(closed - enum_var).max()))
        cfg = f"{_label(dist)};k<={k_max};n={n}"
        out.append(CheckResult("martingale_mean", cfg, err_mean, tol_mean))
        out.append(CheckResult("conditional_variance", cfg, err_var, tol_var))
    return out


def check_kernel(dists: Iterable[Distribution], tol_deg: float = 1e-14,
                 tol_moment: float = 1e-10) -> List[CheckResult]:
    out = []
    for dist in dists:
        m, p = dist.m, dist.p
        G = np.array([[kernel_g(a, c, dist) for c in range(m)] for a in range(m)])
        deg = max(
            max(abs(math.fsum(p[a] * G[a, c] for a in range(m))) for c in range(m)),
            max(abs(math.fsum(p[c] * G[a, c] for c in range(m))) for a in range(m)),
        )
        bound_violation = max(0.0, float(np.abs(G).max()) - 1.0 / dist.p_min)
        out.append(CheckResult("kernel_degeneracy", _label(dist), deg, tol_deg))
        out.append(CheckResult("kernel_sup_bound", _label(dist), bound_violation, 0.0))
        out.append(CheckResult("kernel_second_moment", _label(dist),
                               abs(kernel_second_moment(dist) - (m - 1)), tol_moment))
    return out


def check_t_range(dists: Iterable[Distribution]) -> List[CheckResult]:
    """``-m <= 1/p(x) - m <= 1/p_min - m`` for every symbol."""
    out = []
    for dist in dists:
        T = 1.0 / dist.p - dist.m
        lo = -dist.m - T.min()
        hi = T.max() - (1.0 / dist.p_min - dist.m)
        out.append(CheckResult("t_range", _label(dist), max(0.0, lo, hi), 0.0))
    return out


def run_all(dists: Sequence[Distribution] = None, *, sizes: Sequence[int] = (1, 2, 3, 4),
            decomposition_paths: int = 1000, seed: int = 0) -> List[CheckResult]:
    dists = list(dists) if dists is not None else default_distributions()
    return (
        check_moments(dists, sizes)
        + check_decomposition(paths=decomposition_paths, seed=seed)
        + check_martingale(dists)
        + check_kernel(dists)
        + check_t_range(dists)
    )
