"""Finite-alphabet distributions, regime families and growth-condition ratios.

Symbols are 0-based throughout the package: a distribution on ``m`` symbols
is indexed ``0 .. m-1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

#: Accepted deviation of a user-supplied vector's sum from 1.
VALIDATE_TOL = 1e-9
#: Deviation allowed after construction/renormalisation.
SUM_TOL = 1e-12

FAMILY_KINDS = (
    "uniform",
    "zipf-light",
    "harmonic",
    "zipf-heavy",
    "perturbed-uniform",
    "truncated-geometric",
)


@dataclass(frozen=True)
class Distribution:
    """Probability vector on ``{0, .., m-1}`` with every mass strictly positive."""

    p: np.ndarray
    p_min: float = field(init=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("distribution needs at least 2 symbols")
        if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
            raise ValueError("all probabilities must be finite and > 0")
        total = math.fsum(p)
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p_min", float(p.min()))

    @property
    def m(self) -> int:
        return int(self.p.size)

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash(self.p.tobytes())


def _normalised(weights: np.ndarray) -> np.ndarray:
    return weights / math.fsum(weights)


def validate(p) -> Distribution:
    """Check a raw probability vector and return it as a :class:`Distribution`.

    Vectors whose sum is within ``1e-9`` of one are renormalised.
    """
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need a 1-d vector with m >= 2 entries")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("every probability must be > 0")
    total = math.fsum(arr)
    if abs(total - 1.0) > VALIDATE_TOL:
        raise ValueError(f"probabilities sum to {total!r}; deviation exceeds {VALIDATE_TOL}")
    return Distribution(_normalised(arr))


@dataclass(frozen=True)
class RegimeFamily:
    """One of the named triangular-array families.

    ``alpha`` parametrises the Zipf-type and truncated-geometric families,
    ``gamma`` the perturbed-uniform one.
    """

    kind: str
    alpha: Optional[float] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        kind = self.kind
        if kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family {kind!r}; expected one of {FAMILY_KINDS}")
        needs_alpha = kind in ("zipf-light", "zipf-heavy", "truncated-geometric")
        needs_gamma = kind == "perturbed-uniform"
        if needs_alpha != (self.alpha is not None):
            raise ValueError(f"family {kind!r} {'requires' if needs_alpha else 'takes no'} alpha")
        if needs_gamma != (self.gamma is not None):
            raise ValueError(f"family {kind!r} {'requires' if needs_gamma else 'takes no'} gamma")
        a = self.alpha
        if kind in ("zipf-light", "truncated-geometric") and not 0.0 < a < 1.0:
            raise ValueError(f"{kind} requires alpha in (0, 1), got {a}")
        if kind == "zipf-heavy" and not a > 1.0:
            raise ValueError(f"zipf-heavy requires alpha > 1, got {a}")
        if needs_gamma and not self.gamma >= 1.0:
            raise ValueError(f"perturbed-uniform requires gamma >= 1, got {self.gamma}")

    @property
    def label(self) -> str:
        """Stable string form, e.g. ``zipf-light(alpha=0.5)``."""
        if self.alpha is not None:
            return f"{self.kind}(alpha={self.alpha!r})"
        if self.gamma is not None:
            return f"{self.kind}(gamma={self.gamma!r})"
        return self.kind


@dataclass(frozen=True)
class SchedulePoint:
    n: int
    m: int
    b: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"sample size n must be an integer >= 2, got {self.n}")
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"alphabet size m must be an integer >= 2, got {self.m}")
        if not (math.isfinite(self.b) and self.b > 0):
            raise ValueError(f"moderation scale b must be > 0, got {self.b}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "b", float(self.b))


def build_distribution(family: RegimeFamily, point: SchedulePoint) -> Distribution:
    """Probability vector of ``family`` at the schedule point ``(n, m, b)``."""
    m, n = point.m, point.n
    i = np.arange(1, m + 1, dtype=np.float64)
    kind = family.kind

    if kind == "uniform":
        return Distribution(np.full(m, 1.0 / m))

    if kind in ("zipf-light", "harmonic", "zipf-heavy"):
        alpha = 1.0 if kind == "harmonic" else family.alpha
        w = i ** (-alpha)
        const = math.fsum(w)
        return Distribution(1.0 / (const * i**alpha))

    if kind == "perturbed-uniform":
        shift = float(n) ** (-family.gamma)
        if shift >= 1.0 / m:
            raise ValueError(
                f"perturbation n^-gamma = {shift:g} >= 1/m = {1.0 / m:g}; second mass would be <= 0"
            )
        p = np.full(m, 1.0 / m)
        p[0] += shift
        p[1] -= shift
        return Distribution(p)

    # truncated geometric with success probability 1 - n^-alpha, renormalised on {1..m}
    q = float(n) ** (-family.alpha)
    w = q ** (i - 1.0)
    if np.any(w <= 0.0):
        raise ValueError(f"truncated-geometric underflows at m={m}, n={n}, alpha={family.alpha}")
    return Distribution(_normalised(w))


@dataclass(frozen=True)
class ConditionReport:
    ratio_bn_logn: float
    ratio_m_bn: float
    ratio_nmp2_bn4: float
    implied_n_over_mbn4: float
    implied_npmin_bn4: float

    def as_dict(self) -> dict:
        return {
            "ratio_bn_logn": self.ratio_bn_logn,
            "ratio_m_bn": self.ratio_m_bn,
            "ratio_nmp2_bn4": self.ratio_nmp2_bn4,
            "implied_n_over_mbn4": self.implied_n_over_mbn4,
            "implied_npmin_bn4": self.implied_npmin_bn4,
        }


def condition_ratios(n: float, m: float, b: float, p_min: float) -> ConditionReport:
    # n may be any real > 1 here; check_conditions is the typed entry point
    b2 = b * b
    b4 = b2 * b2
    return ConditionReport(
        ratio_bn_logn=b2 / math.log(n),
        ratio_m_bn=m / b2,
        ratio_nmp2_bn4=n * m * p_min * p_min / b4,
        implied_n_over_mbn4=n / (m * b4),
        implied_npmin_bn4=n * p_min / b4,
    )


def check_conditions(point: SchedulePoint, dist: Distribution) -> ConditionReport:
    """Finite-n values of the growth ratios that must diverge for the MDP.

    Purely diagnostic: the conditions are limits, so no threshold is applied.
    """
    return condition_ratios(point.n, dist.m, point.b, dist.p_min)
