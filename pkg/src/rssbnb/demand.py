"""Truncated Poisson demand and the demand-mean patterns of the testbed."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True, eq=False)
class DemandDistribution:
    """Integer demand on ``0..support_max`` with probabilities ``pmf``."""

    pmf: np.ndarray
    mean: float

    @property
    def support_max(self) -> int:
        return len(self.pmf) - 1

    def expected(self) -> float:
        return float(np.dot(np.arange(len(self.pmf)), self.pmf))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)


def truncated_pmf(mean: float, epsilon: float = DEFAULT_EPSILON) -> DemandDistribution:
    """Poisson(mean) cut at its ``1 - epsilon`` quantile and renormalised."""
    if not math.isfinite(mean) or mean < 0:
        raise ValueError(f"demand mean must be finite and >= 0, got {mean!r}")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if mean == 0:
        return DemandDistribution(np.ones(1), 0.0)
    n = int(stats.poisson.ppf(1 - epsilon, mean))
    # ppf can land one off the exact quantile in floating point
    while stats.poisson.cdf(n, mean) < 1 - epsilon:
        n += 1
    while n > 0 and stats.poisson.cdf(n - 1, mean) >= 1 - epsilon:
        n -= 1
    p = stats.poisson.pmf(np.arange(n + 1), mean)
    p = p / p.sum()
    p.setflags(write=False)
    return DemandDistribution(p, float(mean))


def convolve(a: DemandDistribution, b: DemandDistribution,
             epsilon: float = DEFAULT_EPSILON) -> DemandDistribution:
    """Distribution of the sum of two independent demands, re-truncated."""
    p = np.convolve(a.pmf, b.pmf)
    n = int(np.searchsorted(np.cumsum(p), 1 - epsilon))
    p = p[: min(n, len(p) - 1) + 1]
    p = p / p.sum()
    p.setflags(write=False)
    return DemandDistribution(p, a.mean + b.mean)


class PatternKind(str, enum.Enum):
    STA = "STA"
    INC = "INC"
    DEC = "DEC"
    LCY1 = "LCY1"
    LCY2 = "LCY2"
    RAND = "RAND"


def _ramp_up(n: int, top: float) -> list[float]:
    if n == 1:
        return [top / 2]
    return [math.ceil(top * t / (n - 1)) for t in range(n)]


def _ramp_down(n: int, top: float) -> list[float]:
    if n == 1:
        return [top / 2]
    return [math.ceil(top - top * t / (n - 1)) for t in range(n)]


def _trapezoid_area(x: float) -> float:
    # integral over [0, x] of 75 * min(1, 3u, 3(1 - u)); the total is 50
    if x <= 1 / 3:
        return 112.5 * x * x
    if x <= 2 / 3:
        return 12.5 + 75 * (x - 1 / 3)
    return 50 - _trapezoid_area(1 - x)


def pattern_demands(kind: PatternKind | str, T: int, rng_seed: int = 0) -> list[float]:
    """Per-period demand means of length ``T`` for one of the six patterns.

    Period index runs from 0 to T-1. LCY1 follows a trapezoid that climbs
    from 0 to 75 over the first third of the horizon, stays there, and
    falls back to 0; each period gets the rounded average of its slice,
    so the horizon mean stays within 0.5 of 50.
    """
    kind = PatternKind(kind)
    if T < 1:
        raise ValueError("T must be >= 1")
    if kind is PatternKind.STA:
        return [50.0] * T
    if kind in (PatternKind.INC, PatternKind.DEC):
        if T == 1:
            raise ValueError(f"{kind.value} pattern needs T >= 2")
        ramp = _ramp_up if kind is PatternKind.INC else _ramp_down
        return [float(x) for x in ramp(T, 100.0)]
    if kind is PatternKind.LCY1:
        edges = [_trapezoid_area(t / T) * T for t in range(T + 1)]
        return [float(math.floor(hi - lo + 0.5)) for lo, hi in zip(edges, edges[1:])]
    if kind is PatternKind.LCY2:
        h1 = (T + 1) // 2
        out = _ramp_up(h1, 100.0)
        if T - h1:
            out += _ramp_down(T - h1, 100.0)
        return [float(x) for x in out]
    rng = np.random.default_rng(rng_seed)
    return [float(math.ceil(x)) for x in rng.uniform(1, 100, size=T)]
