"""Symmetric Renyi divergence from two sample clouds.

The cross-correlation integral ``C(r) = P(d(U, V) < r)`` for independent
U ~ mu, V ~ eta is estimated by pair counting over the product of the two
clouds; its log-log slope as r -> 0 is the divergence estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import DomainError, InsufficientScalesError

MIN_PAIRS = 50


@dataclass(frozen=True)
class RadiiSchedule:
    r_max: float
    count: int
    ratio: float = 0.5

    def __post_init__(self):
        if not 0 < self.r_max <= 0.5:
            raise DomainError("r_max must lie in (0, 0.5]")
        if self.count < 1:
            raise DomainError("schedule needs at least one radius")
        if not 0 < self.ratio < 1:
            raise DomainError("ratio must lie in (0, 1)")

    @property
    def radii(self) -> np.ndarray:
        return self.r_max * self.ratio ** np.arange(self.count, dtype=np.float64)


@dataclass(frozen=True)
class CorrelationEstimate:
    radii: np.ndarray
    values: np.ndarray
    pair_counts: np.ndarray
    sample_sizes: tuple

    @classmethod
    def from_counts(cls, radii, counts, sizes):
        counts = np.asarray(counts, dtype=np.int64)
        return cls(np.asarray(radii, dtype=np.float64),
                   counts / float(sizes[0] * sizes[1]), counts, tuple(sizes))


@dataclass(frozen=True)
class DivergenceFit:
    slope: float
    intercept: float
    fit_window: tuple
    r_squared: float
    dropped_radii: tuple = field(default=())

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "window": list(self.fit_window),
                "dropped_radii": list(self.dropped_radii)}


def _cloud(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 0 or len(X) == 0:
        raise DomainError("sample cloud is empty")
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    if np.any(X < 0) or np.any(X >= 1):
        raise DomainError("samples must lie in [0, 1)")
    return X


def _pair(U, V):
    U, V = _cloud(U), _cloud(V)
    if U.shape[1:] != V.shape[1:]:
        raise DomainError("sample clouds have different dimensions")
    return U, V


def brute_force_count(U, V, r: float) -> int:
    """Reference count: the metric evaluated on every pair, no indexing."""
    U, V = _pair(U, V)
    return kernels.python_backend.brute_count(U, V, float(r))


def accelerated_count(U, V, r: float) -> int:
    """#{(u, v) : d(u, v) < r}, by sorted sweep (1-D) or cell list (d-D)."""
    U, V = _pair(U, V)
    if U.ndim == 1:
        return kernels.count_pairs_1d(U, V, float(r))
    return kernels.count_pairs_grid(U, V, float(r))


def cross_correlation_integral(U, V, r: float) -> float:
    if r <= 0:
        raise DomainError("radius must be positive")
    U, V = _pair(U, V)
    return accelerated_count(U, V, r) / float(len(U) * len(V))


def cross_correlation_curve(U, V, schedule: RadiiSchedule) -> CorrelationEstimate:
    U, V = _pair(U, V)
    radii = schedule.radii
    counts = [accelerated_count(U, V, r) for r in radii]
    return CorrelationEstimate.from_counts(radii, counts, (len(U), len(V)))


def fit_divergence(est: CorrelationEstimate, window: Optional[tuple] = None,
                   min_count: int = MIN_PAIRS, drop_largest: int = 2
                   ) -> DivergenceFit:
    """OLS slope of log C(r) against log r.

    Default window: every radius except the ``drop_largest`` largest and
    those with fewer than ``min_count`` pairs. An explicit ``window``
    ``(start, stop)`` indexes into the radii and only drops zero counts.
    """
    radii = np.asarray(est.radii)
    counts = np.asarray(est.pair_counts)
    order = np.argsort(-radii, kind="stable")
    if window is None:
        keep = set(order[drop_largest:].tolist())
        usable = [i for i in range(len(radii))
                  if i in keep and counts[i] >= min_count]
        lo, hi = 0, len(radii)
    else:
        lo, hi = int(window[0]), int(window[1])
        usable = [i for i in range(max(lo, 0), min(hi, len(radii)))
                  if counts[i] > 0]
    dropped = tuple(i for i in range(lo, hi) if counts[i] == 0)
    if len(usable) < 2:
        raise InsufficientScalesError(len(usable))
    x = np.log(radii[usable])
    y = np.log(np.asarray(est.values)[usable])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / sst if sst > 0 else 1.0
    return DivergenceFit(float(slope), float(intercept),
                         (min(usable), max(usable) + 1),
                         float(min(max(r2, 0.0), 1.0)), dropped)


def expected_counting(U, V, r: float, n: int) -> float:
    """n * C(r): the mean of the counting function over independent pairs."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return n * cross_correlation_integral(U, V, r)
