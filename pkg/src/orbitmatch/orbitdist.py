"""Synchronized shortest distance between two observed orbits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DomainError
from .systems import (DigitStream, INTEGER_BASE, MapSystem, Observation,
                      SkewProduct, orbit, random_orbit, skew_orbit,
                      start_orbit, torus_distance_array)

EXPONENT_FLOOR = 1e-300


@dataclass(frozen=True)
class DistanceCurve:
    checkpoints: np.ndarray
    prefix_min: np.ndarray
    records: tuple
    zero_hit: Optional[int] = None

    @property
    def n_max(self) -> int:
        return int(self.checkpoints[-1])


@dataclass(frozen=True)
class ExponentCurve:
    checkpoints: np.ndarray
    exponent: np.ndarray
    floor_applied: np.ndarray

    @property
    def terminal(self) -> float:
        return float(self.exponent[-1])


def geometric_checkpoints(N: int, n0: int = 10, ratio: float = 1.5) -> np.ndarray:
    """ceil(n0 * ratio**g) for g = 0, 1, ... up to N, deduplicated, then N."""
    if N < 1:
        raise DomainError("N must be >= 1")
    if n0 < 1 or ratio <= 1.0:
        raise DomainError("checkpoint grid needs n0 >= 1 and ratio > 1")
    pts = set()
    g = 0
    while True:
        c = math.ceil(n0 * ratio ** g)
        if c > N:
            break
        pts.add(c)
        g += 1
    pts.add(N)
    return np.array(sorted(pts), dtype=np.int64)


def _checkpoints(N, checkpoints):
    if N < 1:
        raise DomainError("N must be >= 1")
    if checkpoints is None:
        return geometric_checkpoints(N)
    cp = np.asarray(checkpoints, dtype=np.int64)
    if cp.ndim != 1 or len(cp) == 0:
        raise DomainError("checkpoints must be a nonempty sequence")
    if cp[0] < 1 or cp[-1] > N or np.any(np.diff(cp) <= 0):
        raise DomainError("checkpoints must increase within [1, N]")
    return cp


def _from_kernel(cp, out) -> DistanceCurve:
    prefix, rec_t, rec_d, zero_hit = out
    records = tuple((int(t), float(d)) for t, d in zip(rec_t, rec_d))
    return DistanceCurve(cp, np.asarray(prefix, dtype=np.float64), records,
                         None if zero_hit < 0 else int(zero_hit))


def _system_orbit(system, start, n):
    if isinstance(system, SkewProduct):
        return skew_orbit(system, tuple(start), n)
    if isinstance(start, DigitStream):
        return start_orbit(system, start, n)
    return orbit(system, start, n)


def _streamable(system, start) -> bool:
    return (isinstance(start, DigitStream) and isinstance(system, MapSystem)
            and system.kind == INTEGER_BASE and start.base == system.base)


def observed_distances(sysT, sysS, obs: Observation, x, y, n: int) -> np.ndarray:
    """d(f(T^i x), f(S^i y)) for i = 0..n-1."""
    fa = obs(_system_orbit(sysT, x, n))
    fb = obs(_system_orbit(sysS, y, n))
    if fa.shape != fb.shape:
        raise DomainError(
            f"observed values differ in shape: {fa.shape[1:]} vs {fb.shape[1:]}")
    return torus_distance_array(fa, fb)


def shortest_distance_curve(sysT, sysS, obs: Observation, x, y, N: int,
                            checkpoints: Optional[Sequence[int]] = None
                            ) -> DistanceCurve:
    """Running minimum of the observed distance over i < n, at each checkpoint n.

    ``x`` and ``y`` are user points, DigitStreams (for integer-base maps),
    or (omega, x) pairs when the systems are skew products.
    """
    cp = _checkpoints(N, checkpoints)
    if (obs.rule == "identity" and _streamable(sysT, x)
            and _streamable(sysS, y)):
        out = kernels.stream_min_curve(x.blocks(N), x.base, x.K, x.D,
                                       y.blocks(N), y.base, y.K, y.D, N, cp)
        return _from_kernel(cp, out)
    dist = observed_distances(sysT, sysS, obs, x, y, N)
    return _from_kernel(cp, kernels.min_curve(dist, cp))


def exponent_curve(curve: DistanceCurve, floor: float = EXPONENT_FLOOR
                   ) -> ExponentCurve:
    """log(m_n) / (-log n) per checkpoint, natural logs.

    Zero minima are replaced by ``floor`` and flagged; checkpoints with
    n < 2 have no exponent (NaN, flagged).
    """
    n = curve.checkpoints.astype(np.float64)
    m = curve.prefix_min
    flags = (m <= floor) | (n < 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        expo = np.log(np.maximum(m, floor)) / (-np.log(n))
    expo = np.where(n < 2, np.nan, expo)
    return ExponentCurve(curve.checkpoints, expo, flags)


def counting_function(sysT, sysS, obs: Observation, x, y, r: float, n: int) -> int:
    """Number of times i < n with d(f(T^i x), f(S^i y)) < r."""
    if r <= 0:
        raise DomainError("radius must be positive")
    if n < 1:
        raise DomainError("n must be >= 1")
    if (obs.rule == "identity" and _streamable(sysT, x)
            and _streamable(sysS, y)):
        return kernels.stream_count_below(x.blocks(n), x.base, x.K, x.D,
                                          y.blocks(n), y.base, y.K, y.D, n, r)
    d = observed_distances(sysT, sysS, obs, x, y, n)
    return int(np.count_nonzero(d < r))


def rds_shortest_distance(spT: SkewProduct, spS: SkewProduct, omega, omega_t,
                          x, x_t, N: int,
                          checkpoints: Optional[Sequence[int]] = None
                          ) -> DistanceCurve:
    """Shortest distance between the random orbits T_omega^i x and S_omega~^i x~."""
    cp = _checkpoints(N, checkpoints)
    fam_t, fam_s = spT.fiber, spS.fiber
    if (fam_t.kind == "constant" and fam_s.kind == "constant"
            and _streamable(fam_t.system, x) and _streamable(fam_s.system, x_t)):
        # constant fibers ignore the noise; the fiber orbit is the digit orbit
        out = kernels.stream_min_curve(x.blocks(N), x.base, x.K, x.D,
                                       x_t.blocks(N), x_t.base, x_t.K, x_t.D,
                                       N, cp)
        return _from_kernel(cp, out)
    a = random_orbit(spT, omega, x, N)
    b = random_orbit(spS, omega_t, x_t, N)
    return _from_kernel(cp, kernels.min_curve(torus_distance_array(a, b), cp))
