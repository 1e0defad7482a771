"""Empirical checks of the mixing and annulus-regularity hypotheses.

Neither hypothesis can be proven from samples. ``correlation_decay`` fits a
stretched-exponential envelope and reports whether it is consistent with
the measured covariances; ``annuli_regularity`` reports how far empirical
annulus masses sit below a proposed power bound.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import DomainError
from .systems import (INTEGER_BASE, DigitStream, MapSystem, Observation,
                      block_digits, sample_invariant)


@dataclass(frozen=True)
class MollifierKernel:
    r: float
    rho: float

    def __post_init__(self):
        if self.r <= 0 or self.rho <= 0:
            raise DomainError("mollifier needs r > 0 and rho > 0")

    @property
    def lipschitz_constant(self) -> float:
        return 1 / (self.rho * self.r)

    def __call__(self, t):
        return mollifier_eval(self, t)


def mollifier_eval(kernel: MollifierKernel, t):
    """1 on [0, r], 0 from (1 + rho) r on, linear in between.

    A Fraction ``t`` (with Fraction kernel fields) is evaluated exactly.
    """
    r, rho = kernel.r, kernel.rho
    if isinstance(t, Fraction):
        if t < 0:
            raise DomainError("mollifier is defined on t >= 0")
        if t <= r:
            return Fraction(1)
        if t >= (1 + rho) * r:
            return Fraction(0)
        return 1 - (t - r) / (rho * r)
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise DomainError("mollifier is defined on t >= 0")
    val = np.where(t <= r, 1.0,
                   np.where(t >= (1.0 + rho) * r, 0.0, 1.0 - (t - r) / (rho * r)))
    val = np.clip(val, 0.0, 1.0)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class DecayFit:
    lags: np.ndarray
    covariances: np.ndarray
    noise_floor: float
    a: Optional[float]
    alpha: Optional[float]
    residual: Optional[float]
    envelope_ok: bool
    violations: tuple
    indistinguishable_from_zero: bool
    variance: float

    def rows(self):
        return list(zip(self.lags.tolist(), self.covariances.tolist()))


def lagged_samples(system: MapSystem, lags: Sequence[int], M: int, seed: int,
                   stream: int = 0):
    """M stationary starts and their images T^n x for every n in ``lags``.

    Returns ``(x0, images)`` with images of shape (len(lags), M, ...).
    Integer-base maps read the images off one digit block per sample, so
    no collapse occurs for any lag.
    """
    lags = [int(n) for n in lags]
    if system.kind != INTEGER_BASE:
        x0 = sample_invariant(system, seed, M, stream=stream)
        return x0, np.stack([system.iterate_batch(x0, n) for n in lags])
    base = system.base
    K = block_digits(base)
    need = max(lags + [0]) + 1
    n_blk = DigitStream(base).n_blocks(need)
    # one long stream cut into M consecutive independent segments
    blocks = DigitStream(base, seed=seed, stream=stream).blocks(
        (M * n_blk - 1) * K).reshape(-1)[: M * n_blk].reshape(M, n_blk)
    P = [np.uint64(base ** j) for j in range(K + 1)]
    scale = float(base ** K)

    def at(n):
        k, s = divmod(n, K)
        w = blocks[:, k] % P[K - s] * P[s] + blocks[:, k + 1] // P[K - s]
        return np.minimum(w.astype(np.float64) / scale, 1.0 - 2.0 ** -53)

    return at(0), np.stack([at(n) for n in lags])


def _fit_envelope(lags, cov, scale):
    """Least squares of log(|cov|/scale) = lag**alpha * log(a)."""
    y = np.log(np.abs(cov) / scale)

    def resid(p):
        log_a, log_alpha = p
        return lags ** np.exp(log_alpha) * log_a - y

    start = [min(-1e-3, float(np.mean(y / lags))), 0.0]
    sol = least_squares(resid, start, bounds=([-np.inf, -5.0], [0.0, 3.0]))
    log_a, log_alpha = sol.x
    return float(np.exp(log_a)), float(np.exp(log_alpha)), float(np.sqrt(np.mean(sol.fun ** 2)))


def correlation_decay(system: MapSystem, psi: Observation, phi: Observation,
                      lags: Sequence[int], M: int, seed: int,
                      noise_sigmas: float = 3.0) -> DecayFit:
    """Monte-Carlo covariances of psi and phi o T^n over stationary starts.

    Lags above the noise floor ``noise_sigmas / sqrt(M)`` are fitted by the
    envelope ``|psi|_Lip |phi|_Lip a**(n**alpha)``; the envelope check
    allows the noise floor on top of the bound.
    """
    lags = np.asarray(sorted(set(int(n) for n in lags)), dtype=np.int64)
    if len(lags) == 0 or lags[0] < 0:
        raise DomainError("lags must be nonnegative integers")
    if psi.codomain_dim != 1 or phi.codomain_dim != 1:
        raise DomainError("correlation decay needs real-valued observations")
    x0, images = lagged_samples(system, lags, M, seed)
    a_vals = psi(x0)
    cov = np.empty(len(lags))
    for k in range(len(lags)):
        b_vals = phi(images[k])
        cov[k] = np.mean(a_vals * b_vals) - a_vals.mean() * b_vals.mean()
    variance = float(np.var(a_vals))
    floor = noise_sigmas / np.sqrt(M)
    scale = psi.lipschitz_norm * phi.lipschitz_norm
    fit_mask = (lags >= 1) & (np.abs(cov) > floor)
    if np.count_nonzero(fit_mask) == 0:
        return DecayFit(lags, cov, floor, None, None, None, True, (), True,
                        variance)
    fl = lags[fit_mask].astype(np.float64)
    if len(fl) == 1:
        a = float(np.exp(np.log(abs(cov[fit_mask][0]) / scale) / fl[0]))
        alpha, res = 1.0, 0.0
    else:
        a, alpha, res = _fit_envelope(fl, cov[fit_mask], scale)
    pos = lags >= 1
    bound = scale * a ** (lags[pos].astype(np.float64) ** alpha) + floor
    bad = np.abs(cov[pos]) > bound
    violations = tuple(int(n) for n in lags[pos][bad])
    return DecayFit(lags, cov, floor, a, alpha, res, not violations,
                    violations, False, variance)


def covariance_quadrature(system: MapSystem, psi: Observation, phi: Observation,
                          lag: int, grid_bits: int = 20) -> float:
    """int psi * (phi o T^lag) dLeb - int psi int phi on a 2**grid_bits midpoint grid.

    Integer-base images are computed exactly on the grid's rational points.
    """
    G = 1 << grid_bits
    k = np.arange(G, dtype=np.int64)
    x = (k + 0.5) / G
    if system.kind == INTEGER_BASE:
        # x = (2k+1) / 2G exactly; T^lag x = ((2k+1) b^lag mod 2G) / 2G
        q = 2 * G
        mult = pow(system.base, lag, q)
        num = ((2 * k + 1) * mult) % q
        y = num / q
    else:
        y = system.iterate_batch(x, lag)
    a, b = psi(x), phi(y)
    return float(np.mean(a * b) - a.mean() * phi(x).mean())


@dataclass(frozen=True)
class AnnuliReport:
    r_values: np.ndarray
    rho_values: np.ndarray
    annulus_mass: np.ndarray
    bound: np.ndarray
    ratio: np.ndarray
    xi: float
    beta: float
    max_violation_ratio: float

    def rows(self):
        return list(zip(self.r_values.tolist(), self.rho_values.tolist(),
                        self.annulus_mass.tolist(), self.bound.tolist(),
                        self.ratio.tolist()))


def annulus_counts(samples, centers, r: float, rho: float) -> int:
    """Pairs with r - rho <= d(center, sample) < r + rho."""
    from .renyi import accelerated_count
    inner = accelerated_count(centers, samples, r - rho) if r > rho else 0
    return accelerated_count(centers, samples, r + rho) - inner


def annuli_regularity(samples, centers, r_grid: Sequence[float],
                      rho_grid: Sequence[float], xi: float, beta: float
                      ) -> AnnuliReport:
    """Empirical mass of B(y, r+rho) minus B(y, r-rho), averaged over centers."""
    if xi < 0 or beta < 1:
        raise DomainError("need xi >= 0 and beta >= 1")
    samples = np.asarray(samples, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    rs, rhos, mass = [], [], []
    for r in r_grid:
        for rho in rho_grid:
            if not 0 < rho < r:
                raise DomainError(f"annulus needs 0 < rho < r, got r={r}, rho={rho}")
            c = annulus_counts(samples, centers, r, rho)
            rs.append(float(r))
            rhos.append(float(rho))
            mass.append(c / float(len(samples) * len(centers)))
    rs, rhos, mass = np.array(rs), np.array(rhos), np.array(mass)
    bound = rs ** (-xi) * rhos ** beta
    ratio = mass / bound
    return AnnuliReport(rs, rhos, mass, bound, ratio, float(xi), float(beta),
                        float(ratio.max()) if len(ratio) else 0.0)
