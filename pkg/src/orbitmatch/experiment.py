"""Monte-Carlo checks of the almost-sure limit law for orbit distances.

Each pair p draws its initial conditions from substreams ``4p .. 4p+3`` of
the configured seed (x, y, omega, omega~), so results depend only on
``(seed, p)`` and never on how pairs are scheduled over workers.
"""
from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError
from .orbitdist import (counting_function, exponent_curve,
                        geometric_checkpoints, rds_shortest_distance,
                        shortest_distance_curve)
from .renyi import (RadiiSchedule, cross_correlation_curve, expected_counting,
                    fit_divergence)
from .systems import (DigitStream, make_skew_product, parse_observation,
                      parse_system, random_orbit, sample_invariant,
                      stationary_start, torus_distance_array)

CONFIG_KEYS = ("system_t", "system_s", "observation", "rds", "pairs", "n_max",
               "checkpoint_base", "checkpoint_ratio", "seed", "reference_c",
               "out_csv", "out_json")
EXTRA_KEYS = ("same_start", "width", "counting_n", "counting_r")
DEFAULT_SLACK = 0.3


def default_workers() -> int:
    env = os.environ.get("ORBITMATCH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"ORBITMATCH_THREADS={env!r} is not an integer") from None
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentConfig:
    system_t: str = "doubling"
    system_s: str = "tripling"
    observation: str = "identity"
    rds: object = False
    pairs: int = 200
    n_max: int = 10 ** 6
    checkpoint_base: int = 10
    checkpoint_ratio: float = 1.5
    seed: int = 0
    reference_c: object = None
    out_csv: Optional[str] = None
    out_json: Optional[str] = None
    same_start: bool = False
    width: int = 96
    counting_n: Optional[int] = None
    counting_r: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.pairs, int) or self.pairs < 1:
            raise ConfigError("pairs must be a positive integer")
        if not isinstance(self.n_max, int) or self.n_max < 10:
            raise ConfigError("n_max must be an integer >= 10")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.checkpoint_base < 1 or self.checkpoint_ratio <= 1:
            raise ConfigError("checkpoint grid needs base >= 1 and ratio > 1")
        if self.rds not in (False, True, None) and not isinstance(self.rds, dict):
            raise ConfigError("rds must be false, true, or {base_t, base_s}")
        if isinstance(self.rds, dict):
            unknown = set(self.rds) - {"base_t", "base_s"}
            if unknown or not {"base_t", "base_s"} <= set(self.rds):
                raise ConfigError("rds needs exactly the keys base_t and base_s")
        if (self.counting_n is None) != (self.counting_r is None):
            raise ConfigError("counting_n and counting_r go together")
        ref = self.reference_c
        if ref is not None and ref not in ("analytic", "renyi"):
            if isinstance(ref, bool) or not isinstance(ref, (int, float)) or ref <= 0:
                raise ConfigError("reference_c must be positive, 'analytic' or 'renyi'")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("experiment config must be a JSON object")
        unknown = set(data) - set(CONFIG_KEYS) - set(EXTRA_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)

    @property
    def rds_bases(self) -> Optional[tuple]:
        if not self.rds:
            return None
        if isinstance(self.rds, dict):
            return self.rds["base_t"], self.rds["base_s"]
        return "doubling", "tripling"

    def checkpoints(self) -> np.ndarray:
        return geometric_checkpoints(self.n_max, self.checkpoint_base,
                                     self.checkpoint_ratio)


@dataclass
class ExperimentReport:
    mode: str
    checkpoints: list
    q10: list
    median: list
    q90: list
    n_pairs: int
    excluded_pairs: int
    excluded_indices: list
    terminal_exponents: list
    reference_c: Optional[float] = None
    reference_inverse: Optional[float] = None
    reference_source: Optional[str] = None
    counting: Optional[dict] = None
    config: dict = field(default_factory=dict)

    @property
    def terminal_median(self) -> float:
        return self.median[-1]

    def to_dict(self) -> dict:
        return _json_safe(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        ref = "" if self.reference_inverse is None else repr(self.reference_inverse)
        lines = ["n,q10,median,q90,reference"]
        for row in zip(self.checkpoints, self.q10, self.median, self.q90):
            n, *qs = row
            lines.append(",".join([str(n)] + [_fmt(q) for q in qs] + [ref]))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return "nan" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# --------------------------------------------------------------------------
# pair sampling

def _resolve(config: ExperimentConfig):
    """Parse ids once; returns (mode, T, S, obs)."""
    bases = config.rds_bases
    if bases is None:
        T, S = parse_system(config.system_t), parse_system(config.system_s)
        if T.dim != S.dim:
            raise ConfigError("systems act on spaces of different dimension")
        obs = parse_observation(config.observation, T.dim)
        return "deterministic", T, S, obs
    T = make_skew_product(bases[0], config.system_t)
    S = make_skew_product(bases[1], config.system_s)
    obs = parse_observation(config.observation, 1)
    if obs.rule != "identity":
        raise ConfigError("rds mode observes the fiber coordinate only (identity)")
    return "rds", T, S, obs


def _fiber_start(fam, seed, stream, width):
    if fam.kind == "constant":
        return stationary_start(fam.system, seed, stream, width)
    return float(sample_invariant(parse_system("rotation:0"), seed, 1, stream)[0])


def pair_starts(config: ExperimentConfig, p: int, resolved=None):
    """Initial conditions of pair p: (x, y) or ((omega, x), (omega~, y))."""
    mode, T, S, _ = resolved or _resolve(config)
    seed, w = config.seed, config.width
    if mode == "deterministic":
        x = stationary_start(T, seed, 4 * p, w)
        if config.same_start:
            x0 = x.states(1)[0] if isinstance(x, DigitStream) else x
            return x0, x0
        return x, stationary_start(S, seed, 4 * p + 1, w)
    x = _fiber_start(T.fiber, seed, 4 * p, w)
    y = _fiber_start(S.fiber, seed, 4 * p + 1, w)
    om = stationary_start(T.base, seed, 4 * p + 2, w)
    om_t = stationary_start(S.base, seed, 4 * p + 3, w)
    if config.same_start:
        if T != S or not isinstance(x, DigitStream):
            raise ConfigError("same_start in rds mode needs identical systems")
        return (om, x), (om, x)
    return (om, x), (om_t, y)


def _initial_value(start) -> np.ndarray:
    if isinstance(start, DigitStream):
        return start.states(1)[0]
    return np.asarray(start, dtype=np.float64)


def _run_pair(config, resolved, cp, p):
    mode, T, S, obs = resolved
    a, b = pair_starts(config, p, resolved)
    if mode == "deterministic":
        curve = shortest_distance_curve(T, S, obs, a, b, config.n_max, cp)
    else:
        curve = rds_shortest_distance(T, S, a[0], b[0], a[1], b[1],
                                      config.n_max, cp)
    expo = exponent_curve(curve)
    q = None
    if config.counting_n is not None:
        if mode == "deterministic":
            q = counting_function(T, S, obs, a, b, config.counting_r,
                                  config.counting_n)
        else:
            q = _rds_count(T, S, a, b, config)
    return curve, expo, q


def _rds_count(T, S, a, b, config):
    n, r = config.counting_n, config.counting_r
    da = random_orbit(T, a[0], a[1], n)
    db = random_orbit(S, b[0], b[1], n)
    return int(np.count_nonzero(torus_distance_array(da, db) < r))


def _pool_map(fn, items, workers):
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# reference exponent

def analytic_reference(config: ExperimentConfig) -> float:
    """C for Lebesgue-invariant built-ins: the dimension of the observed space."""
    mode, T, S, obs = _resolve(config)
    if obs.rule == "affine" and obs.params[0] == 0:
        raise ConfigError("constant observation: pushforward is a point mass")
    if mode == "deterministic" and (T.kind == "custom-double-precision"
                                    or S.kind == "custom-double-precision"):
        raise ConfigError("no analytic reference for custom systems")
    return float(obs.codomain_dim)


def renyi_reference(config: ExperimentConfig, samples: int = 10 ** 4) -> float:
    mode, T, S, obs = _resolve(config)
    if mode == "deterministic":
        U = obs(sample_invariant(T, config.seed, samples, stream=1 << 40))
        V = obs(sample_invariant(S, config.seed, samples, stream=(1 << 40) + 1))
    else:
        U = sample_invariant(parse_system("rotation:0"), config.seed, samples, 1 << 40)
        V = sample_invariant(parse_system("rotation:0"), config.seed, samples,
                             (1 << 40) + 1)
    est = cross_correlation_curve(U, V, RadiiSchedule(0.25, 8))
    return fit_divergence(est).slope


def _reference(config):
    ref = config.reference_c
    if ref is None:
        return None, None
    if ref == "analytic":
        return analytic_reference(config), "analytic"
    if ref == "renyi":
        return renyi_reference(config), "renyi"
    return float(ref), "given"


# --------------------------------------------------------------------------
# runners

def _quantiles(rows: np.ndarray):
    if rows.shape[0] == 0:
        nan = [float("nan")] * rows.shape[1]
        return nan, nan, nan
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        q = np.nanquantile(rows, [0.1, 0.5, 0.9], axis=0)
    return q[0].tolist(), q[1].tolist(), q[2].tolist()


def _run(config: ExperimentConfig, workers=None, expect_mode=None) -> ExperimentReport:
    resolved = _resolve(config)
    mode = resolved[0]
    if expect_mode is not None and mode != expect_mode:
        raise ConfigError(f"config describes a {mode} experiment")
    cp = config.checkpoints()
    results = _pool_map(lambda p: _run_pair(config, resolved, cp, p),
                        range(config.pairs), workers)
    excluded = [p for p, (curve, _, _) in enumerate(results)
                if curve.zero_hit is not None]
    keep = [expo.exponent for p, (_, expo, _) in enumerate(results)
            if p not in set(excluded)]
    rows = np.array(keep, dtype=np.float64).reshape(len(keep), len(cp))
    q10, med, q90 = _quantiles(rows)
    ref, source = _reference(config)
    counting = None
    if config.counting_n is not None:
        counting = _counting_summary(config, resolved, results)
    return ExperimentReport(
        mode=mode,
        checkpoints=cp.tolist(),
        q10=q10, median=med, q90=q90,
        n_pairs=config.pairs,
        excluded_pairs=len(excluded),
        excluded_indices=excluded,
        terminal_exponents=[expo.terminal for _, expo, _ in results],
        reference_c=ref,
        reference_inverse=None if ref is None else 1.0 / ref,
        reference_source=source,
        counting=counting,
        config=asdict(config),
    )


def _counting_summary(config, resolved, results):
    qs = np.array([q for _, _, q in results], dtype=np.float64)
    U, V = matched_clouds(config, resolved)
    n, r = config.counting_n, config.counting_r
    expected = expected_counting(U, V, r, n)
    c = expected / n
    se_q = float(qs.std(ddof=1) / np.sqrt(len(qs))) if len(qs) > 1 else float("nan")
    se_e = float(n * np.sqrt(max(c * (1 - c), 0.0) / (len(U) * len(V))))
    return {"n": n, "r": r, "mean_q": float(qs.mean()), "se_q": se_q,
            "expected": float(expected), "se_expected": se_e}


def matched_clouds(config, resolved=None):
    """Observed initial points of every pair, as two clouds."""
    resolved = resolved or _resolve(config)
    mode, T, S, obs = resolved
    xs, ys = [], []
    for p in range(config.pairs):
        a, b = pair_starts(config, p, resolved)
        if mode == "rds":
            a, b = a[1], b[1]
        xs.append(_initial_value(a))
        ys.append(_initial_value(b))
    return obs(np.array(xs)), obs(np.array(ys))


def run_limit_law(config: ExperimentConfig, workers=None) -> ExperimentReport:
    """Exponent quantiles across pairs at every checkpoint."""
    return _run(config, workers, expect_mode="deterministic")


def run_rds_limit_law(config: ExperimentConfig, workers=None) -> ExperimentReport:
    """As run_limit_law for the two random dynamical systems in ``config.rds``."""
    if not config.rds:
        raise ConfigError("rds is not set in this config")
    return _run(config, workers, expect_mode="rds")


def run_experiment(config: ExperimentConfig, workers=None) -> ExperimentReport:
    return _run(config, workers)


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    per_checkpoint: tuple
    threshold: float
    warning: Optional[str] = None


def one_sided_bound_check(report: ExperimentReport, C_lower: float,
                          slack: float = DEFAULT_SLACK) -> BoundCheck:
    """q90 of the exponent against 1/C_lower + slack; decided at the last checkpoint."""
    if C_lower <= 0:
        raise DomainError("C_lower must be positive")
    thr = 1.0 / C_lower + slack
    if report.n_pairs - report.excluded_pairs == 0:
        msg = "all pairs excluded; bound check is vacuous"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        return BoundCheck(True, tuple(True for _ in report.checkpoints), thr, msg)
    per = tuple(bool(q <= thr) if not math.isnan(q) else True for q in report.q90)
    return BoundCheck(per[-1], per, thr)
