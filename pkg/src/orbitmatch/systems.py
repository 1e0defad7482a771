"""Deterministic and random dynamical systems on the torus.

Integer-base maps ``x -> beta*x mod 1`` are never iterated in floating
point: a double loses one bit per doubling and reaches 0 after ~53 steps.
User-supplied points are iterated in exact rational arithmetic, and
stationary samples are realized as digit streams (a sliding window over
i.i.d. base-beta digits), decoded to doubles only when distances are taken.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels, rng
from .errors import ConfigError, DomainError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# --------------------------------------------------------------------------
# points and the metric

def as_exact(value) -> Fraction:
    """Exact rational for a coordinate.

    Floats are read through their shortest decimal repr, so ``0.1`` means
    1/10 and orbits of decimal inputs stay exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(repr(float(value)))


def _coords(point) -> tuple:
    if isinstance(point, (list, tuple, np.ndarray)):
        return tuple(point)
    return (point,)


def check_unit(point, dim: int | None = None) -> tuple:
    c = _coords(point)
    if dim is not None and len(c) != dim:
        raise DomainError(f"point has {len(c)} coordinates, expected {dim}")
    for v in c:
        if not (0 <= v < 1):
            raise DomainError(f"coordinate {v!r} outside [0, 1)")
    return c


def torus_distance(x, y):
    """Chebyshev distance on the torus [0,1)^d.

    Accepts scalars or equal-length sequences; Fractions stay exact.
    """
    cx, cy = _coords(x), _coords(y)
    if len(cx) != len(cy):
        raise DomainError(f"dimension mismatch: {len(cx)} vs {len(cy)}")
    best = 0
    for a, b in zip(cx, cy):
        t = abs(a - b)
        t = t - math.floor(t)
        t = min(t, 1 - t)
        if t > best:
            best = t
    return best


torus_distance_array = kernels.python_backend.torus_distance


# --------------------------------------------------------------------------
# digit streams

def block_digits(base: int) -> int:
    """Digits per 63-bit block: largest K with base**K <= 2**63."""
    K = 0
    while base ** (K + 1) <= 1 << 63:
        K += 1
    return K


@dataclass(frozen=True)
class DigitStream:
    """I.i.d. uniform base-``base`` digits d_1, d_2, ...

    The state at time i is ``sum_{j=1..width} d_{i+j} base**-j``, so moving
    one step along the stream is exactly ``x -> base*x mod 1`` up to the
    digit that enters at position ``width``.

    ``digits``, when given, replaces the random source by a periodic
    repetition of that finite sequence.
    """

    base: int
    width: int = 96
    seed: int = 0
    stream: int = 0
    digits: Optional[tuple] = None

    def __post_init__(self):
        if self.base < 2:
            raise DomainError("digit base must be >= 2")
        if self.width < 1:
            raise DomainError("digit width must be >= 1")
        if self.digits is not None:
            if len(self.digits) == 0 or any(
                    not 0 <= d < self.base for d in self.digits):
                raise DomainError("explicit digits must lie in [0, base)")
            object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))

    @classmethod
    def from_digits(cls, base, digits, width=96):
        return cls(base=base, width=width, digits=tuple(digits))

    @cached_property
    def K(self) -> int:
        return block_digits(self.base)

    @property
    def D(self) -> int:
        """Digits used when decoding to double precision."""
        return min(self.width, self.K)

    def n_blocks(self, n: int) -> int:
        return (n - 1) // self.K + 2

    def blocks(self, n: int) -> np.ndarray:
        """Digit blocks covering states 0..n-1 (prefix-stable in n)."""
        count = self.n_blocks(n)
        if self.digits is not None:
            return self._explicit_blocks(count)
        K, b = self.K, self.base
        span = b ** K
        limit = ((1 << 63) // span) * span
        gen = rng.philox(self.seed, self.stream)
        accept = limit / float(1 << 63)
        out = []
        have = 0
        while have < count:
            want = int((count - have) / accept * 1.02) + 8
            v = gen.random_raw(want).astype(np.uint64) >> np.uint64(1)
            if limit < 1 << 63:
                v = v[v < np.uint64(limit)]
            v = v % np.uint64(span) if span < 1 << 63 else v
            out.append(v)
            have += len(v)
        return np.concatenate(out)[:count]

    def _explicit_blocks(self, count):
        K, b, ds = self.K, self.base, self.digits
        out = np.empty(count, dtype=np.uint64)
        pos = 0
        for k in range(count):
            w = 0
            for _ in range(K):
                w = w * b + ds[pos % len(ds)]
                pos += 1
            out[k] = w
        return out

    def digit_list(self, count: int) -> list:
        """First ``count`` digits d_1..d_count as Python ints."""
        if self.digits is not None:
            return [self.digits[j % len(self.digits)] for j in range(count)]
        K, b = self.K, self.base
        out = []
        for w in self.blocks(count // K * K + 1)[: -(-count // K)]:
            w = int(w)
            chunk = []
            for _ in range(K):
                w, d = divmod(w, b)
                chunk.append(d)
            out.extend(reversed(chunk))
        return out[:count]

    def states(self, n: int) -> np.ndarray:
        """Decoded states 0..n-1 as doubles in [0, 1)."""
        return kernels.decode_windows(self.blocks(n), self.base, self.K,
                                      self.D, n)

    def exact_states(self, n: int) -> list:
        """Integer numerators over ``base**width`` of the states 0..n-1."""
        ds = self.digit_list(n + self.width - 1)
        b, W = self.base, self.width
        top = b ** W
        w = 0
        for d in ds[:W]:
            w = w * b + d
        out = [w]
        for d in ds[W:]:
            w = (w * b) % top + d
            out.append(w)
        return out


def digit_orbit(stream: DigitStream, n: int) -> np.ndarray:
    if n < 1:
        raise DomainError("orbit length must be >= 1")
    return stream.states(n)


# --------------------------------------------------------------------------
# deterministic maps

INTEGER_BASE = "integer-base-torus"
ROTATION = "torus-rotation"
CUSTOM = "custom-double-precision"


@dataclass(frozen=True)
class MapSystem:
    id: str
    dim: int
    kind: str
    base: Optional[int] = None
    angle: Optional[tuple] = None
    step: Optional[Callable] = field(default=None, compare=False)
    burn_in: int = 1000

    def __post_init__(self):
        if self.kind == INTEGER_BASE and (self.base is None or self.base < 2):
            raise ConfigError("integer-base map needs base >= 2")
        if self.kind == INTEGER_BASE and self.dim != 1:
            raise ConfigError("integer-base maps are one-dimensional")
        if self.kind == ROTATION and (self.angle is None
                                      or len(self.angle) != self.dim):
            raise ConfigError("rotation needs one angle per coordinate")
        if self.kind == CUSTOM and self.step is None:
            raise ConfigError("custom system needs a step function")

    @property
    def exact(self) -> bool:
        return self.kind != CUSTOM

    def map_exact(self, coords: tuple) -> tuple:
        """One step on exact rational coordinates."""
        if self.kind == INTEGER_BASE:
            return tuple((self.base * c) % 1 for c in coords)
        if self.kind == ROTATION:
            return tuple((c + as_exact(a)) % 1
                         for c, a in zip(coords, self.angle))
        raise DomainError(f"{self.id} has no exact arithmetic")

    def map(self, x: np.ndarray) -> np.ndarray:
        """One step on doubles (custom maps, and rotations)."""
        if self.kind == CUSTOM:
            return np.asarray(self.step(x), dtype=np.float64)
        if self.kind == ROTATION:
            a = np.asarray(self.angle) if self.dim > 1 else self.angle[0]
            return (x + a) % 1.0
        raise DomainError(
            f"{self.id}: integer-base maps are not iterated in floating point")

    def iterate_batch(self, x: np.ndarray, n: int) -> np.ndarray:
        """T^n applied to a batch of double-precision points."""
        if self.kind == ROTATION:
            a = np.asarray(self.angle) if self.dim > 1 else self.angle[0]
            return (x + n * np.asarray(a)) % 1.0
        for _ in range(n):
            x = self.map(x)
        return x


def _reshape(points: np.ndarray, dim: int) -> np.ndarray:
    return points if dim > 1 else points.reshape(-1)


def _exact_orbit(step, coords: tuple, n: int) -> np.ndarray:
    """Iterate an exact-rational step on integer numerators over a common
    denominator; returns doubles of shape (n, dim)."""
    out = np.empty((n, len(coords)), dtype=np.float64)
    cur = coords
    for i in range(n):
        out[i] = [c.numerator / c.denominator for c in cur]
        if i + 1 < n:
            cur = step(cur)
    return out


def _integer_base_orbit(base: int, c: Fraction, n: int) -> np.ndarray:
    p, q = c.numerator, c.denominator
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = p / q
        p = (base * p) % q
    return out


def orbit(system: MapSystem, x0, n: int) -> np.ndarray:
    """The first n points of the orbit of x0, starting with x0 itself."""
    if n < 1:
        raise DomainError("orbit length must be >= 1")
    coords = check_unit(x0, system.dim)
    if system.kind == INTEGER_BASE:
        return _integer_base_orbit(system.base, as_exact(coords[0]), n)
    if system.kind == ROTATION:
        pts = _exact_orbit(system.map_exact,
                           tuple(as_exact(c) for c in coords), n)
        return _reshape(pts, system.dim)
    x = np.array(coords, dtype=np.float64)
    if system.dim == 1:
        x = x[0]
    out = [x]
    for _ in range(n - 1):
        x = system.map(x)
        out.append(x)
    return _reshape(np.asarray(out, dtype=np.float64), system.dim)


def sample_invariant(system: MapSystem, seed: int, count: int,
                     stream: int = 0) -> np.ndarray:
    """I.i.d. draws from the invariant measure, reproducible from seed.

    Built-in systems preserve Lebesgue measure and are sampled directly;
    custom systems use a Birkhoff average after ``burn_in`` steps.
    """
    if count < 1:
        raise DomainError("sample count must be >= 1")
    g = rng.substream(seed, stream)
    if system.kind != CUSTOM:
        u = g.random((count, system.dim))
        return _reshape(u, system.dim)
    x = g.random(system.dim)
    if system.dim == 1:
        x = x[0]
    for _ in range(system.burn_in):
        x = system.map(x)
    out = []
    for _ in range(count):
        out.append(x)
        x = system.map(x)
    return _reshape(np.asarray(out, dtype=np.float64) % 1.0, system.dim)


def stationary_start(system: MapSystem, seed: int, stream: int,
                     width: int = 96):
    """A random initial condition distributed by the invariant measure.

    Integer-base maps get a DigitStream; other systems a float point.
    """
    if system.kind == INTEGER_BASE:
        return DigitStream(system.base, width=width, seed=seed, stream=stream)
    pt = sample_invariant(system, seed, 1, stream=stream)
    return pt[0]


def start_orbit(system: MapSystem, start, n: int) -> np.ndarray:
    """Orbit of a start from ``stationary_start`` or a user point."""
    if isinstance(start, DigitStream):
        if system.kind != INTEGER_BASE or start.base != system.base:
            raise DomainError(
                f"digit stream in base {start.base} cannot drive {system.id}")
        return start.states(n)
    if system.kind == ROTATION and not isinstance(start, (Fraction, str)):
        x = np.asarray(start, dtype=np.float64)
        a = np.asarray(system.angle, dtype=np.float64)
        steps = np.arange(n, dtype=np.float64)
        if system.dim > 1:
            return (x[None, :] + steps[:, None] * a[None, :]) % 1.0
        return (float(x) + steps * a[0]) % 1.0
    return orbit(system, start, n)


# --------------------------------------------------------------------------
# observations

@dataclass(frozen=True)
class Observation:
    """A Lipschitz map from the torus to a torus (or to [0, 1/2])."""

    id: str
    rule: str
    input_dim: int
    codomain_dim: int
    lipschitz_constant: float
    params: tuple = ()

    @property
    def sup_norm(self) -> float:
        return 0.5 if self.rule == "distance-to-point" else 1.0

    @property
    def lipschitz_norm(self) -> float:
        """sup|f| + Lip(f), the norm appearing in decay-of-correlation bounds."""
        return self.sup_norm + self.lipschitz_constant

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        multi = x.ndim > 1
        if self.rule == "identity":
            return x
        if self.rule == "coordinate-projection":
            (k,) = self.params
            if not multi:
                if k != 0:
                    raise DomainError("projection index out of range")
                return x
            return x[:, k]
        if self.rule == "affine":
            a, b = self.params
            return (a * x + b) % 1.0
        if self.rule == "distance-to-point":
            p = np.asarray(self.params, dtype=np.float64)
            if not multi:
                p = p[0]
            return torus_distance_array(x, p)
        raise ConfigError(f"unknown observation rule {self.rule}")

    def apply_exact(self, point) -> tuple:
        """Evaluate on exact Fraction coordinates."""
        c = _coords(point)
        if self.rule == "identity":
            return c
        if self.rule == "coordinate-projection":
            return (c[self.params[0]],)
        if self.rule == "affine":
            a, b = self.params
            return tuple((int(a) * v + as_exact(b)) % 1 for v in c)
        if self.rule == "distance-to-point":
            return (torus_distance(c, tuple(as_exact(p) for p in self.params)),)
        raise ConfigError(f"unknown observation rule {self.rule}")


# --------------------------------------------------------------------------
# random dynamical systems

@dataclass(frozen=True)
class FiberFamily:
    """omega -> T_omega on the one-dimensional torus.

    ``constant``: T_omega = the given map for every omega.
    ``noisy``: T_omega(x) = base*x + omega mod 1 (Lebesgue-preserving for
    every omega).
    """

    id: str
    kind: str
    system: Optional[MapSystem] = None
    base: Optional[int] = None

    def exact(self, omega: Fraction, x: Fraction) -> Fraction:
        if self.kind == "constant":
            return self.system.map_exact((x,))[0]
        return (self.base * x + omega) % 1

    def step(self, omega, x):
        if self.kind == "constant":
            return self.system.map(x)
        return (self.base * x + omega) % 1.0


@dataclass(frozen=True)
class SkewProduct:
    """(omega, x) -> (base(omega), T_omega(x)) on [0,1) x [0,1)."""

    id: str
    base: MapSystem
    fiber: FiberFamily
    dim: int = 2

    def skew_step(self, omega, x) -> tuple:
        w, y = as_exact(omega), as_exact(x)
        return (self.base.map_exact((w,))[0], self.fiber.exact(w, y))

    def map_exact(self, coords: tuple) -> tuple:
        return self.skew_step(*coords)


def _base_orbit_exact(sp: SkewProduct, omega0: Fraction, n: int) -> list:
    out = [omega0]
    for _ in range(n - 1):
        out.append(sp.base.map_exact((out[-1],))[0])
    return out


def random_orbit(sp: SkewProduct, omega0, x0, n: int) -> np.ndarray:
    """Fiber states x_i = T_{base^{i-1} omega0} o ... o T_{omega0}(x0).

    Starts may be user points (exact arithmetic) or DigitStreams.
    """
    if n < 1:
        raise DomainError("orbit length must be >= 1")
    fam = sp.fiber
    if isinstance(x0, DigitStream):
        if fam.kind == "constant":
            return start_orbit(fam.system, x0, n)
        raise DomainError("digit-stream fiber starts need a constant family")
    if isinstance(omega0, DigitStream):
        omegas = start_orbit(sp.base, omega0, n)
        x = float(x0)
        check_unit(x)
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            out[i] = x
            x = fam.step(omegas[i], x)
        return out
    check_unit(omega0, 1)
    check_unit(x0, 1)
    if fam.kind == "constant" and fam.system.exact:
        return orbit(fam.system, x0, n)
    w0, y = as_exact(_coords(omega0)[0]), as_exact(_coords(x0)[0])
    omegas = _base_orbit_exact(sp, w0, n)
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = y.numerator / y.denominator
        y = fam.exact(omegas[i], y)
    return out


def skew_orbit(sp: SkewProduct, point, n: int) -> np.ndarray:
    """Orbit of the skew product itself, shape (n, 2) with columns (omega, x)."""
    if n < 1:
        raise DomainError("orbit length must be >= 1")
    if isinstance(point, tuple) and any(isinstance(p, DigitStream) for p in point):
        omega0, x0 = point
        omegas = (start_orbit(sp.base, omega0, n) if isinstance(omega0, DigitStream)
                  else orbit(sp.base, omega0, n))
        return np.column_stack([omegas, random_orbit(sp, omega0, x0, n)])
    w, x = check_unit(point, 2)
    # iterate the skew map itself rather than composing fiber maps
    return _exact_orbit(sp.map_exact, (as_exact(w), as_exact(x)), n)


# --------------------------------------------------------------------------
# string ids

def parse_system(spec: str) -> MapSystem:
    """'doubling', 'tripling', 'times:5', 'rotation:0.3', 'rotation:golden',
    'rotation:0.1,0.7'."""
    s = spec.strip().lower()
    if s == "doubling":
        return MapSystem("doubling", 1, INTEGER_BASE, base=2)
    if s == "tripling":
        return MapSystem("tripling", 1, INTEGER_BASE, base=3)
    try:
        if s.startswith("times:"):
            b = int(s.split(":", 1)[1])
            return MapSystem(s, 1, INTEGER_BASE, base=b)
        if s.startswith("rotation:"):
            parts = s.split(":", 1)[1].split(",")
            angles = tuple(GOLDEN if p == "golden" else float(p) for p in parts)
            if any(not 0 <= a < 1 for a in angles):
                raise ConfigError(f"rotation angle outside [0, 1): {spec}")
            return MapSystem(s, len(angles), ROTATION, angle=angles)
    except ValueError as exc:
        raise ConfigError(f"bad system id {spec!r}: {exc}") from None
    raise ConfigError(f"unknown system id {spec!r}")


def parse_observation(spec: str, input_dim: int = 1) -> Observation:
    """'identity', 'proj:k', 'affine:a:b' (integer a), 'dist:p[,p2,...]'."""
    s = spec.strip().lower()
    try:
        if s == "identity":
            return Observation(s, "identity", input_dim, input_dim, 1.0)
        if s.startswith("proj:"):
            k = int(s.split(":", 1)[1])
            if not 0 <= k < input_dim:
                raise ConfigError(f"projection {k} out of range for dim {input_dim}")
            return Observation(s, "coordinate-projection", input_dim, 1, 1.0, (k,))
        if s.startswith("affine:"):
            _, a, b = s.split(":")
            if float(a) != int(float(a)):
                raise ConfigError("affine slope must be an integer on the torus")
            a = int(float(a))
            return Observation(s, "affine", input_dim, input_dim, float(abs(a)),
                               (a, float(b)))
        if s.startswith(("dist:", "distance:")):
            p = tuple(float(v) for v in s.split(":", 1)[1].split(","))
            if len(p) != input_dim:
                raise ConfigError("distance-to-point needs a point of the input dim")
            check_unit(p)
            return Observation(s, "distance-to-point", input_dim, 1, 1.0, p)
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"bad observation id {spec!r}: {exc}") from None
    raise ConfigError(f"unknown observation id {spec!r}")


def parse_fiber(spec: str) -> FiberFamily:
    """A system id (constant family) or 'noisy:beta'."""
    s = spec.strip().lower()
    if s.startswith("noisy:"):
        try:
            b = int(s.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad fiber id {spec!r}") from None
        return FiberFamily(s, "noisy", base=b)
    sys_ = parse_system(s)
    if sys_.dim != 1:
        raise ConfigError("fiber maps act on the one-dimensional torus")
    return FiberFamily(s, "constant", system=sys_)


def make_skew_product(base: str, fiber: str) -> SkewProduct:
    b = parse_system(base)
    if b.dim != 1:
        raise ConfigError("base system must be one-dimensional")
    f = parse_fiber(fiber)
    return SkewProduct(f"{b.id}|{f.id}", b, f)


def example_skew_products() -> tuple:
    """The x2 / x3 pair: base doubling with fiber x->2x, base tripling with
    fiber x->3x."""
    return (make_skew_product("doubling", "doubling"),
            make_skew_product("tripling", "tripling"))
