from fractions import Fraction

import numpy as np
import pytest

from orbitmatch import orbitdist
from orbitmatch.errors import DomainError
from orbitmatch.orbitdist import (DistanceCurve, counting_function, exponent_curve,
                                  geometric_checkpoints, observed_distances,
                                  rds_shortest_distance, shortest_distance_curve)
from orbitmatch.systems import (DigitStream, example_skew_products,
                                make_skew_product, parse_observation,
                                parse_system, stationary_start, torus_distance)

T2, T3 = parse_system("doubling"), parse_system("tripling")
ID = parse_observation("identity")


def curve_of(prefix, cp):
    return DistanceCurve(np.asarray(cp), np.asarray(prefix, dtype=float), ())


def test_x2_x3_example():
    c = shortest_distance_curve(T2, T3, ID, 0.1, 0.25, 3, [1, 2, 3])
    assert c.prefix_min.tolist() == [0.15, 0.15, 0.15]
    np.testing.assert_allclose(observed_distances(T2, T3, ID, 0.1, 0.25, 3),
                               [0.15, 0.45, 0.15], atol=1e-15)
    assert c.zero_hit is None
    assert c.records == ((0, 0.15),)


def test_identical_start_zero_hit():
    c = shortest_distance_curve(T2, T2, ID, 0.3, 0.3, 50)
    assert np.all(c.prefix_min == 0)
    assert c.zero_hit == 0


def test_static_rotation_orbits():
    R = parse_system("rotation:0")
    c = shortest_distance_curve(R, R, ID, 0.2, 0.4, 100)
    assert np.all(c.prefix_min == 0.2)


@pytest.mark.parametrize("m, n, expected", [(1e-2, 100, 1.0), (1e-2, 10, 2.0)])
def test_exponent_algebra(m, n, expected):
    e = exponent_curve(curve_of([m], [n]))
    assert e.exponent[0] == pytest.approx(expected, rel=1e-14)
    assert not e.floor_applied[0]


def test_exponent_floor():
    e = exponent_curve(curve_of([0.1, 0.0], [10, 20]))
    assert e.floor_applied.tolist() == [False, True]
    assert np.isfinite(e.exponent[1])
    e1 = exponent_curve(curve_of([0.3], [1]))
    assert np.isnan(e1.exponent[0]) and e1.floor_applied[0]


def test_counting_examples():
    assert counting_function(T2, T3, ID, 0.1, 0.25, 0.2, 3) == 2
    assert counting_function(T2, T3, ID, 0.1, 0.25, 0.1, 3) == 0
    assert counting_function(T2, T3, ID, 0.1, 0.25, 0.51, 3) == 3


def test_checkpoints_grid():
    cp = geometric_checkpoints(100)
    assert cp.tolist() == [10, 15, 23, 34, 51, 76, 100]
    assert geometric_checkpoints(5).tolist() == [5]
    with pytest.raises(DomainError):
        geometric_checkpoints(100, ratio=1.0)


def test_bad_checkpoints():
    with pytest.raises(DomainError):
        shortest_distance_curve(T2, T3, ID, 0.1, 0.2, 10, [5, 3])
    with pytest.raises(DomainError):
        shortest_distance_curve(T2, T3, ID, 0.1, 0.2, 10, [11])


def test_prefix_min_monotone_and_backends():
    for seed in range(10):
        x = stationary_start(T2, seed, 0)
        y = stationary_start(T3, seed, 1)
        c = shortest_distance_curve(T2, T3, ID, x, y, 10 ** 5)
        assert np.all(np.diff(c.prefix_min) <= 0)
        # stream kernel agrees with decoding and taking minima directly
        d = np.abs(x.states(10 ** 5) - y.states(10 ** 5))
        d = np.minimum(d, 1 - d)
        assert c.prefix_min.tolist() == [d[:n].min() for n in c.checkpoints]
        t, v = zip(*c.records)
        assert np.all(np.diff(v) < 0)
        assert c.prefix_min[-1] == v[-1]


def test_counting_minimum_duality(rng):
    for k in range(1000):
        seed = int(rng.integers(10 ** 6))
        x = stationary_start(T2, seed, 0)
        y = stationary_start(T3, seed, 1)
        n = int(rng.integers(1, 300))
        r = float(10 ** rng.uniform(-4, -0.3))
        q = counting_function(T2, T3, ID, x, y, r, n)
        m = shortest_distance_curve(T2, T3, ID, x, y, n, [n]).prefix_min[-1]
        assert (q >= 1) == (m < r)


@pytest.mark.parametrize("obs_id", ["affine:3:0.2", "dist:0.1", "affine:-1:0"])
def test_observation_contraction(obs_id):
    # decoded states are dyadic doubles, so the observed minimum is
    # recomputed exactly on Fractions; the float curve must track it
    f = parse_observation(obs_id)
    L = Fraction(f.lipschitz_constant)
    n = 500
    for seed in range(30):
        x = stationary_start(T2, seed, 0)
        y = stationary_start(T3, seed, 1)
        xs = [Fraction(v) for v in x.states(n)]
        ys = [Fraction(v) for v in y.states(n)]
        plain = shortest_distance_curve(T2, T3, ID, x, y, n, [n])
        i_star = plain.records[-1][0]
        exact_min = min(torus_distance(f.apply_exact(a), f.apply_exact(b))
                        for a, b in zip(xs, ys))
        assert exact_min <= L * torus_distance(xs[i_star], ys[i_star])
        observed = shortest_distance_curve(T2, T3, f, x, y, n, [n])
        assert abs(observed.prefix_min[-1] - float(exact_min)) <= 4 * 2 ** -53


def test_constant_fiber_rds_reduces():
    spT, spS = example_skew_products()
    c = rds_shortest_distance(spT, spS, 0.7, 0.2, 0.1, 0.25, 3, [3])
    assert c.prefix_min.tolist() == [0.15]


def test_rds_identical_inputs_zero():
    sp = make_skew_product("doubling", "noisy:2")
    c = rds_shortest_distance(sp, sp, 0.3, 0.3, 0.4, 0.4, 20)
    assert np.all(c.prefix_min == 0)
    assert c.zero_hit == 0


def random_rational(rng):
    q = int(rng.integers(2, 10 ** 4))
    return Fraction(int(rng.integers(0, q)), q)


@pytest.mark.parametrize("fibers", [("doubling", "tripling"), ("noisy:2", "noisy:3"),
                                    ("noisy:2", "doubling")])
def test_rds_product_identity_exact(rng, fibers):
    spT = make_skew_product("doubling", fibers[0])
    spS = make_skew_product("tripling", fibers[1])
    proj = parse_observation("proj:1", 2)
    for _ in range(100):
        w, wt, x, xt = (random_rational(rng) for _ in range(4))
        N = int(rng.integers(1, 60))
        a = rds_shortest_distance(spT, spS, w, wt, x, xt, N, [N])
        b = shortest_distance_curve(spT, spS, proj, (w, x), (wt, xt), N, [N])
        assert np.array_equal(a.prefix_min, b.prefix_min)
        assert a.records == b.records


def test_rds_stream_fast_path_matches_generic():
    spT, spS = example_skew_products()
    x = DigitStream(2, seed=2, stream=0)
    y = DigitStream(3, seed=2, stream=1)
    fast = rds_shortest_distance(spT, spS, 0.1, 0.2, x, y, 5000)
    det = shortest_distance_curve(T2, T3, ID, x, y, 5000)
    assert np.array_equal(fast.prefix_min, det.prefix_min)


def test_shape_mismatch():
    R2 = parse_system("rotation:0.1,0.2")
    with pytest.raises(DomainError):
        observed_distances(T2, R2, ID, 0.1, (0.1, 0.2), 5)
