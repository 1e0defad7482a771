from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from orbitmatch import systems
from orbitmatch.diagnostics import lagged_samples
from orbitmatch.errors import ConfigError, DomainError
from orbitmatch.systems import (DigitStream, as_exact, orbit, parse_observation,
                                parse_system, sample_invariant, torus_distance)


@pytest.mark.parametrize("sys_id, x0, n, expected", [
    ("doubling", 0.1, 5, [0.1, 0.2, 0.4, 0.8, 0.6]),
    ("tripling", 0.25, 3, [0.25, 0.75, 0.25]),
    ("rotation:0.0", 0.3, 3, [0.3, 0.3, 0.3]),
])
def test_orbit_examples(sys_id, x0, n, expected):
    assert orbit(parse_system(sys_id), x0, n).tolist() == expected


def test_orbit_is_exact_far_past_53_steps():
    # float doubling collapses to 0 by step ~55; exact p/q iteration cycles
    pts = orbit(parse_system("doubling"), 0.1, 200)
    assert pts[-1] != 0.0
    assert set(np.round(pts[1:], 12)) == {0.2, 0.4, 0.8, 0.6}


def test_rotation_orbit_two_dims():
    pts = orbit(parse_system("rotation:0.5,0.25"), (0.0, 0.5), 3)
    assert pts.tolist() == [[0.0, 0.5], [0.5, 0.75], [0.0, 0.0]]


def test_orbit_rejects_bad_point():
    with pytest.raises(DomainError):
        orbit(parse_system("doubling"), 1.0, 3)
    with pytest.raises(DomainError):
        orbit(parse_system("doubling"), 0.2, 0)


@pytest.mark.parametrize("x, y, d", [
    (0.1, 0.9, Fraction(1, 5)),
    (0.3, 0.3, 0),
    (0.25, 0.75, Fraction(1, 2)),
    ((0.1, 0.5), (0.9, 0.6), Fraction(1, 5)),
])
def test_torus_distance_examples(x, y, d):
    ex = lambda p: tuple(as_exact(v) for v in p) if isinstance(p, tuple) else as_exact(p)
    assert torus_distance(ex(x), ex(y)) == d


def test_torus_distance_dimension_mismatch():
    with pytest.raises(DomainError):
        torus_distance((0.1, 0.2), 0.3)


fractions01 = st.fractions(min_value=0, max_value=1).filter(lambda f: f < 1)


def random_points(rng, count, dim):
    """Exact random rationals in [0, 1) with mixed denominators."""
    den = rng.integers(1, 10 ** 6, size=(count, dim))
    num = rng.integers(0, 10 ** 6, size=(count, dim)) % den
    return [tuple(Fraction(int(a), int(b)) for a, b in zip(nr, dr))
            for nr, dr in zip(num, den)]


def check_metric(x, y, z):
    dxy, dyz, dxz = torus_distance(x, y), torus_distance(y, z), torus_distance(x, z)
    assert dxy == torus_distance(y, x)
    assert dxz <= dxy + dyz
    assert (dxy == 0) == (x == y)
    assert 0 <= dxy <= Fraction(1, 2)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_torus_metric_axioms_random_triples(rng, dim):
    pts = random_points(rng, 3 * 10 ** 4, dim)
    for k in range(10 ** 4):
        check_metric(*pts[3 * k: 3 * k + 3])


@settings(max_examples=300, deadline=None)
@given(st.tuples(fractions01, fractions01), st.tuples(fractions01, fractions01),
       st.tuples(fractions01, fractions01))
def test_torus_metric_axioms_search(x, y, z):
    check_metric(x, y, z)


OBS_1D = ["identity", "proj:0", "affine:3:0.25", "affine:-2:0.5", "dist:0.3"]
OBS_2D = ["identity", "proj:1", "affine:2:0.1", "dist:0.3,0.6"]


def check_lipschitz(f, x, y):
    lhs = torus_distance(f.apply_exact(x), f.apply_exact(y))
    assert lhs <= as_exact(f.lipschitz_constant) * torus_distance(x, y)


@pytest.mark.parametrize("dim, spec", [(1, s) for s in OBS_1D] + [(2, s) for s in OBS_2D])
def test_observation_lipschitz_random_pairs(rng, dim, spec):
    f = parse_observation(spec, dim)
    pts = random_points(rng, 2 * 10 ** 4, dim)
    for k in range(10 ** 4):
        check_lipschitz(f, pts[2 * k], pts[2 * k + 1])


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(OBS_1D), fractions01, fractions01)
def test_observation_lipschitz_search(spec, x, y):
    check_lipschitz(parse_observation(spec, 1), x, y)


def test_observation_float_matches_exact():
    pts = [0.0, 0.125, 0.3, 0.7, 0.999]
    for spec in OBS_1D:
        f = parse_observation(spec)
        got = f(np.array(pts))
        want = [float(f.apply_exact(as_exact(p))[0]) for p in pts]
        np.testing.assert_allclose(got, want, atol=1e-15)


@pytest.mark.parametrize("spec", ["proj:2", "affine:0.5:0", "dist:0.1,0.2", "cube"])
def test_observation_parse_errors(spec):
    with pytest.raises(ConfigError):
        parse_observation(spec, 1)


@pytest.mark.parametrize("spec", ["quadrupling", "rotation:1.5", "times:x"])
def test_system_parse_errors(spec):
    with pytest.raises(ConfigError):
        parse_system(spec)


def test_digit_stream_binary_shift():
    s = DigitStream.from_digits(2, [1, 0], width=4)
    st_ = s.states(2)
    assert st_.tolist() == [0.625, 0.3125]
    assert s.exact_states(2) == [10, 5]


def test_digit_stream_base3_fixed():
    s = DigitStream.from_digits(3, [2], width=3)
    assert s.exact_states(2) == [26, 26]
    assert s.states(2).tolist() == [26 / 27, 26 / 27]


def test_digit_stream_deterministic_and_prefix_stable():
    a = DigitStream(3, seed=5, stream=2)
    b = DigitStream(3, seed=5, stream=2)
    assert np.array_equal(a.states(1000), b.states(1000))
    assert np.array_equal(a.states(5000)[:1000], a.states(1000))
    assert not np.array_equal(a.states(100), DigitStream(3, seed=5, stream=3).states(100))


@pytest.mark.parametrize("base", [2, 3, 5, 10])
@pytest.mark.parametrize("seed", range(3))
def test_exact_shift_invariant(base, seed):
    s = DigitStream(base, width=96, seed=seed, stream=7)
    num = s.exact_states(300)
    top = base ** 96
    bound = Fraction(1, base ** 95)
    for i in range(len(num) - 1):
        nxt = Fraction(num[i + 1], top)
        img = (base * Fraction(num[i], top)) % 1
        assert abs(nxt - img) <= bound


@pytest.mark.parametrize("base", [2, 3, 7])
def test_decoded_states_match_exact_numerators(base):
    s = DigitStream(base, width=96, seed=11)
    dec = s.states(500)
    exact = [n / base ** 96 for n in s.exact_states(500)]
    # decoding keeps the leading K digits; two double roundings follow
    assert np.max(np.abs(dec - np.array(exact))) <= float(base) ** -s.K + 2 ** -51


def test_digit_stream_digits_uniform():
    ds = np.array(DigitStream(3, seed=1).digit_list(30000))
    counts = np.bincount(ds, minlength=3)
    assert stats.chisquare(counts).pvalue > 1e-4


def test_sample_invariant_examples():
    d = parse_system("doubling")
    u = sample_invariant(d, 3, 3)
    assert u.shape == (3,) and np.all((u >= 0) & (u < 1))
    assert np.array_equal(u, sample_invariant(d, 3, 3))
    m = sample_invariant(d, 9, 10 ** 6).mean()
    assert abs(m - 0.5) <= 0.002


@pytest.mark.parametrize("sys_id", ["doubling", "tripling", "rotation:golden"])
def test_measure_preservation_ks(sys_id):
    system = parse_system(sys_id)
    M = 10 ** 5
    passes = 0
    for seed in range(20):
        if system.kind == systems.INTEGER_BASE:
            # exact one-step images read off independent digit streams
            _, images = lagged_samples(system, [1], M, seed)
            y = images[0]
        else:
            y = system.iterate_batch(sample_invariant(system, seed, M), 1)
        passes += stats.kstest(y, "uniform").statistic < 2 / np.sqrt(M)
    assert passes >= 18


def test_digit_orbit_pushforward_uniform():
    s = DigitStream(2, seed=4)
    x = s.states(10 ** 5)
    assert stats.kstest(x[1:], "uniform").statistic < 2 / np.sqrt(len(x))


@pytest.mark.parametrize("omega0, x0, base, fiber, expected", [
    (0.3, 0.2, "doubling", "doubling", [0.2, 0.4, 0.8]),
    (0.1, 0.25, "tripling", "tripling", [0.25, 0.75, 0.25]),
])
def test_random_orbit_examples(omega0, x0, base, fiber, expected):
    sp = systems.make_skew_product(base, fiber)
    assert systems.random_orbit(sp, omega0, x0, 3).tolist() == expected


def test_skew_step_example():
    sp, _ = systems.example_skew_products()
    assert sp.skew_step(0.3, 0.2) == (Fraction(3, 5), Fraction(2, 5))


def test_noisy_fiber_orbit():
    sp = systems.make_skew_product("doubling", "noisy:2")
    pts = systems.skew_orbit(sp, (0.3, 0.2), 3)
    assert pts.tolist() == [[0.3, 0.2], [0.6, 0.7], [0.2, 0.0]]
    assert systems.random_orbit(sp, 0.3, 0.2, 3).tolist() == [0.2, 0.7, 0.0]


def test_stationary_start_types():
    assert isinstance(systems.stationary_start(parse_system("doubling"), 0, 0),
                      DigitStream)
    x = systems.stationary_start(parse_system("rotation:0.3"), 0, 0)
    assert 0 <= x < 1


def test_rotation_closed_form_start():
    r = parse_system("rotation:0.25")
    assert systems.start_orbit(r, 0.5, 4).tolist() == [0.5, 0.75, 0.0, 0.25]


def test_custom_system_birkhoff_sampler():
    sys_ = systems.MapSystem("logistic-ish", 1, systems.CUSTOM,
                             step=lambda x: (x + 0.5) % 1.0, burn_in=10)
    u = sample_invariant(sys_, 0, 4)
    assert np.allclose(np.diff(u) % 1.0, 0.5)
