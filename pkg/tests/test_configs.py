"""Configurations, lattices, shifts, and the truncated admissible metric."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab.configs import (
    Alphabet,
    Lattice,
    config_distance,
    constant_config,
    default_metric,
    patched_config,
    pattern_from_json,
    pattern_to_json,
    periodic_config,
    predicate_config,
    restrict,
    shell_size,
    shift,
    word_config,
)
from shiftlab.errors import InvalidDimensionError
from shiftlab.groups import FiniteSubset, compose

small_points = st.tuples(st.integers(-6, 6))


def test_alphabet_bounds():
    ab = Alphabet(3)
    assert list(ab.symbols()) == [0, 1, 2]
    assert ab.check(2) == 2
    with pytest.raises(ValueError):
        ab.check(3)
    with pytest.raises(ValueError):
        Alphabet(1)


def test_word_config_wraps_and_coerces():
    x = word_config("0110")
    assert [x.value((i,)) for i in range(4)] == [0, 1, 1, 0]
    assert x.value((4,)) == 0 and x.value((-1,)) == 0
    assert x.period_lattice is not None and x.period_lattice.moduli == (4,)


def test_constant_and_patched_configs():
    base = constant_config(2, 0)
    assert base.value((17, -3)) == 0
    patched = patched_config(base, {(1, 1): 1})
    assert patched.value((1, 1)) == 1 and patched.value((1, 2)) == 0


def test_lattice_diagonal_and_reduce():
    lat = Lattice.diagonal((2, 3))
    assert lat.index == 6 and lat.moduli == (2, 3)
    assert lat.contains((4, -3)) and not lat.contains((1, 0))
    assert lat.reduce((5, 7)) == (1, 1)
    assert len(lat.fundamental_domain()) == 6


def test_lattice_general_basis():
    lat = Lattice([(2, 1), (0, 3)])
    assert lat.index == 6
    # generators are the columns of the basis matrix
    assert lat.contains((2, 0)) and lat.contains((1, 3))
    assert len(lat.fundamental_domain()) == 6
    with pytest.raises(ValueError):
        Lattice([(1, 0), (2, 0)])


def test_periodic_config_depends_only_on_coset():
    lat = Lattice.diagonal((2, 2))
    table = {(0, 0): 0, (1, 0): 1, (0, 1): 1, (1, 1): 0}
    x = periodic_config(lat, table)
    for m in range(-3, 4):
        for k in range(-3, 4):
            assert x.value((m, k)) == x.value((m + 2, k)) == x.value((m, k + 2))
    assert x.period_lattice is lat


def test_restrict_examples():
    x = word_config((0, 1, 0))
    W = FiniteSubset.box((0,), (2,))
    assert restrict(x, W) == (0, 1, 0)
    assert restrict(x, [(2,), (0,), (1,)]) == (0, 1, 0)
    assert restrict(shift((1,), x), W) == (1, 0, 0)


@given(g=small_points, h=small_points)
def test_shift_action_law(g, h):
    x = word_config((0, 1, 1, 0, 1))
    probe = [(i,) for i in range(-4, 5)]
    lhs = shift(g, shift(h, x))
    rhs = shift(compose(g, h), x)
    assert [lhs.value(p) for p in probe] == [rhs.value(p) for p in probe]


@given(g=small_points)
def test_restrict_of_shift_is_translated_restrict(g):
    x = word_config((0, 1, 0, 0, 1, 1))
    W = FiniteSubset.box((0,), (3,))
    shifted = restrict(shift(g, x), W)
    translated = tuple(x.value(compose(p, g)) for p in W.sorted_points())
    assert shifted == translated


def test_pattern_json_round_trip():
    W = FiniteSubset([(0, 0), (1, 0), (0, 1)])
    symbols = (1, 0, 1)
    text = pattern_to_json(W, symbols)
    W2, symbols2 = pattern_from_json(text)
    assert W2 == W and symbols2 == symbols
    with pytest.raises(ValueError):
        pattern_to_json(W, (1, 0))
    with pytest.raises(ValueError):
        pattern_from_json('{"window": [[1], [0]], "symbols": [0, 1]}')


def test_shell_sizes():
    assert [shell_size(1, r) for r in range(4)] == [1, 2, 2, 2]
    assert [shell_size(2, r) for r in range(4)] == [1, 8, 16, 24]
    with pytest.raises(ValueError):
        shell_size(1, -1)


def test_default_metric_weights_and_mass():
    m = default_metric(1)
    assert m.weight((0,)) == Fraction(1, 2)
    assert m.weight((1,)) == m.weight((-1,)) == Fraction(1, 8)
    for R in range(0, 8):
        ball = sum(w for _, w in m.ball_weights(R))
        assert ball == 1 - Fraction(1, 2 ** (R + 1))
        assert m.tail_bound(R) == Fraction(1, 2**R)
    m2 = default_metric(2)
    assert m2.weight((0, 0)) == Fraction(1, 2)
    assert m2.weight((1, -1)) == Fraction(1, 2 * 8 * 2)


def test_config_distance_examples():
    x = word_config((0, 1, 1))
    assert config_distance(x, x, radius=10) == (0, Fraction(1, 2**10))

    zero, one = constant_config(1, 0), constant_config(1, 1)
    lo, hi = config_distance(zero, one, radius=10)
    assert lo == 1 - Fraction(1, 2**11) and hi == 1

    bump = patched_config(zero, {(0,): 1})
    lo, hi = config_distance(zero, bump, radius=5)
    assert lo == Fraction(1, 2) and hi == Fraction(1, 2) + Fraction(1, 2**5)


def test_config_distance_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        config_distance(constant_config(1, 0), constant_config(2, 0))
    with pytest.raises(InvalidDimensionError):
        config_distance(constant_config(1, 0), constant_config(1, 1), metric=default_metric(2))


@settings(max_examples=40)
@given(
    seed=st.integers(0, 2**16),
    radii=st.lists(st.integers(0, 9), min_size=2, max_size=4),
)
def test_config_distance_intervals_nest_in_radius(seed, radii):
    import random

    rng = random.Random(seed)
    patch = {(i,): rng.randint(0, 1) for i in range(-6, 7)}
    x = constant_config(1, 0)
    z = patched_config(x, patch)
    radii = sorted(set(radii))
    intervals = [config_distance(x, z, radius=R) for R in radii]
    for (lo1, hi1), (lo2, hi2) in zip(intervals, intervals[1:]):
        assert lo1 <= lo2 and hi2 <= hi1
    for lo, hi in intervals:
        assert lo <= hi <= 1


def test_predicate_config_carries_period_metadata():
    lat = Lattice.diagonal(10, dim=1)
    x = predicate_config(1, lambda g: g[0] % 10 == 0, name="tens", period_lattice=lat)
    assert x.period_lattice is lat
    assert x.value((20,)) == 1 and x.value((3,)) == 0
