"""Empirical pattern distributions, Prokhorov distances, genericity checks."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab.configs import constant_config, predicate_config, shift, word_config
from shiftlab.errors import IncompatibleWindowsError
from shiftlab.groups import FiniteSubset, make_box_folner
from shiftlab.measures import (
    PROKHOROV_RESOLUTION,
    MeasureSet,
    PatternDistribution,
    empirical_measure,
    genericity_check,
    hausdorff_prokhorov,
    omega_hat_approx,
    pattern_metric,
    prokhorov_distance,
)

F1 = make_box_folner(1)
W0 = FiniteSubset.box((0,), (0,))
W2 = FiniteSubset.box((0,), (1,))

ONE = Fraction(1)
HALF = Fraction(1, 2)


def flat_cost(p, q):
    return Fraction(0) if p == q else Fraction(1)


# --- PatternDistribution ----------------------------------------------------

def test_distribution_validates_total_mass():
    with pytest.raises(ValueError):
        PatternDistribution(W0, {(0,): HALF})
    with pytest.raises(ValueError):
        PatternDistribution(W0, {(0,): HALF, (1,): HALF, (2,): Fraction(-0 - 1, 100)})


def test_distribution_drops_zero_weights():
    mu = PatternDistribution(W0, {(0,): ONE, (1,): Fraction(0)})
    assert mu.support() == [(0,)]
    assert mu.mass((1,)) == 0


def test_distribution_marginal_and_tv():
    mu = PatternDistribution(W2, {(0, 1): HALF, (1, 0): HALF})
    marg = mu.marginal(W0)
    assert marg == PatternDistribution(W0, {(0,): HALF, (1,): HALF})
    nu = PatternDistribution(W2, {(0, 1): ONE})
    assert mu.tv_distance(nu) == HALF


def test_distribution_json_round_trip():
    mu = PatternDistribution(W2, {(0, 1): Fraction(2, 3), (1, 1): Fraction(1, 3)})
    again = PatternDistribution.from_json(mu.to_json())
    assert again == mu


# --- empirical_measure ------------------------------------------------------

def test_empirical_of_constant_is_point_mass():
    x = constant_config(1, 0)
    emp = empirical_measure(x, F1.set_at(9), W2)
    assert emp == PatternDistribution(W2, {(0, 0): ONE})


def test_empirical_of_01_periodic_single_site():
    x = word_config((0, 1))
    emp = empirical_measure(x, FiniteSubset.box((0,), (2 * 8 - 1,)), W0)
    assert emp == PatternDistribution(W0, {(0,): HALF, (1,): HALF})


def test_empirical_of_01_periodic_pair_window():
    x = word_config((0, 1))
    emp = empirical_measure(x, FiniteSubset.box((0,), (3,)), W2)
    assert emp == PatternDistribution(W2, {(0, 1): HALF, (1, 0): HALF})


def test_empirical_rejects_empty_sets():
    x = constant_config(1, 0)
    with pytest.raises(ValueError):
        empirical_measure(x, FiniteSubset(dim=1), W0)


@settings(max_examples=30)
@given(seed=st.integers(0, 2**20), n=st.integers(3, 40))
def test_empirical_mass_sums_to_one_and_marginals_commute(seed, n):
    rng = random.Random(seed)
    word = tuple(rng.randint(0, 1) for _ in range(rng.randint(1, 6)))
    x = word_config(word)
    window_set = F1.set_at(n)
    emp2 = empirical_measure(x, window_set, W2)
    assert sum(emp2.weights.values()) == 1
    # restriction to the sub-window equals the directly computed measure
    assert emp2.marginal(W0) == empirical_measure(x, window_set, W0)


# --- prokhorov_distance -----------------------------------------------------

def test_prokhorov_of_equal_distributions_is_exactly_zero():
    mu = PatternDistribution(W0, {(0,): Fraction(1, 3), (1,): Fraction(2, 3)})
    assert prokhorov_distance(mu, mu) == 0


def test_prokhorov_of_diracs_matches_pattern_distance():
    mu = PatternDistribution(W0, {(0,): ONE})
    nu = PatternDistribution(W0, {(1,): ONE})
    quarter = lambda p, q: Fraction(0) if p == q else Fraction(1, 4)
    val = prokhorov_distance(mu, nu, dist_fn=quarter)
    assert abs(val - Fraction(1, 4)) <= PROKHOROV_RESOLUTION


def test_prokhorov_mass_split_example():
    mu = PatternDistribution(W0, {(0,): ONE})
    nu = PatternDistribution(W0, {(0,): Fraction(9, 10), (1,): Fraction(1, 10)})
    val = prokhorov_distance(mu, nu, dist_fn=flat_cost)
    assert abs(val - Fraction(1, 10)) <= PROKHOROV_RESOLUTION


def test_prokhorov_rejects_window_mismatch():
    mu = PatternDistribution(W0, {(0,): ONE})
    nu = PatternDistribution(W2, {(0, 0): ONE})
    with pytest.raises(IncompatibleWindowsError):
        prokhorov_distance(mu, nu)


def _random_distribution(rng, window, patterns):
    den = rng.choice([2, 3, 4, 6, 8])
    cuts = sorted(rng.randrange(den + 1) for _ in range(len(patterns) - 1))
    weights = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    total = {p: Fraction(w, den) for p, w in zip(patterns, weights) if w}
    return PatternDistribution(window, total)


def test_prokhorov_symmetry_triangle_and_tv_bound():
    rng = random.Random(99)
    patterns = [(0, 0), (0, 1), (1, 0), (1, 1)]
    two_res = 2 * PROKHOROV_RESOLUTION
    for _ in range(8):
        mu = _random_distribution(rng, W2, patterns)
        nu = _random_distribution(rng, W2, patterns)
        eta = _random_distribution(rng, W2, patterns)
        d_mn = prokhorov_distance(mu, nu)
        assert d_mn == prokhorov_distance(nu, mu)
        assert d_mn <= mu.tv_distance(nu)
        d_me = prokhorov_distance(mu, eta)
        d_en = prokhorov_distance(eta, nu)
        assert d_mn <= d_me + d_en + two_res


def test_prokhorov_shift_consistency_bound():
    x = predicate_config(1, lambda g: g[0] % 3 == 0)
    Fc = make_box_folner(1, kind="centered")
    for n in (15, 30, 60):
        Fn = Fc.set_at(n)
        for g in ((1,), (4,)):
            emp = empirical_measure(x, Fn, W0)
            emp_shift = empirical_measure(shift(g, x), Fn, W0)
            bound = Fraction(Fn.sym_diff_size(Fn.translate(g)), len(Fn))
            assert prokhorov_distance(emp, emp_shift) <= bound


# --- hausdorff_prokhorov ----------------------------------------------------

def test_hausdorff_examples():
    mu = PatternDistribution(W0, {(0,): ONE})
    nu = PatternDistribution(W0, {(0,): HALF, (1,): HALF})
    assert hausdorff_prokhorov([mu, nu], [mu, nu]) == 0
    pair = prokhorov_distance(mu, nu)
    assert hausdorff_prokhorov([mu], [nu]) == pair
    assert hausdorff_prokhorov([mu], [mu, nu]) == pair
    with pytest.raises(ValueError):
        hausdorff_prokhorov([], [mu])


# --- omega_hat_approx -------------------------------------------------------

def test_omega_of_constant_is_single_point_mass():
    x = constant_config(1, 0)
    reps = omega_hat_approx(x, F1, [4, 8, 16], W0, Fraction(1, 20))
    assert len(reps.members) == 1
    assert reps.members[0] == PatternDistribution(W0, {(0,): ONE})


def test_omega_of_periodic_at_period_multiples():
    x = word_config((0, 1, 1))
    n_list = [3 * j - 1 for j in (2, 4, 8)]  # window sizes are period multiples
    reps = omega_hat_approx(x, F1, n_list, W0, Fraction(1, 20))
    assert len(reps.members) == 1
    assert reps.members[0] == PatternDistribution(
        W0, {(0,): Fraction(1, 3), (1,): Fraction(2, 3)}
    )


def test_omega_of_oscillating_config_splits():
    def osc(g):
        n = g[0]
        if n < 1:
            return 0
        return 1 if (n.bit_length() - 1) % 2 == 0 else 0

    x = predicate_config(1, osc)
    reps = omega_hat_approx(x, F1, [2**j for j in range(2, 11)], W0, Fraction(1, 10))
    assert len(reps.members) >= 2


def test_measure_set_requires_members():
    with pytest.raises(ValueError):
        MeasureSet([])


# --- genericity_check -------------------------------------------------------

def test_genericity_of_constant():
    x = constant_config(1, 0)
    target = PatternDistribution(W0, {(0,): ONE})
    report = genericity_check(x, F1, target, W0, [4, 8, 16], Fraction(1, 1000))
    assert report.passed and report.final_distance == 0


def test_genericity_of_01_periodic_at_aligned_windows():
    x = word_config((0, 1))
    target = PatternDistribution(W0, {(0,): HALF, (1,): HALF})
    report = genericity_check(x, F1, target, W0, [3, 7, 11], Fraction(1, 100))
    assert report.passed and report.final_distance == 0
    assert report.distances == (0, 0, 0)


def test_genericity_fails_for_wrong_target():
    x = constant_config(1, 0)
    target = PatternDistribution(W0, {(0,): HALF, (1,): HALF})
    report = genericity_check(x, F1, target, W0, [3, 7, 11], Fraction(1, 4))
    assert not report.passed
    assert abs(report.final_distance - HALF) <= PROKHOROV_RESOLUTION


def test_pattern_metric_truncated_weights():
    from shiftlab.configs import default_metric

    metric_fn = pattern_metric(W2, default_metric(1))
    # mismatches at sites 0 and 1 weigh 1/2 and 1/8 under the default family
    assert metric_fn((0, 0), (1, 0)) == HALF
    assert metric_fn((0, 0), (0, 1)) == Fraction(1, 8)
    assert metric_fn((0, 0), (1, 1)) == HALF + Fraction(1, 8)
    assert metric_fn((0, 1), (0, 1)) == 0
