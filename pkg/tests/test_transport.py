"""Exact couplings: simplex solver, brute-force oracle, gluing, orbit chains."""

import random
from fractions import Fraction

import pytest

from shiftlab.configs import Lattice, constant_config, periodic_config, shift, word_config
from shiftlab.errors import (
    IncompatibleMiddleError,
    IncompatibleWindowsError,
    InvalidFamilyError,
)
from shiftlab.groups import FiniteSubset, make_box_folner
from shiftlab.measures import PatternDistribution, empirical_measure
from shiftlab.transport import (
    Coupling,
    PeriodicOrbitMeasure,
    brute_force_min_cost,
    check_db_ge_rho,
    glue_couplings,
    hamming_per_site_cost,
    min_cost_transport,
    pair_empirical_joining,
    periodic_rho_oracle,
    rho_bar_lower,
    rho_triangle_check,
    verify_transport_certificate,
)

W0 = FiniteSubset.box((0,), (0,))
HAM0 = hamming_per_site_cost(W0.sorted_points())
F1 = make_box_folner(1)


def dist(weights):
    return PatternDistribution(W0, {(s,): w for s, w in weights.items()})


# --- Coupling ---------------------------------------------------------------

def test_coupling_validates_marginals():
    mu = dist({0: Fraction(1, 2), 1: Fraction(1, 2)})
    good = Coupling(mu, mu, {((0,), (0,)): Fraction(1, 2), ((1,), (1,)): Fraction(1, 2)})
    assert good.cost(HAM0) == 0
    with pytest.raises(ValueError):
        Coupling(mu, mu, {((0,), (0,)): Fraction(1, 2), ((1,), (0,)): Fraction(1, 2)})
    with pytest.raises(ValueError):
        Coupling(mu, mu, {((0,), (0,)): Fraction(3, 4), ((1,), (1,)): Fraction(1, 4)})
    with pytest.raises(ValueError):
        Coupling(mu, mu, {((0,), (0,)): Fraction(-1, 2), ((1,), (1,)): Fraction(3, 2)})


def test_coupling_rejects_window_mismatch():
    mu = dist({0: Fraction(1)})
    W2 = FiniteSubset.box((0,), (1,))
    nu = PatternDistribution(W2, {(0, 0): Fraction(1)})
    with pytest.raises(IncompatibleWindowsError):
        Coupling(mu, nu, {((0,), (0, 0)): Fraction(1)})


def test_coupling_drops_zero_cells():
    mu = dist({0: Fraction(1)})
    c = Coupling(mu, mu, {((0,), (0,)): Fraction(1), ((1,), (1,)): Fraction(0)})
    assert set(c.weights) == {((0,), (0,))}


# --- min_cost_transport -----------------------------------------------------

def test_transport_one_site_hamming():
    mu = dist({0: Fraction(2, 10), 1: Fraction(8, 10)})
    nu = dist({0: Fraction(7, 10), 1: Fraction(3, 10)})
    result = min_cost_transport(mu, nu, HAM0)
    coupling, value = result
    assert value == Fraction(1, 2)
    assert coupling.cost(HAM0) == value
    assert verify_transport_certificate(result, HAM0)
    assert brute_force_min_cost(mu, nu, HAM0) == Fraction(1, 2)


def test_transport_identical_marginals_cost_zero():
    mu = dist({0: Fraction(2, 10), 1: Fraction(8, 10)})
    result = min_cost_transport(mu, mu, HAM0)
    assert result.value == 0
    assert set(result.coupling.weights) == {((0,), (0,)), ((1,), (1,))}


def test_transport_between_diracs():
    da = dist({0: Fraction(1)})
    db = dist({1: Fraction(1)})
    cost = lambda p, q: Fraction(4, 10) if p != q else Fraction(0)
    result = min_cost_transport(da, db, cost)
    assert result.value == Fraction(2, 5)
    assert result.coupling.weights == {((0,), (1,)): Fraction(1)}


def test_transport_certificate_is_strong_duality():
    mu = dist({0: Fraction(1, 3), 1: Fraction(2, 3)})
    nu = dist({0: Fraction(5, 6), 1: Fraction(1, 6)})
    result = min_cost_transport(mu, nu, HAM0)
    dual = sum(result.row_potentials[p] * mu.mass(p) for p in result.row_potentials)
    dual += sum(result.col_potentials[q] * nu.mass(q) for q in result.col_potentials)
    assert dual == result.value
    assert verify_transport_certificate(result, HAM0)


def test_transport_degenerate_instance():
    W2 = FiniteSubset.box((0,), (1,))
    pats = [(0, 0), (0, 1), (1, 0), (1, 1)]
    m3 = PatternDistribution(W2, {pats[0]: Fraction(1, 2), pats[3]: Fraction(1, 2)})
    m4 = PatternDistribution(W2, {pats[1]: Fraction(1, 2), pats[2]: Fraction(1, 2)})
    ham = hamming_per_site_cost(W2.sorted_points())
    result = min_cost_transport(m3, m4, ham)
    assert result.value == Fraction(1, 2) == brute_force_min_cost(m3, m4, ham)


def test_transport_matches_brute_force_on_seeded_instances():
    rng = random.Random(11)
    W2 = FiniteSubset.box((0,), (1,))
    pats = [(0, 0), (0, 1), (1, 0), (1, 1)]
    ham = hamming_per_site_cost(W2.sorted_points())
    for _ in range(25):
        den = rng.choice([2, 3, 4, 5, 6])

        def rand_dist():
            while True:
                cuts = sorted(rng.randrange(den + 1) for _ in range(3))
                ws = [cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], den - cuts[2]]
                if any(ws):
                    return PatternDistribution(
                        W2, {p: Fraction(w, den) for p, w in zip(pats, ws) if w}
                    )

        m1, m2 = rand_dist(), rand_dist()
        result = min_cost_transport(m1, m2, ham)
        assert result.value == brute_force_min_cost(m1, m2, ham)
        assert verify_transport_certificate(result, ham)


# --- glue_couplings ---------------------------------------------------------

def test_glue_identity_and_swap():
    eta = dist({0: Fraction(1, 2), 1: Fraction(1, 2)})
    diag = Coupling(eta, eta, {((0,), (0,)): Fraction(1, 2), ((1,), (1,)): Fraction(1, 2)})
    swap = Coupling(eta, eta, {((0,), (1,)): Fraction(1, 2), ((1,), (0,)): Fraction(1, 2)})
    assert glue_couplings(diag, swap).weights == swap.weights
    assert glue_couplings(swap, diag).weights == swap.weights
    glued = glue_couplings(diag, swap)
    assert glued.cost(HAM0) <= diag.cost(HAM0) + swap.cost(HAM0)


def test_glue_rejects_mismatched_middle():
    eta = dist({0: Fraction(1, 2), 1: Fraction(1, 2)})
    other = dist({0: Fraction(1, 3), 1: Fraction(2, 3)})
    c1 = Coupling(eta, eta, {((0,), (0,)): Fraction(1, 2), ((1,), (1,)): Fraction(1, 2)})
    c2 = Coupling(other, other, {((0,), (0,)): Fraction(1, 3), ((1,), (1,)): Fraction(2, 3)})
    with pytest.raises(IncompatibleMiddleError):
        glue_couplings(c1, c2)


def test_glue_marginals_are_exact_on_seeded_triples():
    rng = random.Random(23)
    pats = [(s,) for s in range(4)]

    def rand_dist():
        den = rng.choice([4, 6, 8, 12])
        while True:
            cuts = sorted(rng.randrange(den + 1) for _ in range(3))
            ws = [cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], den - cuts[2]]
            if any(ws):
                return PatternDistribution(
                    W0, {p: Fraction(w, den) for p, w in zip(pats, ws) if w}
                )

    for _ in range(20):
        mu, eta, nu = rand_dist(), rand_dist(), rand_dist()
        r12 = min_cost_transport(mu, eta, HAM0)
        r23 = min_cost_transport(eta, nu, HAM0)
        glued = glue_couplings(r12.coupling, r23.coupling)
        assert glued.left == mu and glued.right == nu
        d13 = min_cost_transport(mu, nu, HAM0).value
        assert d13 <= r12.value + r23.value


# --- pair_empirical_joining -------------------------------------------------

def test_pair_joining_of_config_and_its_shift():
    x = word_config((0, 1))
    z = shift((1,), x)
    joint = pair_empirical_joining(x, z, FiniteSubset.box((0,), (3,)), W0)
    assert joint.weights == {((0,), (1,)): Fraction(1, 2), ((1,), (0,)): Fraction(1, 2)}
    assert joint.left == empirical_measure(x, FiniteSubset.box((0,), (3,)), W0)
    assert joint.right == empirical_measure(z, FiniteSubset.box((0,), (3,)), W0)


def test_pair_joining_diagonal_for_equal_configs():
    x = word_config((0, 1))
    joint = pair_empirical_joining(x, x, FiniteSubset.box((0,), (3,)), W0)
    assert joint.weights == {((0,), (0,)): Fraction(1, 2), ((1,), (1,)): Fraction(1, 2)}


# --- PeriodicOrbitMeasure and the orbit oracle ------------------------------

def test_orbit_measure_block_marginal_is_fundamental_domain_empirical():
    x = word_config((0, 0, 1))
    orbit = PeriodicOrbitMeasure.from_config(x)
    W2 = FiniteSubset.box((0,), (1,))
    marg = orbit.block_marginal(W2)
    assert marg == empirical_measure(x, orbit.lattice.fundamental_domain(), W2)
    fam = orbit.marginal_family([W0, W2])
    assert fam[0] == orbit.block_marginal(W0)


def test_orbit_measure_rejects_aperiodic_table():
    lat = Lattice.diagonal(2, dim=1)
    x = word_config((0, 1, 1))  # true period 3, claimed 2
    with pytest.raises(ValueError):
        PeriodicOrbitMeasure(x, lat)


def test_orbit_oracle_examples():
    o01 = PeriodicOrbitMeasure.from_config(word_config((0, 1)))
    o10 = PeriodicOrbitMeasure.from_config(word_config((1, 0)))
    assert periodic_rho_oracle(o01, o10) == 0
    assert periodic_rho_oracle(o01, o01) == 0
    zero = PeriodicOrbitMeasure.from_config(constant_config(1, 0))
    assert periodic_rho_oracle(zero, o01) == Fraction(1, 2)
    a = PeriodicOrbitMeasure.from_config(word_config((0, 0, 1)))
    b = PeriodicOrbitMeasure.from_config(word_config((0, 1, 1)))
    assert periodic_rho_oracle(a, b) == Fraction(1, 3)


def test_orbit_oracle_aligns_two_dimensional_checkerboards():
    lat = Lattice.diagonal((2, 2))
    checker = periodic_config(lat, {(0, 0): 0, (1, 0): 1, (0, 1): 1, (1, 1): 0})
    flipped = periodic_config(lat, {(0, 0): 1, (1, 0): 0, (0, 1): 0, (1, 1): 1})
    o1 = PeriodicOrbitMeasure.from_config(checker)
    o2 = PeriodicOrbitMeasure.from_config(flipped)
    assert periodic_rho_oracle(o1, o2) == 0


# --- rho_bar_lower ----------------------------------------------------------

def _orbit_family(config, ks):
    orbit = PeriodicOrbitMeasure.from_config(config)
    windows = [FiniteSubset.box((0,), (k - 1,)) for k in ks]
    return orbit.marginal_family(windows)


def test_chain_for_constant_vs_alternating():
    mu = _orbit_family(constant_config(1, 0), (1, 2))
    nu = _orbit_family(word_config((0, 1)), (1, 2))
    assert rho_bar_lower(mu, nu) == [Fraction(1, 2), Fraction(1, 2)]


def test_chain_vanishes_for_equal_families():
    fam = _orbit_family(word_config((0, 1)), (1, 2))
    assert rho_bar_lower(fam, fam) == [Fraction(0), Fraction(0)]


def test_chain_saturates_for_disjoint_constants():
    mu = _orbit_family(constant_config(1, 0), (1, 2))
    nu = _orbit_family(constant_config(1, 1), (1, 2))
    assert rho_bar_lower(mu, nu) == [Fraction(1), Fraction(1)]


def test_chain_stays_below_orbit_oracle_on_periodic_families():
    rng = random.Random(41)
    from shiftlab.examples import random_periodic_pair

    for _ in range(10):
        x, z = random_periodic_pair(rng)
        ox = PeriodicOrbitMeasure.from_config(x)
        oz = PeriodicOrbitMeasure.from_config(z)
        windows = [FiniteSubset.box((0,), (k - 1,)) for k in (1, 2, 3)]
        chain = rho_bar_lower(ox.marginal_family(windows), oz.marginal_family(windows))
        oracle = periodic_rho_oracle(ox, oz)
        assert all(c <= oracle for c in chain)


def test_chain_values_need_not_be_monotone_for_nonstationary_families():
    # stage marginals are individually valid lower bounds, but a consistent
    # non-stationary family can score higher on the smaller window
    W2 = FiniteSubset.box((0,), (1,))
    mu2 = PatternDistribution(W2, {(0, 0): Fraction(9, 10), (1, 1): Fraction(1, 10)})
    nu2 = PatternDistribution(W2, {(1, 0): Fraction(9, 10), (0, 1): Fraction(1, 10)})
    mu = [mu2.marginal(W0), mu2]
    nu = [nu2.marginal(W0), nu2]
    chain = rho_bar_lower(mu, nu)
    assert chain == [Fraction(4, 5), Fraction(1, 2)]


def test_chain_rejects_malformed_families():
    mu = _orbit_family(word_config((0, 1)), (1, 2))
    nu = _orbit_family(word_config((1, 0)), (1,))
    with pytest.raises(InvalidFamilyError):
        rho_bar_lower(mu, nu)
    # same lengths but windows do not nest
    Wa = FiniteSubset.box((0,), (0,))
    Wb = FiniteSubset.box((5,), (5,))
    flat_a = PatternDistribution(Wa, {(0,): Fraction(1)})
    flat_b = PatternDistribution(Wb, {(0,): Fraction(1)})
    with pytest.raises(InvalidFamilyError):
        rho_bar_lower([flat_a, flat_b], [flat_a, flat_b])
    # inconsistent marginals within one family
    W2 = FiniteSubset.box((0,), (1,))
    top = PatternDistribution(W2, {(1, 1): Fraction(1)})
    with pytest.raises(InvalidFamilyError):
        rho_bar_lower([flat_a, top], [flat_a, top])


def test_chain_admissible_flavor_is_bounded():
    from shiftlab.configs import default_metric

    mu = _orbit_family(constant_config(1, 0), (1, 2, 3))
    nu = _orbit_family(word_config((0, 1)), (1, 2, 3))
    chain = rho_bar_lower(mu, nu, cost_kind="admissible", metric=default_metric(1))
    assert all(0 <= c <= 1 for c in chain)
    with pytest.raises(ValueError):
        rho_bar_lower(mu, nu, cost_kind="euclidean")


# --- check_db_ge_rho --------------------------------------------------------

def test_db_ge_rho_for_constant_vs_alternating():
    report = check_db_ge_rho(constant_config(1, 0), word_config((0, 1)), F1, 400, 3)
    assert report.passed
    assert report.dbar == Fraction(200, 401)
    assert report.oracle == Fraction(1, 2)
    assert report.chain == (Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))


def test_db_ge_rho_for_equal_configs():
    x = word_config((0, 1))
    report = check_db_ge_rho(x, x, F1, 100, 2)
    assert report.passed and report.dbar == 0 and report.oracle == 0


# --- rho_triangle_check -----------------------------------------------------

def test_triangle_report_values():
    mu = dist({0: Fraction(2, 10), 1: Fraction(8, 10)})
    eta = dist({0: Fraction(1, 3), 1: Fraction(2, 3)})
    nu = dist({0: Fraction(7, 10), 1: Fraction(3, 10)})
    report = rho_triangle_check(mu, eta, nu, HAM0)
    assert report.passed
    assert (report.d12, report.d23, report.d13) == (
        Fraction(2, 15),
        Fraction(11, 30),
        Fraction(1, 2),
    )
    assert report.d13 <= report.glued_cost


def test_triangle_with_collinear_diracs():
    table = {(0, 1): Fraction(2, 10), (1, 2): Fraction(3, 10), (0, 2): Fraction(5, 10)}

    def cost(p, q):
        a, b = p[0], q[0]
        if a == b:
            return Fraction(0)
        return table[(min(a, b), max(a, b))]

    d0, d1, d2 = (dist({s: Fraction(1)}) for s in (0, 1, 2))
    report = rho_triangle_check(d0, d1, d2, cost)
    assert report.passed
    assert report.d13 == report.d12 + report.d23 == Fraction(1, 2)
