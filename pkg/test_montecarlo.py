"""
Tests for seeded sampling, hit counting and the counterexample demo
"""
import math
from fractions import Fraction
from itertools import product

import pytest

from tools.arith import DomainError
from tools.montecarlo import (
    DENOMINATOR, counterexample_demo, empirical_intersection_measure, empirical_union_measure, enumerate_solutions,
    hit_fraction, lift_solution, reduce_solution, residual, sample_point,
)
from tools.measures import measure_intersection
from tools.series import ZERO_PSI, ExplicitTable, PowerLaw
from tools.torus_sets import ApproxSet

HARMONIC = PowerLaw(1, 1)
INVERSE_SQUARE = PowerLaw(1, 2)
HALF_HARMONIC = PowerLaw(Fraction(1, 2), 1)


def naive_solutions(x, spec, Q, coprime):
    n, m = len(x), len(x[0])
    found = set()
    for q in product(range(Q + 1), repeat=n):
        if not any(q):
            continue
        psi = spec.evaluate(q)
        g = math.gcd(*q)
        forms = [sum(c * x[i][j] for i, c in enumerate(q)) for j in range(m)]
        for p in product(*(range(math.floor(t) - 2, math.ceil(t) + 3) for t in forms)):
            if max(abs(t - pj) for t, pj in zip(forms, p)) < psi:
                if not coprime or all(math.gcd(pj, g) == 1 for pj in p):
                    found.add((p, q))
    return found


def test_sample_point_is_deterministic():
    first = sample_point(5, 3, 2, 2)
    assert first == sample_point(5, 3, 2, 2)
    assert first != sample_point(5, 4, 2, 2)
    assert first != sample_point(6, 3, 2, 2)
    for row in first:
        for x in row:
            assert 0 <= x < 1
            assert DENOMINATOR % x.denominator == 0


def test_residual():
    assert residual((1,), (3,), ((Fraction(1, 3),),)) == 0
    assert residual((0,), (1,), ((Fraction(1, 4),),)) == Fraction(1, 4)
    assert residual((1, 0), (2,), ((Fraction(2, 5), Fraction(1, 7)),)) == Fraction(2, 7)


@pytest.mark.parametrize("x, spec, Q", [
    (((Fraction(2, 7),),), HARMONIC, 12),
    (((Fraction(1, 3),), (Fraction(2, 5),)), INVERSE_SQUARE, 4),
    (((Fraction(3, 11), Fraction(5, 13)),), PowerLaw(Fraction(1, 3), 0), 6),
])
@pytest.mark.parametrize("coprime", [True, False])
def test_enumerate_solutions_matches_naive_loop(x, spec, Q, coprime):
    solutions = enumerate_solutions(x, spec, Q, coprime)
    assert {(s.p, s.q) for s in solutions} == naive_solutions(x, spec, Q, coprime)
    for s in solutions:
        assert s.residual == residual(s.p, s.q, x)
        assert s.coprime_ok or not coprime


def test_enumerate_solutions_rejects_bad_height():
    with pytest.raises(DomainError):
        enumerate_solutions(((Fraction(1, 2),),), HARMONIC, 0, True)


@pytest.mark.parametrize("spec, n, m, Q, K", [
    (HARMONIC, 1, 1, 30, 3),
    (INVERSE_SQUARE, 2, 1, 6, 2),
    (HALF_HARMONIC, 1, 2, 8, 1),
])
def test_hit_fraction_agrees_with_enumeration(spec, n, m, Q, K):
    seed, samples = 42, 40
    expected = sum(1 for index in range(samples)
                   if len(enumerate_solutions(sample_point(seed, index, n, m), spec, Q, True)) >= K)
    report = hit_fraction(spec, n, m, Q, K, samples, seed)
    assert report.hits == expected
    assert report.fraction == expected / samples


def test_hit_fraction_is_independent_of_workers():
    reports = [hit_fraction(HARMONIC, 1, 1, 40, 3, 600, seed=9, workers=w) for w in (1, 2, 8)]
    assert reports[0] == reports[1] == reports[2]


def test_hit_fraction_is_reproducible():
    first = hit_fraction(HALF_HARMONIC, 1, 1, 50, 2, 300, seed=123)
    assert first == hit_fraction(HALF_HARMONIC, 1, 1, 50, 2, 300, seed=123)
    assert first.parameters['psi'] == HALF_HARMONIC.to_config()


def test_hit_fraction_edge_cases():
    assert hit_fraction(ZERO_PSI, 1, 1, 20, 1, 100, seed=1).hits == 0
    full = hit_fraction(PowerLaw(1, 0), 1, 1, 5, 1, 100, seed=1)
    assert full.fraction == 1.0
    assert full.stderr == 0.0
    # q = 1 already gives a solution for every x except 1/2
    assert hit_fraction(HALF_HARMONIC, 1, 1, 50, 1, 200, seed=2).fraction == 1.0


def test_coprime_hits_never_exceed_plain_hits():
    coprime = hit_fraction(HARMONIC, 1, 1, 40, 4, 300, seed=8, coprime=True)
    plain = hit_fraction(HARMONIC, 1, 1, 40, 4, 300, seed=8, coprime=False)
    assert coprime.hits <= plain.hits


def test_hit_fraction_needs_seed_and_rational_psi():
    with pytest.raises(DomainError) as info:
        hit_fraction(HARMONIC, 1, 1, 10, 1, 10, seed=None)
    assert info.value.operation == 'hit_fraction'
    with pytest.raises(DomainError):
        hit_fraction(HARMONIC, 1, 1, 10, 1, 10, seed=-1)
    with pytest.raises(DomainError):
        hit_fraction(PowerLaw(1, Fraction(1, 2)), 1, 1, 3, 1, 10, seed=1)
    with pytest.raises(DomainError):
        hit_fraction(HARMONIC, 1, 1, 10, 0, 10, seed=1)


@pytest.mark.slow
def test_zero_one_divergent_side():
    report = hit_fraction(HALF_HARMONIC, 1, 1, 10_000, 2, 2000, seed=2024, workers=4)
    assert report.fraction >= 0.95


@pytest.mark.slow
def test_zero_one_convergent_side():
    report = hit_fraction(INVERSE_SQUARE, 1, 1, 10_000, 1, 1000, seed=2024, q_min=100, workers=4)
    assert report.fraction <= 0.05


def test_empirical_union_measure():
    sets = [ApproxSet(1, 1, (2,), Fraction(1, 4)), ApproxSet(1, 1, (3,), Fraction(1, 4))]
    report = empirical_union_measure(sets, 4000, seed=17)
    assert abs(report.fraction - 0.5) <= 5 * report.stderr
    assert report == empirical_union_measure(sets, 4000, seed=17, workers=3)


def test_empirical_union_measure_full_member():
    sets = [ApproxSet(1, 1, (1,), Fraction(1, 2)), ApproxSet(1, 1, (5,), Fraction(1, 8))]
    report = empirical_union_measure(sets, 500, seed=1)
    assert (report.hits, report.stderr) == (500, 0.0)


def test_empirical_union_measure_errors():
    with pytest.raises(DomainError):
        empirical_union_measure([], 10, seed=1)
    with pytest.raises(DomainError):
        empirical_union_measure([ApproxSet(1, 1, (2,), Fraction(1, 4)),
                                 ApproxSet(2, 1, (1, 2), Fraction(1, 4))], 10, seed=1)
    with pytest.raises(DomainError):
        empirical_union_measure([ApproxSet(1, 1, (2,), Fraction(1, 4))], 10, seed=None)


def test_empirical_union_measure_counts_each_sample_once():
    sets = [ApproxSet(2, 1, (1, 2), Fraction(1, 8)), ApproxSet(2, 1, (3, 1), Fraction(1, 6)),
            ApproxSet(2, 1, (2, 2), Fraction(1, 5))]
    seed, samples = 11, 300
    points = [sample_point(seed, index, 2, 1) for index in range(samples)]
    union_hits = sum(1 for x in points if any(s.contains(x) for s in sets))
    common_hits = sum(1 for x in points if all(s.contains(x) for s in sets))
    assert empirical_union_measure(sets, samples, seed).hits == union_hits
    assert empirical_intersection_measure(sets, samples, seed, workers=2).hits == common_hits


def test_empirical_intersection_of_independent_directions():
    sets = [ApproxSet(2, 1, (1, 0), Fraction(1, 4)), ApproxSet(2, 1, (0, 1), Fraction(1, 4))]
    assert measure_intersection(*sets) == Fraction(1, 4)
    report = empirical_intersection_measure(sets, 4000, seed=23)
    assert abs(report.fraction - 0.25) <= 5 * report.stderr
    assert report.parameters == {'n': 2, 'm': 1, 'sets': 2}
    assert report == empirical_intersection_measure(sets, 4000, seed=23, workers=4)


def test_empirical_intersection_measure_errors():
    with pytest.raises(DomainError) as info:
        empirical_intersection_measure([], 10, seed=1)
    assert info.value.operation == 'empirical_intersection_measure'
    with pytest.raises(DomainError):
        empirical_intersection_measure([ApproxSet(2, 1, (1, 0), Fraction(1, 4)),
                                        ApproxSet(2, 2, (0, 1), Fraction(1, 4))], 10, seed=1)
    with pytest.raises(DomainError):
        empirical_intersection_measure([ApproxSet(2, 1, (1, 0), Fraction(1, 4))], 10, seed=None)


@pytest.mark.slow
def test_intersection_of_distinct_directions_matches_product():
    pairs = [
        ((1, 0), (0, 1)), ((1, 1), (1, 2)), ((2, 0), (0, 3)), ((1, 2), (2, 1)), ((2, 2), (1, 3)),
        ((3, 1), (1, 0)), ((0, 2), (2, 3)), ((1, 4), (4, 1)), ((3, 3), (1, 2)), ((2, 4), (3, 1)),
    ]
    within = 0
    for seed, (q1, q2) in enumerate(pairs, start=500):
        sets = [ApproxSet(2, 1, q1, Fraction(1, 5)), ApproxSet(2, 1, q2, Fraction(2, 7))]
        exact = measure_intersection(*sets)
        assert exact > 0
        report = empirical_intersection_measure(sets, 5000, seed, workers=4)
        if abs(report.fraction - float(exact)) <= 4 * report.stderr:
            within += 1
    assert within >= 9


def test_lift_solution():
    spec = ExplicitTable({(2,): Fraction(1, 10), (4,): Fraction(1)})
    assert lift_solution((0,), (2,), spec, ((Fraction(1, 5),),), 2) == ((0,), (4,))
    assert lift_solution((1,), (2,), spec, ((Fraction(1, 2),),), 2) == ((2,), (4,))
    with pytest.raises(DomainError):
        lift_solution((0,), (2,), spec, ((Fraction(1, 2),),), 2)


def test_reduce_solution():
    reduced = reduce_solution((2, 4), (6,))
    assert (reduced.p, reduced.q, reduced.t) == ((1, 2), (3,), 2)
    reduced = reduce_solution((3,), (4, 8))
    assert reduced.t == 1
    with pytest.raises(DomainError):
        reduce_solution((1,), (0,))


def test_counterexample_small():
    report = counterexample_demo(6, Fraction(1, 10))
    assert report.sum == Fraction(2, 5)
    assert report.union_exact == Fraction(1, 5)
    assert report.ratio == 2
    assert report.union_mc is None


def test_counterexample_covers_everything_at_half():
    report = counterexample_demo(6, Fraction(1, 2))
    assert report.union_exact == 1
    assert report.sum == 2


def test_counterexample_monte_carlo_cross_check():
    report = counterexample_demo(6, Fraction(1, 10), samples=4000, seed=7)
    assert abs(report.union_mc.fraction - 0.2) <= 5 * report.union_mc.stderr
    with pytest.raises(DomainError):
        counterexample_demo(6, Fraction(1, 10), samples=10)
    with pytest.raises(DomainError):
        counterexample_demo(1, Fraction(1, 10))


@pytest.mark.slow
def test_counterexample_primorial():
    report = counterexample_demo(30030, Fraction(1, 10))
    assert report.union_exact <= Fraction(1, 5)
    assert report.ratio >= 3
