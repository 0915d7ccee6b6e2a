"""
Tests for the exact number-theory primitives
"""
import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from tools.arith import (
    COMPONENTWISE, JOINT, DomainError, coprime_count, divisor_sum, divisors, factorize, mobius,
    phi_m, phi_one_ratio, prime_divisors, primitive_part, primitive_vectors, radical, totient, vec_gcd,
)


def brute_coprime_count(Q, g):
    return sum(1 for p in range(-Q, Q + 1) if math.gcd(p, g) == 1)


def brute_phi_m(q, m, mode):
    g = math.gcd(*q)
    h = max(abs(c) for c in q)
    count = 0
    for p in product(range(-h, h + 1), repeat=m):
        if mode == JOINT:
            count += math.gcd(*p, g) == 1
        else:
            count += all(math.gcd(c, g) == 1 for c in p)
    return count


@pytest.mark.parametrize("q, expected", [((3, 5), 1), ((0, 0, 5), 5), ((4, 6), 2), ((-4, 6), 2)])
def test_vec_gcd(q, expected):
    assert vec_gcd(q) == expected


def test_vec_gcd_rejects_zero_vector():
    with pytest.raises(DomainError) as info:
        vec_gcd((0, 0))
    assert info.value.operation == 'vec_gcd'


@pytest.mark.parametrize("d, expected", [(1, 1), (13, 12), (12, 4)])
def test_totient(d, expected):
    assert totient(d) == expected


def test_small_functions():
    assert mobius(1) == 1
    assert mobius(12) == 0
    assert mobius(30) == -1
    assert radical(12) == 6
    assert factorize(12) == [2, 2, 3]
    assert factorize(1) == []
    assert prime_divisors(60) == [2, 3, 5]
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert divisor_sum(6) == 12


@pytest.mark.parametrize("func", [totient, mobius, factorize, radical])
def test_zero_is_outside_domain(func):
    with pytest.raises(DomainError):
        func(0)


@pytest.mark.parametrize("Q, g, expected", [(5, 1, 11), (6, 6, 4), (10, 4, 10), (0, 1, 1), (0, 2, 0)])
def test_coprime_count_examples(Q, g, expected):
    assert coprime_count(Q, g) == expected


def test_coprime_count_matches_brute_force():
    for g in range(1, 61):
        for Q in range(0, 61):
            assert coprime_count(Q, g) == brute_coprime_count(Q, g), (Q, g)


@pytest.mark.slow
def test_coprime_count_full_grid():
    for g in range(1, 201):
        for Q in range(0, 201):
            assert coprime_count(Q, g) == brute_coprime_count(Q, g), (Q, g)


@given(Q=st.integers(0, 2000), g=st.integers(1, 2000))
def test_coprime_count_error_term(Q, g):
    omega = len(prime_divisors(g))
    assert abs(Fraction(coprime_count(Q, g)) - Fraction(2 * Q * totient(g), g)) <= 2 ** omega


@pytest.mark.parametrize("q, m, mode, expected", [
    ((2, 4), 2, JOINT, 56),
    ((2, 4), 2, COMPONENTWISE, 16),
    ((3, 5), 1, JOINT, 11),
    ((3, 5), 3, COMPONENTWISE, 11 ** 3),
    ((3, 5), 2, JOINT, 121),
])
def test_phi_m_examples(q, m, mode, expected):
    assert phi_m(q, m, mode) == expected


def test_phi_m_matches_brute_force():
    for n in (1, 2):
        for q in product(range(0, 7), repeat=n):
            if not any(q):
                continue
            for m in (1, 2):
                for mode in (JOINT, COMPONENTWISE):
                    assert phi_m(q, m, mode) == brute_phi_m(q, m, mode), (q, m, mode)


@pytest.mark.slow
def test_phi_m_full_grid():
    for n in (1, 2, 3):
        for q in product(range(0, 13), repeat=n):
            if any(q):
                for m in (1, 2):
                    assert phi_m(q, m, JOINT) == brute_phi_m(q, m, JOINT), (q, m)


def test_phi_m_unknown_mode():
    with pytest.raises(DomainError):
        phi_m((2, 4), 1, 'sideways')


def test_phi_one_ratio_is_bounded():
    for q in product(range(0, 25), repeat=2):
        if any(q):
            assert 1 <= phi_one_ratio(q) <= 3, q


@pytest.mark.parametrize("n, H, expected", [
    (2, 2, [(0, 1), (1, 0), (1, 1), (1, 2), (2, 1)]),
    (1, 5, [(1,)]),
    (2, 1, [(0, 1), (1, 0), (1, 1)]),
])
def test_primitive_vectors_examples(n, H, expected):
    assert list(primitive_vectors(n, H)) == expected


def test_primitive_vectors_match_filter():
    for n, H in [(2, 9), (3, 4)]:
        expected = [q for q in product(range(H + 1), repeat=n) if any(q) and math.gcd(*q) == 1]
        assert list(primitive_vectors(n, H)) == expected


@pytest.mark.parametrize("q, scale, direction", [
    ((2, 4), 2, (1, 2)),
    ((7,), 7, (1,)),
    ((6, 10, 15), 1, (6, 10, 15)),
])
def test_primitive_part_examples(q, scale, direction):
    part = primitive_part(q)
    assert (part.scale, part.direction) == (scale, direction)


@settings(max_examples=200)
@given(st.lists(st.integers(0, 500), min_size=1, max_size=4).filter(any))
def test_primitive_part_recombines(q):
    part = primitive_part(q)
    assert part.recombine() == tuple(q)
    assert math.gcd(*part.direction) == 1
