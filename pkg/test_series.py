"""
Tests for approximating functions and the divergence series
"""
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from config import PsiConfig
from tools.arith import DomainError, primitive_vectors, totient
from tools.series import (
    CONVERGING, DIVERGING, ZERO_PSI, CatlinTransform, DSCounterexample, ExplicitTable, PowerLaw, RadialTable,
    SeriesParams, ThresholdPart, bv_sum, capital_psi, catlin_bar, catlin_equivalent_ds_sum, catlin_sum,
    ds_sum, ds_sum_factored, eval_psi, evaluate_series, hausdorff_catlin_sum, hausdorff_ds_sum,
    khintchine_sum, kg_sum, threshold_split,
)

HARMONIC = PowerLaw(1, 1)
INVERSE_SQUARE = PowerLaw(1, 2)


def test_eval_psi_examples():
    assert eval_psi(INVERSE_SQUARE, (3, 4)) == Fraction(1, 16)
    assert eval_psi(DSCounterexample(6, Fraction(1, 10)), (3,)) == Fraction(1, 20)
    assert eval_psi(DSCounterexample(6, Fraction(1, 10)), (4,)) == 0
    small, large = threshold_split(RadialTable({4: 10}))
    assert eval_psi(small, (4,)) == 0
    assert eval_psi(large, (4,)) == 10


def test_eval_psi_domain():
    with pytest.raises(DomainError):
        eval_psi(INVERSE_SQUARE, (0, 0))
    with pytest.raises(DomainError):
        eval_psi(DSCounterexample(6, Fraction(1, 10)), (1, 2))
    with pytest.raises(DomainError):
        ExplicitTable({(1, 2): Fraction(1, 3), (1,): Fraction(1)})


@settings(max_examples=200)
@given(values=st.dictionaries(st.integers(1, 30), st.fractions(min_value=0, max_value=20, max_denominator=16),
                              max_size=10),
       q=st.tuples(st.integers(0, 30), st.integers(0, 30)).filter(any))
def test_threshold_split_sums_to_inner(values, q):
    spec = RadialTable(values)
    small, large = threshold_split(spec)
    assert small.evaluate(q) + large.evaluate(q) == spec.evaluate(q)
    d = math.gcd(*q)
    assert small.evaluate(q) <= Fraction(d, 2 * totient(d))


def test_threshold_split_small_values_stay_small():
    small, large = threshold_split(PowerLaw(Fraction(1, 2), 0))
    for q in range(1, 50):
        assert large.evaluate((q,)) == 0
        assert small.evaluate((q,)) == Fraction(1, 2)
    assert all(part.evaluate((3,)) == 0 for part in threshold_split(ZERO_PSI))


@pytest.mark.parametrize("spec, m, Q, expected", [
    (ZERO_PSI, 1, 10, Fraction(0)),
    (HARMONIC, 1, 4, Fraction(115, 72)),
    (DSCounterexample(6, Fraction(1, 10)), 1, 6, Fraction(1, 10)),
])
def test_ds_sum_examples(spec, m, Q, expected):
    report = ds_sum(spec, m, Q, n=1)
    assert report.partial_sum == expected
    assert report.exact
    assert report.abs_error == 0.0


def test_ds_sum_is_monotone():
    sums = [ds_sum(PowerLaw(1, 3), 1, Q, n=2).partial_sum for Q in range(1, 12)]
    assert sums == sorted(sums)


def test_ds_sum_factored_collapses_for_n_one():
    factored = ds_sum_factored(HARMONIC, 2, 1, 20, n=1)
    direct = sum((Fraction(totient(d), d * d) ** 2 for d in range(1, 21)), Fraction(0))
    assert factored.partial_sum == direct


def test_ds_sum_factored_matches_direct_terms():
    spec = PowerLaw(1, 2)
    Q = 6
    factored = ds_sum_factored(spec, 1, Q, Q, n=2)
    direct = ds_sum(spec, 1, Q, n=2)
    extra = Fraction(0)
    for direction in primitive_vectors(2, Q):
        for d in range(1, Q + 1):
            if d * max(direction) > Q:
                q = tuple(d * c for c in direction)
                extra += Fraction(totient(d), d) * spec.evaluate(q)
    assert factored.partial_sum == direct.partial_sum + extra


def test_capital_psi_examples():
    assert capital_psi(HARMONIC, 7, 5, n=1).value == Fraction(1, 7)
    table = ExplicitTable({(1, 2): Fraction(1, 3)})
    assert capital_psi(table, 1, 3).value == Fraction(1, 3)
    assert capital_psi(table, 2, 3).value == 0

    cube = PowerLaw(1, 3)
    result = capital_psi(cube, 1, 10, n=2)
    brute = sum((Fraction(1, max(q) ** 3) for q in primitive_vectors(2, 10)), Fraction(0))
    assert result.exact and result.value == brute
    assert result.tail_bound is not None and result.tail_bound > 0


def test_capital_psi_perfect_power_root():
    table = ExplicitTable({(1, 0): Fraction(3, 5), (0, 1): Fraction(4, 5)})
    result = capital_psi(table, 1, 1, m=2)
    assert result.exact
    assert result.value == 1


def test_capital_psi_irrational_root():
    table = ExplicitTable({(1, 0): Fraction(1), (0, 1): Fraction(1)})
    result = capital_psi(table, 1, 1, m=2)
    assert not result.exact
    assert abs(float(result.value) - 2 ** 0.5) < 1e-12
    assert result.abs_error < 1e-30


def test_catlin_bar_examples():
    assert catlin_bar(INVERSE_SQUARE, (3,), 50).value == Fraction(1, 9)
    assert catlin_bar(INVERSE_SQUARE, (3,), 50).witness == 1

    table = ExplicitTable({(2,): Fraction(1, 10), (4,): Fraction(1)})
    bar = catlin_bar(table, (2,), 2)
    assert (bar.value, bar.witness, bar.exact) == (Fraction(1, 2), 2, True)
    assert catlin_bar(table, (2,), 1).exact is False


def test_catlin_bar_bounds_psi_and_grows_with_t_max():
    table = ExplicitTable({(q,): Fraction(q % 7, 5) for q in range(1, 40)})
    for q in range(1, 20):
        values = [catlin_bar(table, (q,), t).value for t in range(1, 6)]
        assert table.evaluate((q,)) <= values[0]
        assert values == sorted(values)


def test_catlin_sum_examples():
    assert catlin_sum(ZERO_PSI, 1, 10, 3, n=1).partial_sum == 0
    report = catlin_sum(INVERSE_SQUARE, 1, 3, 5, n=1)
    assert report.partial_sum == 3 + Fraction(2, 8) + Fraction(4, 27)
    assert report.sup_exact is True


def test_other_sums():
    assert khintchine_sum(HARMONIC, 1, 4).partial_sum == Fraction(25, 12)
    assert kg_sum(INVERSE_SQUARE, 2, 1, 3).partial_sum == Fraction(11, 6)
    assert kg_sum(INVERSE_SQUARE, 2, 2, 3).partial_sum == 1 + Fraction(1, 8) + Fraction(1, 27)
    assert bv_sum(ZERO_PSI, 2, 5, n=3).partial_sum == 0


def test_radial_sums_reject_higher_dimensional_psi():
    planar = ExplicitTable({(1, 2): Fraction(1, 3)})
    with pytest.raises(DomainError) as info:
        khintchine_sum(planar, 1, 3)
    assert info.value.operation == 'khintchine_sum'
    with pytest.raises(DomainError) as info:
        kg_sum(planar, 2, 1, 3)
    assert info.value.operation == 'kg_sum'
    assert khintchine_sum(ExplicitTable({(2,): Fraction(1, 3)}), 1, 3).partial_sum == Fraction(1, 3)


def test_hausdorff_sums():
    report = hausdorff_ds_sum(HARMONIC, 1, 1, Fraction(1, 2), 3)
    assert report.partial_sum == Fraction(13, 6)
    assert hausdorff_ds_sum(ZERO_PSI, 2, 1, Fraction(1, 2), 4).partial_sum == 0
    with pytest.raises(DomainError):
        hausdorff_ds_sum(HARMONIC, 1, 1, Fraction(0), 3)


@pytest.mark.parametrize("spec, n, m", [
    (HARMONIC, 1, 1),
    (PowerLaw(2, 3), 2, 2),
    (DSCounterexample(12, Fraction(1, 3)), 1, 1),
    (ExplicitTable({(1, 2): Fraction(1, 3), (2, 2): Fraction(1, 5)}), 2, 3),
])
def test_hausdorff_with_s_equal_m_is_ds(spec, n, m):
    assert hausdorff_ds_sum(spec, n, m, Fraction(m), 8).partial_sum == ds_sum(spec, m, 8, n=n).partial_sum


def test_hausdorff_catlin_matches_catlin_at_s_equal_m():
    spec = ExplicitTable({(q,): Fraction(1, q) for q in range(1, 30)})
    assert hausdorff_catlin_sum(spec, 1, 1, Fraction(1), 10, 4).partial_sum == \
        catlin_sum(spec, 1, 10, 4).partial_sum


def test_catlin_equivalent_ds_sum():
    report = catlin_equivalent_ds_sum(INVERSE_SQUARE, 1, 6, 4, n=1)
    assert report.partial_sum == ds_sum(INVERSE_SQUARE, 1, 6, n=1).partial_sum
    assert report.sup_exact


def test_counterexample_divisor_identity():
    for N in (6, 12, 30, 210):
        spec = DSCounterexample(N, Fraction(1, 10))
        total = sum((2 * spec.evaluate((q,)) for q in range(1, N + 1)), Fraction(0))
        assert total == 2 * spec.eta * Fraction(sum(q for q in range(1, N + 1) if N % q == 0), N)


def test_irrational_power_law_reports_error():
    report = ds_sum(PowerLaw(1, Fraction(1, 2)), 1, 50, n=1)
    assert not report.exact
    assert report.abs_error < 1e-25
    assert report.partial_sum > 0


def test_verdict_hints():
    assert khintchine_sum(HARMONIC, 1, 4096).verdict_hint == DIVERGING
    assert khintchine_sum(INVERSE_SQUARE, 1, 4096).verdict_hint == CONVERGING


def test_evaluate_series_by_name():
    params = SeriesParams(n=1, m=1, Q=4)
    assert evaluate_series('ds', HARMONIC, params).partial_sum == Fraction(115, 72)
    assert evaluate_series('khintchine', HARMONIC, params).partial_sum == Fraction(25, 12)
    with pytest.raises(DomainError):
        evaluate_series('nonsense', HARMONIC, params)


@pytest.mark.parametrize("spec", [
    HARMONIC,
    PowerLaw(Fraction(3, 2), Fraction(-1, 2)),
    RadialTable({1: Fraction(1, 2), 5: Fraction(2)}),
    ExplicitTable({(1, 2): Fraction(1, 3)}),
    DSCounterexample(30, Fraction(1, 10)),
    CatlinTransform(RadialTable({2: Fraction(1, 4)}), 3),
    ThresholdPart(PowerLaw(1, 1), 'large'),
])
def test_spec_config_round_trip(spec):
    assert PsiConfig.model_validate(spec.to_config()).to_spec() == spec
