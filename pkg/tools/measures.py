"""
Exact measures of approximation sets and their pairwise intersections

Higher-dimensional sets are reduced to the circle: A_{n,m}(q, eps) has the measure
of the one-dimensional set at scale gcd(q) raised to the m-th power, two sets with
the same primitive direction intersect like their one-dimensional reductions, and
sets with distinct primitive directions are independent.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Union

import pandas as pd

from tools.arith import DomainError, IntVec, prime_divisors, primitive_vectors, totient
from tools.torus_sets import ApproxMode, ApproxSet, approx_set_1d, select_separated_numerators

logger = logging.getLogger(__name__)

PsiLike = Union[Mapping[int, Fraction], Callable[[int], Fraction]]

FINITE = 'finite'
ZERO_OVER_ZERO = 'zero_over_zero'
INFINITE = 'infinite'
SKIPPED = 'skipped'

FOUND = 'found'
OVERSHOOT = 'overshoot'
EXHAUSTED = 'exhausted'


def as_psi(Psi: PsiLike) -> Callable[[int], Fraction]:
    """Wrap a table or a function of d into a function returning Fractions"""
    if isinstance(Psi, Mapping):
        return lambda d: Fraction(Psi.get(d, 0))
    return lambda d: Fraction(Psi(d))


def small_psi_limit(d: int) -> Fraction:
    """d / (2 phi(d)), the largest radius at which coprime arcs stay disjoint"""
    return Fraction(d, 2 * totient(d))


def measure_A(s: ApproxSet) -> Fraction:
    """
    Exact Lebesgue measure of an approximation set

    Args:
        s: Set descriptor

    Returns:
        measure(approx_set_1d(gcd(q), eps, mode)) ** m
    """
    return s.one_dimensional().measure() ** s.m


def measure_intersection(s1: ApproxSet, s2: ApproxSet) -> Fraction:
    """
    Exact measure of the intersection of two approximation sets

    Args:
        s1: First set
        s2: Second set with the same (n, m)

    Returns:
        The one-dimensional intersection to the m-th power when the primitive
        directions agree, the product of the two measures otherwise
    """
    if (s1.n, s1.m) != (s2.n, s2.m):
        raise DomainError('measure_intersection',
                          f"dimension mismatch ({s1.n}, {s1.m}) vs ({s2.n}, {s2.m})")
    if s1.direction == s2.direction:
        return s1.one_dimensional().intersect(s2.one_dimensional()).measure() ** s1.m
    return measure_A(s1) * measure_A(s2)


def coprime_intersection_1d(k: int, l: int, eps_k: Fraction, eps_l: Fraction) -> Fraction:
    """Leb(A'(k, eps_k) and A'(l, eps_l)) on the circle"""
    u = approx_set_1d(k, eps_k, ApproxMode.COPRIME)
    v = approx_set_1d(l, eps_l, ApproxMode.COPRIME)
    return u.intersect(v).measure()


@dataclass(frozen=True)
class OverlapReport:
    k: int
    l: int
    Psi_k: Fraction
    Psi_l: Fraction
    lhs: Optional[Fraction]
    rhs: Optional[Fraction]
    M: Fraction
    indicator: bool
    literal_indicator: bool
    ratio: Optional[Fraction]
    ratio_flag: str
    skipped: bool = False
    reason: str = ''

    def to_row(self) -> Dict[str, Any]:
        """Flat row for the overlap DataFrame; exact values become floats here"""
        ratio = math.inf if self.ratio_flag == INFINITE else (
            float(self.ratio) if self.ratio is not None else math.nan)
        return {
            'k': self.k,
            'l': self.l,
            'lhs': float(self.lhs) if self.lhs is not None else math.nan,
            'rhs': float(self.rhs) if self.rhs is not None else math.nan,
            'M': float(self.M),
            'indicator': self.indicator,
            'literal_indicator': self.literal_indicator,
            'ratio': ratio,
            'ratio_flag': self.ratio_flag,
            'skipped': self.skipped,
        }


def _overlap_prime_product(k: int, l: int, M: Fraction) -> Fraction:
    g = math.gcd(k, l)
    threshold = M / g
    product = Fraction(1)
    for p in prime_divisors(k * l // (g * g)):
        if p > threshold:
            product *= Fraction(p + 1, p)
    return product


def pv_overlap_bound(k: int, l: int, Psi_k: Fraction, Psi_l: Fraction) -> OverlapReport:
    """
    Compare the exact overlap of two coprime approximation sets with the pairwise bound

    The bound is (phi(k)Psi_k/k)(phi(l)Psi_l/l) times the product of (1 + 1/p) over the
    primes p dividing kl/gcd(k, l)^2 with p > M/gcd(k, l), where
    M = max(l Psi_k, k Psi_l). It is zero unless 2M > gcd(k, l): two reduced fractions
    a/k != b/l satisfy |al - bk| >= gcd(k, l), so the arcs can only meet when
    l Psi_k + k Psi_l > gcd(k, l). The literal condition M >= gcd(k, l) is reported as
    literal_indicator.

    Args:
        k, l: Distinct positive integers
        Psi_k, Psi_l: Radii with Psi(d) <= d / (2 phi(d))

    Returns:
        OverlapReport with exact lhs, rhs and ratio
    """
    k, l = int(k), int(l)
    if k < 1 or l < 1:
        raise DomainError('pv_overlap_bound', f"scales must be positive, got ({k}, {l})")
    if k == l:
        raise DomainError('pv_overlap_bound', f"scales must differ, got k = l = {k}")
    Psi_k, Psi_l = Fraction(Psi_k), Fraction(Psi_l)
    for d, value in ((k, Psi_k), (l, Psi_l)):
        if value < 0 or value > small_psi_limit(d):
            raise DomainError('pv_overlap_bound',
                              f"Psi({d}) = {value} outside [0, {small_psi_limit(d)}]")

    g = math.gcd(k, l)
    M = max(l * Psi_k, k * Psi_l)
    indicator = 2 * M > g
    lhs = coprime_intersection_1d(k, l, Psi_k, Psi_l)
    if indicator:
        rhs = (Fraction(totient(k)) * Psi_k / k) * (Fraction(totient(l)) * Psi_l / l) \
            * _overlap_prime_product(k, l, M)
    else:
        rhs = Fraction(0)

    if rhs > 0:
        ratio, flag = lhs / rhs, FINITE
    elif lhs == 0:
        ratio, flag = None, ZERO_OVER_ZERO
    else:
        ratio, flag = None, INFINITE
        logger.warning(f"Positive overlap with zero bound at (k, l) = ({k}, {l})")
    return OverlapReport(k=k, l=l, Psi_k=Psi_k, Psi_l=Psi_l, lhs=lhs, rhs=rhs, M=M,
                         indicator=indicator, literal_indicator=M >= g,
                         ratio=ratio, ratio_flag=flag)


def _scan_row(k: int, K: int, psi: Callable[[int], Fraction]) -> List[OverlapReport]:
    rows = []
    for l in range(k + 1, K + 1):
        try:
            rows.append(pv_overlap_bound(k, l, psi(k), psi(l)))
        except DomainError as e:
            g = math.gcd(k, l)
            M = max(l * psi(k), k * psi(l))
            rows.append(OverlapReport(k=k, l=l, Psi_k=psi(k), Psi_l=psi(l), lhs=None, rhs=None,
                                      M=M, indicator=2 * M > g, literal_indicator=M >= g,
                                      ratio=None, ratio_flag=SKIPPED, skipped=True, reason=str(e)))
    return rows


def _scan_order(report: OverlapReport):
    if report.ratio_flag == INFINITE:
        return (0, Fraction(0), report.k, report.l)
    if report.ratio_flag == FINITE:
        return (1, -report.ratio, report.k, report.l)
    if report.ratio_flag == ZERO_OVER_ZERO:
        return (2, Fraction(0), report.k, report.l)
    return (3, Fraction(0), report.k, report.l)


def overlap_ratio_scan(Psi: PsiLike, K: int, workers: int = 1) -> List[OverlapReport]:
    """
    Audit the pairwise overlap bound over every pair 1 <= k < l <= K

    Pairs violating the size hypothesis are kept with skipped=True. Rows are
    computed independently, so the result does not depend on the worker count.

    Args:
        Psi: Radius table or function of d
        K: Largest scale
        workers: Threads used for the scan

    Returns:
        Reports sorted with unbounded ratios first, then descending finite ratios,
        then 0/0 pairs, then skipped pairs; ties broken by (k, l)
    """
    K = int(K)
    if K < 2:
        raise DomainError('overlap_ratio_scan', f"K must be >= 2, got {K}")
    psi = as_psi(Psi)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(lambda k: _scan_row(k, K, psi), range(1, K)))
    else:
        rows = [_scan_row(k, K, psi) for k in range(1, K)]
    reports = [r for row in rows for r in row]
    skipped = sum(1 for r in reports if r.skipped)
    if skipped:
        logger.info(f"overlap scan skipped {skipped} pairs violating the size hypothesis")
    return sorted(reports, key=_scan_order)


def fitted_constant(reports: Sequence[OverlapReport]) -> Optional[Fraction]:
    """Largest finite lhs/rhs ratio of a scan, None if no pair has a positive bound"""
    ratios = [r.ratio for r in reports if r.ratio_flag == FINITE]
    return max(ratios) if ratios else None


def overlap_frame(reports: Sequence[OverlapReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports])


def chung_erdos_bound(mu: Sequence[Fraction], mu_pair: Sequence[Sequence[Fraction]]) -> Fraction:
    """
    Chung-Erdos lower bound on the measure of a union

    Args:
        mu: Measures of the sets
        mu_pair: Symmetric matrix of pairwise intersection measures, diagonal mu

    Returns:
        (sum mu)^2 / (sum of all entries of mu_pair)
    """
    mu = [Fraction(x) for x in mu]
    size = len(mu)
    if len(mu_pair) != size or any(len(row) != size for row in mu_pair):
        raise DomainError('chung_erdos_bound', f"pair matrix must be {size} x {size}")
    pair = [[Fraction(x) for x in row] for row in mu_pair]
    for i in range(size):
        if mu[i] < 0:
            raise DomainError('chung_erdos_bound', f"negative measure at index {i}")
        if pair[i][i] != mu[i]:
            raise DomainError('chung_erdos_bound', f"diagonal entry {i} differs from its measure")
        for j in range(i + 1, size):
            if pair[i][j] != pair[j][i]:
                raise DomainError('chung_erdos_bound', f"pair matrix not symmetric at ({i}, {j})")
            if pair[i][j] < 0:
                raise DomainError('chung_erdos_bound', f"negative overlap at ({i}, {j})")
    total = sum(mu, Fraction(0))
    if total == 0:
        raise DomainError('chung_erdos_bound', "total measure is zero")
    return total * total / sum((x for row in pair for x in row), Fraction(0))


def _check_small_window(psi: Callable[[int], Fraction], X: int, Y: int, operation: str) -> None:
    if X < 1 or Y < X:
        raise DomainError(operation, f"window [{X}, {Y}] is empty or starts below 1")
    for d in range(X, Y + 1):
        if not 0 <= psi(d) <= Fraction(1, 2):
            raise DomainError(operation, f"Psi({d}) = {psi(d)} outside [0, 1/2]")


def window_pair_sum(Psi: PsiLike, X: int, Y: int, m: int) -> Fraction:
    """
    Sum of Leb(A'_{1,m}(k, Psi(k)) and A'_{1,m}(l, Psi(l))) over X <= k < l <= Y

    Args:
        Psi: Radii in [0, 1/2] on the window
        X, Y: Window bounds
        m: Number of linear forms

    Returns:
        Exact sum
    """
    psi = as_psi(Psi)
    _check_small_window(psi, X, Y, 'window_pair_sum')
    support = [d for d in range(X, Y + 1) if psi(d) > 0]
    total = Fraction(0)
    for i, k in enumerate(support):
        for l in support[i + 1:]:
            total += coprime_intersection_1d(k, l, psi(k), psi(l)) ** m
    return total


@dataclass(frozen=True)
class WindowResult:
    found: bool
    status: str
    X: int
    Y: Optional[int]
    m: int
    partial_sum: Fraction
    lower: Fraction
    upper: Fraction


def window_term(d: int, Psi_d: Fraction, m: int) -> Fraction:
    return (Fraction(totient(d)) * Fraction(Psi_d) / d) ** m


def find_window(Psi_provider: PsiLike, m: int, X: int, Y_max: int) -> WindowResult:
    """
    Smallest Y with (1/2)^(m-1) < sum_{X <= d <= Y} (phi(d)Psi(d)/d)^m < (1/2)^(m-2)

    Partial sums are nondecreasing, so the first sum above the lower end either
    lands inside the interval or has jumped over it.

    Args:
        Psi_provider: Radius table or function of d
        m: Number of linear forms
        X: Window start
        Y_max: Last admissible Y

    Returns:
        WindowResult with status found, overshoot or exhausted
    """
    m = int(m)
    if m < 1:
        raise DomainError('find_window', f"m must be >= 1, got {m}")
    psi = as_psi(Psi_provider)
    lower = Fraction(1, 2) ** (m - 1)
    upper = Fraction(1, 2) ** (m - 2)
    total = Fraction(0)
    for Y in range(X, Y_max + 1):
        total += window_term(Y, psi(Y), m)
        if total > lower:
            if total < upper:
                return WindowResult(True, FOUND, X, Y, m, total, lower, upper)
            logger.info(f"window from X={X} overshoots at Y={Y} with partial sum {total}")
            return WindowResult(False, OVERSHOOT, X, Y, m, total, lower, upper)
    return WindowResult(False, EXHAUSTED, X, None, m, total, lower, upper)


def lower_bound_measure(d: int, eps: Fraction, m: int) -> Fraction:
    """
    (phi(d) eps / d)^m, a lower bound for Leb(A'_{n,m}(dq, eps))

    Args:
        d: Scale
        eps: Radius at most d / (2 phi(d))
        m: Number of linear forms

    Returns:
        The bound
    """
    eps = Fraction(eps)
    if d < 1 or m < 1:
        raise DomainError('lower_bound_measure', f"d and m must be positive, got ({d}, {m})")
    if eps < 0 or eps > small_psi_limit(d):
        raise DomainError('lower_bound_measure', f"eps = {eps} outside [0, {small_psi_limit(d)}]")
    return window_term(d, eps, m)


def upper_bound_measure(d: int, eps: Fraction, m: int) -> Fraction:
    """(2 phi(d) eps / d)^m, valid for every eps"""
    return (2 * Fraction(totient(d)) * Fraction(eps) / d) ** m


def khintchine_bound(eps: Fraction, m: int) -> Fraction:
    """(2 eps)^m, the measure of the plain set when eps <= 1/2 and an upper bound always"""
    return (2 * Fraction(eps)) ** m


def large_psi_floor(d: int, eps: Fraction, m: int) -> Fraction:
    """
    Floor 2^-m for Leb(A'_{1,m}(d, eps)) in the regime eps > d / (2 phi(d))

    Args:
        d: Scale
        eps: Radius above d / (2 phi(d))
        m: Number of linear forms

    Returns:
        Fraction(1, 2**m)
    """
    if Fraction(eps) <= small_psi_limit(d):
        raise DomainError('large_psi_floor', f"eps = {eps} is not above {small_psi_limit(d)}")
    return Fraction(1, 2 ** m)


@dataclass(frozen=True)
class ReduxBound:
    d: int
    m: int
    total: Fraction
    chung_erdos: Fraction
    closed_form: Fraction


def redux_union_bound(d: int, eps_values: Sequence[Fraction], m: int) -> ReduxBound:
    """
    Lower bounds for the union of A'(dq', eps_i) over distinct primitive directions q'

    Distinct directions give independent sets, so the pair matrix has L_i on the
    diagonal and L_i L_j off it. The closed form S_low / (S_up + 1) uses only the
    one-dimensional size estimates.

    Args:
        d: Common scale
        eps_values: One radius per direction, each at most d / (2 phi(d))
        m: Number of linear forms

    Returns:
        ReduxBound with the exact Chung-Erdos value and the closed form
    """
    eps_values = [Fraction(e) for e in eps_values]
    limit = small_psi_limit(d)
    if not eps_values or any(e < 0 or e > limit for e in eps_values):
        raise DomainError('redux_union_bound', f"radii must lie in [0, {limit}]")
    L = [approx_set_1d(d, e, ApproxMode.COPRIME).measure() ** m for e in eps_values]
    S = sum(L, Fraction(0))
    if S == 0:
        return ReduxBound(d, m, S, Fraction(0), Fraction(0))
    squares = sum((x * x for x in L), Fraction(0))
    exact = S * S / (S * S - squares + S)
    low = sum((lower_bound_measure(d, e, m) for e in eps_values), Fraction(0))
    up = sum((upper_bound_measure(d, e, m) for e in eps_values), Fraction(0))
    return ReduxBound(d, m, S, exact, low / (up + 1))


def redux_directions(n: int, count: int) -> List[IntVec]:
    """First `count` primitive directions of Z^n_{>=0} in lexicographic order"""
    out: List[IntVec] = []
    H = 1
    while len(out) < count:
        out = list(primitive_vectors(n, H))[:count]
        H += 1
    return out


def _double_prime_set(d: int, eps: Fraction):
    return approx_set_1d(d, eps, ApproxMode.FILTERED, select_separated_numerators(d))


def double_prime_intersection(k: int, l: int, eps_k: Fraction, eps_l: Fraction, m: int) -> Fraction:
    """Leb(A''_{1,m}(k, eps_k) and A''_{1,m}(l, eps_l)) with the greedy numerator filters"""
    return _double_prime_set(k, eps_k).intersect(_double_prime_set(l, eps_l)).measure() ** m


def double_prime_measure(d: int, eps: Fraction, m: int) -> Fraction:
    return _double_prime_set(d, eps).measure() ** m


def double_prime_pair_sum(Psi: PsiLike, X: int, Y: int, m: int) -> Fraction:
    """Sum of Leb(A''(k, Psi(k)) and A''(l, Psi(l))) over X <= k < l <= Y"""
    psi = as_psi(Psi)
    _check_small_window(psi, X, Y, 'double_prime_pair_sum')
    support = [d for d in range(X, Y + 1) if psi(d) > 0]
    total = Fraction(0)
    for i, k in enumerate(support):
        for l in support[i + 1:]:
            total += double_prime_intersection(k, l, psi(k), psi(l), m)
    return total


@dataclass(frozen=True)
class DilationCheck:
    lhs: Fraction
    rhs: Fraction
    sigma: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def dilation_ratio_bound(k: int, l: int, psi_k: Fraction, psi_l: Fraction,
                         Psi_k: Fraction, Psi_l: Fraction, m: int) -> DilationCheck:
    """
    Check Leb(A''(k, psi_k) and A''(l, psi_l)) against its dilated counterpart

    With sigma = max(psi_k / Psi_k, psi_l / Psi_l) the right side is
    sigma^m Leb(A''(k, Psi_k) and A''(l, Psi_l)).

    Args:
        k, l: Distinct scales
        psi_k, psi_l: Radii with 0 <= psi <= Psi
        Psi_k, Psi_l: Positive radii at most d / (2 phi(d)), so the filtered arcs are disjoint
        m: Number of linear forms

    Returns:
        DilationCheck
    """
    values = [Fraction(v) for v in (psi_k, psi_l, Psi_k, Psi_l)]
    psi_k, psi_l, Psi_k, Psi_l = values
    for d, small, big in ((k, psi_k, Psi_k), (l, psi_l, Psi_l)):
        if big <= 0 or big > small_psi_limit(d):
            raise DomainError('dilation_ratio_bound', f"Psi({d}) = {big} outside (0, {small_psi_limit(d)}]")
        if not 0 <= small <= big:
            raise DomainError('dilation_ratio_bound', f"psi({d}) = {small} outside [0, Psi({d})]")
    sigma = max(psi_k / Psi_k, psi_l / Psi_l)
    lhs = double_prime_intersection(k, l, psi_k, psi_l, m)
    rhs = sigma ** m * double_prime_intersection(k, l, Psi_k, Psi_l, m)
    return DilationCheck(lhs=lhs, rhs=rhs, sigma=sigma)


def window_task_bound(Psi: PsiLike, X: int, Y: int, m: int) -> Fraction:
    """
    Chung-Erdos lower bound for the union of A''(d, Psi(d)) over X <= d <= Y

    Args:
        Psi: Radii in [0, 1/2] on the window
        X, Y: Window bounds
        m: Number of linear forms

    Returns:
        The bound, 0 when every set is empty
    """
    psi = as_psi(Psi)
    _check_small_window(psi, X, Y, 'window_task_bound')
    support = [d for d in range(X, Y + 1) if psi(d) > 0]
    mu = [double_prime_measure(d, psi(d), m) for d in support]
    if sum(mu, Fraction(0)) == 0:
        return Fraction(0)
    pair = [[mu[i] if i == j else double_prime_intersection(support[i], support[j],
                                                              psi(support[i]), psi(support[j]), m)
             for j in range(len(support))] for i in range(len(support))]
    return chung_erdos_bound(mu, pair)
