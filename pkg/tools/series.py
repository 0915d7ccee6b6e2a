"""
Approximating functions and the divergence series built from them

A PsiSpec is an immutable description of psi on Z^n_{>=0} \\ {0}. Values are exact
Fractions whenever they are rational; irrational power laws fall back to mpmath
reals. Every series is summed by height |q| so partial sums for all smaller
cutoffs come for free.
"""
import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Callable, ClassVar, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from mpmath import mp, mpf
from scipy.stats import linregress
from sympy import integer_nthroot

from tools.arith import (
    JOINT, DomainError, IntVec, as_direction, phi_m, primitive_vectors, sup_norm, totient, vec_gcd,
    vectors_of_height,
)

logger = logging.getLogger(__name__)

Real = Union[Fraction, mpf]

DIVERGING = 'diverging-trend'
CONVERGING = 'converging-trend'
INCONCLUSIVE = 'inconclusive'

SMALL = 'small'
LARGE = 'large'

# extra bits for the second evaluation that bounds rounding error
GUARD_BITS = 32


def to_mpf(x: Real) -> mpf:
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def is_exact(x: Real) -> bool:
    return isinstance(x, Fraction)


def mul(a: Real, b: Real) -> Real:
    if is_exact(a) and is_exact(b):
        return a * b
    return to_mpf(a) * to_mpf(b)


def less_equal(a: Real, b: Real) -> bool:
    if is_exact(a) and is_exact(b):
        return a <= b
    return to_mpf(a) <= to_mpf(b)


def greater(a: Real, b: Real) -> bool:
    return not less_equal(a, b)


def rational_power(base: Fraction, exponent: Fraction) -> Real:
    """
    base ** exponent, exact when the result is rational

    Args:
        base: Positive rational
        exponent: Rational exponent

    Returns:
        Fraction if both numerator and denominator of base^|a| are perfect b-th
        powers (exponent = a/b), an mpmath real otherwise
    """
    base, exponent = Fraction(base), Fraction(exponent)
    if base <= 0:
        raise DomainError('rational_power', f"base must be positive, got {base}")
    a, b = exponent.numerator, exponent.denominator
    raised = base ** abs(a)
    num_root, num_exact = integer_nthroot(raised.numerator, b)
    den_root, den_exact = integer_nthroot(raised.denominator, b)
    if num_exact and den_exact:
        root = Fraction(int(num_root), int(den_root))
        return root if a >= 0 else 1 / root
    return to_mpf(base) ** (mpf(a) / b)


def _frac_text(x: Fraction) -> str:
    return str(Fraction(x))


class PsiSpec:
    """Base of every approximating-function variant"""
    variant: ClassVar[str] = ''

    def dimension(self) -> Optional[int]:
        """Fixed n, or None when psi is defined for every n"""
        return None

    def support_height(self) -> Optional[int]:
        """Largest |q| with psi(q) != 0, None when the support is unbounded"""
        return None

    def evaluate(self, q: IntVec) -> Real:
        raise NotImplementedError

    def to_config(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(PsiSpec):
    """psi(q) = c |q|^-tau"""
    c: Fraction
    tau: Fraction
    variant: ClassVar[str] = 'power_law'

    def __post_init__(self):
        object.__setattr__(self, 'c', Fraction(self.c))
        object.__setattr__(self, 'tau', Fraction(self.tau))
        if self.c <= 0:
            raise DomainError('PowerLaw', f"c must be positive, got {self.c}")

    def evaluate(self, q: IntVec) -> Real:
        return mul(self.c, rational_power(Fraction(sup_norm(q)), -self.tau))

    def to_config(self) -> Dict[str, Any]:
        return {'variant': self.variant, 'c': _frac_text(self.c), 'tau': _frac_text(self.tau)}


@dataclass(frozen=True)
class RadialTable(PsiSpec):
    """psi(q) = values[|q|], 0 off the table"""
    values: Tuple[Tuple[int, Fraction], ...] = ()
    variant: ClassVar[str] = 'radial_table'

    def __post_init__(self):
        items = self.values.items() if isinstance(self.values, Mapping) else self.values
        table = tuple(sorted((int(h), Fraction(v)) for h, v in items))
        for h, v in table:
            if h < 1 or v < 0:
                raise DomainError('RadialTable', f"bad entry |q| = {h} -> {v}")
        object.__setattr__(self, 'values', table)

    @property
    def table(self) -> Dict[int, Fraction]:
        return dict(self.values)

    def support_height(self) -> Optional[int]:
        nonzero = [h for h, v in self.values if v]
        return max(nonzero) if nonzero else 0

    def evaluate(self, q: IntVec) -> Real:
        return self.table.get(sup_norm(q), Fraction(0))

    def to_config(self) -> Dict[str, Any]:
        return {'variant': self.variant,
                'values': {str(h): _frac_text(v) for h, v in self.values}}


@dataclass(frozen=True)
class ExplicitTable(PsiSpec):
    """psi given vector by vector, 0 off the table"""
    values: Tuple[Tuple[IntVec, Fraction], ...] = ()
    n: Optional[int] = None
    variant: ClassVar[str] = 'explicit_table'

    def __post_init__(self):
        items = self.values.items() if isinstance(self.values, Mapping) else self.values
        table = tuple(sorted((as_direction(q, 'ExplicitTable'), Fraction(v)) for q, v in items))
        lengths = {len(q) for q, _ in table}
        if self.n is not None:
            lengths.add(int(self.n))
        if len(lengths) > 1:
            raise DomainError('ExplicitTable', f"keys of mixed dimension {sorted(lengths)}")
        if any(v < 0 for _, v in table):
            raise DomainError('ExplicitTable', "values must be nonnegative")
        object.__setattr__(self, 'values', table)
        object.__setattr__(self, 'n', lengths.pop() if lengths else None)

    @property
    def table(self) -> Dict[IntVec, Fraction]:
        return dict(self.values)

    def dimension(self) -> Optional[int]:
        return self.n

    def support_height(self) -> Optional[int]:
        nonzero = [sup_norm(q) for q, v in self.values if v]
        return max(nonzero) if nonzero else 0

    def evaluate(self, q: IntVec) -> Real:
        return self.table.get(tuple(q), Fraction(0))

    def to_config(self) -> Dict[str, Any]:
        config = {'variant': self.variant,
                  'values': {','.join(str(c) for c in q): _frac_text(v) for q, v in self.values}}
        if self.n is not None:
            config['n'] = self.n
        return config


@dataclass(frozen=True)
class DSCounterexample(PsiSpec):
    """psi(q) = eta q / N on the divisors of N (n = 1), 0 elsewhere"""
    N: int
    eta: Fraction
    variant: ClassVar[str] = 'ds_counterexample'

    def __post_init__(self):
        object.__setattr__(self, 'eta', Fraction(self.eta))
        if int(self.N) < 1 or self.eta <= 0:
            raise DomainError('DSCounterexample', f"need N >= 1 and eta > 0, got ({self.N}, {self.eta})")

    def dimension(self) -> Optional[int]:
        return 1

    def support_height(self) -> Optional[int]:
        return self.N

    def evaluate(self, q: IntVec) -> Real:
        value = q[0]
        if value and self.N % value == 0:
            return self.eta * Fraction(value, self.N)
        return Fraction(0)

    def to_config(self) -> Dict[str, Any]:
        return {'variant': self.variant, 'N': self.N, 'eta': _frac_text(self.eta)}


@dataclass(frozen=True)
class CatlinTransform(PsiSpec):
    """psi_bar(q) = max over 1 <= t <= t_max of psi(tq)/t"""
    inner: PsiSpec
    t_max: int
    variant: ClassVar[str] = 'catlin_transform'

    def __post_init__(self):
        if int(self.t_max) < 1:
            raise DomainError('CatlinTransform', f"t_max must be >= 1, got {self.t_max}")

    def dimension(self) -> Optional[int]:
        return self.inner.dimension()

    def support_height(self) -> Optional[int]:
        return self.inner.support_height()

    def evaluate(self, q: IntVec) -> Real:
        return catlin_bar(self.inner, q, self.t_max).value

    def to_config(self) -> Dict[str, Any]:
        return {'variant': self.variant, 't_max': self.t_max, 'inner': self.inner.to_config()}


@dataclass(frozen=True)
class ThresholdPart(PsiSpec):
    """
    One half of the split psi = psi_small + psi_large

    At q = d q' (d = gcd(q)) the small part keeps psi(q) when psi(q) <= d / (2 phi(d))
    and the large part keeps it otherwise.
    """
    inner: PsiSpec
    part: str
    variant: ClassVar[str] = 'threshold_part'

    def __post_init__(self):
        if self.part not in (SMALL, LARGE):
            raise DomainError('ThresholdPart', f"part must be 'small' or 'large', got {self.part!r}")

    def dimension(self) -> Optional[int]:
        return self.inner.dimension()

    def support_height(self) -> Optional[int]:
        return self.inner.support_height()

    def evaluate(self, q: IntVec) -> Real:
        value = self.inner.evaluate(q)
        d = vec_gcd(q)
        small = less_equal(value, Fraction(d, 2 * totient(d)))
        if small == (self.part == SMALL):
            return value
        return Fraction(0)

    def to_config(self) -> Dict[str, Any]:
        return {'variant': self.variant, 'part': self.part, 'inner': self.inner.to_config()}


ZERO_PSI = RadialTable(())


def eval_psi(spec: PsiSpec, q: IntVec) -> Real:
    """
    Evaluate psi at a nonzero vector of the nonnegative orthant

    Args:
        spec: Approximating function
        q: Argument

    Returns:
        psi(q) as a Fraction, or an mpmath real for irrational power laws
    """
    vec = as_direction(q, 'eval_psi')
    n = spec.dimension()
    if n is not None and len(vec) != n:
        raise DomainError('eval_psi', f"{spec.variant} is defined on Z^{n}, got {vec}")
    return spec.evaluate(vec)


def threshold_split(spec: PsiSpec) -> Tuple[ThresholdPart, ThresholdPart]:
    return ThresholdPart(spec, SMALL), ThresholdPart(spec, LARGE)


@dataclass(frozen=True)
class CatlinValue:
    value: Real
    witness: int
    exact: bool


def _sup_is_certified(spec: PsiSpec, q: IntVec, t_max: int) -> bool:
    support = spec.support_height()
    return support is not None and t_max * sup_norm(q) >= support


def catlin_bar(spec: PsiSpec, q: IntVec, t_max: int) -> CatlinValue:
    """
    psi_bar(q) = sup over integers t >= 1 of psi(tq)/t, truncated at t_max

    Power laws with tau >= -1 attain the sup at t = 1 since t^(-1-tau) does not
    increase; finitely supported specs are exact once t_max |q| covers the support.

    Args:
        spec: Approximating function
        q: Argument
        t_max: Truncation of the sup

    Returns:
        CatlinValue with the smallest witness t attaining the truncated sup
    """
    vec = as_direction(q, 'catlin_bar')
    if int(t_max) < 1:
        raise DomainError('catlin_bar', f"t_max must be >= 1, got {t_max}")
    if isinstance(spec, PowerLaw) and spec.tau >= -1:
        return CatlinValue(eval_psi(spec, vec), 1, True)
    best: Real = Fraction(-1)
    witness = 1
    for t in range(1, int(t_max) + 1):
        value = mul(eval_psi(spec, tuple(t * c for c in vec)), Fraction(1, t))
        if greater(value, best):
            best, witness = value, t
    return CatlinValue(best, witness, _sup_is_certified(spec, vec, int(t_max)))


@dataclass(frozen=True)
class SeriesReport:
    name: str
    cutoffs: Dict[str, Any]
    partial_sum: Real
    abs_error: float
    exact: bool
    term_count: int
    last_block_sum: Real
    verdict_hint: str
    trace: Tuple[Tuple[int, float], ...] = ()
    sup_exact: Optional[bool] = None


@dataclass(frozen=True)
class CapitalPsi:
    d: int
    H: int
    m: int
    value: Real
    power_sum: Real
    exact: bool
    abs_error: float
    tail_bound: Optional[float] = None


def verdict_hint(trace: Tuple[Tuple[int, float], ...]) -> str:
    """
    Heuristic trend of partial sums against log cutoff

    Fits a least-squares line through the upper half of the trace (cutoffs at least
    sqrt of the largest) and compares the growth per doubling with the final sum.
    """
    if not trace or trace[-1][1] == 0:
        return CONVERGING
    top = trace[-1][0]
    points = [(c, s) for c, s in trace if c * c >= top]
    if len(points) < 3:
        return INCONCLUSIVE
    fit = linregress([math.log(c) for c, _ in points], [s for _, s in points])
    growth = fit.slope * math.log(2) / abs(trace[-1][1])
    if growth > 0.05:
        return DIVERGING
    if growth < 0.005:
        return CONVERGING
    return INCONCLUSIVE


def _checkpoints(top: int) -> List[int]:
    marks = []
    c = 1
    while c < top:
        marks.append(c)
        c *= 2
    marks.append(top)
    return marks


def _collect(terms: Callable[[], Iterable[Tuple[int, Real]]], bits: int):
    exact_blocks: Dict[int, Fraction] = {}
    approx_blocks: Dict[int, mpf] = {}
    count = 0
    with mp.workprec(bits):
        for h, term in terms():
            count += 1
            if is_exact(term):
                exact_blocks[h] = exact_blocks.get(h, Fraction(0)) + term
            else:
                approx_blocks[h] = approx_blocks.get(h, mpf(0)) + term
    return exact_blocks, approx_blocks, count


def _sum_blocks(exact_blocks, approx_blocks, heights, bits: int) -> Real:
    exact = sum((exact_blocks.get(h, Fraction(0)) for h in heights), Fraction(0))
    if not approx_blocks:
        return exact
    with mp.workprec(bits):
        approx = mpf(0)
        for h in heights:
            if h in approx_blocks:
                approx += approx_blocks[h]
        return to_mpf(exact) + approx


def run_series(name: str, cutoffs: Dict[str, Any], terms: Callable[[], Iterable[Tuple[int, Real]]],
               top: int, bits: int = 128, sup_exact: Optional[bool] = None) -> SeriesReport:
    """
    Sum a stream of (height, term) pairs into a SeriesReport

    Irrational streams are summed twice, at bits and bits + GUARD_BITS; the
    difference plus a per-term rounding allowance is reported as abs_error.

    Args:
        name: Series name
        cutoffs: Cutoff parameters echoed in the report
        terms: Zero-argument callable producing the stream
        top: Largest height of the series, used for trace and last block
        bits: Working precision for irrational terms
        sup_exact: Exactness of truncated sups, for Catlin-type series

    Returns:
        SeriesReport
    """
    exact_blocks, approx_blocks, count = _collect(terms, bits)
    heights = sorted(set(exact_blocks) | set(approx_blocks))
    total = _sum_blocks(exact_blocks, approx_blocks, heights, bits)
    last_block = _sum_blocks(exact_blocks, approx_blocks, [h for h in heights if h > top // 2], bits)

    abs_error = 0.0
    if approx_blocks:
        hi_exact, hi_approx, _ = _collect(terms, bits + GUARD_BITS)
        hi_total = _sum_blocks(hi_exact, hi_approx, heights, bits + GUARD_BITS)
        with mp.workprec(bits + GUARD_BITS):
            bound = abs(to_mpf(total) - to_mpf(hi_total)) + count * abs(to_mpf(total)) * mpf(2) ** (-bits)
        abs_error = float(bound)

    trace = tuple(
        (mark, float(_sum_blocks(exact_blocks, approx_blocks, [h for h in heights if h <= mark], bits)))
        for mark in _checkpoints(top)
    )

    return SeriesReport(
        name=name,
        cutoffs=cutoffs,
        partial_sum=total,
        abs_error=abs_error,
        exact=not approx_blocks,
        term_count=count,
        last_block_sum=last_block,
        verdict_hint=verdict_hint(trace),
        trace=trace,
        sup_exact=sup_exact,
    )


def _orthant(n: int, Q: int) -> Iterator[Tuple[int, IntVec]]:
    for h in range(1, Q + 1):
        for q in vectors_of_height(n, h):
            yield h, q


def _spec_dimension(spec: PsiSpec, n: Optional[int], operation: str) -> int:
    fixed = spec.dimension()
    if n is None:
        if fixed is None:
            raise DomainError(operation, f"{spec.variant} needs an explicit n")
        return fixed
    if fixed is not None and fixed != n:
        raise DomainError(operation, f"{spec.variant} is defined on Z^{fixed}, not Z^{n}")
    return int(n)


def _require_cutoff(value: int, name: str, operation: str) -> int:
    value = int(value)
    if value < 1:
        raise DomainError(operation, f"{name} must be >= 1, got {value}")
    return value


def _ds_term(spec: PsiSpec, q: IntVec, m: int) -> Real:
    g = vec_gcd(q)
    return mul(Fraction(totient(g), g), spec.evaluate(q)) ** m


def ds_sum(spec: PsiSpec, m: int, Q: int, n: Optional[int] = None, bits: int = 128) -> SeriesReport:
    """
    Partial Duffin-Schaeffer sum over 0 < |q| <= Q in the nonnegative orthant

    Args:
        spec: Approximating function
        m: Number of linear forms
        Q: Height cutoff
        n: Dimension, taken from psi when it fixes one

    Returns:
        SeriesReport of sum (phi(g) psi(q) / g)^m with g = gcd(q)
    """
    n = _spec_dimension(spec, n, 'ds_sum')
    Q = _require_cutoff(Q, 'Q', 'ds_sum')
    terms = lambda: ((h, _ds_term(spec, q, m)) for h, q in _orthant(n, Q))
    return run_series('ds', {'n': n, 'm': m, 'Q': Q}, terms, Q, bits)


def ds_sum_factored(spec: PsiSpec, m: int, H_prim: int, D: int, n: Optional[int] = None,
                    bits: int = 128) -> SeriesReport:
    """Sum over primitive |q'| <= H_prim and 1 <= d <= D of (phi(d) psi(d q') / d)^m"""
    n = _spec_dimension(spec, n, 'ds_sum_factored')
    H_prim = _require_cutoff(H_prim, 'H_prim', 'ds_sum_factored')
    D = _require_cutoff(D, 'D', 'ds_sum_factored')

    def terms():
        for direction in primitive_vectors(n, H_prim):
            for d in range(1, D + 1):
                q = tuple(d * c for c in direction)
                yield sup_norm(q), mul(Fraction(totient(d), d), spec.evaluate(q)) ** m

    return run_series('ds-factored', {'n': n, 'm': m, 'H_prim': H_prim, 'D': D}, terms, H_prim * D, bits)


def _power_law_tail(spec: PsiSpec, d: int, H: int, n: int, m: int) -> Optional[float]:
    if spec.support_height() is not None:
        return 0.0 if d * H >= spec.support_height() else None
    if not isinstance(spec, PowerLaw):
        return None
    s = spec.tau * m
    if s <= n:
        return None
    # sum over |q'| > H of (c (d|q'|)^-tau)^m, with at most n 2^(n-1) h^(n-1) vectors of height h
    bound = (float(spec.c) ** m) * d ** (-float(s)) * n * 2 ** (n - 1) * H ** (n - float(s)) / float(s - n)
    return bound


def capital_psi(spec: PsiSpec, d: int, H: int, m: int = 1, n: Optional[int] = None,
                bits: int = 128) -> CapitalPsi:
    """
    Psi(d) = (sum over primitive q' of psi(d q')^m)^(1/m), truncated at |q'| <= H

    Args:
        spec: Approximating function
        d: Scale
        H: Height cutoff for primitive directions
        m: Number of linear forms
        n: Dimension, taken from psi when it fixes one

    Returns:
        CapitalPsi; exact when the truncated power sum is the m-th power of a rational,
        with a tail bound for power laws and finitely supported specs
    """
    n = _spec_dimension(spec, n, 'capital_psi')
    d = _require_cutoff(d, 'd', 'capital_psi')
    H = _require_cutoff(H, 'H', 'capital_psi')
    m = _require_cutoff(m, 'm', 'capital_psi')

    def power_sum(precision: int) -> Real:
        with mp.workprec(precision):
            total: Real = Fraction(0)
            for direction in primitive_vectors(n, H):
                value = spec.evaluate(tuple(d * c for c in direction)) ** m
                total = total + value if is_exact(total) and is_exact(value) else to_mpf(total) + to_mpf(value)
            return total

    total = power_sum(bits)
    tail = _power_law_tail(spec, d, H, n, m)
    if is_exact(total):
        if total == 0:
            return CapitalPsi(d, H, m, Fraction(0), total, True, 0.0, tail)
        root = rational_power(total, Fraction(1, m))
        if is_exact(root):
            return CapitalPsi(d, H, m, root, total, True, 0.0, tail)
    with mp.workprec(bits):
        value = to_mpf(total) ** (mpf(1) / m)
    hi_total = power_sum(bits + GUARD_BITS)
    with mp.workprec(bits + GUARD_BITS):
        hi_value = to_mpf(hi_total) ** (mpf(1) / m)
        error = abs(to_mpf(value) - hi_value) + abs(hi_value) * mpf(2) ** (-bits)
    return CapitalPsi(d, H, m, value, total, False, float(error), tail)


def catlin_sum(spec: PsiSpec, m: int, Q: int, t_max: int, n: Optional[int] = None,
               mode: str = JOINT, bits: int = 128) -> SeriesReport:
    """
    Partial Catlin sum of Phi_m(q) (psi_bar(q) / |q|)^m over 0 < |q| <= Q

    Args:
        spec: Approximating function
        m: Number of linear forms
        Q: Height cutoff
        t_max: Truncation of the sup in psi_bar
        n: Dimension, taken from psi when it fixes one
        mode: Coprimality mode for Phi_m

    Returns:
        SeriesReport with sup_exact set when every truncated sup is certified
    """
    n = _spec_dimension(spec, n, 'catlin_sum')
    Q = _require_cutoff(Q, 'Q', 'catlin_sum')
    certified: List[bool] = []

    def terms():
        certified.clear()
        for h, q in _orthant(n, Q):
            bar = catlin_bar(spec, q, t_max)
            certified.append(bar.exact)
            yield h, mul(Fraction(phi_m(q, m, mode)), mul(bar.value, Fraction(1, h)) ** m)

    report = run_series('catlin', {'n': n, 'm': m, 'Q': Q, 't_max': t_max, 'mode': mode}, terms, Q, bits)
    return _with_sup_flag(report, all(certified))


def _with_sup_flag(report: SeriesReport, flag: bool) -> SeriesReport:
    return replace(report, sup_exact=flag)


def khintchine_sum(spec_radial: PsiSpec, m: int, Q: int, bits: int = 128) -> SeriesReport:
    """Sum of psi(q)^m for 1 <= q <= Q"""
    _spec_dimension(spec_radial, 1, 'khintchine_sum')
    Q = _require_cutoff(Q, 'Q', 'khintchine_sum')
    terms = lambda: ((q, spec_radial.evaluate((q,)) ** m) for q in range(1, Q + 1))
    return run_series('khintchine', {'m': m, 'Q': Q}, terms, Q, bits)


def kg_sum(spec_radial: PsiSpec, n: int, m: int, Q: int, bits: int = 128) -> SeriesReport:
    """Sum of q^(n-1) psi(q)^m for 1 <= q <= Q"""
    _spec_dimension(spec_radial, 1, 'kg_sum')
    Q = _require_cutoff(Q, 'Q', 'kg_sum')
    terms = lambda: ((q, mul(Fraction(q ** (n - 1)), spec_radial.evaluate((q,)) ** m)) for q in range(1, Q + 1))
    return run_series('kg', {'n': n, 'm': m, 'Q': Q}, terms, Q, bits)


def bv_sum(spec: PsiSpec, m: int, Q: int, n: Optional[int] = None, bits: int = 128) -> SeriesReport:
    """Sum of psi(q)^m over 0 < |q| <= Q in the nonnegative orthant"""
    n = _spec_dimension(spec, n, 'bv_sum')
    Q = _require_cutoff(Q, 'Q', 'bv_sum')
    terms = lambda: ((h, spec.evaluate(q) ** m) for h, q in _orthant(n, Q))
    return run_series('bv', {'n': n, 'm': m, 'Q': Q}, terms, Q, bits)


def _hausdorff_factor(value: Real, h: int, s: Fraction) -> Real:
    if is_exact(value):
        if value == 0:
            return Fraction(0)
        return rational_power(value / h, s)
    return (to_mpf(value) / h) ** to_mpf(s)


def hausdorff_ds_sum(spec: PsiSpec, n: int, m: int, s: Fraction, Q: int, bits: int = 128) -> SeriesReport:
    """
    Sum of (phi(g) |q| / g)^m (psi(q) / |q|)^s, the dimension function being r^s

    Args:
        spec: Approximating function
        n: Dimension
        m: Number of linear forms
        s: Positive rational exponent
        Q: Height cutoff

    Returns:
        SeriesReport; s = m reproduces ds_sum term by term
    """
    n = _spec_dimension(spec, n, 'hausdorff_ds_sum')
    Q = _require_cutoff(Q, 'Q', 'hausdorff_ds_sum')
    s = Fraction(s)
    if s <= 0:
        raise DomainError('hausdorff_ds_sum', f"s must be positive, got {s}")

    def terms():
        for h, q in _orthant(n, Q):
            g = vec_gcd(q)
            weight = Fraction(totient(g) * h, g) ** m
            yield h, mul(weight, _hausdorff_factor(spec.evaluate(q), h, s))

    return run_series('hausdorff-ds', {'n': n, 'm': m, 's': s, 'Q': Q}, terms, Q, bits)


def hausdorff_catlin_sum(spec: PsiSpec, n: int, m: int, s: Fraction, Q: int, t_max: int,
                         mode: str = JOINT, bits: int = 128) -> SeriesReport:
    """Sum of Phi_m(q) (psi_bar(q) / |q|)^s, r^s being increasing so the sup moves inside"""
    n = _spec_dimension(spec, n, 'hausdorff_catlin_sum')
    Q = _require_cutoff(Q, 'Q', 'hausdorff_catlin_sum')
    s = Fraction(s)
    if s <= 0:
        raise DomainError('hausdorff_catlin_sum', f"s must be positive, got {s}")
    certified: List[bool] = []

    def terms():
        certified.clear()
        for h, q in _orthant(n, Q):
            bar = catlin_bar(spec, q, t_max)
            certified.append(bar.exact)
            yield h, mul(Fraction(phi_m(q, m, mode)), _hausdorff_factor(bar.value, h, s))

    report = run_series('hausdorff-catlin', {'n': n, 'm': m, 's': s, 'Q': Q, 't_max': t_max, 'mode': mode},
                        terms, Q, bits)
    return _with_sup_flag(report, all(certified))


def catlin_equivalent_ds_sum(spec: PsiSpec, m: int, Q: int, t_max: int, n: Optional[int] = None,
                             bits: int = 128) -> SeriesReport:
    """Duffin-Schaeffer sum of psi_bar; for m = 1 it converges exactly when the Catlin sum does"""
    bar = CatlinTransform(spec, t_max)
    n = _spec_dimension(spec, n, 'catlin_equivalent_ds_sum')
    Q = _require_cutoff(Q, 'Q', 'catlin_equivalent_ds_sum')
    certified = all(catlin_bar(spec, q, t_max).exact for _, q in _orthant(n, Q)) \
        if not (isinstance(spec, PowerLaw) and spec.tau >= -1) else True
    terms = lambda: ((h, _ds_term(bar, q, m)) for h, q in _orthant(n, Q))
    report = run_series('catlin-ds', {'n': n, 'm': m, 'Q': Q, 't_max': t_max}, terms, Q, bits)
    return _with_sup_flag(report, certified)


@dataclass(frozen=True)
class SeriesParams:
    n: Optional[int] = None
    m: int = 1
    Q: int = 1
    H: int = 1
    D: int = 1
    t_max: int = 1
    s: Fraction = Fraction(1)
    mode: str = JOINT
    bits: int = 128


SERIES_EVALUATORS: Dict[str, Callable[[PsiSpec, SeriesParams], SeriesReport]] = {
    'ds': lambda spec, p: ds_sum(spec, p.m, p.Q, p.n, p.bits),
    'ds-factored': lambda spec, p: ds_sum_factored(spec, p.m, p.H, p.D, p.n, p.bits),
    'catlin': lambda spec, p: catlin_sum(spec, p.m, p.Q, p.t_max, p.n, p.mode, p.bits),
    'khintchine': lambda spec, p: khintchine_sum(spec, p.m, p.Q, p.bits),
    'kg': lambda spec, p: kg_sum(spec, p.n or 1, p.m, p.Q, p.bits),
    'bv': lambda spec, p: bv_sum(spec, p.m, p.Q, p.n, p.bits),
    'hausdorff-ds': lambda spec, p: hausdorff_ds_sum(spec, p.n, p.m, p.s, p.Q, p.bits),
    'hausdorff-catlin': lambda spec, p: hausdorff_catlin_sum(spec, p.n, p.m, p.s, p.Q, p.t_max, p.mode, p.bits),
    'catlin-ds': lambda spec, p: catlin_equivalent_ds_sum(spec, p.m, p.Q, p.t_max, p.n, p.bits),
}


def evaluate_series(name: str, spec: PsiSpec, params: SeriesParams) -> SeriesReport:
    """Run the series selected by name"""
    try:
        evaluator = SERIES_EVALUATORS[name]
    except KeyError:
        raise DomainError('series', f"unknown series {name!r}; choose from {sorted(SERIES_EVALUATORS)}")
    logger.info(f"Evaluating {name} series for {spec.variant}")
    return evaluator(spec, params)
