"""
Empirical side of the zero-one dichotomy

Sample points are dyadic rationals with 128 fractional bits. Sample i of a run is
drawn from a Philox stream keyed by (seed, i), so every sample can be regenerated
on its own and the counts do not depend on how indices are split across threads.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from tools.arith import DomainError, IntVec, as_direction, divisor_sum, divisors, orthant_vectors, sup_norm, vec_gcd
from tools.measures import measure_A
from tools.series import DSCounterexample, PsiSpec, catlin_bar, eval_psi, is_exact, less_equal, to_mpf
from tools.torus_sets import ApproxMode, ApproxSet, ArcUnion, approx_set_1d, candidate_numerators, union_all

logger = logging.getLogger(__name__)

FRACTION_BITS = 128
DENOMINATOR = 1 << FRACTION_BITS
BLOCK_SIZE = 256
MAX_SEED = 1 << 64

Matrix = Tuple[Tuple[Fraction, ...], ...]


def _check_seed(seed: Optional[int], operation: str) -> int:
    if seed is None:
        raise DomainError(operation, "randomized operations need an explicit seed")
    seed = int(seed)
    if not 0 <= seed < MAX_SEED:
        raise DomainError(operation, f"seed must lie in [0, 2^64), got {seed}")
    return seed


def sample_numerators(seed: int, index: int, n: int, m: int) -> Tuple[Tuple[int, ...], ...]:
    """
    Numerators a_ij of the sample point x_ij = a_ij / 2^128

    Args:
        seed: Run seed in [0, 2^64)
        index: Sample index in [0, 2^64)
        n, m: Matrix shape

    Returns:
        n x m tuple of integers in [0, 2^128)
    """
    bit_generator = np.random.Philox(key=(int(seed) << 64) | int(index))
    words = [int(w) for w in bit_generator.random_raw(2 * n * m)]
    flat = [(words[2 * k] << 64) | words[2 * k + 1] for k in range(n * m)]
    return tuple(tuple(flat[i * m:(i + 1) * m]) for i in range(n))


def sample_point(seed: int, index: int, n: int, m: int) -> Matrix:
    """The sample point x in [0, 1)^(n x m) as exact dyadic rationals"""
    return tuple(tuple(Fraction(a, DENOMINATOR) for a in row)
                 for row in sample_numerators(seed, index, n, m))


@dataclass(frozen=True)
class Solution:
    p: IntVec
    q: IntVec
    residual: Any
    coprime_ok: bool


def _linear_form(q: IntVec, x: Sequence[Sequence[Any]], j: int):
    total = Fraction(0)
    exact = True
    for i, c in enumerate(q):
        if not is_exact(x[i][j]):
            exact = False
        if exact:
            total += c * x[i][j]
        else:
            total = to_mpf(total) + c * to_mpf(x[i][j])
    return total


def residual(p: IntVec, q: IntVec, x: Sequence[Sequence[Any]]):
    """|qx - p| in the sup-norm over the m columns"""
    return max(abs(_linear_form(q, x, j) - p[j]) for j in range(len(p)))


def coprime_ok(p: IntVec, q: IntVec) -> bool:
    g = vec_gcd(q)
    return all(math.gcd(pi, g) == 1 for pi in p)


def _candidates(t, radius) -> range:
    if is_exact(t) and is_exact(radius):
        return candidate_numerators(t, radius)
    t, radius = to_mpf(t), to_mpf(radius)
    return range(int(math.floor(t - radius)) + 1, int(math.ceil(t + radius)))


def enumerate_solutions(x: Sequence[Sequence[Any]], spec: PsiSpec, Q: int, coprime: bool) -> List[Solution]:
    """
    Every (p, q) with 0 < |q| <= Q in the nonnegative orthant and |qx - p| < psi(q)

    Candidates p_j run over the whole integer interval around (qx)_j, so the list
    is complete for psi(q) > 1/2 too.

    Args:
        x: n x m matrix of rationals (or mpmath reals)
        spec: Approximating function
        Q: Height cutoff
        coprime: Keep only solutions with gcd(p_i, gcd(q)) = 1 for every i

    Returns:
        Solutions ordered by q lexicographically, then p
    """
    Q = int(Q)
    if Q < 1:
        raise DomainError('enumerate_solutions', f"Q must be >= 1, got {Q}")
    n, m = len(x), len(x[0])
    solutions = []
    for q in orthant_vectors(n, Q):
        psi = eval_psi(spec, q)
        if not psi:
            continue
        forms = [_linear_form(q, x, j) for j in range(m)]
        for p in product(*(_candidates(t, psi) for t in forms)):
            ok = coprime_ok(p, q)
            if coprime and not ok:
                continue
            solutions.append(Solution(p=p, q=q, residual=max(abs(t - pj) for t, pj in zip(forms, p)),
                                      coprime_ok=ok))
    return solutions


@dataclass(frozen=True)
class MCReport:
    samples: int
    hits: int
    fraction: float
    stderr: float
    seed: int
    parameters: Dict[str, Any] = field(default_factory=dict)


def make_report(hits: int, samples: int, seed: int, parameters: Dict[str, Any]) -> MCReport:
    fraction = hits / samples
    return MCReport(samples=samples, hits=hits, fraction=fraction,
                    stderr=math.sqrt(fraction * (1 - fraction) / samples),
                    seed=seed, parameters=parameters)


def _run_blocks(count_block: Callable[[int, int], int], samples: int, workers: int) -> int:
    blocks = [(start, min(start + BLOCK_SIZE, samples)) for start in range(0, samples, BLOCK_SIZE)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return sum(executor.map(lambda b: count_block(*b), blocks))
    return sum(count_block(start, end) for start, end in blocks)


@dataclass(frozen=True)
class _ScaledTarget:
    q: IntVec
    g: int
    # psi(q) = u / v
    u: int
    v: int


def _scaled_targets(spec: PsiSpec, n: int, Q: int, q_min: int) -> List[_ScaledTarget]:
    targets = []
    for q in orthant_vectors(n, Q):
        if sup_norm(q) <= q_min:
            continue
        psi = eval_psi(spec, q)
        if not is_exact(psi):
            raise DomainError('hit_fraction', f"psi({q}) is irrational; hit counting needs rational psi")
        if psi > 0:
            targets.append(_ScaledTarget(q, vec_gcd(q), psi.numerator, psi.denominator))
    return targets


def _count_column(T: int, target: _ScaledTarget, coprime: bool) -> int:
    # p with |T / 2^128 - p| < u / v, in integers: |T v - p 2^128 v| < u 2^128
    scale = DENOMINATOR * target.v
    low = (T * target.v - target.u * DENOMINATOR) // scale + 1
    high = -((-(T * target.v + target.u * DENOMINATOR)) // scale) - 1
    if high < low:
        return 0
    if not coprime or target.g == 1:
        return high - low + 1
    return sum(1 for p in range(low, high + 1) if math.gcd(p, target.g) == 1)


def count_solutions(numerators: Sequence[Sequence[int]], targets: Sequence[_ScaledTarget],
                    coprime: bool, K: int) -> int:
    """Number of solutions for one sample point, stopping once K is reached"""
    m = len(numerators[0])
    total = 0
    for target in targets:
        found = 1
        for j in range(m):
            T = sum(c * numerators[i][j] for i, c in enumerate(target.q))
            found *= _count_column(T, target, coprime)
            if not found:
                break
        total += found
        if total >= K:
            break
    return total


def hit_fraction(spec: PsiSpec, n: int, m: int, Q: int, K: int, samples: int, seed: Optional[int],
                 coprime: bool = True, q_min: int = 0, workers: int = 1) -> MCReport:
    """
    Fraction of sample points with at least K solutions of height in (q_min, Q]

    Args:
        spec: Rational-valued approximating function
        n, m: Matrix shape
        Q: Height cutoff
        K: Required number of solutions
        samples: Number of sample points
        seed: Required seed
        coprime: Count only solutions satisfying the coprimality condition
        q_min: Solutions need |q| > q_min
        workers: Threads; the result is the same for any value

    Returns:
        MCReport
    """
    seed = _check_seed(seed, 'hit_fraction')
    if K < 1 or samples < 1 or Q < 1:
        raise DomainError('hit_fraction', f"K, samples and Q must be >= 1, got ({K}, {samples}, {Q})")
    targets = _scaled_targets(spec, n, Q, q_min)
    logger.info(f"hit_fraction: {len(targets)} heights with psi > 0, {samples} samples")

    def count_block(start: int, end: int) -> int:
        return sum(1 for index in range(start, end)
                   if count_solutions(sample_numerators(seed, index, n, m), targets, coprime, K) >= K)

    hits = _run_blocks(count_block, samples, workers)
    parameters = {'n': n, 'm': m, 'Q': Q, 'K': K, 'coprime': coprime, 'q_min': q_min,
                  'psi': spec.to_config()}
    return make_report(hits, samples, seed, parameters)


def _common_shape(sets: Sequence[ApproxSet], operation: str) -> Tuple[int, int]:
    if not sets:
        raise DomainError(operation, "needs at least one set")
    shapes = {(s.n, s.m) for s in sets}
    if len(shapes) != 1:
        raise DomainError(operation, f"sets have mixed shapes {sorted(shapes)}")
    return shapes.pop()


def _membership_count(sets: Sequence[ApproxSet], seed: int, n: int, m: int,
                      combine: Callable[[Any], bool]) -> Callable[[int, int], int]:
    def count_block(start: int, end: int) -> int:
        hits = 0
        for index in range(start, end):
            x = sample_point(seed, index, n, m)
            if combine(s.contains(x) for s in sets):
                hits += 1
        return hits

    return count_block


def empirical_union_measure(sets: Sequence[ApproxSet], samples: int, seed: Optional[int],
                            workers: int = 1) -> MCReport:
    """
    Monte Carlo estimate of the measure of a union of approximation sets

    Membership is decided exactly for each sample. A member of full measure makes
    the union the whole torus, reported with zero error.

    Args:
        sets: Descriptors sharing (n, m)
        samples: Number of sample points
        seed: Required seed
        workers: Threads

    Returns:
        MCReport
    """
    seed = _check_seed(seed, 'empirical_union_measure')
    n, m = _common_shape(sets, 'empirical_union_measure')
    parameters = {'n': n, 'm': m, 'sets': len(sets)}
    if any(measure_A(s) == 1 for s in sets):
        return make_report(samples, samples, seed, parameters)
    hits = _run_blocks(_membership_count(sets, seed, n, m, any), samples, workers)
    return make_report(hits, samples, seed, parameters)


def empirical_intersection_measure(sets: Sequence[ApproxSet], samples: int, seed: Optional[int],
                                   workers: int = 1) -> MCReport:
    """Monte Carlo estimate of the measure of the common part of approximation sets sharing (n, m)"""
    seed = _check_seed(seed, 'empirical_intersection_measure')
    n, m = _common_shape(sets, 'empirical_intersection_measure')
    hits = _run_blocks(_membership_count(sets, seed, n, m, all), samples, workers)
    return make_report(hits, samples, seed, {'n': n, 'm': m, 'sets': len(sets)})


def lift_solution(p: IntVec, q: IntVec, spec: PsiSpec, x: Sequence[Sequence[Any]],
                  t_max: int) -> Optional[Tuple[IntVec, IntVec]]:
    """
    Multiply a psi_bar solution by the witness t_q to get a psi solution

    Args:
        p: Numerator vector
        q: Direction with |qx - p| < psi_bar(q)
        spec: Approximating function
        x: Matrix
        t_max: Truncation of the sup in psi_bar

    Returns:
        (t p, t q), or None when no witness gives a valid lift
    """
    q = as_direction(q, 'lift_solution')
    p = tuple(int(c) for c in p)
    bar = catlin_bar(spec, q, t_max)
    r = residual(p, q, x)
    if less_equal(bar.value, r):
        raise DomainError('lift_solution', f"residual {r} is not below psi_bar({q}) = {bar.value}")
    t = bar.witness
    lifted_p, lifted_q = tuple(t * c for c in p), tuple(t * c for c in q)
    if less_equal(eval_psi(spec, lifted_q), residual(lifted_p, lifted_q, x)):
        logger.warning(f"lift of {q} by t = {t} does not satisfy the psi inequality")
        return None
    return lifted_p, lifted_q


@dataclass(frozen=True)
class ReducedSolution:
    p: IntVec
    q: IntVec
    t: int


def reduce_solution(p: IntVec, q: IntVec) -> ReducedSolution:
    """
    Divide (p, q) by t = gcd of all its components

    A solution of |qx - p| < psi(q) becomes a coprime solution of
    |q'x - p'| < psi(tq')/t <= psi_bar(q').
    """
    q = as_direction(q, 'reduce_solution')
    p = tuple(int(c) for c in p)
    t = math.gcd(*p, *q)
    return ReducedSolution(p=tuple(c // t for c in p), q=tuple(c // t for c in q), t=t)


@dataclass(frozen=True)
class CounterexampleReport:
    N: int
    eta: Fraction
    sum: Fraction
    union_exact: Fraction
    ratio: Fraction
    union_mc: Optional[MCReport]
    union: ArcUnion = field(repr=False, default=ArcUnion())


def counterexample_demo(N: int, eta: Fraction, samples: int = 0, seed: Optional[int] = None,
                        workers: int = 1) -> CounterexampleReport:
    """
    Sum of measures against the exact union for psi(q) = eta q / N on divisors of N

    Every arc of A(q, eta q / N) is centered at a multiple of 1/N with radius eta / N,
    so the union stays below 2 eta while the sum is 2 eta sigma(N) / N.

    Args:
        N: At least 2
        eta: Positive rational
        samples: Monte Carlo cross-check size, 0 to skip
        seed: Required when samples > 0

    Returns:
        CounterexampleReport
    """
    N = int(N)
    if N < 2:
        raise DomainError('counterexample_demo', f"N must be >= 2, got {N}")
    spec = DSCounterexample(N, Fraction(eta))
    arcs = []
    total = Fraction(0)
    for q in divisors(N):
        psi = spec.evaluate((q,))
        total += 2 * psi
        arcs.append(approx_set_1d(q, psi, ApproxMode.PLAIN))
    union = union_all(arcs)
    union_exact = union.measure()
    if total != 2 * spec.eta * Fraction(divisor_sum(N), N):
        raise DomainError('counterexample_demo', f"divisor sum mismatch for N = {N}")

    union_mc = None
    if samples:
        sets = [ApproxSet(1, 1, (q,), spec.evaluate((q,)), ApproxMode.PLAIN) for q in divisors(N)]
        union_mc = empirical_union_measure(sets, samples, seed, workers)
    ratio = total / union_exact if union_exact else Fraction(0)
    logger.info(f"counterexample N={N}: sum {total}, union {union_exact}, ratio {float(ratio):.3f}")
    return CounterexampleReport(N=N, eta=spec.eta, sum=total, union_exact=union_exact, ratio=ratio,
                                union_mc=union_mc, union=union)
