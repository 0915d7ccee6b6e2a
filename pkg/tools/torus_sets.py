"""
Exact geometry of approximation sets on the circle

Every one-dimensional set is an ArcUnion: disjoint half-open arcs with rational
endpoints, canonically sorted and merged. Higher-dimensional sets are described
symbolically by ApproxSet and measured through their one-dimensional reduction.
"""
import heapq
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from tools.arith import DomainError, IntVec, as_direction, as_vec, primitive_part, totient

logger = logging.getLogger(__name__)

Arc = Tuple[Fraction, Fraction]
Matrix = Tuple[Tuple[Fraction, ...], ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class ApproxMode(str, Enum):
    PLAIN = 'plain'
    COPRIME = 'coprime'
    FILTERED = 'filtered'


def _merge_sorted(arcs: Iterable[Arc]) -> Tuple[Arc, ...]:
    merged: List[List[Fraction]] = []
    for left, right in arcs:
        if right <= left:
            continue
        if merged and left <= merged[-1][1]:
            if right > merged[-1][1]:
                merged[-1][1] = right
        else:
            merged.append([left, right])
    return tuple((left, right) for left, right in merged)


def _unwrap(left: Fraction, right: Fraction) -> List[Arc]:
    """Split an arc given on the real line into pieces inside [0, 1)"""
    if right - left >= 1:
        return [(ZERO, ONE)]
    shift = math.floor(left)
    left, right = left - shift, right - shift
    if right <= 1:
        return [(left, right)]
    return [(ZERO, right - 1), (left, ONE)]


@dataclass(frozen=True)
class ArcUnion:
    """
    Union of disjoint half-open arcs [left, right) on T^1 = [0, 1)

    Arcs are sorted, non-adjacent and of positive length; an arc crossing 0 is
    stored as two pieces, so equal point sets have equal representations.
    """
    arcs: Tuple[Arc, ...] = ()

    @classmethod
    def empty(cls) -> 'ArcUnion':
        return cls(())

    @classmethod
    def full(cls) -> 'ArcUnion':
        return cls(((ZERO, ONE),))

    @classmethod
    def from_intervals(cls, intervals: Iterable[Tuple[Fraction, Fraction]]) -> 'ArcUnion':
        """
        Build the canonical union of arbitrary real intervals projected to the circle

        Args:
            intervals: (left, right) pairs with left <= right, anywhere on the line

        Returns:
            Canonical ArcUnion
        """
        pieces: List[Arc] = []
        for left, right in intervals:
            left, right = Fraction(left), Fraction(right)
            if right > left:
                pieces.extend(_unwrap(left, right))
        return cls(_merge_sorted(sorted(pieces)))

    @classmethod
    def around_centers(cls, numerators: Sequence[int], denominator: int, radius: Fraction) -> 'ArcUnion':
        """
        Arcs of a common radius around numerators/denominator

        Args:
            numerators: Ascending residues in [0, denominator)
            denominator: Positive integer
            radius: Nonnegative rational

        Returns:
            Canonical ArcUnion
        """
        if radius <= 0 or not numerators:
            return cls.empty()
        if 2 * radius >= 1:
            return cls.full()
        head: List[Arc] = []
        body: List[Arc] = []
        tail: List[Arc] = []
        for p in numerators:
            center = Fraction(p, denominator)
            left, right = center - radius, center + radius
            if left < 0:
                head.append((ZERO, right))
                tail.append((left + 1, ONE))
            elif right > 1:
                head.append((ZERO, right - 1))
                tail.append((left, ONE))
            else:
                body.append((left, right))
        return cls(_merge_sorted(heapq.merge(sorted(head), body, sorted(tail))))

    def measure(self) -> Fraction:
        return sum((right - left for left, right in self.arcs), ZERO)

    def is_full(self) -> bool:
        return self.arcs == ((ZERO, ONE),)

    def contains(self, x: Fraction) -> bool:
        x = Fraction(x) % 1
        return any(left <= x < right for left, right in self.arcs)

    def intersect(self, other: 'ArcUnion') -> 'ArcUnion':
        out: List[Arc] = []
        i = j = 0
        a, b = self.arcs, other.arcs
        while i < len(a) and j < len(b):
            left = max(a[i][0], b[j][0])
            right = min(a[i][1], b[j][1])
            if left < right:
                out.append((left, right))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return ArcUnion(_merge_sorted(out))

    def union(self, other: 'ArcUnion') -> 'ArcUnion':
        return ArcUnion(_merge_sorted(heapq.merge(self.arcs, other.arcs)))

    def to_json(self) -> List[List[List[str]]]:
        return [[[str(e.numerator), str(e.denominator)] for e in arc] for arc in self.arcs]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[Sequence[str]]]) -> 'ArcUnion':
        intervals = [tuple(Fraction(int(num), int(den)) for num, den in arc) for arc in data]
        return cls.from_intervals(intervals)


def intersect(u: ArcUnion, v: ArcUnion) -> ArcUnion:
    return u.intersect(v)


def union(u: ArcUnion, v: ArcUnion) -> ArcUnion:
    return u.union(v)


def union_all(unions: Iterable[ArcUnion]) -> ArcUnion:
    """Union of many canonical ArcUnions by a k-way merge of their sorted arcs"""
    return ArcUnion(_merge_sorted(heapq.merge(*(u.arcs for u in unions))))


def measure(u: ArcUnion) -> Fraction:
    return u.measure()


def admissible_numerators(d: int, mode: ApproxMode,
                          numerator_filter: Optional[FrozenSet[int]] = None) -> List[int]:
    """
    Residues p in [0, d) allowed as numerators of p/d

    Args:
        d: Positive denominator
        mode: plain (all residues), coprime (gcd(p, d) = 1) or filtered (P_d)
        numerator_filter: Residues for filtered mode, each coprime to d

    Returns:
        Ascending list of residues
    """
    mode = ApproxMode(mode)
    if mode is ApproxMode.PLAIN:
        return list(range(d))
    if mode is ApproxMode.COPRIME:
        return [p for p in range(d) if math.gcd(p, d) == 1]
    if numerator_filter is None:
        raise DomainError('approx_set_1d', "filtered mode requires a numerator filter")
    residues = sorted(int(p) for p in numerator_filter)
    for p in residues:
        if not 0 <= p < d or math.gcd(p, d) != 1:
            raise DomainError('approx_set_1d', f"filter residue {p} is not a unit modulo {d}")
    return residues


@lru_cache(maxsize=16384)
def _approx_set_1d(d: int, epsilon: Fraction, mode: ApproxMode,
                   numerator_filter: Optional[FrozenSet[int]]) -> ArcUnion:
    numerators = admissible_numerators(d, mode, numerator_filter)
    if epsilon == 0 or not numerators:
        return ArcUnion.empty()
    if 2 * epsilon >= d:
        return ArcUnion.full()
    return ArcUnion.around_centers(numerators, d, epsilon / d)


def approx_set_1d(d: int, epsilon: Fraction, mode: ApproxMode = ApproxMode.COPRIME,
                  numerator_filter: Optional[Iterable[int]] = None) -> ArcUnion:
    """
    The set of x in T^1 with |dx - p| < epsilon for an admissible numerator p

    Args:
        d: Positive integer scale
        epsilon: Nonnegative rational radius
        mode: Numerator admissibility
        numerator_filter: P_d for filtered mode

    Returns:
        Canonical ArcUnion (full circle once epsilon >= d/2)
    """
    d = int(d)
    if d < 1:
        raise DomainError('approx_set_1d', f"scale must be >= 1, got {d}")
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise DomainError('approx_set_1d', f"negative radius {epsilon}")
    mode = ApproxMode(mode)
    filt = frozenset(int(p) for p in numerator_filter) if numerator_filter is not None else None
    if mode is not ApproxMode.FILTERED:
        filt = None
    elif filt is None:
        raise DomainError('approx_set_1d', "filtered mode requires a numerator filter")
    return _approx_set_1d(d, epsilon, mode, filt)


@lru_cache(maxsize=8192)
def select_separated_numerators(d: int) -> FrozenSet[int]:
    """
    Greedy P_d: units modulo d pairwise at circle distance >= 1/phi(d)

    Residues are swept upward and the first one is always kept; a residue is kept
    when it is far enough from the last kept residue and, around the circle,
    from the first.

    Args:
        d: Positive integer

    Returns:
        Frozen set of residues
    """
    d = int(d)
    if d < 1:
        raise DomainError('select_separated_numerators', f"d must be >= 1, got {d}")
    phi = totient(d)
    kept: List[int] = []
    for p in range(d):
        if math.gcd(p, d) != 1:
            continue
        if not kept:
            kept.append(p)
            continue
        # (gap / d) >= 1 / phi in integer form
        if (p - kept[-1]) * phi >= d and (d - (p - kept[0])) * phi >= d:
            kept.append(p)
    return frozenset(kept)


@dataclass(frozen=True)
class BallFamily1D:
    centers: Tuple[Fraction, ...]
    radius: Fraction
    disjoint: bool = True

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError('BallFamily1D', f"radius must be positive, got {self.radius}")
        if self.disjoint and not self._pairwise_disjoint():
            raise DomainError('BallFamily1D', "balls flagged disjoint overlap")

    def _pairwise_disjoint(self) -> bool:
        if len(self.centers) < 2:
            return 2 * self.radius <= 1
        ordered = sorted(c % 1 for c in self.centers)
        gaps = [b - a for a, b in zip(ordered, ordered[1:])]
        gaps.append(ordered[0] + 1 - ordered[-1])
        return min(gaps) >= 2 * self.radius

    def arc_union(self) -> ArcUnion:
        return ArcUnion.from_intervals((c - self.radius, c + self.radius) for c in self.centers)


def scale_concentric(family: BallFamily1D, sigma: Fraction) -> BallFamily1D:
    """
    Shrink every ball of a disjoint family about its own center

    Args:
        family: Disjoint ball family
        sigma: Scale factor in (0, 1]

    Returns:
        Family with the same centers and radius sigma * r
    """
    sigma = Fraction(sigma)
    if not 0 < sigma <= 1:
        raise DomainError('scale_concentric', f"sigma must lie in (0, 1], got {sigma}")
    if not family.disjoint:
        raise DomainError('scale_concentric', "concentric scaling needs a disjoint family")
    return BallFamily1D(centers=family.centers, radius=family.radius * sigma, disjoint=True)


def candidate_numerators(t: Fraction, epsilon: Fraction) -> range:
    """Integers p with |t - p| < epsilon (strict)"""
    return range(math.floor(t - epsilon) + 1, math.ceil(t + epsilon))


@dataclass(frozen=True)
class ApproxSet:
    """
    Symbolic A_{n,m}(q, eps), A'_{n,m}(q, eps) or A''_{n,m}(q, eps)

    q lives in the nonnegative orthant; numerator_filter is only used in filtered
    mode and holds residues modulo gcd(q).
    """
    n: int
    m: int
    q: IntVec
    epsilon: Fraction
    mode: ApproxMode = ApproxMode.COPRIME
    numerator_filter: Optional[FrozenSet[int]] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, 'q', as_direction(self.q, 'ApproxSet'))
        object.__setattr__(self, 'epsilon', Fraction(self.epsilon))
        object.__setattr__(self, 'mode', ApproxMode(self.mode))
        if self.n < 1 or self.m < 1:
            raise DomainError('ApproxSet', f"(n, m) must be positive, got ({self.n}, {self.m})")
        if len(self.q) != self.n:
            raise DomainError('ApproxSet', f"direction {self.q} does not have {self.n} components")
        if self.epsilon < 0:
            raise DomainError('ApproxSet', f"negative radius {self.epsilon}")
        if self.mode is ApproxMode.FILTERED:
            if self.numerator_filter is None:
                raise DomainError('ApproxSet', "filtered mode requires a numerator filter")
            object.__setattr__(self, 'numerator_filter', frozenset(self.numerator_filter))
        else:
            object.__setattr__(self, 'numerator_filter', None)

    @property
    def scale(self) -> int:
        return primitive_part(self.q).scale

    @property
    def direction(self) -> IntVec:
        return primitive_part(self.q).direction

    def one_dimensional(self) -> ArcUnion:
        """The reduced set A(gcd(q), eps) on T^1"""
        return approx_set_1d(self.scale, self.epsilon, self.mode, self.numerator_filter)

    def admits(self, p: int) -> bool:
        d = self.scale
        if self.mode is ApproxMode.PLAIN:
            return True
        if self.mode is ApproxMode.COPRIME:
            return math.gcd(p, d) == 1
        return p % d in self.numerator_filter

    def contains(self, x: Matrix) -> bool:
        """
        Exact membership of an n x m matrix of rationals

        Every column j needs an admissible p_j with |(qx)_j - p_j| < eps.
        """
        if self.epsilon == 0:
            return False
        for j in range(self.m):
            t = sum((Fraction(self.q[i]) * x[i][j] for i in range(self.n)), ZERO)
            if not any(self.admits(p) for p in candidate_numerators(t, self.epsilon)):
                return False
        return True


def _linearly_independent(q1: IntVec, q2: IntVec) -> bool:
    n = len(q1)
    return any(q1[i] * q2[j] - q1[j] * q2[i] != 0 for i in range(n) for j in range(i + 1, n))


def stripe_measure(q: Sequence[int], epsilon: Fraction) -> Fraction:
    """Exact Leb(E(q, v, eps)) = min(1, 2 eps / gcd(q))"""
    g = math.gcd(*as_vec(q, 'stripe_measure'))
    return min(ONE, 2 * Fraction(epsilon) / g)


def stripe_independence_estimate(q1: Sequence[int], q2: Sequence[int],
                                 v1: Sequence[Fraction], v2: Sequence[Fraction],
                                 e1: Fraction, e2: Fraction,
                                 samples: int, seed: int,
                                 block_size: int = 65536) -> dict:
    """
    Monte Carlo estimate of Leb(E(q1, v1, e1) and E(q2, v2, e2)) on T^n

    A point x lies in E(q, v, eps) when q.(x - v) is within eps of a multiple of
    gcd(q). Samples are drawn in fixed-size blocks, block b from a Philox stream
    keyed by (seed, b), so the estimate does not depend on how blocks are scheduled.

    Args:
        q1, q2: Linearly independent integer vectors, n >= 2
        v1, v2: Translation vectors
        e1, e2: Positive radii
        samples: Number of uniform points
        seed: Required seed

    Returns:
        Dict with estimate, stderr, product (exact) and samples
    """
    a, b = as_vec(q1, 'stripe_independence_estimate'), as_vec(q2, 'stripe_independence_estimate')
    n = len(a)
    if n < 2 or len(b) != n:
        raise DomainError('stripe_independence_estimate', "needs two vectors of a common length n >= 2")
    if not _linearly_independent(a, b):
        raise DomainError('stripe_independence_estimate', f"{a} and {b} are linearly dependent")
    e1, e2 = Fraction(e1), Fraction(e2)
    if e1 <= 0 or e2 <= 0:
        raise DomainError('stripe_independence_estimate', "radii must be positive")
    samples = int(samples)
    if samples < 1:
        raise DomainError('stripe_independence_estimate', "samples must be >= 1")

    product = stripe_measure(a, e1) * stripe_measure(b, e2)
    qa, qb = np.array(a, dtype=float), np.array(b, dtype=float)
    va, vb = np.array([float(c) for c in v1]), np.array([float(c) for c in v2])
    ga, gb = float(math.gcd(*a)), float(math.gcd(*b))

    hits = 0
    for block, start in enumerate(range(0, samples, block_size)):
        size = min(block_size, samples - start)
        rng = np.random.Generator(np.random.Philox(key=[int(seed) & 0xFFFF_FFFF_FFFF_FFFF, block]))
        x = rng.random((size, n))
        ta = (x - va) @ qa
        tb = (x - vb) @ qb
        da = np.abs(ta - ga * np.round(ta / ga))
        db = np.abs(tb - gb * np.round(tb / gb))
        hits += int(np.count_nonzero((da < float(e1)) & (db < float(e2))))

    estimate = hits / samples
    stderr = math.sqrt(max(estimate * (1 - estimate), 0.0) / samples)
    return {
        'estimate': estimate,
        'stderr': stderr,
        'product': product,
        'samples': samples,
        'hits': hits,
    }
