"""
Exact number-theoretic primitives used by every other tool:
vector gcd, totient, Möbius, coprime-point counting and primitive-vector enumeration
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from itertools import combinations, product
from typing import Iterator, List, Sequence, Tuple

from sympy import divisor_sigma, divisors as sympy_divisors, factorint, mobius as sympy_mobius, totient as sympy_totient

logger = logging.getLogger(__name__)

IntVec = Tuple[int, ...]

JOINT = 'joint'
COMPONENTWISE = 'componentwise'


class LabError(Exception):
    """Base class for every error raised by the lab"""


class DomainError(LabError, ValueError):
    """An operation was called outside its domain"""

    def __init__(self, operation: str, message: str):
        self.operation = operation
        super().__init__(f"{operation}: {message}")


class ConfigError(LabError):
    """A run configuration could not be parsed or validated"""


def as_vec(q: Sequence[int], operation: str = 'as_vec') -> IntVec:
    """
    Normalize a sequence of integers into an IntVec

    Args:
        q: Components
        operation: Name used in error messages

    Returns:
        Tuple of Python ints
    """
    vec = tuple(int(c) for c in q)
    if not vec:
        raise DomainError(operation, "vector must have at least one component")
    return vec


def as_direction(q: Sequence[int], operation: str = 'as_direction') -> IntVec:
    """Nonzero vector in the closed nonnegative orthant"""
    vec = as_vec(q, operation)
    if all(c == 0 for c in vec):
        raise DomainError(operation, "zero vector is not an approximation direction")
    if any(c < 0 for c in vec):
        raise DomainError(operation, f"{vec} is outside the nonnegative orthant")
    return vec


def sup_norm(q: Sequence[int]) -> int:
    return max(abs(c) for c in q)


def vec_gcd(q: Sequence[int]) -> int:
    """
    Greatest common divisor of the components of q

    Args:
        q: Nonzero integer vector

    Returns:
        Positive gcd of the absolute values
    """
    vec = as_vec(q, 'vec_gcd')
    g = math.gcd(*vec)
    if g == 0:
        raise DomainError('vec_gcd', "gcd of the zero vector is undefined")
    return g


def _require_positive(d: int, operation: str) -> int:
    d = int(d)
    if d < 1:
        raise DomainError(operation, f"argument must be >= 1, got {d}")
    return d


@lru_cache(maxsize=65536)
def _prime_exponents(d: int) -> Tuple[Tuple[int, int], ...]:
    return tuple(sorted((int(p), int(e)) for p, e in factorint(d).items()))


def factorize(d: int) -> List[int]:
    """Prime factors of d with multiplicity, ascending (1 gives [])"""
    d = _require_positive(d, 'factorize')
    return [p for p, e in _prime_exponents(d) for _ in range(e)]


def prime_divisors(d: int) -> List[int]:
    d = _require_positive(d, 'prime_divisors')
    return [p for p, _ in _prime_exponents(d)]


@lru_cache(maxsize=65536)
def totient(d: int) -> int:
    """Euler's totient"""
    d = _require_positive(d, 'totient')
    return int(sympy_totient(d))


@lru_cache(maxsize=65536)
def mobius(d: int) -> int:
    d = _require_positive(d, 'mobius')
    return int(sympy_mobius(d))


def radical(d: int) -> int:
    """Product of the distinct primes dividing d"""
    return math.prod(prime_divisors(d))


def divisors(d: int) -> List[int]:
    d = _require_positive(d, 'divisors')
    return [int(e) for e in sympy_divisors(d)]


def divisor_sum(d: int) -> int:
    """sigma(d), the sum of the divisors of d"""
    d = _require_positive(d, 'divisor_sum')
    return int(divisor_sigma(d))


def squarefree_divisors(g: int) -> Iterator[Tuple[int, int]]:
    """
    Yield (e, mu(e)) for every divisor e of radical(g)

    Args:
        g: Positive integer

    Yields:
        Pairs of a squarefree divisor and its Möbius value
    """
    primes = prime_divisors(g)
    for size in range(len(primes) + 1):
        sign = -1 if size % 2 else 1
        for subset in combinations(primes, size):
            yield math.prod(subset), sign


def coprime_count(Q: int, g: int) -> int:
    """
    Count integers p with |p| <= Q and gcd(p, g) = 1

    Uses Möbius inversion over the divisors of radical(g); p = 0 is counted
    exactly when g = 1 because gcd(0, g) = g.

    Args:
        Q: Nonnegative height
        g: Positive modulus

    Returns:
        The exact count
    """
    Q = int(Q)
    if Q < 0:
        raise DomainError('coprime_count', f"Q must be >= 0, got {Q}")
    g = _require_positive(g, 'coprime_count')
    return sum(mu * (2 * (Q // e) + 1) for e, mu in squarefree_divisors(g))


def phi_m(q: Sequence[int], m: int, mode: str = JOINT) -> int:
    """
    Count p in Z^m with |p| <= |q| coprime to q

    In joint mode the gcd of all components of p together with gcd(q) must be 1;
    in componentwise mode every p_i must be coprime to gcd(q).

    Args:
        q: Nonzero integer vector
        m: Number of linear forms
        mode: 'joint' or 'componentwise'

    Returns:
        Phi_m(q)
    """
    vec = as_vec(q, 'phi_m')
    g = vec_gcd(vec)
    m = _require_positive(m, 'phi_m')
    height = sup_norm(vec)
    if mode == JOINT:
        return sum(mu * (2 * (height // e) + 1) ** m for e, mu in squarefree_divisors(g))
    if mode == COMPONENTWISE:
        return coprime_count(height, g) ** m
    raise DomainError('phi_m', f"unknown coprimality mode {mode!r}")


def phi_one_ratio(q: Sequence[int]) -> Fraction:
    """Phi_1(q) divided by phi(gcd(q)) |q| / gcd(q)"""
    vec = as_vec(q, 'phi_one_ratio')
    g = vec_gcd(vec)
    return Fraction(phi_m(vec, 1) * g, totient(g) * sup_norm(vec))


def primitive_vectors(n: int, H: int) -> Iterator[IntVec]:
    """
    Enumerate nonzero primitive vectors of the nonnegative orthant with |q| <= H

    Order is lexicographic, so any index range of the stream can be recreated
    with itertools.islice.

    Args:
        n: Dimension
        H: Height bound

    Yields:
        Primitive vectors
    """
    n = _require_positive(n, 'primitive_vectors')
    H = _require_positive(H, 'primitive_vectors')
    for vec in product(range(H + 1), repeat=n):
        if math.gcd(*vec) == 1:
            yield vec


def orthant_vectors(n: int, Q: int) -> Iterator[IntVec]:
    """Nonzero vectors of the nonnegative orthant with |q| <= Q, lexicographic"""
    for vec in product(range(int(Q) + 1), repeat=int(n)):
        if any(vec):
            yield vec


def vectors_of_height(n: int, h: int) -> Iterator[IntVec]:
    """Vectors of the nonnegative orthant with sup-norm exactly h"""
    for vec in product(range(h + 1), repeat=n):
        if max(vec) == h:
            yield vec


@dataclass(frozen=True)
class PrimitiveDecomposition:
    scale: int
    direction: IntVec

    def recombine(self) -> IntVec:
        return tuple(self.scale * c for c in self.direction)


def primitive_part(q: Sequence[int]) -> PrimitiveDecomposition:
    """
    Factor q as d * q' with q' primitive

    Args:
        q: Nonzero integer vector

    Returns:
        PrimitiveDecomposition with d = gcd(q)
    """
    vec = as_vec(q, 'primitive_part')
    d = vec_gcd(vec)
    return PrimitiveDecomposition(scale=d, direction=tuple(c // d for c in vec))
