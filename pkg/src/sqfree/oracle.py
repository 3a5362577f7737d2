"""Ground truth independent of the generator.

A sieve-built table of Mobius values, the square-free predicate, the partial
sum g(t) = sum_{k<=t} mu(k)/k, and the classical single-shot approximant
combinations.  Nothing here consults the iterative generator; this module is
the oracle the generator's output is judged against.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field
from fractions import Fraction

from .core import BeurlingCombination

__all__ = [
    "MobiusSieve",
    "sieve_mobius",
    "is_square_free",
    "square_divisor",
    "mertens_g",
    "classical_approximant",
]

_SIEVE_HARD_CAP = 200_000_000  # refuse absurd allocations up front


@dataclass(frozen=True)
class MobiusSieve:
    """Immutable table of mu(n) for 1 <= n <= limit.

    mu_table is indexed directly by n (entry 0 unused).  Freely shareable
    across threads once built.
    """

    limit: int
    mu_table: array = field(repr=False)

    def mu(self, n: int) -> int:
        if not 1 <= n <= self.limit:
            raise ValueError(f"n={n} outside sieve range 1..{self.limit}")
        return self.mu_table[n]


def sieve_mobius(limit: int) -> MobiusSieve:
    """Build mu(n) for all n <= limit with a linear sieve.

    Each composite is crossed exactly once through its smallest prime factor,
    so construction is O(limit); no number is factored individually.
    """
    if not isinstance(limit, int) or limit < 1:
        raise ValueError(f"sieve limit must be a positive integer, got {limit!r}")
    if limit > _SIEVE_HARD_CAP:
        raise ValueError(f"sieve limit {limit} exceeds supported cap {_SIEVE_HARD_CAP}")
    mu = array("b", bytes(limit + 1))
    mu[1] = 1
    primes: list[int] = []
    # mu doubles as the result table; a separate flag array tracks visits
    # because mu(n) = 0 is a legitimate value.
    visited = bytearray(limit + 1)
    for n in range(2, limit + 1):
        if not visited[n]:
            primes.append(n)
            mu[n] = -1
        mun = mu[n]
        for p in primes:
            m = n * p
            if m > limit:
                break
            visited[m] = 1
            if n % p == 0:
                mu[m] = 0  # p*p divides m
                break
            mu[m] = -mun
    return MobiusSieve(limit=limit, mu_table=mu)


def is_square_free(n: int, sieve: MobiusSieve) -> bool:
    """True iff n has no square factor, i.e. mu(n) != 0."""
    return sieve.mu(n) != 0


def square_divisor(n: int) -> int | None:
    """Smallest p*p dividing n (p prime), or None if n is square-free.

    Trial division; meant for reporting on individual findings, not bulk use.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n % 4 == 0:
        return 4
    p = 3
    while p * p <= n:
        if n % (p * p) == 0:
            return p * p
        p += 2
    return None


def mertens_g(t: int, sieve: MobiusSieve) -> Fraction:
    """Exact partial sum g(t) = sum_{1 <= k <= t} mu(k)/k."""
    if t < 0 or t > sieve.limit:
        raise ValueError(f"t={t} outside sieve range 0..{sieve.limit}")
    total = Fraction(0)
    mu = sieve.mu_table
    for k in range(1, t + 1):
        if mu[k]:
            total += Fraction(mu[k], k)
    return total


def classical_approximant(kind: str, n: int, sieve: MobiusSieve) -> BeurlingCombination:
    """Arithmetical form of the classical approximants to the constant -1.

    All three live in the same variable as the generated combinations (each
    original term {(1/k)/x} becomes {y/k} after y = 1/x):

    - "S": plain mu-weighted sum, terms (k, mu(k)) for k <= n.
    - "B": S truncated at n-1 plus a tail correction (n, -n*g(n-1)) chosen so
      the coefficient/scale sums cancel.
    - "V": all n terms of S plus the correction (1, -g(n)) merged at scale 1.
    """
    if n < 1 or n > sieve.limit:
        raise ValueError(f"n={n} outside sieve range 1..{sieve.limit}")
    mu = sieve.mu_table
    if kind == "S":
        pairs = [(k, Fraction(mu[k])) for k in range(1, n + 1)]
    elif kind == "B":
        pairs = [(k, Fraction(mu[k])) for k in range(1, n)]
        pairs.append((n, -n * mertens_g(n - 1, sieve)))
    elif kind == "V":
        pairs = [(k, Fraction(mu[k])) for k in range(1, n + 1)]
        pairs.append((1, -mertens_g(n, sieve)))
    else:
        raise ValueError(f"unknown approximant kind {kind!r}, expected S, B or V")
    return BeurlingCombination.from_terms(pairs)


def square_free_up_to(limit: int, sieve: MobiusSieve) -> list[int]:
    """Sorted list of all square-free n <= limit."""
    if limit > sieve.limit:
        raise ValueError(f"limit {limit} exceeds sieve limit {sieve.limit}")
    mu = sieve.mu_table
    return [n for n in range(1, limit + 1) if mu[n]]
