"""Exact algebra of fractional-part linear combinations.

A combination is a finite sum  x -> sum_j c_j * frac(x / k_j)  with integer
scales k_j >= 1 and rational coefficients c_j.  Everything here is evaluated
with arbitrary-precision rationals; no operation rounds.  Values are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Tuple

__all__ = [
    "ExactRational",
    "frac_part",
    "block_eval",
    "BeurlingTerm",
    "BeurlingCombination",
]

# All definitional arithmetic runs on stdlib Fractions: always in lowest
# terms, positive denominator, exact +,-,*,/, floor and comparisons.
ExactRational = Fraction


def _as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):  # includes int
        return Fraction(x)
    raise TypeError(f"exact rational required, got {type(x).__name__}")


def frac_part(x) -> Fraction:
    """Fractional part {x} = x - floor(x), always in [0, 1).

    Floor semantics apply for negative inputs: frac_part(-1/2) == 1/2.
    """
    x = _as_rational(x)
    return x - math.floor(x)


def block_eval(a: int, b: int, x) -> Fraction:
    """Evaluate the two-scale block  {x/a} - (b/a)*{x/b}  exactly.

    The block vanishes on [0, a) and is a nonpositive integer staircase on
    [a, b); scales must satisfy 0 < a < b and x must be >= 0.
    """
    if not (isinstance(a, int) and isinstance(b, int)):
        raise TypeError("scales must be integers")
    if not 0 < a < b:
        raise ValueError(f"scales must satisfy 0 < a < b, got a={a}, b={b}")
    x = _as_rational(x)
    if x < 0:
        raise ValueError("block evaluation requires x >= 0")
    return frac_part(x / a) - Fraction(b, a) * frac_part(x / b)


def _tree_sum(values: list) -> Fraction:
    """Exact sum by balanced pairwise reduction.

    Equivalent to sum() but keeps intermediate denominators small when many
    terms with unrelated small denominators are added, which matters once a
    combination holds thousands of terms.
    """
    if not values:
        return Fraction(0)
    while len(values) > 1:
        values = [
            values[i] + values[i + 1] if i + 1 < len(values) else values[i]
            for i in range(0, len(values), 2)
        ]
    return values[0]


@dataclass(frozen=True)
class BeurlingTerm:
    """One summand c * frac(x / scale) of a combination."""

    scale: int
    coefficient: Fraction

    def __post_init__(self):
        if not isinstance(self.scale, int) or self.scale < 1:
            raise ValueError(f"scale must be a positive integer, got {self.scale!r}")
        object.__setattr__(self, "coefficient", _as_rational(self.coefficient))


@dataclass(frozen=True, eq=False)
class BeurlingCombination:
    """Finite linear combination of dilated fractional-part functions.

    Terms are kept canonical: scales strictly increasing, duplicate scales
    merged, zero coefficients dropped.  Canonical form makes equality a
    term-by-term comparison.
    """

    terms: Tuple[BeurlingTerm, ...]

    @staticmethod
    def empty() -> "BeurlingCombination":
        return BeurlingCombination(())

    @staticmethod
    def from_terms(pairs: Iterable[tuple]) -> "BeurlingCombination":
        """Build from (scale, coefficient) pairs, merging and canonicalizing."""
        merged: dict[int, Fraction] = {}
        for scale, coeff in pairs:
            if not isinstance(scale, int) or scale < 1:
                raise ValueError(f"scale must be a positive integer, got {scale!r}")
            merged[scale] = merged.get(scale, Fraction(0)) + _as_rational(coeff)
        terms = tuple(
            BeurlingTerm(s, c) for s, c in sorted(merged.items()) if c != 0
        )
        return BeurlingCombination(terms)

    def value_at(self, x) -> Fraction:
        """Evaluate sum_j c_j * frac(x / k_j) exactly at x >= 0."""
        x = _as_rational(x)
        if x < 0:
            raise ValueError("combinations are defined for x >= 0")
        return _tree_sum(
            [t.coefficient * frac_part(x / t.scale) for t in self.terms]
        )

    def add_block(self, lo: int, hi: int, weight) -> "BeurlingCombination":
        """Return self + weight * ({x/lo} - (hi/lo) * {x/hi}), canonicalized."""
        if not (isinstance(lo, int) and isinstance(hi, int)):
            raise TypeError("block scales must be integers")
        if not 0 < lo < hi:
            raise ValueError(f"block scales must satisfy 0 < lo < hi, got {lo}, {hi}")
        w = _as_rational(weight)
        pairs = [(t.scale, t.coefficient) for t in self.terms]
        pairs.append((lo, w))
        pairs.append((hi, -w * Fraction(hi, lo)))
        return BeurlingCombination.from_terms(pairs)

    def __add__(self, other: "BeurlingCombination") -> "BeurlingCombination":
        if not isinstance(other, BeurlingCombination):
            return NotImplemented
        return BeurlingCombination.from_terms(
            [(t.scale, t.coefficient) for t in self.terms]
            + [(t.scale, t.coefficient) for t in other.terms]
        )

    def coefficient_at(self, scale: int) -> Fraction:
        for t in self.terms:
            if t.scale == scale:
                return t.coefficient
        return Fraction(0)

    def sum_coeff_over_scale(self) -> Fraction:
        """Exact sum of c_j / k_j over all terms.

        Each two-scale block contributes w/lo - (w*hi/lo)/hi = 0, so every
        combination built purely from blocks has this sum identically zero.
        That identity is what makes integer-stepping evaluation possible.
        """
        return _tree_sum([t.coefficient / t.scale for t in self.terms])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BeurlingCombination):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        inner = ", ".join(f"({t.scale}, {t.coefficient})" for t in self.terms)
        return f"BeurlingCombination([{inner}])"
