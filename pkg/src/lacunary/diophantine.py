"""Counting solutions of ``a*n_k - b*n_l = c`` over sequence prefixes.

``count_naive`` is the O(N^2) ground truth.  ``count_fast`` is a hash join,
``difference_spectrum`` materializes the count for every right-hand side at
once, and ``predicted_count_paper`` classifies an equation on the block
construction and returns its structural count.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .errors import InvalidCase, NotIncreasing, PairBudgetExceeded
from .sequence import (
    ConstructionParams,
    PaperSequence,
    SequenceSpec,
    sequence_prefix,
    subblock_partition,
)

PAIR_BUDGET = 10**8


class EquationParams(NamedTuple):
    a: int
    b: int
    c: int = 0

    def validate(self):
        if self.a < 1 or self.b < 1:
            raise ValueError("coefficients a, b must be positive integers")
        if self.c < 0:
            raise ValueError("right-hand side c must be non-negative")
        return self


def _require_increasing(prefix: Sequence[int]):
    if any(y <= x for x, y in zip(prefix, prefix[1:])):
        raise NotIncreasing("prefix must be strictly increasing")


def count_naive(prefix: Sequence[int], a: int, b: int, c: int) -> int:
    """``#{(k, l): a*n_k - b*n_l = c}`` by enumerating all N^2 pairs."""
    EquationParams(a, b, c).validate()
    _require_increasing(prefix)
    right = [b * n for n in prefix]
    # list.count compares against every element: a full pair enumeration
    return sum(right.count(a * n - c) for n in prefix)


def count_fast(prefix: Sequence[int], a: int, b: int, c: int) -> int:
    """Same count as :func:`count_naive` via a hash join in O(N)."""
    EquationParams(a, b, c).validate()
    _require_increasing(prefix)
    right = Counter(b * n + c for n in prefix)
    return sum(right.get(a * n, 0) for n in prefix)


@dataclass
class SolutionSpectrum:
    """``counts[c] = L(N, a, b, c)`` for every ``c >= 0`` with a solution."""

    a: int
    b: int
    N: int
    counts: dict[int, int]

    def __getitem__(self, c: int) -> int:
        return self.counts.get(c, 0)

    def total(self) -> int:
        return sum(self.counts.values())

    def merge(self, other: "SolutionSpectrum") -> "SolutionSpectrum":
        """Union of two spectra over disjoint pair sets."""
        if (self.a, self.b) != (other.a, other.b):
            raise ValueError("spectra for different equations")
        merged = Counter(self.counts)
        merged.update(other.counts)
        return SolutionSpectrum(self.a, self.b, max(self.N, other.N), dict(merged))


def difference_spectrum(prefix: Sequence[int], a: int, b: int, pair_budget: int = PAIR_BUDGET,
                        rows: range | None = None) -> SolutionSpectrum:
    """Counts of ``a*n_k - b*n_l`` over all pairs where it is non-negative.

    ``rows`` restricts ``k`` to a sub-range so that disjoint ranges can be
    counted separately and merged.
    """
    EquationParams(a, b).validate()
    _require_increasing(prefix)
    N = len(prefix)
    if N * N > pair_budget:
        raise PairBudgetExceeded(f"{N}^2 pairs exceed the budget of {pair_budget}")
    right = [b * n for n in prefix]
    counts: Counter = Counter()
    for k in rows if rows is not None else range(N):
        lhs = a * prefix[k]
        top = bisect.bisect_right(right, lhs)
        counts.update(lhs - r for r in right[:top])
    return SolutionSpectrum(a, b, N, dict(counts))


def max_count(prefix: Sequence[int], a: int, b: int, exclude_zero: bool = False,
              pair_budget: int = PAIR_BUDGET) -> tuple[int, int]:
    """``(c*, L*)``: the right-hand side with most solutions, smallest c on ties."""
    spec = difference_spectrum(prefix, a, b, pair_budget)
    best_c, best = None, 0
    for c, n in spec.counts.items():
        if exclude_zero and c == 0:
            continue
        if n > best or (n == best and best_c is not None and c < best_c):
            best_c, best = c, n
    return best_c, best


# --------------------------------------------------------------------------
# the block construction


def special_rhs(i: int, m: int, b: int, r: int, params: ConstructionParams) -> int:
    """``2**T(i) * b * m * (2**r - 1)``.

    For ``r < 0`` this is the value for the equation with roles exchanged,
    ``b*n_l - a*n_k`` with ``a = b / 2**|r|``, which needs ``2**|r|`` to
    divide ``b``.
    """
    if r == 0:
        raise ValueError("r must be non-zero")
    if not 1 <= m <= params.M(i):
        raise ValueError(f"m must lie in 1..{params.M(i)}")
    T = params.T(i)
    if r > 0:
        return (b * m * ((1 << r) - 1)) << T
    if b % (1 << -r):
        raise ValueError("b must be divisible by 2**|r| when r < 0")
    return ((b >> -r) * m * ((1 << -r) - 1)) << T


def power_of_two_ratio(a: int, b: int) -> int | None:
    """``r`` with ``a/b = 2**r``, or None."""
    fr = Fraction(a, b)
    num, den = fr.numerator, fr.denominator
    if num & (num - 1) == 0 and den & (den - 1) == 0:
        return (num.bit_length() - 1) - (den.bit_length() - 1)
    return None


@dataclass(frozen=True)
class PredictedCount:
    """Classification of an in-block equation on the block construction.

    ``case`` is one of ``"i"``, ``"ii"``, ``"iii-a"``, ``"iii-b"``.
    ``structural`` is the exact count of the ``l = k + r`` family inside
    one sub-block; ``budget_scale`` multiplies the calibrated sporadic
    constant (1 for bounded cases, ``i**2`` otherwise).
    """

    case: str
    i: int
    structural: int
    budget_scale: int
    r: int | None = None
    m: int | None = None


def predicted_count_paper(i: int, a: int, b: int, c: int, params: ConstructionParams) -> PredictedCount:
    """Structural prediction for ``#{k, l in block i: a n_k - b n_l = c}``."""
    EquationParams(a, b, c).validate()
    if a == b:
        raise InvalidCase("the predictor requires a != b")
    r = power_of_two_ratio(a, b)
    if r is None:
        return PredictedCount("i", i, 0, 1)
    if r > 0:
        for part in subblock_partition(i, params):
            if c == special_rhs(i, part.m, b, r, params):
                return PredictedCount("iii-a", i, max(part.size - r, 0), i * i, r, part.m)
    # for r < 0 the l = k + r family has a negative right-hand side; it is
    # reached by exchanging roles, so every c >= 0 is sporadic here
    return PredictedCount("iii-b", i, 0, i * i, r)


def block_prefix(params: ConstructionParams, i: int, reduced: bool = False) -> list[int]:
    """Terms of block ``i`` (optionally divided by ``2**T(i)``)."""
    shift = 0 if reduced else params.T(i)
    return [((1 << k) + p.m) << shift
            for p in subblock_partition(i, params) for k in range(p.lo, p.hi + 1)]


def count_in_block_symbolic(i: int, a: int, b: int, c_reduced: int, params: ConstructionParams) -> int:
    """In-block count on the symbolic terms, without the tower factor.

    All terms of block ``i`` share the factor ``2**T(i)``, so the count for
    ``c = 2**T(i) * c_reduced`` equals the count of
    ``a*nu_k - b*nu_l = c_reduced`` with ``nu_k = 2**k + m``.  When
    ``a/b`` is a power of two the equation is solved in exponent space per
    sub-block pair; otherwise a hash join over ``nu`` is used.
    """
    EquationParams(a, b, c_reduced).validate()
    parts = subblock_partition(i, params)
    g = math.gcd(a, b)
    alpha, beta = a // g, b // g
    if alpha & (alpha - 1) or beta & (beta - 1):
        return count_fast(block_prefix(params, i, reduced=True), a, b, c_reduced)
    if c_reduced % g:
        return 0
    alpha = alpha.bit_length() - 1
    beta = beta.bit_length() - 1
    c = c_reduced // g
    total = 0
    # 2^(k+alpha) - 2^(l+beta) = c - 2^alpha m1 + 2^beta m2 =: D
    for p1 in parts:
        for p2 in parts:
            D = c - (p1.m << alpha) + (p2.m << beta)
            if D == 0:
                lo = max(p1.lo, p2.lo + beta - alpha)
                hi = min(p1.hi, p2.hi + beta - alpha)
                total += max(0, hi - lo + 1)
                continue
            low = (abs(D) & -abs(D)).bit_length() - 1
            rest = (abs(D) >> low) + 1
            if rest & (rest - 1) or rest < 2:
                continue
            gap = rest.bit_length() - 1
            if D > 0:
                k, l = low + gap - alpha, low - beta
            else:
                k, l = low - alpha, low + gap - beta
            if p1.lo <= k <= p1.hi and p2.lo <= l <= p2.hi:
                total += 1
    return total


def cross_block_count(params: ConstructionParams, i_max: int, a: int, b: int, c: int) -> int:
    """Solutions with ``k`` and ``l`` in different blocks among blocks 1..i_max."""
    blocks = [block_prefix(params, i) for i in range(1, i_max + 1)]
    total = 0
    for i1, left in enumerate(blocks):
        for i2, right in enumerate(blocks):
            if i1 == i2:
                continue
            targets = Counter(b * n + c for n in right)
            total += sum(targets.get(a * n, 0) for n in left)
    return total


# --------------------------------------------------------------------------
# profiles


class ProfileRow(NamedTuple):
    N: int
    a: int
    b: int
    c_star: int | None
    L_star: int
    ratio: float


def normalized_ratio(L: int, N: int, eps: Fraction) -> float:
    """``L * (log N)**(1 - eps) / N``."""
    if N < 2:
        return math.nan
    return L * math.log(N) ** float(1 - eps) / N


def diophantine_profile(spec: SequenceSpec, a: int, b: int, Ns: Sequence[int],
                        eps: Fraction = Fraction(1, 2), exclude_zero: bool = True,
                        pair_budget: int = PAIR_BUDGET) -> list[ProfileRow]:
    """Maximal count over ``c >= 1`` at each prefix length, and its normalization."""
    eps = Fraction(eps)
    full = sequence_prefix(max(Ns), spec)
    rows = []
    for N in Ns:
        c_star, L_star = max_count(full[:N], a, b, exclude_zero=exclude_zero, pair_budget=pair_budget)
        rows.append(ProfileRow(N, a, b, c_star, L_star, normalized_ratio(L_star, N, eps)))
    return rows


def paper_profile(params: ConstructionParams, a: int, b: int, blocks: Sequence[int],
                  pair_budget: int = PAIR_BUDGET) -> list[ProfileRow]:
    """Profile at the block ends ``N(i)`` of the construction."""
    return diophantine_profile(PaperSequence(params), a, b, [params.N(i) for i in blocks],
                               eps=params.eps, pair_budget=pair_budget)


PROFILE_HEADER = ["N", "a", "b", "c_star", "L_star", "ratio"]


def profile_csv(rows: Sequence[ProfileRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_HEADER)
    for r in rows:
        w.writerow([r.N, r.a, r.b, "" if r.c_star is None else r.c_star, r.L_star, f"{r.ratio:.12g}"])
    return buf.getvalue()
