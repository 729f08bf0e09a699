"""Lacunary sequences: classical families and the block/tower construction.

Every sequence object answers three questions about its k-th term ``n_k``:
the exact integer (``term``), its bit length without materializing it
(``bit_length``) and a sparse signed-binary expansion (``digits``) that the
evaluation engine in :mod:`lacunary.dyadic` consumes.  The block
construction can be instantiated with the full double-exponential tower,
with a reduced tower that only keeps blocks magnitude-separated, or with an
explicit table of tower exponents.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from .dyadic import signed_digits
from .errors import NotIncreasing, TowerOverflow

#: Default cap on the bit length of a single materialized term.
BIT_CAP = 2**24


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def iroot(n: int, q: int) -> int:
    """Floor of the real q-th root of a non-negative integer."""
    if n < 0 or q < 1:
        raise ValueError("iroot needs n >= 0 and q >= 1")
    if n < 2 or q == 1:
        return n
    x = 1 << -(-n.bit_length() // q)  # upper bound
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            return x
        x = y


def ceil_rational_power(i: int, e: Fraction) -> int:
    """Exact ``ceil(i ** e)`` for a positive integer i and rational e >= 0."""
    p, q = e.numerator, e.denominator
    if p < 0:
        raise ValueError("exponent must be non-negative")
    target = i**p
    c = iroot(target, q)
    return c if c**q == target else c + 1


# --------------------------------------------------------------------------
# blocks and towers


def block_bounds(i: int, R: int) -> tuple[int, int]:
    """First and last index of block ``i``; the block has ``R**i`` elements."""
    if i < 1 or R < 3:
        raise ValueError("need i >= 1 and R >= 3")
    lo = (R**i - R) // (R - 1) + 1
    hi = (R ** (i + 1) - R) // (R - 1)
    return lo, hi


def block_end(i: int, R: int) -> int:
    """``N(i)``: the largest index of block ``i`` (0 for i = 0)."""
    return (R ** (i + 1) - R) // (R - 1)


def block_of(k: int, R: int) -> int:
    if k < 1:
        raise ValueError("indices start at 1")
    i = 1
    while block_end(i, R) < k:
        i += 1
    return i


@dataclass(frozen=True)
class TowerSpec:
    """Rule for the power-of-two exponent ``T(i)`` shared by block ``i``.

    ``kind`` is ``"paper"`` (``T(i) = 2**(i**4)``), ``"reduced"``
    (``T(1) = N(1) + 1``, ``T(i) = T(i-1) + N(i-1) + i**2``) or ``"table"``.
    """

    kind: str = "reduced"
    table: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("paper", "reduced", "table"):
            raise ValueError(f"unknown tower kind {self.kind!r}")
        if self.kind == "table":
            t = tuple(int(v) for v in self.table)
            if not t or any(b <= a for a, b in zip(t, t[1:])) or t[0] < 0:
                raise ValueError("tower table must be non-empty and strictly increasing")
            object.__setattr__(self, "table", t)

    @classmethod
    def paper(cls) -> "TowerSpec":
        return cls("paper")

    @classmethod
    def reduced(cls) -> "TowerSpec":
        return cls("reduced")

    @classmethod
    def explicit(cls, table: Sequence[int]) -> "TowerSpec":
        return cls("table", tuple(table))

    def exponent(self, i: int, R: int) -> int:
        if i < 1:
            raise ValueError("block index starts at 1")
        if self.kind == "paper":
            return 2 ** (i**4)
        if self.kind == "table":
            if i > len(self.table):
                raise ValueError(f"tower table has {len(self.table)} entries, block {i} requested")
            return self.table[i - 1]
        t = block_end(1, R) + 1
        for h in range(2, i + 1):
            t += block_end(h - 1, R) + h * h
        return t

    def describe(self) -> str:
        if self.kind == "table":
            return "table:" + ",".join(map(str, self.table))
        return self.kind


@dataclass(frozen=True)
class ConstructionParams:
    """Parameters of the block construction.

    ``eps`` and ``K`` are kept as exact rationals.  When ``d`` is omitted it
    defaults to ``21 * ceil(1/eps)``.  The two size conditions
    ``R > 8/eps`` and ``d*sqrt(eps)/4 - 2 > K*sqrt(d)/sqrt(2)`` only matter
    for the limit theorem, so violating them emits a warning.
    """

    R: int = 9
    eps: Fraction = Fraction(1, 2)
    d: int | None = None
    K: Fraction = Fraction(1)
    tower: TowerSpec = field(default_factory=TowerSpec.reduced)

    def __post_init__(self):
        eps = _as_fraction(self.eps)
        K = _as_fraction(self.K)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "K", K)
        if self.d is None:
            object.__setattr__(self, "d", 21 * math.ceil(1 / eps))
        if int(self.R) != self.R or self.R < 3:
            raise ValueError("R must be an integer >= 3")
        if not 0 < eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if K <= 0:
            raise ValueError("K must be positive")
        if not self.R_condition():
            warnings.warn(f"R = {self.R} does not satisfy R > 8/eps = {8 / eps}", stacklevel=3)
        if not self.d_condition():
            warnings.warn(f"d = {self.d} does not satisfy the degree condition for eps={eps}, K={K}",
                          stacklevel=3)

    def R_condition(self) -> bool:
        return self.R * self.eps > 8

    def d_condition(self) -> bool:
        d, eps, K = self.d, float(self.eps), float(self.K)
        return d * math.sqrt(eps) / 4 - 2 > K * math.sqrt(d) / math.sqrt(2)

    def M(self, i: int) -> int:
        """Number of sub-blocks of block ``i``: ``ceil(i ** (1 - eps))``."""
        return ceil_rational_power(i, 1 - self.eps)

    def T(self, i: int) -> int:
        return self.tower.exponent(i, self.R)

    def block_bounds(self, i: int) -> tuple[int, int]:
        return block_bounds(i, self.R)

    def N(self, i: int) -> int:
        return block_end(i, self.R)


class SubBlock(NamedTuple):
    m: int
    lo: int
    hi: int

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


def subblock_partition(i: int, params: ConstructionParams) -> list[SubBlock]:
    """Split block ``i`` into ``M(i)`` consecutive ranges of near-equal size.

    The first ``R**i mod M(i)`` sub-blocks receive one extra element.
    """
    return list(_partition(i, params))


@functools.lru_cache(maxsize=256)
def _partition(i: int, params: ConstructionParams) -> tuple[SubBlock, ...]:
    lo, hi = params.block_bounds(i)
    M = params.M(i)
    size = hi - lo + 1
    base, extra = divmod(size, M)
    parts = []
    start = lo
    for m in range(1, M + 1):
        n = base + (1 if m <= extra else 0)
        parts.append(SubBlock(m, start, start + n - 1))
        start += n
    assert start == hi + 1
    target = Fraction(size, M)
    assert all(abs(p.size - target) <= 1 for p in parts)
    return tuple(parts)


class SymbolicTerm(NamedTuple):
    """Term ``n_k = 2**T(i) * (2**k + m)`` described by its labels."""

    i: int
    m: int
    k: int

    def reduced(self) -> int:
        """``n_k / 2**T(i)``, i.e. ``2**k + m``."""
        return (1 << self.k) + self.m


def term_symbolic(k: int, params: ConstructionParams) -> SymbolicTerm:
    i = block_of(k, params.R)
    for part in subblock_partition(i, params):
        if part.lo <= k <= part.hi:
            return SymbolicTerm(i, part.m, k)
    raise AssertionError("partition does not cover its block")


def tower_separation_holds(params: ConstructionParams, i: int) -> bool:
    """``min n_k over block i > 2**i * max n_l over block i-1``."""
    if i < 2:
        return True
    lo, _ = params.block_bounds(i)
    _, prev_hi = params.block_bounds(i - 1)
    t_now, t_prev = params.T(i), params.T(i - 1)
    # min side >= 2**(t_now+lo); max side < 2**(i + t_prev + prev_hi + 1)
    if t_now + lo >= i + t_prev + prev_hi + 1:
        return True
    smallest = (1 << t_now) * ((1 << lo) + 1)
    largest = (1 << t_prev) * ((1 << prev_hi) + params.M(i - 1))
    return smallest > (1 << i) * largest


# --------------------------------------------------------------------------
# sequence families


class SequenceSpec:
    """Common interface of the sequence families."""

    name = "sequence"

    def term(self, k: int, bit_cap: int = BIT_CAP) -> int:
        raise NotImplementedError

    def bit_length(self, k: int) -> int:
        raise NotImplementedError

    def digits(self, k: int) -> list[tuple[int, int]]:
        """Signed binary digits ``[(coef, exponent), ...]`` with sum ``n_k``."""
        return signed_digits(self.term(k))

    def _check(self, k: int, bit_cap: int):
        if k < 1:
            raise ValueError("indices start at 1")
        bits = self.bit_length(k)
        if bits > bit_cap:
            raise TowerOverflow(k, bits, bit_cap)

    def describe(self) -> dict:
        return {"kind": self.name}


@dataclass(frozen=True)
class Geometric(SequenceSpec):
    """``n_k = q**k``."""

    q: int = 2
    name = "geometric"

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 2:
            raise ValueError("geometric base must be an integer >= 2")

    def bit_length(self, k):
        if self.q & (self.q - 1) == 0:
            return k * (self.q.bit_length() - 1) + 1
        return math.floor(k * math.log2(self.q)) + 2  # upper bound

    def term(self, k, bit_cap=BIT_CAP):
        self._check(k, bit_cap)
        return self.q**k

    def digits(self, k):
        if self.q & (self.q - 1) == 0:
            return [(1, k * (self.q.bit_length() - 1))]
        return signed_digits(self.term(k))

    def describe(self):
        return {"kind": self.name, "q": self.q}


@dataclass(frozen=True)
class ErdosFortet(SequenceSpec):
    """``n_k = 2**k - 1``."""

    name = "erdos-fortet"

    def bit_length(self, k):
        return k

    def term(self, k, bit_cap=BIT_CAP):
        self._check(k, bit_cap)
        return (1 << k) - 1

    def digits(self, k):
        if k == 1:
            return [(1, 0)]
        return [(1, k), (-1, 0)]


@dataclass(frozen=True)
class PaperSequence(SequenceSpec):
    """``n_k = 2**T(i) * (2**k + m)`` for k in sub-block m of block i."""

    params: ConstructionParams = field(default_factory=ConstructionParams)
    name = "paper"

    def bit_length(self, k):
        t = term_symbolic(k, self.params)
        return self.params.T(t.i) + t.reduced().bit_length()

    def term(self, k, bit_cap=BIT_CAP):
        self._check(k, bit_cap)
        t = term_symbolic(k, self.params)
        return t.reduced() << self.params.T(t.i)

    def digits(self, k):
        t = term_symbolic(k, self.params)
        shift = self.params.T(t.i)
        return [(c, e + shift) for c, e in signed_digits(t.reduced())]

    def describe(self):
        p = self.params
        return {"kind": self.name, "R": p.R, "eps": str(p.eps), "d": p.d, "K": str(p.K),
                "tower": p.tower.describe()}


@dataclass(frozen=True)
class ExplicitSequence(SequenceSpec):
    """A finite, user-supplied strictly increasing sequence."""

    values: tuple[int, ...] = ()
    name = "explicit"

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if not vals or vals[0] < 1:
            raise ValueError("explicit sequences need positive terms")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise NotIncreasing("explicit sequence is not strictly increasing")
        object.__setattr__(self, "values", vals)

    def bit_length(self, k):
        if k > len(self.values):
            raise IndexError(f"explicit sequence has only {len(self.values)} terms")
        return self.values[k - 1].bit_length()

    def term(self, k, bit_cap=BIT_CAP):
        self._check(k, bit_cap)
        return self.values[k - 1]

    def describe(self):
        return {"kind": self.name, "length": len(self.values)}


def term_value(k: int, spec: SequenceSpec, bit_cap: int = BIT_CAP) -> int:
    """Exact k-th term; raises :class:`TowerOverflow` above ``bit_cap`` bits."""
    return spec.term(k, bit_cap)


def sequence_prefix(N: int, spec: SequenceSpec, bit_cap: int = BIT_CAP) -> list[int]:
    if N < 1:
        raise ValueError("prefix length must be >= 1")
    return [spec.term(k, bit_cap) for k in range(1, N + 1)]


def hadamard_min_ratio(prefix: Sequence[int]) -> Fraction:
    """Smallest ratio ``n_{k+1}/n_k`` as an exact rational."""
    if len(prefix) < 2:
        raise ValueError("need at least two terms")
    best = None
    for a, b in zip(prefix, prefix[1:]):
        r = Fraction(b, a)
        if r <= 1:
            raise NotIncreasing(f"ratio {r} <= 1")
        if best is None or r < best:
            best = r
    return best
