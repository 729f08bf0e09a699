"""Exact dyadic points and reduction of ``n * x mod 1``.

A sample point is ``x = X / 2**P``.  Products with integer frequencies are
reduced modulo one before any floating point operation, so frequencies with
millions of bits lose no accuracy.

The batched path never forms ``n * X``.  Every frequency is written as a
short signed binary expansion ``n = sum(c_t * 2**e_t)`` and
``frac(2**e * x)`` is read directly off the bits of ``X`` as a 64-bit
fixed-point number.  Summing these windows in wrapping ``uint64`` arithmetic
is arithmetic modulo one, so the only rounding is the truncation of each
window to 64 fractional bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

TWO64 = float(2**64)
GUARD_BITS = 64


@dataclass(frozen=True)
class DyadicPoint:
    """The point ``X / 2**P`` of ``[0, 1)``."""

    X: int
    P: int

    def __post_init__(self):
        if self.P < 1:
            raise ValueError("precision must be positive")
        if not 0 <= self.X < (1 << self.P):
            raise ValueError("numerator must satisfy 0 <= X < 2**P")

    @classmethod
    def from_fraction(cls, value, P: int) -> "DyadicPoint":
        """Truncate ``value mod 1`` to ``P`` bits."""
        fr = Fraction(value) % 1
        return cls((fr.numerator << P) // fr.denominator, P)

    def as_fraction(self) -> Fraction:
        return Fraction(self.X, 1 << self.P)

    def __float__(self) -> float:
        return self.X / 2.0**self.P if self.P < 1000 else float(self.as_fraction())

    def shift(self, s: int) -> "DyadicPoint":
        """``frac(2**s * x)``."""
        return DyadicPoint((self.X << s) & ((1 << self.P) - 1), self.P)

    def add(self, other: "DyadicPoint") -> "DyadicPoint":
        """``(x + y) mod 1`` at the larger of the two precisions."""
        P = max(self.P, other.P)
        X = (self.X << (P - self.P)) + (other.X << (P - other.P))
        return DyadicPoint(X & ((1 << P) - 1), P)

    def with_precision(self, P: int) -> "DyadicPoint":
        if P >= self.P:
            return DyadicPoint(self.X << (P - self.P), P)
        return DyadicPoint(self.X >> (self.P - P), P)


def frac_part_mul(n: int, x: DyadicPoint) -> DyadicPoint:
    """Exact ``n * x mod 1``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return DyadicPoint((n * x.X) & ((1 << x.P) - 1), x.P)


def signed_digits(n: int) -> list[tuple[int, int]]:
    """Non-adjacent form of ``n``: ``[(+-1, exponent), ...]`` summing to ``n``."""
    if n < 0:
        return [(-c, e) for c, e in signed_digits(-n)]
    if n & (n - 1) == 0:
        return [(1, n.bit_length() - 1)] if n else []
    half = n >> 1
    three_halves = n + half
    changed = half ^ three_halves
    out = []
    for sign, mask in ((1, three_halves & changed), (-1, half & changed)):
        while mask:
            low = mask & -mask
            out.append((sign, low.bit_length() - 1))
            mask ^= low
    out.sort(key=lambda t: t[1])
    return out


def scale_digits(digits: Iterable[tuple[int, int]], g: int) -> list[tuple[int, int]]:
    """Digits of ``g * n`` from the digits of ``n`` (``g`` a positive integer)."""
    gd = signed_digits(g)
    return [(c * cg, e + eg) for c, e in digits for cg, eg in gd]


def digits_value(digits: Iterable[tuple[int, int]]) -> int:
    return sum(c << e for c, e in digits)


def digits_bits(digits: Sequence[tuple[int, int]]) -> int:
    """An upper bound on the bit length of the represented integer."""
    return max((e + abs(c).bit_length() for c, e in digits), default=0) + 1


def precision_for(max_bits: int) -> int:
    """Sampling precision: frequency bit length plus guard bits."""
    return max_bits + GUARD_BITS


class PointBatch:
    """A batch of dyadic points packed as left-aligned big-endian bytes.

    Row ``r`` holds the fractional bits of point ``r``; bit 0 is the bit of
    weight 1/2.  The byte matrix is padded with zeros so that every window
    up to ``max_exponent`` can be read.
    """

    def __init__(self, points: Sequence[DyadicPoint], max_exponent: int = 0):
        if not points:
            raise ValueError("empty batch")
        self.points = list(points)
        P = max(p.P for p in self.points)
        width_bits = max(P, max_exponent + 1) + 72
        self.nbytes = -(-width_bits // 8)
        total = 8 * self.nbytes
        buf = bytearray()
        for p in self.points:
            buf += (p.X << (total - p.P)).to_bytes(self.nbytes, "big")
        self.bytes = np.frombuffer(bytes(buf), dtype=np.uint8).reshape(len(self.points), self.nbytes)

    def __len__(self):
        return len(self.points)

    def windows(self, exponents: np.ndarray, rows: slice | None = None) -> np.ndarray:
        """``floor(2**64 * frac(2**e * x))`` for each row and exponent.

        Returns an array of shape ``(rows, len(exponents))`` and dtype uint64.
        """
        B = self.bytes if rows is None else self.bytes[rows]
        e = np.asarray(exponents, dtype=np.int64)
        if e.size and int(e.max()) // 8 + 8 >= self.nbytes:
            raise ValueError("exponent beyond the packed width")
        idx = e // 8
        s = (e % 8).astype(np.uint64)
        w = np.zeros((B.shape[0], e.size), dtype=np.uint64)
        for t in range(8):
            w |= B[:, idx + t].astype(np.uint64) << np.uint64(56 - 8 * t)
        tail = B[:, idx + 8].astype(np.uint64) >> (np.uint64(8) - s)
        return (w << s) | tail


class FrequencyTable:
    """Flattened signed digits of a list of frequencies.

    ``fixed_point(batch)`` gives ``2**64 * frac(n_j * x)`` (mod ``2**64``)
    for every frequency ``n_j`` and every point of the batch.
    """

    def __init__(self, digit_lists: Sequence[Sequence[tuple[int, int]]]):
        coefs, exps, starts = [], [], []
        for dl in digit_lists:
            starts.append(len(exps))
            if not dl:
                # zero frequency contributes frac = 0
                coefs.append(0)
                exps.append(0)
                continue
            for c, e in dl:
                coefs.append(c)
                exps.append(e)
        self.size = len(digit_lists)
        self.coefs = np.array(coefs, dtype=np.int64).astype(np.uint64)  # two's complement wrap
        self.exps = np.array(exps, dtype=np.int64)
        self.starts = np.array(starts, dtype=np.int64)
        self.max_exponent = int(self.exps.max()) if self.exps.size else 0
        self.max_bits = max((digits_bits(dl) for dl in digit_lists), default=1)

    @classmethod
    def from_integers(cls, ns: Iterable[int]) -> "FrequencyTable":
        return cls([signed_digits(int(n)) for n in ns])

    def fixed_point(self, batch: PointBatch, rows: slice | None = None) -> np.ndarray:
        w = batch.windows(self.exps, rows) * self.coefs
        if self.exps.size == self.size:
            return w
        return np.add.reduceat(w, self.starts, axis=1)

    def fractions(self, batch: PointBatch, rows: slice | None = None) -> np.ndarray:
        """``frac(n_j * x)`` as float64 in ``[0, 1]``."""
        return self.fixed_point(batch, rows) / TWO64


def fixed_point_fraction(n: int, x: DyadicPoint) -> float:
    """Float value of ``frac(n * x)`` via the exact integer path."""
    r = frac_part_mul(n, x)
    if r.P <= 64:
        return r.X / 2.0**r.P
    return (r.X >> (r.P - 64)) / TWO64


def turns_cos(frac):
    """``cos(2*pi*t)`` for ``t`` given in turns."""
    return np.cos(2 * np.pi * frac)


def turns_sin(frac):
    return np.sin(2 * np.pi * frac)


def neumaier_sum(values: Iterable[float]) -> float:
    """Compensated left-to-right sum (Kahan-Babuska-Neumaier)."""
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def exact_row_sums(values: np.ndarray) -> np.ndarray:
    """Correctly rounded sum of each row (``math.fsum``).

    Exact rounding makes the result independent of summation order and of
    how rows are distributed over workers.
    """
    values = np.atleast_2d(values)
    return np.array([math.fsum(row) for row in values.tolist()], dtype=np.float64)
