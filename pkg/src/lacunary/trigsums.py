"""Trigonometric polynomials and lacunary sums evaluated at dyadic points.

Evaluation is batched: a list of frequencies (as signed digits) is reduced
against many points at once with :class:`~lacunary.dyadic.FrequencyTable`,
and each point's sum is formed with ``math.fsum``.  Because every row is
summed independently and exactly rounded, results do not depend on the
chunking of points or on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dyadic import (
    DyadicPoint,
    FrequencyTable,
    PointBatch,
    fixed_point_fraction,
    frac_part_mul,
    precision_for,
    scale_digits,
    signed_digits,
)
from .errors import DegenerateWeights, TowerOverflow
from .sequence import (
    BIT_CAP,
    ConstructionParams,
    PaperSequence,
    SequenceSpec,
    subblock_partition,
)

COS, SIN = "cos", "sin"

# elements (rows * digits) handled per chunk
_CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True)
class TrigPoly:
    """``sum(amp * cos|sin(2*pi*freq*x))`` with positive integer frequencies."""

    terms: tuple[tuple[Fraction, int, str], ...] = ()

    def __post_init__(self):
        clean = []
        for amp, freq, phase in self.terms:
            if int(freq) != freq or freq < 1:
                raise ValueError("frequencies must be positive integers")
            if phase not in (COS, SIN):
                raise ValueError(f"phase must be 'cos' or 'sin', got {phase!r}")
            clean.append((Fraction(amp), int(freq), phase))
        object.__setattr__(self, "terms", tuple(clean))

    @classmethod
    def cosine(cls, freq: int = 1) -> "TrigPoly":
        return cls(((Fraction(1), freq, COS),))

    @classmethod
    def power_sum(cls, d: int) -> "TrigPoly":
        """``sum_{j<d} cos(2*pi*2**j*x)``."""
        return cls(tuple((Fraction(1), 1 << j, COS) for j in range(d)))

    @classmethod
    def erdos_fortet(cls) -> "TrigPoly":
        """``cos(2*pi*x) + cos(4*pi*x)``."""
        return cls(((Fraction(1), 1, COS), (Fraction(1), 2, COS)))

    @classmethod
    def zero(cls) -> "TrigPoly":
        return cls(())

    def l2_norm_squared(self) -> Fraction:
        agg: dict[tuple[str, int], Fraction] = {}
        for amp, freq, phase in self.terms:
            agg[phase, freq] = agg.get((phase, freq), Fraction(0)) + amp
        return sum((v * v for v in agg.values()), Fraction(0)) / 2

    def is_pure_cosine(self) -> bool:
        return len(self.terms) == 1 and self.terms[0][0] == 1 and self.terms[0][2] == COS

    def describe(self) -> list:
        return [[str(a), f, p] for a, f, p in self.terms]


def eval_trig_poly(f: TrigPoly, x: DyadicPoint) -> float:
    """``f(x)`` with each phase reduced exactly before the cosine call."""
    vals = []
    for amp, freq, phase in f.terms:
        t = fixed_point_fraction(freq, x)
        trig = math.cos if phase == COS else math.sin
        vals.append(float(amp) * trig(2 * math.pi * t))
    return math.fsum(vals)


# --------------------------------------------------------------------------
# batched evaluation core


@dataclass
class TermList:
    """Flattened summands ``amp * trig(2*pi*freq*x)`` in a fixed order."""

    digits: list = field(default_factory=list)
    amps: list = field(default_factory=list)
    is_sin: list = field(default_factory=list)

    def add(self, digits, amp, phase):
        self.digits.append(digits)
        self.amps.append(float(amp))
        self.is_sin.append(phase == SIN)

    def __len__(self):
        return len(self.digits)

    def compile(self) -> "_Compiled":
        return _Compiled(self)


class _Compiled:
    def __init__(self, terms: TermList):
        self.table = FrequencyTable(terms.digits)
        self.amps = np.array(terms.amps, dtype=np.float64)
        self.is_sin = np.array(terms.is_sin, dtype=bool)
        self.any_sin = bool(self.is_sin.any())
        self.n = len(terms)

    @property
    def max_bits(self):
        return self.table.max_bits

    def values(self, batch: PointBatch, rows: slice) -> np.ndarray:
        angle = (2 * np.pi) * self.table.fractions(batch, rows)
        out = np.cos(angle)
        if self.any_sin:
            out[:, self.is_sin] = np.sin(angle[:, self.is_sin])
        return out * self.amps


def _row_chunks(n_rows: int, n_digits: int) -> list[slice]:
    step = max(1, _CHUNK_ELEMENTS // max(1, n_digits))
    return [slice(a, min(n_rows, a + step)) for a in range(0, n_rows, step)]


def evaluate_terms(
    terms: TermList | _Compiled,
    points: Sequence[DyadicPoint] | PointBatch,
    cuts: Sequence[int] | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Sum the summands at every point.

    With ``cuts`` the result has one column per cut ``c`` holding the sum of
    the first ``c`` summands; otherwise a 1-d array of full sums.
    """
    comp = terms if isinstance(terms, _Compiled) else terms.compile()
    batch = points if isinstance(points, PointBatch) else PointBatch(points, comp.table.max_exponent)
    n_rows = len(batch)
    if comp.n == 0:
        shape = (n_rows, len(cuts)) if cuts is not None else (n_rows,)
        return np.zeros(shape)
    bounds = None
    if cuts is not None:
        bounds = [0] + [min(int(c), comp.n) for c in cuts]
        if any(b < a for a, b in zip(bounds, bounds[1:])):
            raise ValueError("cuts must be non-decreasing")

    def run(rows: slice) -> np.ndarray:
        vals = comp.values(batch, rows).tolist()
        if bounds is None:
            return np.array([math.fsum(r) for r in vals])
        out = np.empty((len(vals), len(bounds) - 1))
        for r, row in enumerate(vals):
            pieces = [math.fsum(row[a:b]) for a, b in zip(bounds, bounds[1:])]
            for j in range(len(pieces)):
                out[r, j] = math.fsum(pieces[: j + 1])
        return out

    chunks = _row_chunks(n_rows, comp.table.exps.size)
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    return np.concatenate(parts, axis=0)


def _check_bits(spec: SequenceSpec, ks, bit_cap: int):
    for k in ks:
        bits = spec.bit_length(k)
        if bits > bit_cap:
            raise TowerOverflow(k, bits, bit_cap)


def lacunary_terms(f: TrigPoly, spec: SequenceSpec, ks, bit_cap: int = BIT_CAP) -> TermList:
    """Summands of ``sum_k f(n_k x)`` over the indices ``ks`` (k-major order)."""
    ks = list(ks)
    if ks:
        _check_bits(spec, (ks[-1],), bit_cap)
    terms = TermList()
    for k in ks:
        base = spec.digits(k)
        for amp, freq, phase in f.terms:
            terms.add(scale_digits(base, freq) if freq != 1 else base, amp, phase)
    return terms


def required_precision(terms: TermList | _Compiled) -> int:
    comp = terms if isinstance(terms, _Compiled) else terms.compile()
    return precision_for(comp.max_bits)


def lacunary_sum(f: TrigPoly, spec: SequenceSpec, N: int, x: DyadicPoint,
                 bit_cap: int = BIT_CAP) -> float:
    """``S_N(x) = sum_{k<=N} f(n_k x)``."""
    terms = lacunary_terms(f, spec, range(1, N + 1), bit_cap)
    return float(evaluate_terms(terms, [x])[0])


def lacunary_sums(f: TrigPoly, spec: SequenceSpec, N: int, points, workers: int = 1,
                  bit_cap: int = BIT_CAP) -> np.ndarray:
    terms = lacunary_terms(f, spec, range(1, N + 1), bit_cap)
    return evaluate_terms(terms, points, workers=workers)


# --------------------------------------------------------------------------
# blocks of the construction


def _block_terms(f: TrigPoly, params: ConstructionParams, i: int, reduced: bool,
                 bit_cap: int = BIT_CAP) -> TermList:
    shift = 0
    if not reduced:
        spec = PaperSequence(params)
        _check_bits(spec, (params.block_bounds(i)[1],), bit_cap)
        shift = params.T(i)
    terms = TermList()
    for part in subblock_partition(i, params):
        for k in range(part.lo, part.hi + 1):
            nu = [(c, e + shift) for c, e in signed_digits((1 << k) + part.m)]
            for amp, freq, phase in f.terms:
                terms.add(scale_digits(nu, freq), amp, phase)
    return terms


def block_sum(f: TrigPoly, params: ConstructionParams, i: int, x: DyadicPoint,
              bit_cap: int = BIT_CAP) -> float:
    """``Y_i(x) = sum_{k in block i} f(n_k x)`` on the actual sequence."""
    return float(evaluate_terms(_block_terms(f, params, i, False, bit_cap), [x])[0])


def reduced_block_sum(f: TrigPoly, params: ConstructionParams, i: int, x: DyadicPoint) -> float:
    """Block sum with the tower factor removed: frequencies ``2**k + m``."""
    return float(evaluate_terms(_block_terms(f, params, i, True), [x])[0])


def block_sums(f: TrigPoly, params: ConstructionParams, i: int, points, reduced: bool = True,
               workers: int = 1, bit_cap: int = BIT_CAP) -> np.ndarray:
    return evaluate_terms(_block_terms(f, params, i, reduced, bit_cap), points, workers=workers)


def block_precision(f: TrigPoly, params: ConstructionParams, i: int, reduced: bool = True) -> int:
    return required_precision(_block_terms(f, params, i, reduced))


# --------------------------------------------------------------------------
# exact second moment


def frequency_spectrum(f: TrigPoly, spec: SequenceSpec, N: int,
                       bit_cap: int = BIT_CAP) -> dict[tuple[str, int], Fraction]:
    """Aggregate amplitude per (phase, frequency) of ``sum_{k<=N} f(n_k x)``."""
    agg: dict[tuple[str, int], Fraction] = {}
    for k in range(1, N + 1):
        n = spec.term(k, bit_cap)
        for amp, freq, phase in f.terms:
            key = (phase, freq * n)
            agg[key] = agg.get(key, Fraction(0)) + amp
    return agg


def sigma_N_squared(f: TrigPoly, spec: SequenceSpec, N: int, bit_cap: int = BIT_CAP) -> Fraction:
    """``integral_0^1 (sum_{k<=N} f(n_k x))**2 dx`` as an exact rational.

    Distinct frequencies are orthogonal and each surviving amplitude ``A``
    contributes ``A**2 / 2``.
    """
    agg = frequency_spectrum(f, spec, N, bit_cap)
    return sum((v * v for v in agg.values()), Fraction(0)) / 2


def block_sigma_squared(f: TrigPoly, params: ConstructionParams, i: int) -> Fraction:
    """Exact second moment of the reduced block sum (frequencies ``2**k + m``)."""
    agg: dict[tuple[str, int], Fraction] = {}
    for part in subblock_partition(i, params):
        for k in range(part.lo, part.hi + 1):
            nu = (1 << k) + part.m
            for amp, freq, phase in f.terms:
                key = (phase, freq * nu)
                agg[key] = agg.get(key, Fraction(0)) + amp
    return sum((v * v for v in agg.values()), Fraction(0)) / 2


# --------------------------------------------------------------------------
# decomposition of a block sum


@dataclass(frozen=True)
class DecompositionReport:
    """Terms of the split of a reduced block sum at one point.

    ``direct = main - drag - sine + error`` where
    ``main = d * sum_k cos(2 pi 2^k x)``,
    ``drag = 2 * sum_m sum_j sin(pi 2^j m x)**2 * sum_{k in sub-block m} cos(2 pi 2^k x)``,
    ``sine = sum_m sum_j sin(2 pi 2^j m x) * sum_{k in sub-block m} sin(2 pi 2^k x)``
    and ``error`` collects the boundary cosines of every sub-block.
    """

    direct: float
    main: float
    drag: float
    sine: float
    error: float
    error_bound: int
    error_count: int
    residual: float


def error_term_count(d: int, size: int) -> int:
    """Number of boundary cosines of one sub-block with ``size`` indices."""
    return 2 * sum(min(j, size) for j in range(d))


def _decomposition_tables(params: ConstructionParams, i: int):
    d = params.d
    parts = subblock_partition(i, params)
    direct, error = TermList(), TermList()
    pure_cos, pure_sin = TermList(), TermList()
    local_sq, local_sin = TermList(), TermList()
    for part in parts:
        for k in range(part.lo, part.hi + 1):
            pure_cos.add([(1, k)], 1, COS)
            pure_sin.add([(1, k)], 1, SIN)
            for j in range(d):
                direct.add(signed_digits((1 << (k + j)) + (part.m << j)), 1, COS)
                if k + j > part.hi:
                    error.add(signed_digits((1 << (k + j)) + (part.m << j)), 1, COS)
                if k - j < part.lo:
                    error.add(signed_digits((1 << k) + (part.m << j)), -1, COS)
        for j in range(d):
            local_sq.add(signed_digits(part.m << j), 1, COS)
            local_sin.add(signed_digits(part.m << j), 1, SIN)
    return parts, direct, error, pure_cos, pure_sin, local_sq, local_sin


def decomposition_batch(params: ConstructionParams, i: int, points) -> dict[str, np.ndarray]:
    """Vectorized :func:`decomposition_terms` over many points."""
    d = params.d
    parts, direct, error, pure_cos, pure_sin, local_sq, local_sin = _decomposition_tables(params, i)
    max_exp = max(FrequencyTable(t.digits).max_exponent for t in (direct, error, pure_cos))
    batch = points if isinstance(points, PointBatch) else PointBatch(points, max_exp)

    direct_v = evaluate_terms(direct, batch)
    error_v = evaluate_terms(error, batch) if len(error) else np.zeros(len(batch))
    cuts = np.cumsum([p.size for p in parts])
    cos_cum = evaluate_terms(pure_cos, batch, cuts=cuts)
    sin_cum = evaluate_terms(pure_sin, batch, cuts=cuts)
    cos_blocks = np.diff(np.concatenate([np.zeros((len(batch), 1)), cos_cum], axis=1), axis=1)
    sin_blocks = np.diff(np.concatenate([np.zeros((len(batch), 1)), sin_cum], axis=1), axis=1)

    # per-sub-block local factors; columns ordered (m, j)
    t = local_sq.compile().table.fractions(batch)
    sq = np.sin(np.pi * t) ** 2
    sn = np.sin(2 * np.pi * t)
    n_parts = len(parts)
    sq_m = np.array([[math.fsum(r) for r in row.reshape(n_parts, d).tolist()] for row in sq])
    sn_m = np.array([[math.fsum(r) for r in row.reshape(n_parts, d).tolist()] for row in sn])

    main = d * cos_cum[:, -1]
    drag = np.array([2 * math.fsum(r) for r in (sq_m * cos_blocks).tolist()])
    sine = np.array([math.fsum(r) for r in (sn_m * sin_blocks).tolist()])
    recombined = np.array([math.fsum(v) for v in zip(main, -drag, -sine, error_v)])
    return {
        "direct": direct_v,
        "main": main,
        "drag": drag,
        "sine": sine,
        "error": error_v,
        "residual": np.abs(direct_v - recombined),
        "error_bound": d * d * i,
        "error_count": sum(error_term_count(d, p.size) for p in parts),
    }


def decomposition_terms(params: ConstructionParams, i: int, x: DyadicPoint) -> DecompositionReport:
    """Compute every term of the block split independently at ``x``."""
    r = decomposition_batch(params, i, [x])
    return DecompositionReport(
        direct=float(r["direct"][0]),
        main=float(r["main"][0]),
        drag=float(r["drag"][0]),
        sine=float(r["sine"][0]),
        error=float(r["error"][0]),
        error_bound=r["error_bound"],
        error_count=r["error_count"],
        residual=float(r["residual"][0]),
    )


# --------------------------------------------------------------------------
# the small window near zero and its weights


def local_window_exponent(i: int, params: ConstructionParams) -> int:
    """Smallest ``h`` with ``1/(20 d 2^d M) <= 2^-h <= 1/(10 d 2^d M)``."""
    d = params.d
    lower = 10 * d * (1 << d) * params.M(i)
    h = (lower - 1).bit_length()
    assert lower <= (1 << h) <= 2 * lower
    return h


@dataclass(frozen=True)
class WindowWeights:
    a: int
    i: int
    s: tuple[float, ...]  # indexed by m - 1
    S: float
    lam_by_m: tuple[float, ...]
    lam: np.ndarray  # one weight per k in the block, in index order
    exponents: tuple[int, ...]  # the k of the block

    @property
    def Lambda(self) -> float:
        return float(self.lam.max()) if self.lam.size else 0.0


def window_weights(a: int, i: int, params: ConstructionParams) -> WindowWeights:
    """Local factors ``s_{a,m,i}`` frozen at the left end of window cell ``a``.

    The cell is ``[a/2^(R^(i-1)), (a+1)/2^(R^(i-1))]`` and must lie in
    ``[0, 2^-h_i]``.  Raises :class:`DegenerateWeights` for ``a = 0``.
    """
    scale = params.R ** (i - 1)
    h = local_window_exponent(i, params)
    if a < 0 or (a << h) > (1 << scale):
        raise ValueError(f"a/2^{scale} must lie in [0, 2^-{h}]")
    parts = subblock_partition(i, params)
    x = DyadicPoint(a, scale) if a < (1 << scale) else None
    s = []
    for part in parts:
        vals = []
        for j in range(params.d):
            t = frac_part_mul(part.m << j, x).as_fraction() if x is not None else Fraction(0)
            vals.append(math.sin(math.pi * float(t)) ** 2)
        s.append(math.fsum(vals))
    S = math.sqrt(math.fsum(p.size * v * v for p, v in zip(parts, s)))
    ks = tuple(k for p in parts for k in range(p.lo, p.hi + 1))
    if S == 0.0:
        zero = WindowWeights(a, i, tuple(s), 0.0, tuple(0.0 for _ in s), np.zeros(len(ks)), ks)
        raise DegenerateWeights(zero)
    lam_by_m = tuple(v / S for v in s)
    lam = np.array([lam_by_m[p.m - 1] for p in parts for _ in range(p.size)])
    return WindowWeights(a, i, tuple(s), S, lam_by_m, lam, ks)
