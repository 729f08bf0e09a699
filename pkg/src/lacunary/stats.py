"""Distributional experiments on lacunary sums.

Sample points are dyadic: point ``r`` of a batch draws its bits from a Philox
generator keyed by ``(seed, r)``, so a batch is reproducible, a smaller batch
is a prefix of a larger one, and results do not depend on how samples are
scheduled.  Bits are drawn most-significant first, which makes batches of
different precision agree on their leading bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .dyadic import DyadicPoint, PointBatch, frac_part_mul, precision_for
from .errors import WeightsNotNormalized
from .reports import ExperimentReport
from .sequence import BIT_CAP, ConstructionParams, ErdosFortet, SequenceSpec
from .trigsums import (
    COS,
    TermList,
    TrigPoly,
    block_sigma_squared,
    evaluate_terms,
    lacunary_terms,
    local_window_exponent,
    required_precision,
    sigma_N_squared,
    _block_terms,
)

MIXTURE_NODES = 10_000


# --------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SampleBatch:
    """``count`` uniform dyadic points of precision ``P`` drawn from ``seed``."""

    seed: int
    count: int
    P: int
    points: tuple[DyadicPoint, ...]
    window: int = 0  # points lie in [0, 2**-window)

    @classmethod
    def draw(cls, seed: int, count: int, P: int, window: int = 0) -> "SampleBatch":
        if not 0 <= seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if not 0 <= window < P:
            raise ValueError("window exponent must lie in [0, P)")
        bits = P - window
        nbytes = -(-bits // 8)
        drop = 8 * nbytes - bits
        pts = []
        for r in range(count):
            gen = np.random.Generator(np.random.Philox(key=seed + (r << 64)))
            X = int.from_bytes(gen.bytes(nbytes), "big") >> drop
            pts.append(DyadicPoint(X, P))
        return cls(seed, count, P, tuple(pts), window)


# --------------------------------------------------------------------------
# reference distributions


def normal_cdf(t):
    """Standard normal distribution function (scalar or array)."""
    out = ndtr(t)
    return float(out) if np.ndim(out) == 0 else out


def arcsine_cdf(t):
    """Distribution function of ``sqrt(2) * cos(2 pi U)`` for uniform U."""
    t = np.asarray(t, dtype=np.float64)
    r = np.clip(t / math.sqrt(2), -1.0, 1.0)
    out = 1.0 - np.arccos(r) / np.pi
    return float(out) if out.ndim == 0 else out


def variance_mixture_cdf(t, scale: float = 2.0, nodes: int = MIXTURE_NODES):
    """``integral_0^1 Phi(t / (scale * |cos(pi u)|)) du`` by the midpoint rule.

    Where the cosine vanishes the integrand is the indicator of ``t >= 0``.
    """
    scalar = np.ndim(t) == 0
    u = (np.arange(nodes) + 0.5) / nodes
    s = scale * np.abs(np.cos(np.pi * u))
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.empty_like(t)
    step = max(1, 2_000_000 // nodes)
    for a in range(0, t.size, step):
        tt = t[a:a + step, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(s > 0, tt / np.where(s > 0, s, 1.0), np.where(tt >= 0, np.inf, -np.inf))
        out[a:a + step] = ndtr(z).mean(axis=1)
    return float(out[0]) if scalar else out


def kolmogorov_distance(values, cdf: Callable = normal_cdf) -> float:
    """``sup_t |F_emp(t) - cdf(t)|`` using both one-sided jumps."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        raise ValueError("need at least one value")
    F = np.asarray(cdf(v), dtype=np.float64)
    n = v.size
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


# --------------------------------------------------------------------------
# central limit experiments


def _sample_values(terms: TermList, M: int, seed: int, workers: int):
    comp = terms.compile()
    batch = SampleBatch.draw(seed, M, required_precision(comp))
    values = evaluate_terms(comp, PointBatch(batch.points, comp.table.max_exponent), workers=workers)
    return batch, values


def clt_experiment(f: TrigPoly, spec: SequenceSpec, N: int, M: int, seed: int,
                   workers: int = 1, norm: float | None = None,
                   reference: Callable | None = None, max_distance: float | None = None,
                   keep_values: bool = False) -> ExperimentReport:
    """Kolmogorov distance of ``S_N(x)/norm`` to the normal law.

    ``norm`` defaults to ``sqrt(N/2)`` for a pure cosine and to the exact
    ``sigma_N`` otherwise.  An optional second ``reference`` CDF is compared
    as well.
    """
    if norm is None:
        norm = math.sqrt(N / 2) if f.is_pure_cosine() else math.sqrt(sigma_N_squared(f, spec, N))
    batch, sums = _sample_values(lacunary_terms(f, spec, range(1, N + 1)), M, seed, workers)
    values = sums / norm
    stats = {"distance": kolmogorov_distance(values), "norm": norm,
             "mean": math.fsum(values.tolist()) / M,
             "second_moment": math.fsum((values * values).tolist()) / M}
    if reference is not None:
        stats["reference_distance"] = kolmogorov_distance(values, reference)
    thresholds, passed = {}, {}
    if max_distance is not None:
        thresholds["max_distance"] = max_distance
        passed["distance"] = stats["distance"] <= max_distance
    report = ExperimentReport(
        "clt", {"f": f.describe(), "sequence": spec.describe(), "N": N, "M": M, "P": batch.P},
        seed, stats, thresholds, passed)
    if keep_values:
        report.values = values  # type: ignore[attr-defined]
        report.points = batch.points  # type: ignore[attr-defined]
    return report


def erdos_fortet_clt(N: int, M: int, seed: int, workers: int = 1,
                     keep_values: bool = False) -> ExperimentReport:
    """Normalized Erdos-Fortet sums against both the normal law and the
    variance mixture they actually converge to."""
    f, spec = TrigPoly.erdos_fortet(), ErdosFortet()
    norm = math.sqrt(sigma_N_squared(f, spec, N))
    scale = 2 * math.sqrt(N / 2) / norm
    report = clt_experiment(f, spec, N, M, seed, workers, norm=norm,
                            reference=lambda t: variance_mixture_cdf(t, scale),
                            keep_values=keep_values)
    report.name = "erdos-fortet-clt"
    report.params["mixture_scale"] = scale
    report.stats["mixture_distance"] = report.stats.pop("reference_distance")
    return report


def gaposhkin_experiment(weights: Sequence[float], M: int, seed: int,
                         exponents: Sequence[int] | None = None, workers: int = 1,
                         constant: float | None = None) -> ExperimentReport:
    """Distance of ``sqrt(2) * sum(lam_k cos(2 pi 2^k x))`` to the normal law.

    ``exponents`` defaults to ``1..len(weights)``.  The reported ratio is
    ``distance / Lambda**(1/4)`` with ``Lambda = max(lam_k)``.
    """
    lam = np.asarray(weights, dtype=np.float64)
    if lam.size == 0 or (lam < 0).any() or abs(math.fsum((lam * lam).tolist()) - 1.0) > 1e-9:
        raise WeightsNotNormalized("weights must be non-negative with squares summing to 1")
    exps = list(range(1, lam.size + 1)) if exponents is None else [int(e) for e in exponents]
    if len(exps) != lam.size:
        raise ValueError("one exponent per weight")
    terms = TermList()
    for w, e in zip(lam.tolist(), exps):
        terms.add([(1, e)], math.sqrt(2) * w, COS)
    batch, values = _sample_values(terms, M, seed, workers)
    Lambda = float(lam.max())
    dist = kolmogorov_distance(values)
    stats = {"distance": dist, "Lambda": Lambda, "ratio": dist / Lambda**0.25}
    thresholds, passed = {}, {}
    if constant is not None:
        thresholds["constant"] = constant
        passed["bounded"] = stats["ratio"] <= constant
    return ExperimentReport("gaposhkin", {"N": int(lam.size), "M": M, "P": batch.P,
                                          "exponents": [exps[0], exps[-1]]},
                            seed, stats, thresholds, passed)


# --------------------------------------------------------------------------
# law of the iterated logarithm


def lil_normalizer(N: int) -> float:
    return math.sqrt(2 * N * math.log(math.log(N)))


def lil_ratio_scan(f: TrigPoly, spec: SequenceSpec, Ns: Sequence[int], M: int = 0, seed: int = 0,
                   points: Sequence[DyadicPoint] | None = None, workers: int = 1,
                   bit_cap: int = BIT_CAP) -> ExperimentReport:
    """``|S_N(x)| / sqrt(2 N log log N)`` at every ``N`` for every sample.

    Pass ``points`` to evaluate at fixed points instead of drawing ``M``.
    """
    Ns = sorted(int(n) for n in Ns)
    if Ns[0] < 3:
        raise ValueError("log log N needs N >= 3")
    terms = lacunary_terms(f, spec, range(1, Ns[-1] + 1), bit_cap)
    comp = terms.compile()
    if points is None:
        batch = SampleBatch.draw(seed, M, precision_for(comp.max_bits))
        points = batch.points
    width = len(f.terms)
    if width == 0:
        sums = np.zeros((len(points), len(Ns)))
    else:
        pb = PointBatch(points, comp.table.max_exponent)
        sums = evaluate_terms(comp, pb, cuts=[n * width for n in Ns], workers=workers)
    ratios = np.abs(sums) / np.array([lil_normalizer(n) for n in Ns])
    per_max = ratios.max(axis=0)
    stats = {
        "N": Ns,
        "max_ratio": per_max,
        "mean_ratio": [math.fsum(c) / len(c) for c in ratios.T.tolist()],
        "running_max": np.maximum.accumulate(per_max),
        "finite": bool(np.isfinite(ratios).all()),
    }
    report = ExperimentReport("lil", {"f": f.describe(), "sequence": spec.describe(),
                                      "M": len(points)}, seed, stats)
    report.ratios = ratios  # type: ignore[attr-defined]
    report.sums = sums  # type: ignore[attr-defined]
    report.points = list(points)  # type: ignore[attr-defined]
    return report


# --------------------------------------------------------------------------
# the Erdos-Fortet factorization


def _erdos_fortet_terms(N: int):
    """Summands of both sides, evaluated at y = x/2 to absorb half frequencies."""
    lhs, rhs_inner, rhs_edge = TermList(), TermList(), TermList()
    for k in range(1, N + 1):
        lhs.add([(1, k + 1), (-1, 1)], 1, COS)  # 2(2^k - 1)
        lhs.add([(1, k + 2), (-1, 2)], 1, COS)  # 4(2^k - 1)
        rhs_inner.add([(1, k + 1), (-1, 1), (-1, 0)], 1, COS)  # 2^(k+1) - 3
    rhs_edge.add([(1, 0)], 1, COS)  # cos(pi x)
    rhs_edge.add([(1, N + 2), (-1, 2)], 1, COS)  # 2(2^(N+1) - 2)
    return lhs, rhs_inner, rhs_edge


def erdos_fortet_identity_residuals(N: int, points: Sequence[DyadicPoint]) -> np.ndarray:
    if N < 1:
        raise ValueError("N must be >= 1")
    halves = [DyadicPoint(p.X, p.P + 1) for p in points]
    lhs, inner, edge = _erdos_fortet_terms(N)
    pb = PointBatch(halves, N + 3)
    left = evaluate_terms(lhs, pb)
    inner_v = evaluate_terms(inner, pb)
    t = edge.compile().table.fractions(pb)
    cos_half, tail = np.cos(2 * np.pi * t[:, 0]), np.cos(2 * np.pi * t[:, 1])
    right = np.array([math.fsum(v) for v in zip(2 * cos_half * inner_v, tail, [-1.0] * len(points))])
    return np.abs(left - right)


def erdos_fortet_identity_check(N: int, x: DyadicPoint) -> float:
    """Residual of the product form of the Erdos-Fortet sum at ``x``."""
    return float(erdos_fortet_identity_residuals(N, [x])[0])


def erdos_fortet_identity_experiment(N: int, trials: int, seed: int,
                                     tolerance: float = 1e-9) -> ExperimentReport:
    batch = SampleBatch.draw(seed, trials, precision_for(N + 3))
    res = erdos_fortet_identity_residuals(N, batch.points)
    worst = float(res.max())
    return ExperimentReport("erdos-fortet-check", {"N": N, "trials": trials, "P": batch.P}, seed,
                            {"max_residual": worst}, {"tolerance": tolerance},
                            {"residual": worst <= tolerance})


# --------------------------------------------------------------------------
# blocks of the construction


def large_value_threshold(params: ConstructionParams, i: int) -> float:
    """``(d sqrt(eps)/2 - 2) sqrt(2 R^i log log R^i) - 2 d^2 i - 2``."""
    d, eps, R = params.d, float(params.eps), params.R
    size = R**i
    return (d * math.sqrt(eps) / 2 - 2) * math.sqrt(2 * size * math.log(math.log(size))) - 2 * d * d * i - 2


def large_value_target(params: ConstructionParams, i: int) -> float:
    """Asymptotic lower bound ``i^(-1+eps/2) - 2 i^-2`` for the large-value measure."""
    eps = float(params.eps)
    return i ** (-1 + eps / 2) - 2 / i**2


def block_large_value_probability(params: ConstructionParams, i: int, M: int, seed: int,
                                  workers: int = 1) -> ExperimentReport:
    """Empirical measure of ``|reduced block sum| >= threshold(i)``.

    This is monitoring output: the comparison bound holds only for large i.
    """
    if i < 2:
        raise ValueError("need i >= 2")
    f = TrigPoly.power_sum(params.d)
    comp = _block_terms(f, params, i, True).compile()
    batch = SampleBatch.draw(seed, M, precision_for(comp.max_bits))
    values = evaluate_terms(comp, PointBatch(batch.points, comp.table.max_exponent), workers=workers)
    thr = large_value_threshold(params, i)
    measure = float(np.count_nonzero(np.abs(values) >= thr)) / M
    target = large_value_target(params, i)
    return ExperimentReport(
        "blockprob", {"R": params.R, "eps": str(params.eps), "d": params.d, "i": i, "M": M, "P": batch.P},
        seed, {"measure": measure, "threshold": thr, "target_lower_bound": target,
               "meets_target": measure >= target}, {}, {})


def local_variance_amplification(params: ConstructionParams, i: int, M: int, seed: int,
                                 workers: int = 1) -> ExperimentReport:
    """Second moment of the reduced block sum near 0 versus its global value.

    Points are drawn uniformly from ``[0, 2**-h_i)``; the global moment is
    the exact rational from orthogonality.
    """
    f = TrigPoly.power_sum(params.d)
    h = local_window_exponent(i, params)
    comp = _block_terms(f, params, i, True).compile()
    batch = SampleBatch.draw(seed, M, precision_for(comp.max_bits), window=h)
    values = evaluate_terms(comp, PointBatch(batch.points, comp.table.max_exponent), workers=workers)
    local = math.fsum((values * values).tolist()) / M
    global_exact = block_sigma_squared(f, params, i)
    ratio = local / float(global_exact)
    return ExperimentReport(
        "local-variance", {"R": params.R, "eps": str(params.eps), "d": params.d, "i": i, "M": M,
                           "h": h, "P": batch.P},
        seed, {"local_second_moment": local, "global_second_moment": global_exact, "ratio": ratio},
        {"min_ratio": params.d / 2}, {"amplified": ratio >= params.d / 2})


@dataclass(frozen=True)
class PeriodicityResult:
    exact_residual: int
    float_residual: float
    half_period_residual: float


def block_periodicity_check(params: ConstructionParams, i: int, trials: int, seed: int,
                            bit_cap: int = BIT_CAP) -> PeriodicityResult:
    """Compare the block sum at ``x`` and ``x + 2**-T(i)`` (and at half that shift)."""
    f = TrigPoly.power_sum(params.d)
    comp = _block_terms(f, params, i, False, bit_cap).compile()
    P = precision_for(comp.max_bits)
    T = params.T(i)
    batch = SampleBatch.draw(seed, trials, P)
    period = DyadicPoint(1 << (P - T), P)
    half = DyadicPoint(1 << (P - T - 1), P)
    shifted = [x.add(period) for x in batch.points]
    halved = [x.add(half) for x in batch.points]
    ns = [((1 << k) + p.m) << T for p, k in _block_indices(params, i)]
    exact = 0
    for x, y in zip(batch.points, shifted):
        for n in ns:
            exact = max(exact, abs(frac_part_mul(n, x).X - frac_part_mul(n, y).X))
    pb = PointBatch(list(batch.points) + shifted + halved, comp.table.max_exponent)
    v = evaluate_terms(comp, pb)
    base, per, hal = v[:trials], v[trials:2 * trials], v[2 * trials:]
    return PeriodicityResult(exact, float(np.abs(base - per).max()), float(np.abs(base - hal).max()))


def _block_indices(params: ConstructionParams, i: int):
    from .sequence import subblock_partition

    return [(p, k) for p in subblock_partition(i, params) for k in range(p.lo, p.hi + 1)]


__all__ = [
    "SampleBatch", "normal_cdf", "arcsine_cdf", "variance_mixture_cdf", "kolmogorov_distance",
    "clt_experiment", "erdos_fortet_clt", "gaposhkin_experiment", "lil_ratio_scan",
    "erdos_fortet_identity_check", "erdos_fortet_identity_residuals",
    "erdos_fortet_identity_experiment", "large_value_threshold", "large_value_target",
    "block_large_value_probability", "local_variance_amplification", "block_periodicity_check",
    "PeriodicityResult",
]
