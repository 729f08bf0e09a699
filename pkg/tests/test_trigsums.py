import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacunary import ConstructionParams, DegenerateWeights, ErdosFortet, Geometric, TrigPoly
from lacunary.dyadic import DyadicPoint
from lacunary.sequence import subblock_partition
from lacunary.stats import SampleBatch
from lacunary.trigsums import (
    TermList,
    block_sigma_squared,
    block_sum,
    block_sums,
    decomposition_batch,
    decomposition_terms,
    error_term_count,
    eval_trig_poly,
    evaluate_terms,
    lacunary_sum,
    lacunary_sums,
    local_window_exponent,
    reduced_block_sum,
    sigma_N_squared,
    window_weights,
)

from oracles import (
    erdos_fortet,
    exact_sum,
    geometric,
    sigma_squared_midpoint,
    sigma_squared_pairwise,
)

COS1 = [(1, 1)]
POWER2 = [(1, 1), (1, 2)]


def params(R=4, d=1):
    return ConstructionParams(R=R, eps=Fraction(1, 2), d=d)


def test_trig_poly_examples():
    assert eval_trig_poly(TrigPoly.cosine(), DyadicPoint(0, 8)) == 1
    assert eval_trig_poly(TrigPoly.power_sum(2), DyadicPoint(0, 8)) == 2
    assert eval_trig_poly(TrigPoly.erdos_fortet(), DyadicPoint(1, 1)) == pytest.approx(0, abs=1e-15)
    with pytest.raises(ValueError):
        TrigPoly(((1, 0, "cos"),))
    with pytest.raises(ValueError):
        TrigPoly(((1, 1, "tan"),))


def test_lacunary_sum_examples():
    assert lacunary_sum(TrigPoly.cosine(), Geometric(2), 10, DyadicPoint(0, 64)) == 10
    third = DyadicPoint.from_fraction(Fraction(1, 3), 64)
    assert abs(lacunary_sum(TrigPoly.cosine(), Geometric(2), 10, third) + 5) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(N=st.integers(1, 60), X=st.integers(0, 2**200 - 1))
def test_sum_matches_rational_oracle(N, X):
    x = DyadicPoint(X, 200)
    for f, spec, pre, terms in [
        (TrigPoly.cosine(), Geometric(2), geometric(2, N), COS1),
        (TrigPoly.erdos_fortet(), ErdosFortet(), erdos_fortet(N), POWER2),
        (TrigPoly.power_sum(3), Geometric(3), geometric(3, min(N, 30)), [(1, 1), (1, 2), (1, 4)]),
    ]:
        n = len(pre)
        got = lacunary_sum(f, spec, n, x)
        assert got == pytest.approx(exact_sum(terms, pre, x.as_fraction()), abs=1e-10)


def test_sine_terms():
    f = TrigPoly(((Fraction(1), 1, "sin"), (Fraction(1, 2), 3, "cos")))
    x = DyadicPoint(3, 4)
    expected = math.sin(2 * math.pi * 3 / 16) + 0.5 * math.cos(2 * math.pi * 9 / 16)
    assert eval_trig_poly(f, x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("N", [1, 2, 7, 33, 64])
def test_sigma_squared_exact(N):
    assert sigma_N_squared(TrigPoly.cosine(), Geometric(2), N) == Fraction(N, 2)
    assert sigma_N_squared(TrigPoly.erdos_fortet(), ErdosFortet(), N) == N
    assert sigma_N_squared(TrigPoly.power_sum(2), Geometric(2), N) == 2 * N - 1
    assert sigma_N_squared(TrigPoly.power_sum(2), Geometric(2), N) == sigma_squared_pairwise(POWER2, geometric(2, N))
    assert sigma_N_squared(TrigPoly.erdos_fortet(), ErdosFortet(), N) == sigma_squared_pairwise(POWER2, erdos_fortet(N))


@pytest.mark.parametrize("N", [1, 4, 8])
def test_sigma_squared_against_quadrature(N):
    for f, spec, pre, terms in [
        (TrigPoly.power_sum(2), Geometric(2), geometric(2, N), POWER2),
        (TrigPoly.erdos_fortet(), ErdosFortet(), erdos_fortet(N), POWER2),
        (TrigPoly.power_sum(3), Geometric(3), geometric(3, N), [(1, 1), (1, 2), (1, 4)]),
    ]:
        assert abs(float(sigma_N_squared(f, spec, N)) - sigma_squared_midpoint(terms, pre)) <= 1e-4


@pytest.mark.parametrize("d", [1, 2, 5])
def test_l2_norm(d):
    f = TrigPoly.power_sum(d)
    assert f.l2_norm_squared() == Fraction(d, 2)
    assert sigma_N_squared(f, Geometric(2), 1) == Fraction(d, 2)


def test_block_sum_examples():
    p1 = params(d=1)
    assert reduced_block_sum(TrigPoly.power_sum(1), p1, 1, DyadicPoint(0, 8)) == 4
    assert block_sum(TrigPoly.power_sum(1), p1, 1, DyadicPoint(0, 8)) == 4
    p2 = params(d=2)
    assert reduced_block_sum(TrigPoly.power_sum(2), p2, 1, DyadicPoint(1, 1)) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("i", [1, 2, 3])
def test_tower_substitution(i):
    p = params(d=2)
    f = TrigPoly.power_sum(2)
    T = p.T(i)
    for X in (1, 12345, 2**90 + 17):
        x = DyadicPoint(X, 200)
        scaled = DyadicPoint(X, 200 + T)
        assert block_sum(f, p, i, scaled) == reduced_block_sum(f, p, i, x)


def test_block_sigma_squared_matches_oracle():
    p = params(d=3)
    f = TrigPoly.power_sum(3)
    for i in (1, 2, 3):
        nus = [(1 << k) + part.m for part in subblock_partition(i, p) for k in range(part.lo, part.hi + 1)]
        assert block_sigma_squared(f, p, i) == sigma_squared_pairwise([(1, 1), (1, 2), (1, 4)], nus)


def test_decomposition_at_zero():
    r = decomposition_terms(params(d=1), 1, DyadicPoint(0, 64))
    assert r.drag == 0 and r.sine == 0 and r.residual <= 1e-12
    assert r.direct == 4 and r.error_count == 0


@pytest.mark.parametrize("d", [1, 2, 4])
@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
def test_decomposition_identity(d, i):
    p = params(d=d)
    batch = SampleBatch.draw(100 * d + i, 100, p.N(i) + d + 80)
    r = decomposition_batch(p, i, batch.points)
    assert r["residual"].max() <= 1e-9
    assert np.abs(r["error"]).max() <= d * d * i
    assert r["error_count"] <= d * d * i


def test_decomposition_matches_direct_block_sum():
    p = params(d=2)
    x = DyadicPoint(0x9E3779B97F4A7C15F39CC0605CEDC834, 128)
    r = decomposition_terms(p, 3, x)
    assert r.direct == pytest.approx(reduced_block_sum(TrigPoly.power_sum(2), p, 3, x), abs=1e-12)


def test_error_term_count():
    assert error_term_count(1, 10) == 0
    assert error_term_count(2, 10) == 2
    assert error_term_count(4, 10) == 12
    assert error_term_count(4, 1) == 6


@pytest.mark.parametrize("d,M,h", [(1, 1, 5), (2, 1, 7), (2, 3, 8)])
def test_window_exponent(d, M, h):
    # M(i) = M: i = 1 gives one sub-block; i = 5 with eps = 1/2 gives three
    i = {1: 1, 3: 5}[M]
    p = params(R=4, d=d)
    assert p.M(i) == M
    assert local_window_exponent(i, p) == h


def test_window_weights():
    p = params(R=4, d=4)
    with pytest.raises(DegenerateWeights) as info:
        window_weights(0, 3, p)
    assert all(v == 0 for v in info.value.report.s)
    w = window_weights(5, 3, p)
    assert math.fsum(w.lam**2) == pytest.approx(1, abs=1e-12)
    assert len(w.lam) == 64 and w.Lambda == max(w.lam_by_m)
    with pytest.raises(ValueError):
        window_weights(2**20, 3, p)


def test_window_weights_lipschitz_discretization():
    p = params(R=4, d=4)
    i, scale = 3, 4**2
    rng = np.random.default_rng(3)
    for a in (1, 7, 20, 31):
        w = window_weights(a, i, p)
        for _ in range(20):
            x = Fraction(a, 2**scale) + Fraction(int(rng.integers(0, 2**30)), 2 ** (scale + 30))
            for part in subblock_partition(i, p):
                exact = math.fsum(math.sin(math.pi * float(((part.m << j) * x) % 1)) ** 2
                                  for j in range(p.d))
                bound = 2 ** (p.d + 1) * math.pi * part.m / 2**scale
                assert abs(exact - w.s[part.m - 1]) <= bound


def test_results_independent_of_workers_and_chunks():
    pts = SampleBatch.draw(11, 2100, 1200).points
    one = lacunary_sums(TrigPoly.erdos_fortet(), ErdosFortet(), 1000, pts, workers=1)
    four = lacunary_sums(TrigPoly.erdos_fortet(), ErdosFortet(), 1000, pts, workers=4)
    assert one.tobytes() == four.tobytes()
    sub = lacunary_sums(TrigPoly.erdos_fortet(), ErdosFortet(), 1000, pts[:7])
    assert sub.tobytes() == one[:7].tobytes()


def test_cumulative_cuts():
    terms = TermList()
    for k in range(1, 21):
        terms.add([(1, k)], 1.0, "cos")
    pts = SampleBatch.draw(2, 5, 100).points
    cum = evaluate_terms(terms, pts, cuts=[5, 10, 20])
    for c, n in enumerate((5, 10, 20)):
        direct = [lacunary_sum(TrigPoly.cosine(), Geometric(2), n, x) for x in pts]
        assert cum[:, c].tolist() == pytest.approx(direct, abs=1e-13)
    with pytest.raises(ValueError):
        evaluate_terms(terms, pts, cuts=[10, 5])


def test_block_sums_batch_matches_single():
    p = params(d=2)
    pts = SampleBatch.draw(4, 6, 200).points
    batch = block_sums(TrigPoly.power_sum(2), p, 2, pts)
    assert batch.tolist() == [reduced_block_sum(TrigPoly.power_sum(2), p, 2, x) for x in pts]
