import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacunary import (
    ConstructionParams,
    ErdosFortet,
    ExplicitSequence,
    Geometric,
    NotIncreasing,
    PaperSequence,
    TowerOverflow,
    TowerSpec,
    sequence_prefix,
    term_value,
)
from lacunary.sequence import (
    block_bounds,
    block_of,
    ceil_rational_power,
    hadamard_min_ratio,
    iroot,
    subblock_partition,
    term_symbolic,
    tower_separation_holds,
)

from oracles import block_terms

R4 = ConstructionParams(R=4, eps=Fraction(1, 2), d=4)
R9_PAPER = ConstructionParams(R=9, eps=Fraction(1, 2), tower=TowerSpec.paper())


@pytest.mark.parametrize("i,R,expected", [(1, 9, (1, 9)), (2, 9, (10, 90)), (3, 4, (21, 84))])
def test_block_bounds(i, R, expected):
    assert block_bounds(i, R) == expected
    lo, hi = expected
    assert hi - lo + 1 == R**i


def test_partition_examples():
    p9 = ConstructionParams(R=9)
    assert [(s.lo, s.hi) for s in subblock_partition(1, p9)] == [(1, 9)]
    assert [s.size for s in subblock_partition(4, R4)] == [128, 128]
    assert [s.size for s in subblock_partition(5, R4)] == [342, 341, 341]


def test_reduced_tower_values():
    assert [R4.T(i) for i in range(1, 6)] == [5, 13, 42, 142, 507]
    assert [R4.N(i) for i in range(1, 6)] == [4, 20, 84, 340, 1364]
    assert [R4.M(i) for i in range(1, 6)] == [1, 2, 2, 2, 3]


def test_explicit_tower_table():
    p = ConstructionParams(R=4, d=4, tower=TowerSpec.explicit([10, 40, 100]))
    assert p.T(2) == 40
    with pytest.raises(ValueError):
        p.T(4)
    with pytest.raises(ValueError):
        TowerSpec.explicit([5, 5])


@settings(max_examples=60, deadline=None)
@given(R=st.integers(3, 12), i=st.integers(1, 6),
       eps=st.fractions(min_value=Fraction(1, 20), max_value=Fraction(19, 20), max_denominator=20))
def test_partition_invariants(R, i, eps):
    params = ConstructionParams(R=R, eps=eps, d=4)
    parts = subblock_partition(i, params)
    lo, hi = block_bounds(i, R)
    covered = [k for p in parts for k in range(p.lo, p.hi + 1)]
    assert covered == list(range(lo, hi + 1))
    assert [p.m for p in parts] == list(range(1, len(parts) + 1))
    target = Fraction(R**i, params.M(i))
    assert all(abs(p.size - target) <= 1 for p in parts)
    # block dominance
    assert sum(R**h for h in range(1, i)) <= Fraction(R**i, R - 1)


@settings(max_examples=200, deadline=None)
@given(i=st.integers(1, 10**6),
       e=st.fractions(min_value=0, max_value=1, max_denominator=50))
def test_ceil_rational_power_matches_definition(i, e):
    c = ceil_rational_power(i, e)
    p, q = e.numerator, e.denominator
    # c = ceil(i^(p/q))  <=>  (c-1)^q < i^p <= c^q
    assert (c - 1) ** q < i**p <= c**q


@given(st.integers(0, 2**300), st.integers(1, 7))
def test_iroot(n, q):
    r = iroot(n, q)
    assert r**q <= n < (r + 1) ** q


def test_M_agrees_with_float_away_from_integers():
    p = ConstructionParams(R=9, eps=Fraction(1, 3), d=4)
    for i in range(1, 200):
        v = i ** (2 / 3)
        if abs(v - round(v)) > 1e-9:
            assert p.M(i) == math.ceil(v)
    # perfect powers land exactly
    assert p.M(8) == 4 and p.M(27) == 9


def test_term_values():
    assert term_value(1, PaperSequence(R9_PAPER)) == 12
    n10 = term_value(10, PaperSequence(R9_PAPER))
    assert n10 == 1025 << 65536
    assert n10.bit_length() == 65547
    assert term_value(5, ErdosFortet()) == 31


def test_term_symbolic_examples():
    p9 = ConstructionParams(R=9)
    assert tuple(term_symbolic(1, p9)) == (1, 1, 1)
    assert tuple(term_symbolic(51, p9)) == (2, 2, 51)
    assert tuple(term_symbolic(90, p9)) == (2, 2, 90)
    assert tuple(term_symbolic(50, p9)) == (2, 1, 50)


def test_prefix_examples():
    assert sequence_prefix(4, Geometric(2)) == [2, 4, 8, 16]
    assert sequence_prefix(3, ErdosFortet()) == [1, 3, 7]
    assert sequence_prefix(9, PaperSequence(R9_PAPER)) == [12, 20, 36, 68, 132, 260, 516, 1028, 2052]


def test_prefix_against_independent_block_oracle():
    spec = PaperSequence(R4)
    expected = []
    for i in range(1, 4):
        sizes = [p.size for p in subblock_partition(i, R4)]
        expected += block_terms(4, i, sizes, R4.T(i))
    assert sequence_prefix(84, spec) == expected


def test_symbolic_consistent_with_value():
    spec = PaperSequence(R4)
    for k in range(1, 341):
        t = term_symbolic(k, R4)
        n = term_value(k, spec)
        assert n % (1 << R4.T(t.i)) == 0
        assert n >> R4.T(t.i) == (1 << k) + t.m
        assert spec.bit_length(k) == n.bit_length()
        assert block_of(k, 4) == t.i


def test_digits_represent_terms():
    for spec in (Geometric(2), Geometric(3), ErdosFortet(), PaperSequence(R4)):
        for k in range(1, 40):
            assert sum(c << e for c, e in spec.digits(k)) == spec.term(k)


def test_hadamard():
    assert hadamard_min_ratio([2, 4, 8, 16]) == 2
    assert hadamard_min_ratio([1, 3, 7, 15, 31]) == Fraction(31, 15)
    assert hadamard_min_ratio(sequence_prefix(340, PaperSequence(R4))) > 1
    with pytest.raises(NotIncreasing):
        hadamard_min_ratio([1, 3, 3])


def test_in_block_ratio_near_two():
    prefix = sequence_prefix(340, PaperSequence(R4))
    for i in range(2, 5):
        for part in subblock_partition(i, R4):
            for k in range(max(part.lo, 10), part.hi):
                r = prefix[k] / prefix[k - 1]  # n_{k+1} / n_k
                assert 1.9 < r < 2.1


def test_tower_separation():
    for i in range(2, 7):
        assert tower_separation_holds(R4, i)
    assert tower_separation_holds(ConstructionParams(R=9), 4)


def test_paper_tower_overflows():
    spec = PaperSequence(R9_PAPER)
    with pytest.raises(TowerOverflow) as info:
        term_value(91, spec)  # block 3, T = 2**81
    assert info.value.bits > info.value.cap
    assert spec.bit_length(91) > 2**81


def test_bit_cap_configurable():
    with pytest.raises(TowerOverflow):
        term_value(100, Geometric(2), bit_cap=64)


def test_explicit_sequence():
    s = ExplicitSequence((1, 5, 9))
    assert sequence_prefix(3, s) == [1, 5, 9]
    with pytest.raises(NotIncreasing):
        ExplicitSequence((1, 5, 5))
    with pytest.raises(IndexError):
        s.term(4)


def test_parameter_validation_and_warnings():
    with pytest.raises(ValueError):
        ConstructionParams(eps=Fraction(3, 2))
    with pytest.raises(ValueError):
        ConstructionParams(R=2)
    with pytest.warns(UserWarning, match="R > 8/eps"):
        ConstructionParams(R=9, eps=Fraction(1, 2))
    assert ConstructionParams(R=9).d == 42
    assert ConstructionParams(R=40, eps=Fraction(1, 3)).d == 63
