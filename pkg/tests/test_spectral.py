from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from l2cert import GroupRingMatrix, coeff_one_norm, oracle_finite
from l2cert.errors import MonotonicityViolation
from l2cert.lueck import finite_dimker
from l2cert.quotients import FiniteQuotient
from l2cert.spectral import (
    Budget,
    CharSeqState,
    TorsionInput,
    char_seq,
    dimker_bracket,
    dimker_lower_term,
    dimker_upper,
    epsilon,
    fk_logdet_partial,
    laplacian_factor,
    lower_correction,
    torsion_estimate,
)
from l2cert.words import Alphabet

mpmath.mp.dps = 50
LN2 = Fraction(str(mpmath.log(2)))


@pytest.fixture(scope="module")
def trivial():
    return oracle_finite(FiniteQuotient.cyclic_product(Alphabet(("s",)), [1]))


def test_char_seq_examples(Z, C2):
    assert char_seq(GroupRingMatrix.from_rows(C2, [["1 + s"]]), 2, 4) == [1] + [Fraction(1, 2)] * 4
    assert char_seq(GroupRingMatrix.from_rows(Z, [[0]]), None, 3) == [1, 1, 1, 1]
    assert char_seq(GroupRingMatrix.from_rows(Z, [["1 - t"]]), 2, 3) == [1, Fraction(1, 2), Fraction(3, 8), Fraction(5, 16)]


def test_upper_stream_examples(C2, trivial):
    assert dimker_upper(GroupRingMatrix.from_rows(C2, [["1 + s"]])).take(3) == [1, Fraction(1, 2), Fraction(1, 2)]
    assert dimker_upper(GroupRingMatrix.from_rows(trivial, [[2]])).take(3) == [1, 0, 0]


def test_upper_stream_stops_at_budget(Z):
    s = dimker_upper(GroupRingMatrix.from_rows(Z, [["1 - t"]]), Budget(iters=5))
    assert len(s.take(100)) == 6


def test_tall_matrices_use_the_smaller_gram(F2):
    A = GroupRingMatrix.from_rows(F2, [["a - 1"], ["b - 1"]])
    st_ = CharSeqState(A, 4)
    assert st_.transposed and st_.size == 1
    # one extra row contributes a kernel of dimension at least one
    assert all(v >= 1 for v in char_seq(A, 4, 6))


def test_lower_term_examples(C2, Z):
    A = GroupRingMatrix.from_rows(C2, [["1 + s"]])
    assert dimker_lower_term(A, 2, 0, 2) == Fraction(1, 2) - Fraction(7, 8) ** 4
    zero = GroupRingMatrix.from_rows(Z, [[0]])
    assert dimker_lower_term(zero, None, 0, 4) == 1 - Fraction(3, 4) ** 16


def test_lower_term_pieces():
    assert epsilon(1, 2) == Fraction(3, 2)
    assert epsilon(7, 1024) == Fraction(21, 20)
    assert lower_correction(2, Fraction(4), 3) == 2 * Fraction(11, 12) ** 9
    with pytest.raises(ValueError):
        epsilon(1, 1)


def test_bracket_examples(C2, trivial):
    b = dimker_bracket(GroupRingMatrix.from_rows(trivial, [[2]]), target=Fraction(1, 1024))
    assert b.status == "target-met" and b.contains(0) and b.width <= Fraction(1, 1024)
    b = dimker_bracket(GroupRingMatrix.from_rows(C2, [["1 + s"]]), target=Fraction(1, 16))
    assert b.status == "target-met" and b.contains(Fraction(1, 2))


def test_bracket_without_certificate_keeps_the_floor(F2):
    b = dimker_bracket(GroupRingMatrix.from_rows(F2, [["a - 1"], ["b - 1"]]), cert=None, budget=Budget(iters=2))
    assert b.lo == 1 and b.hi >= 1 and b.status == "budget-exceeded"


@pytest.mark.parametrize(
    "rows",
    [
        [["1 + x + y"]],
        [["1 - x", "y"], ["x y", "1 + y"]],
        [["2 - y - y^-1"]],
        [["1 + x"], ["1 - x"]],
        [["1 + y + y^2", "x - x y"]],
    ],
)
def test_finite_group_brackets_surround_exact_value(S3, rows):
    A = GroupRingMatrix.from_rows(S3, rows)
    exact = finite_dimker(A, S3.model.table)
    b = dimker_bracket(A, cert="auto", target=Fraction(1, 256), budget=Budget(iters=400))
    assert b.status == "target-met"
    assert b.contains(exact)


def test_norm_bound_too_small_is_detected(Z):
    st_ = CharSeqState(GroupRingMatrix.from_rows(Z, [["1 - t"]]), 1)
    with pytest.raises(MonotonicityViolation):
        st_.extend_to(2)


def laurent_identity_coefficient(coeffs: dict[int, int], K: int, p: int) -> Fraction:
    t = sympy.Symbol("t")
    f = sum(c * t**e for e, c in coeffs.items())
    fs = sum(c * t ** (-e) for e, c in coeffs.items())
    expr = sympy.expand((1 - f * fs / sympy.Integer(K) ** 2) ** p * t ** (2 * p * 4))
    c = sympy.Poly(expr, t).coeff_monomial(t ** (2 * p * 4))
    return Fraction(int(c.p), int(c.q))


@settings(max_examples=25, deadline=None)
@given(st.dictionaries(st.integers(-2, 2), st.integers(-2, 2), min_size=1, max_size=3))
def test_char_seq_matches_symbolic_expansion_over_Z(coeffs):
    from l2cert import GroupRingElement, oracle_free_abelian

    Z = oracle_free_abelian(1)
    e = GroupRingElement.from_terms(Z, [(f"t^{k}" if k else "1", c) for k, c in coeffs.items()])
    A = GroupRingMatrix.from_rows(Z, [[e]])
    K = coeff_one_norm(A)
    cs = char_seq(A, K, 4)
    assert cs == [laurent_identity_coefficient(coeffs, int(K), p) for p in range(5)]
    assert all(0 <= b <= a <= 1 for a, b in zip(cs, cs[1:]))


@settings(max_examples=20, deadline=None)
@given(st.lists(st.lists(st.sampled_from(["0", "1", "x", "y", "1 - x", "1 + y", "x y - 1"]), min_size=2, max_size=2), min_size=1, max_size=2))
def test_lower_terms_stay_below_the_exact_value(rows):
    from l2cert.quotients import FiniteQuotient as FQ

    S3 = oracle_finite(FQ.from_permutations(Alphabet(("x", "y")), [(1, 0, 2), (1, 2, 0)]))
    A = GroupRingMatrix.from_rows(S3, rows)
    exact = finite_dimker(A, S3.model.table)
    st_ = CharSeqState(A)
    for k in (2, 3, 4):
        assert dimker_lower_term(A, None, 0, k, st_) <= exact <= st_.values[k * k]


# ------------------------------------------------------- log determinants


def test_fk_of_two_minus_t(Z):
    A = GroupRingMatrix.from_rows(Z, [["2 - t"]])
    iv = fk_logdet_partial(A, 3, 200, ratio_bound=Fraction(8, 9))
    assert iv.tail_kind == "geometric" and iv.certified
    assert iv.contains(LN2)
    assert iv.width < Fraction(1, 10**6)


def test_fk_trivial_identity(trivial):
    iv = fk_logdet_partial(GroupRingMatrix.from_rows(trivial, [[1]]), 1, 10)
    assert (iv.lo, iv.hi, iv.tail_kind) == (0, 0, "exact")


def test_fk_partial_sums_decrease(Z):
    A = GroupRingMatrix.from_rows(Z, [["2 - t"]])
    st_ = CharSeqState(A, 3)
    highs = [fk_logdet_partial(A, 3, K, state=st_).s_hi for K in (1, 2, 5, 10, 40)]
    assert highs == sorted(highs, reverse=True)


def test_fk_observed_tail_is_flagged(Z):
    iv = fk_logdet_partial(GroupRingMatrix.from_rows(Z, [["1 - t"]]), 2, 30)
    assert iv.tail_kind == "observed-geometric" and not iv.certified


@pytest.mark.parametrize(
    "kwargs",
    [dict(tail_C=1), dict(tail_C=-1, tail_alpha=Fraction(1, 2)), dict(ratio_bound=1)],
)
def test_fk_rejects_bad_tail_parameters(Z, kwargs):
    with pytest.raises(ValueError):
        fk_logdet_partial(GroupRingMatrix.from_rows(Z, [["1 - t"]]), 2, 4, **kwargs)


def test_fk_rejects_small_norm_bound(Z):
    with pytest.raises(ValueError):
        fk_logdet_partial(GroupRingMatrix.from_rows(Z, [["2 - t"]]), 2, 4)


@pytest.mark.slow
def test_fk_of_one_minus_t_at_ten_thousand(Z):
    # tail of sum c_k / (2k) with c_k ~ 1 / sqrt(pi k) is below 1.13 / (2 sqrt K)
    iv = fk_logdet_partial(GroupRingMatrix.from_rows(Z, [["1 - t"]]), 2, 10**4, tail_C=Fraction(113, 100), tail_alpha=Fraction(1, 2))
    assert iv.contains(0)
    assert iv.hi <= Fraction(3, 100)


# ------------------------------------------------------------- torsion


def test_laplacian_factor_shapes(Z):
    A1 = GroupRingMatrix.from_rows(Z, [["t - 1"], ["t"]])
    A2 = GroupRingMatrix.from_rows(Z, [[1, "-1"]])
    assert laplacian_factor([A1, A2], 0, Z).shape == (1, 2)
    assert laplacian_factor([A1, A2], 1, Z).shape == (2, 2)
    assert laplacian_factor([A1, A2], 2, Z).shape == (1, 2)


def test_torsion_of_zero_boundaries(Z):
    res = torsion_estimate(TorsionInput([GroupRingMatrix.zeros(Z, 0, 1)]), 10)
    assert (res.lo, res.hi) == (0, 0)
    assert torsion_estimate(TorsionInput([], n0=3), 10).lo == 0


def test_torsion_of_single_boundary(Z):
    inp = TorsionInput([GroupRingMatrix.from_rows(Z, [["2 - t"]])], norm_bound=3, ratio_bound=Fraction(8, 9))
    res = torsion_estimate(inp, 200)
    assert res.weights == {1: Fraction(1, 2)}
    assert res.certified and res.contains(LN2)


@pytest.mark.slow
def test_torsion_of_circle_at_ten_thousand(Z):
    inp = TorsionInput([GroupRingMatrix.from_rows(Z, [["t - 1"]])], norm_bound=2, tail_C=Fraction(113, 100), tail_alpha=Fraction(1, 2))
    res = torsion_estimate(inp, 10**4)
    assert res.contains(0)
    assert -Fraction(3, 100) <= res.lo and res.hi <= Fraction(3, 100)
