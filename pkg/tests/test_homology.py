from __future__ import annotations

import random
from fractions import Fraction

import pytest

from _support import direct_dim_im, random_inclusion, small_groups
from l2cert import ComplexInclusion, FinPresComplex, GroupRingMatrix, oracle_finite, oracle_free, oracle_free_abelian
from l2cert.errors import CapabilityMissing, ComplexError
from l2cert.homology import (
    betti_estimate,
    check_complex,
    dim_im_homology,
    fox_derivative,
    fox_presentation_complex,
    homology_matrices,
    search_kernel_rows,
    stack_E,
    validate_complex,
)
from l2cert.quotients import FiniteQuotient
from l2cert.spectral import Budget, dimker_bracket
from l2cert.words import Alphabet


@pytest.fixture(scope="module")
def trivial():
    return oracle_finite(FiniteQuotient.cyclic_product(Alphabet(("s",)), [1]))


def test_validate_examples(Z, F2, Z2):
    zero = FinPresComplex(Z, [1, 2, 1], [GroupRingMatrix.zeros(Z, 2, 1), GroupRingMatrix.zeros(Z, 1, 2)])
    assert validate_complex(zero) is None
    f2 = FinPresComplex(F2, [1, 2, 0], [GroupRingMatrix.from_rows(F2, [["a - 1"], ["b - 1"]]), GroupRingMatrix.zeros(F2, 0, 2)])
    assert validate_complex(f2) is None
    assert validate_complex(fox_presentation_complex(Z2)) is None


def test_validate_reports_first_bad_entry(Z):
    c = FinPresComplex(Z, [1, 1, 1], [GroupRingMatrix.from_rows(Z, [["t - 1"]]), GroupRingMatrix.from_rows(Z, [["t"]])])
    assert validate_complex(c) == (2, 0, 0)
    with pytest.raises(ComplexError):
        check_complex(c)


def test_complex_shape_errors(Z):
    with pytest.raises(ComplexError):
        FinPresComplex(Z, [1, 2], [GroupRingMatrix.zeros(Z, 1, 1)])
    with pytest.raises(ComplexError):
        FinPresComplex(Z, [1, 1], [])


def test_fox_examples(F2, Z2, Z):
    c = fox_presentation_complex(F2)
    assert c.ranks == [1, 2, 0]
    assert c.boundaries[0] == GroupRingMatrix.from_rows(F2, [["a - 1"], ["b - 1"]])
    assert c.boundaries[1].shape == (0, 2)
    c = fox_presentation_complex(Z2)
    assert c.boundaries[1] == GroupRingMatrix.from_rows(Z2, [["1 - b", "a - 1"]])
    assert fox_presentation_complex(Z).boundaries[0] == GroupRingMatrix.from_rows(Z, [["t - 1"]])


def test_fox_derivative_rules(F2):
    from l2cert import GroupRingElement

    w = F2.word("a b a^-1")
    assert fox_derivative(F2, w, 0) == GroupRingElement.from_terms(F2, [("1", 1), ("a b a^-1", -1)])
    assert fox_derivative(F2, w, 1) == GroupRingElement.from_word(F2, "a")
    assert fox_derivative(F2, F2.word("1"), 0).is_zero()


def test_fox_needs_relators(L):
    assert L.relators is None
    with pytest.raises(CapabilityMissing):
        fox_presentation_complex(L)


def test_stack_E_shape(Z):
    B = GroupRingMatrix.from_rows(Z, [["t", 0, 1], [1, 1, "t^-1"]])
    E = stack_E(B, 2)
    assert E.shape == (4, 3)
    assert E.block(range(2), range(3)) == B
    assert E.block(range(2, 4), range(3)) == GroupRingMatrix.from_rows(Z, [[1, 0, 0], [0, 1, 0]])


def test_inclusion_errors(Z):
    sup = FinPresComplex(Z, [1, 1], [GroupRingMatrix.from_rows(Z, [["t - 1"]])])
    other = FinPresComplex(Z, [1, 1], [GroupRingMatrix.from_rows(Z, [["t"]])])
    with pytest.raises(ComplexError):
        ComplexInclusion(other, sup)
    big = FinPresComplex(Z, [2, 1], [GroupRingMatrix.from_rows(Z, [["t - 1", 0]])])
    with pytest.raises(ComplexError):
        ComplexInclusion(big, sup)
    # the sub row must not reach the extra column
    wide = FinPresComplex(Z, [2, 1], [GroupRingMatrix.from_rows(Z, [["t - 1", 1]])])
    sub = FinPresComplex(Z, [1, 1], [GroupRingMatrix.from_rows(Z, [["t - 1"]])])
    with pytest.raises(ComplexError):
        ComplexInclusion(sub, wide)
    with pytest.raises(ComplexError):
        homology_matrices(ComplexInclusion.identity(sup), 3)


def test_trivial_group_example(trivial):
    D = FinPresComplex(trivial, [1, 1], [GroupRingMatrix.from_rows(trivial, [[2]])])
    C = FinPresComplex(trivial, [1, 0], [GroupRingMatrix.zeros(trivial, 0, 1)])
    res = dim_im_homology(ComplexInclusion(C, D), 0, method="exact")
    assert res.value == 0
    assert res.parts == {"ker_A": 1, "ker_B": 0, "ker_E": 1}
    res = dim_im_homology(ComplexInclusion(C, D), 0)
    assert res.contains(0) and res.width <= Fraction(1, 1024)


def test_identity_inclusion_with_zero_boundaries(C2):
    c = FinPresComplex(C2, [3, 2, 0], [GroupRingMatrix.zeros(C2, 2, 3), GroupRingMatrix.zeros(C2, 0, 2)])
    inc = ComplexInclusion.identity(c)
    assert dim_im_homology(inc, 0, method="exact").value == 3
    assert dim_im_homology(inc, 1, method="exact").value == 2
    assert dim_im_homology(inc, 0).contains(3)


def test_exact_method_needs_finite_group(Z):
    c = fox_presentation_complex(Z)
    with pytest.raises(CapabilityMissing):
        dim_im_homology(ComplexInclusion.identity(c), 0, method="exact")


@pytest.mark.parametrize("seed", range(6))
def test_charseq_bracket_contains_exact_value(seed):
    rng = random.Random(seed)
    table = rng.choice(small_groups()[:4])
    inc, _ = random_inclusion(rng, table, 0)
    want = direct_dim_im(inc, 0, table)
    res = dim_im_homology(inc, 0, target=Fraction(1, 8), budget=Budget(iters=40))
    assert res.contains(want)
    assert dim_im_homology(inc, 0, method="exact").value == want


def test_identity_inclusion_matches_betti_bracket(Z):
    # im H_0(id) = H_0, whose dimension is dim ker (t - 1) for the line
    c = fox_presentation_complex(Z)
    res = dim_im_homology(ComplexInclusion.identity(c), 0, cert=None, budget=Budget(iters=5))
    direct = dimker_bracket(c.boundaries[0], cert=None, budget=Budget(iters=5))
    assert res.hi == direct.hi
    assert res.contains(0)


def test_kernel_search_finds_commutator_relation(Z2):
    A1 = fox_presentation_complex(Z2).boundaries[0]
    found = search_kernel_rows(A1, fuel=5000, max_rows=1)
    assert len(found.rows) == 1 and not found.exhausted
    row = GroupRingMatrix(Z2, 1, 2, found.rows)
    assert row.matmul(A1).is_zero()


def test_kernel_search_respects_fuel(F2):
    found = search_kernel_rows(fox_presentation_complex(F2).boundaries[0], fuel=50)
    assert found.exhausted and found.tested == 50 and found.rows == []


def test_betti_zero_of_Z():
    Z = oracle_free_abelian(1)
    est = betti_estimate(Z, 0)
    assert est.contains(0)
    assert est.hi <= Fraction(1, 4)
    assert est.lo >= 0


def test_betti_rows_are_non_increasing():
    est = betti_estimate(oracle_free(["a", "b"]), 1, fuel=200)
    for row in est.rows:
        his = [hi for _, hi in row]
        assert his == sorted(his, reverse=True)
        assert all(lo >= 0 for lo, _ in row)
    assert est.status["rows"] == "truncated"


def test_betti_rejects_negative_degree(Z):
    with pytest.raises(ValueError):
        betti_estimate(Z, -1)
