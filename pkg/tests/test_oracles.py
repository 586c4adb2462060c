from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2cert import (
    oracle_direct_product,
    oracle_finite,
    oracle_fp_residually_finite,
    oracle_free,
    oracle_free_abelian,
    sofic_certificate,
)
from l2cert.errors import FuelExhausted, InvalidTable
from l2cert.oracles import hermite_rows, lattice_reduce
from l2cert.quotients import FiniteQuotient
from l2cert.words import Alphabet, Word, free_reduce, reduced_words


@pytest.mark.parametrize("text, expected", [("a a^-1", True), ("a b a^-1 b^-1", False), ("1", True), ("b^-1 a b a^-1", False)])
def test_free(F2, text, expected):
    assert F2.is_identity(text) is expected


def test_free_normal_form(F2):
    assert str(F2.normal_form(F2.word("a b b^-1"))) == "a"


def test_free_abelian(Z, Z2):
    assert Z.is_identity("t t t^-1 t^-1")
    assert Z2.is_identity("a b a^-1 b^-1")
    assert not Z2.is_identity("a b a^-1")
    assert str(Z.normal_form(Z.word("t^-1 t^-1"))) == "t^-2"
    assert [str(r) for r in Z2.relators] == ["a b a^-1 b^-1"]


def test_finite(C2, S3):
    assert C2.is_identity("s s")
    assert not C2.is_identity("s")
    assert not S3.is_identity("x y x^-1 y^-1")
    assert S3.is_identity("x x")
    assert S3.is_identity("y y y")
    # the Cayley-table presentation holds in the group
    assert all(S3.is_identity(r) for r in S3.relators)


def test_finite_rejects_bad_table():
    with pytest.raises(InvalidTable):
        oracle_finite(FiniteQuotient(2, ((0, 1), (1, 1)), (1,), Alphabet(("s",))))


@pytest.mark.parametrize("text, expected", [("a a", True), ("t a t^-1 a", False), ("t a t^-1 t a t^-1", True), ("t", False)])
def test_lamplighter(L, text, expected):
    assert L.is_identity(text) is expected


def test_direct_product():
    P = oracle_direct_product(oracle_free(["a"]), oracle_free(["b"]))
    assert P.is_identity("a b a^-1 b^-1")
    assert not P.is_identity("a")
    assert str(P.normal_form(P.word("b a"))) == "a b"


def test_direct_product_renames_clashes(Z):
    P = oracle_direct_product(Z, Z)
    assert P.alphabet.generators == ("t", "t_2")
    assert P.is_identity("t t_2 t^-1 t_2^-1")
    assert not P.is_identity("t t_2^-1")


def test_fp_presentation_of_Z2():
    fp = oracle_fp_residually_finite(["a", "b"], ["a b a^-1 b^-1"])
    assert fp.is_identity("a b a^-1 b^-1")
    assert not fp.is_identity("a")
    assert fp.is_identity("1")
    # exponent of S_5 is 60: only the abelianization sees this one
    assert not fp.is_identity("a^60")


def test_fp_agrees_with_free_abelian_up_to_length_8(Z2):
    fp = oracle_fp_residually_finite(["a", "b"], ["a b a^-1 b^-1"])
    disagreements = [str(w) for w in reduced_words(Z2.alphabet, 8) if fp.is_identity(w) != Z2.is_identity(w)]
    assert disagreements == []


def test_fp_undecided_raises_fuel_exhausted():
    free = oracle_fp_residually_finite(["a", "b"], [], quotient_cap=1)
    with pytest.raises(FuelExhausted):
        free.is_identity("a b a^-1 b^-1")


def test_fp_finite_presentation():
    # <s | s^3> is Z/3
    c3 = oracle_fp_residually_finite(["s"], ["s^3"])
    assert c3.is_identity("s^6")
    assert c3.is_identity("s^-3")
    assert not c3.is_identity("s^4")


@pytest.mark.parametrize(
    "rows, ncols, v, expected",
    [
        ([[2, 4], [0, 6], [4, 2]], 2, [3, 5], (1, 1)),
        ([[2, 4], [0, 6]], 2, [6, 6], (0, 0)),
        ([[0, 0]], 2, [5, -3], (5, -3)),
        ([[1, -1]], 2, [3, 4], (0, 7)),
    ],
)
def test_lattice_reduce(rows, ncols, v, expected):
    assert lattice_reduce(v, hermite_rows(rows, ncols)) == expected


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3), st.lists(st.integers(-3, 3), min_size=2, max_size=2))
def test_lattice_reduce_is_constant_on_cosets(v, coeffs):
    rows = [[2, 0, 1], [0, 3, 1]]
    basis = hermite_rows(rows, 3)
    shifted = [x + coeffs[0] * a + coeffs[1] * b for x, a, b in zip(v, *rows)]
    assert lattice_reduce(v, basis) == lattice_reduce(shifted, basis)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 1), st.sampled_from([1, -1])), max_size=10))
def test_models_agree_with_free_reduction(ls):
    F2 = oracle_free(["a", "b"])
    w = Word(F2.alphabet, tuple(ls))
    assert F2.is_identity(w) == (len(free_reduce(w)) == 0)
    Z2 = oracle_free_abelian(2)
    sums = [sum(s for i, s in ls if i == g) for g in (0, 1)]
    assert Z2.is_identity(Word(Z2.alphabet, tuple(ls))) == (sums == [0, 0])


@pytest.mark.parametrize("n, K, expected", [(1, 2, 3), (2, 4, 7), (1, 1, 1)])
def test_sofic_certificate(n, K, expected):
    # n * ceil(ln K^2) + 1 with ln 4 = 1.38..., ln 16 = 2.77..., ln 1 = 0
    assert sofic_certificate(n, K) == expected


def test_quotient_providers_respect_forbidden(Z, L):
    t = Z.word("t")
    q = next(Z.quotient_provider(None, [t, Z.word("t^2")]))
    assert q.evaluate(t) != 0 and q.evaluate(Z.word("t^2")) != 0
    lamps = [L.word("a"), L.word("t a t^-1 a")]
    q = next(L.quotient_provider(None, lamps))
    assert all(q.evaluate(w) != 0 for w in lamps)
