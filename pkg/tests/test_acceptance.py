"""Acceptance criteria, one test (or group of tests) per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary prints
one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction

import mpmath
import pytest
from _support import direct_dim_im, random_inclusion, small_groups

from l2cert import (
    Budget,
    GroupRingMatrix,
    LueckStream,
    RealStream,
    TorsionInput,
    betti_estimate,
    bracket_to_effective,
    char_seq,
    coeff_one_norm,
    detect_divergence,
    dim_im_homology,
    dimker_bracket,
    dimker_lower_term,
    dimker_upper,
    finite_dimker,
    fk_logdet_partial,
    fox_presentation_complex,
    lueck_error_bound,
    oracle_direct_product,
    oracle_fp_residually_finite,
    sofic_certificate,
    to_binary_expansion,
    torsion_estimate,
    validate_complex,
)
from l2cert.errors import MemoryBudgetExceeded
from l2cert.spectral import CharSeqState, resolve_certificate


mpmath.mp.dps = 60
LN2 = Fraction(str(mpmath.log(2)))


def central_binomial(p: int) -> Fraction:
    return Fraction(math.comb(2 * p, p), 4**p)


@pytest.mark.criterion(1, "characteristic sequence of 1 - t over Z is C(2p,p)/4^p")
def test_c1_char_seq_exact(Z):
    start = time.perf_counter()
    A = GroupRingMatrix.from_rows(Z, [["1 - t"]])
    cs = char_seq(A, 2, 64)
    elapsed = time.perf_counter() - start
    assert cs == [central_binomial(p) for p in range(65)]
    assert all(0 <= c <= 1 for c in cs)
    assert all(a >= b for a, b in zip(cs, cs[1:]))
    assert elapsed < 5


@pytest.mark.criterion(2, "Z/2, 1 + s: bracket converges to the exact 1/2")
def test_c2_finite_group_consistency(C2):
    start = time.perf_counter()
    A = GroupRingMatrix.from_rows(C2, [["1 + s"]])
    exact = finite_dimker(A, C2.model.table)
    res = dimker_bracket(A, "auto", Fraction(1, 256), Budget(iters=200))
    elapsed = time.perf_counter() - start
    assert exact == Fraction(1, 2)
    assert res.contains(exact)
    assert res.width <= Fraction(1, 256)
    assert res.k <= 200
    assert elapsed < 5


def _corpus(Z, Z2, F2, C2, S3, L):
    ZxC2 = oracle_direct_product(Z, C2)
    return [
        (Z, [["1 - t"]]),
        (Z, [["2 - t"]]),
        (Z, [["1 + t + t^-1"]]),
        (Z, [["1 - t", "1"], ["0", "1 - t^-1"]]),
        (Z2, [["a + b - 2"]]),
        (Z2, [["1 - b", "a - 1"]]),
        (F2, [["a - 1"], ["b - 1"]]),
        (F2, [["a + b"]]),
        (C2, [["1 + s"]]),
        (C2, [["1 + s", "s"], ["1", "1 - s"]]),
        (S3, [["1 + x + y"]]),
        (S3, [["1 - x", "1 - y"]]),
        (L, [["1 - t"]]),
        (L, [["a + t"]]),
        (ZxC2, [["1 - t + s"]]),
        (ZxC2, [["1 + s"], ["1 - t"]]),
    ]


@pytest.mark.criterion(3, "every upper value >= every lower term on the corpus")
def test_c3_upper_dominates_lower(Z, Z2, F2, C2, S3, L):
    corpus = _corpus(Z, Z2, F2, C2, S3, L)
    assert len(corpus) >= 10
    assert len({id(o) for o, _ in corpus}) >= 5
    violations = []
    for oracle, rows in corpus:
        A = GroupRingMatrix.from_rows(oracle, rows)
        st = CharSeqState(A, None, mem_terms=10**5)
        try:
            st.extend_to(36)
        except MemoryBudgetExceeded:
            pass  # exponential growth: use the prefix that fits
        assert st.p >= 4
        uppers = list(st.values)
        cert = resolve_certificate(A, st.K, "auto")
        assert cert is not None
        lowers = [dimker_lower_term(A, None, cert, k, st) for k in range(2, math.isqrt(st.p) + 1)]
        if min(uppers) < max(lowers):
            violations.append((oracle.label, rows, min(uppers), max(lowers)))
    assert violations == []


@pytest.mark.criterion(4, "F2 augmentation column: sofic bracket contains 1, inside [0.5, 1.5]")
def test_c4_free_group_bracket(F2):
    A = GroupRingMatrix.from_rows(F2, [["a - 1"], ["b - 1"]])
    q = sofic_certificate(A.rows, coeff_one_norm(A))
    res = dimker_bracket(A, q)
    assert res.contains(1)
    assert Fraction(1, 2) <= res.lo and res.hi <= Fraction(3, 2)
    for (_, lo0, hi0), (_, lo1, hi1) in zip(res.history, res.history[1:]):
        assert lo1 >= lo0 and hi1 <= hi0
    # cross-validation: adapted finite quotients give 1 + 1/|H|
    stream = LueckStream(F2, A, k_max=3)
    values = [(s.value, s.order) for s in stream]
    assert values and all(v == 1 + Fraction(1, h) for v, h in values)
    assert res.contains(values[-1][0])


@pytest.mark.criterion(5, "Lueck steps for 1 - t over Z satisfy the quantitative bound")
def test_c5_lueck_bound(Z):
    start = time.perf_counter()
    A = GroupRingMatrix.from_rows(Z, [["1 - t"]])
    steps = list(LueckStream(Z, A, k_max=20))
    elapsed = time.perf_counter() - start
    assert [s.k for s in steps] == list(range(21))
    for s in steps:
        assert s.value == Fraction(1, s.order)
        if s.k >= 2:
            assert abs(0 - s.value) <= lueck_error_bound(1, 2, s.k)
            assert s.bound == lueck_error_bound(1, 2, s.k)
        else:
            assert abs(0 - s.value) <= s.bound
    assert elapsed < 60


@pytest.mark.criterion(6, "ln det of 2 - t over Z encloses ln 2 to 1e-6")
def test_c6_fk_logdet(Z):
    start = time.perf_counter()
    A = GroupRingMatrix.from_rows(Z, [["2 - t"]])
    iv = fk_logdet_partial(A, 3, 200, ratio_bound=Fraction(8, 9))
    elapsed = time.perf_counter() - start
    assert iv.certified
    assert iv.lo < LN2 - Fraction(1, 10**40) and LN2 + Fraction(1, 10**40) < iv.hi
    assert iv.width <= Fraction(1, 10**6)
    assert elapsed < 30


@pytest.mark.criterion(7, "torsion of the circle over Z encloses 0 with width <= 0.05 at K = 2000")
def test_c7_circle_torsion(Z):
    start = time.perf_counter()
    A1 = GroupRingMatrix.from_rows(Z, [["t - 1"]])
    inp = TorsionInput([A1], tail_C=Fraction(113, 100), tail_alpha=Fraction(1, 2))
    res = torsion_estimate(inp, 2000)
    elapsed = time.perf_counter() - start
    assert res.certified
    assert res.lo <= 0 <= res.hi
    assert res.width <= Fraction(5, 100)
    # independent oracle: the partial sum is the central-binomial series
    iv = res.degrees[1]
    K = 2000
    partial = sum((central_binomial(k) / k for k in range(1, K + 1)), Fraction(0))
    assert sum((c / k for k, c in enumerate(iv.values[1 : K + 1], start=1)), Fraction(0)) == partial
    # the true tail (2 ln 2 - partial) / 2 is covered by the declared tail bound
    assert (2 * math.log(2) - float(partial)) / 2 <= float(iv.tail)
    assert elapsed < 600


@pytest.mark.criterion(8, "image-dimension formula agrees with direct rational computation")
def test_c8_image_dimension_formula():
    start = time.perf_counter()
    rng = random.Random(20240801)
    groups = small_groups()
    assert max(g.order for g in groups) <= 6
    mismatches = []
    for _ in range(100):
        table = rng.choice(groups)
        k = rng.randint(0, 1)
        inc, _ = random_inclusion(rng, table, k)
        assert validate_complex(inc.sup) is None
        assert max(inc.sup.ranks) <= 3
        got = dim_im_homology(inc, k, method="exact")
        want = direct_dim_im(inc, k, table)
        if got.lo != want or got.hi != want:
            mismatches.append((table.label, k, inc.sub.ranks, inc.sup.ranks, got.lo, want))
    assert mismatches == []
    assert time.perf_counter() - start < 120


@pytest.mark.criterion(9, "Fox complex of Z^2 validates")
def test_c9_fox_complex_validates(Z2):
    fp = oracle_fp_residually_finite(["a", "b"], ["a b a^-1 b^-1"])
    for oracle in (fp, Z2):
        c = fox_presentation_complex(oracle)
        assert validate_complex(c) is None
        assert str(c.boundaries[1].entries[0][0]) == "1 - b"


@pytest.mark.criterion(9, "first L2-Betti estimates: F2 near 1, Z^2 near 0")
@pytest.mark.parametrize("name, expected", [("F2", 1), ("Z2", 0)])
def test_c9_betti_estimates(name, expected, request):
    start = time.perf_counter()
    oracle = request.getfixturevalue(name)
    est = betti_estimate(oracle, 1)
    assert est.contains(expected)
    assert expected - Fraction(1, 4) <= est.lo and est.hi <= expected + Fraction(1, 4)
    assert est.status["resolution"] == "complete"
    assert time.perf_counter() - start < 600


@pytest.mark.criterion(10, "binary expansion of 1/3 emits 16 correct digits")
def test_c10_binary_expansion():
    exp = to_binary_expansion(RealStream.constant(Fraction(1, 3)), 16)
    assert exp.integer_part == 0
    assert exp.digits == [0, 1] * 8
    assert not exp.unresolved and exp.certified
    assert exp.render() == "k=0\n" + "01" * 8


@pytest.mark.criterion(10, "bracket_to_effective meets the 2^-n contract on 1000 random brackets")
def test_c10_bracket_to_effective():
    rng = random.Random(10)
    for _ in range(1000):
        r = Fraction(rng.randint(-1000, 1000), rng.randint(1, 1000))
        a = Fraction(rng.randint(1, 50), rng.randint(1, 50))
        b = Fraction(rng.randint(1, 50), rng.randint(1, 50))
        kind = rng.choice(["geometric", "harmonic"])
        if kind == "geometric":
            lower = RealStream(lambda i, r=r, a=a: r - a / 2**i, "monotone-lower")
            upper = RealStream(lambda i, r=r, b=b: r + b / 3**i, "monotone-upper")
        else:
            lower = RealStream(lambda i, r=r, a=a: r - a / (i + 1) ** 3, "monotone-lower")
            upper = RealStream(lambda i, r=r, b=b: r + b / (i + 1) ** 3, "monotone-upper")
        eff = bracket_to_effective(lower, upper, budget=100_000)
        n = rng.randint(0, 12)
        assert abs(eff[n] - r) <= Fraction(1, 2**n)


@pytest.mark.criterion(10, "detect_divergence never calls a declared-modulus stream diverging")
def test_c10_detect_divergence():
    rng = random.Random(11)
    for _ in range(200):
        big = rng.randint(1, 10**6)
        # converges to big, modulus declared; exceeds any threshold below big
        s = RealStream(lambda i, big=big: big - Fraction(big, i + 1), "error-seq", error=lambda i, big=big: Fraction(big, i + 1), modulus=lambda n, big=big: big << n)
        assert detect_divergence(s, rng.randint(0, big), fuel=200) == ("bounded-so-far", None)
    up = RealStream(lambda i: Fraction(i), "unvalidated")
    assert detect_divergence(up, 100, fuel=1000) == ("diverging", 101)


@pytest.mark.criterion(4, "F2 bracket stays inside [0.5, 1.5] for every round")
def test_c4_rounds_inside_window(F2):
    A = GroupRingMatrix.from_rows(F2, [["a - 1"], ["b - 1"]])
    rounds = []
    dimker_bracket(A, "auto", budget=Budget(iters=3), on_round=lambda k, lo, hi: rounds.append((lo, hi)))
    assert rounds and all(lo <= 1 <= hi for lo, hi in rounds)
    s = dimker_upper(A)
    assert s[0] == 2 and s[1] < 2
