"""Finitely presented chain complexes over a group ring.

Conventions: chains are row vectors and ``A_p`` (shape ``n_p x n_(p-1)``)
acts by ``x -> x A_p``.  ``A_0`` is the ``n_0 x 0`` zero map.  For a
subcomplex ``C`` (ranks ``m_j``) of ``D`` (ranks ``n_j``) the image of
``H_k(C) -> H_k(D)`` has dimension

    dim ker A_k + dim ker B_(k+1) - dim ker E_k,

where ``E_k`` stacks ``B_(k+1)`` on top of ``(I_(m_k) | 0)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import CapabilityMissing, ComplexError, FuelExhausted
from .groupring import GroupRingElement, GroupRingMatrix, convolve, vstack
from .lueck import finite_dimker
from .oracles import FiniteModel, WordOracle
from .spectral import BracketResult, Budget, dimker_bracket
from .words import Word, reduced_words


class FinPresComplex:
    """Ranks ``n_0 .. n_(k+1)`` and boundaries ``A_1 .. A_(k+1)``."""

    def __init__(self, oracle: WordOracle, ranks: Sequence[int], boundaries: Sequence[GroupRingMatrix]):
        ranks = list(ranks)
        boundaries = list(boundaries)
        if len(ranks) != len(boundaries) + 1 or not ranks:
            raise ComplexError(f"{len(ranks)} ranks need {len(ranks) - 1} boundaries, got {len(boundaries)}")
        if any(r < 0 for r in ranks):
            raise ComplexError("ranks must be nonnegative")
        for p, A in enumerate(boundaries, start=1):
            if A.oracle is not oracle:
                raise ComplexError(f"A_{p} is over a different oracle")
            if A.shape != (ranks[p], ranks[p - 1]):
                raise ComplexError(f"A_{p} has shape {A.shape}, expected {(ranks[p], ranks[p - 1])}")
        self.oracle = oracle
        self.ranks = ranks
        self.boundaries = boundaries

    @property
    def length(self) -> int:
        return len(self.boundaries) - 1

    def boundary(self, p: int) -> GroupRingMatrix:
        """``A_p``; degree 0 and degrees above the top are zero maps."""
        if p == 0:
            return GroupRingMatrix.zeros(self.oracle, self.ranks[0], 0)
        if 1 <= p <= len(self.boundaries):
            return self.boundaries[p - 1]
        if p == len(self.boundaries) + 1:
            return GroupRingMatrix.zeros(self.oracle, 0, self.ranks[-1])
        raise ComplexError(f"degree {p} out of range")

    def rank(self, p: int) -> int:
        return self.ranks[p] if 0 <= p < len(self.ranks) else 0

    def __repr__(self) -> str:
        return f"FinPresComplex(ranks={self.ranks})"


def validate_complex(c: FinPresComplex) -> tuple[int, int, int] | None:
    """``None`` if every ``A_p A_(p-1)`` vanishes, else ``(p, i, j)`` of the first nonzero entry."""
    model = c.oracle.model
    for p in range(2, len(c.boundaries) + 1):
        A, B = c.boundaries[p - 1], c.boundaries[p - 2]
        for i in range(A.rows):
            for j in range(B.cols):
                acc: dict = {}
                for l in range(A.cols):
                    convolve(model, A.entries[i][l].data, B.entries[l][j].data, None, acc)
                if acc:
                    return (p, i, j)
    return None


def check_complex(c: FinPresComplex) -> None:
    bad = validate_complex(c)
    if bad is not None:
        p, i, j = bad
        raise ComplexError(f"(A_{p} A_{p - 1})[{i}, {j}] is nonzero")


class ComplexInclusion:
    """Inclusion of ``sub`` as the leading blocks of ``sup``.

    Requires ``m_j <= n_j``, the leading block of every ``B_j`` to equal
    ``A_j``, and the block of ``B_j`` from sub rows to the extra columns to
    vanish (so the inclusion is a chain map).
    """

    def __init__(self, sub: FinPresComplex, sup: FinPresComplex):
        if sub.oracle is not sup.oracle:
            raise ComplexError("complexes over different oracles")
        if len(sub.ranks) > len(sup.ranks):
            raise ComplexError("subcomplex is longer than the ambient complex")
        for j, m in enumerate(sub.ranks):
            if m > sup.ranks[j]:
                raise ComplexError(f"rank m_{j} = {m} exceeds n_{j} = {sup.ranks[j]}")
        for p, A in enumerate(sub.boundaries, start=1):
            B = sup.boundaries[p - 1]
            mp, mq = sub.ranks[p], sub.ranks[p - 1]
            if B.block(range(mp), range(mq)) != A:
                raise ComplexError(f"leading block of B_{p} differs from A_{p}")
            for i in range(mp):
                for l in range(mq, B.cols):
                    if not B.entries[i][l].is_zero():
                        raise ComplexError(f"B_{p}[{i}, {l}] must vanish for a subcomplex")
        self.sub = sub
        self.sup = sup

    @classmethod
    def identity(cls, c: FinPresComplex) -> "ComplexInclusion":
        return cls(c, c)


def stack_E(B_next: GroupRingMatrix, m_k: int) -> GroupRingMatrix:
    """``B_(k+1)`` on top of ``(I_(m_k) | 0)``: shape ``(n_(k+1) + m_k) x n_k``."""
    oracle = B_next.oracle
    n_k = B_next.cols
    one, zero = GroupRingElement.one(oracle), GroupRingElement(oracle)
    bottom = GroupRingMatrix(oracle, m_k, n_k, [[one if i == j else zero for j in range(n_k)] for i in range(m_k)])
    return vstack(B_next, bottom)


@dataclass
class DimImResult:
    lo: Fraction
    hi: Fraction
    status: str
    parts: dict = field(default_factory=dict)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def value(self) -> Fraction | None:
        return self.lo if self.lo == self.hi else None

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi


def homology_matrices(inc: ComplexInclusion, k: int) -> tuple[GroupRingMatrix, GroupRingMatrix, GroupRingMatrix]:
    """``(A_k, B_(k+1), E_k)`` for the image of ``H_k``."""
    if not 0 <= k <= inc.sub.length:
        raise ComplexError(f"degree {k} outside 0..{inc.sub.length}")
    A_k = inc.sub.boundary(k)
    B_next = inc.sup.boundary(k + 1)
    return A_k, B_next, stack_E(B_next, inc.sub.rank(k))


def dim_im_homology(
    inc: ComplexInclusion,
    k: int,
    cert="auto",
    budget: Budget | None = None,
    method: str = "charseq",
    target: Fraction = Fraction(1, 1024),
    cache: dict | None = None,
) -> DimImResult:
    """Dimension of the image of ``H_k(sub) -> H_k(sup)``.

    ``method="exact"`` needs a finite-group oracle and evaluates the three
    kernel dimensions by elimination.  ``method="charseq"`` combines three
    certified brackets with interval arithmetic; the result is clamped to
    ``[0, m_k]``.
    """
    A_k, B_next, E_k = homology_matrices(inc, k)
    mats = {"ker_A": A_k, "ker_B": B_next, "ker_E": E_k}
    if method == "exact":
        model = inc.sub.oracle.model
        if not isinstance(model, FiniteModel):
            raise CapabilityMissing("exact method needs a finite-group oracle")
        vals = {name: finite_dimker(M, model.table) for name, M in mats.items()}
        v = vals["ker_A"] + vals["ker_B"] - vals["ker_E"]
        return DimImResult(v, v, "exact", vals)
    if method != "charseq":
        raise ValueError(f"unknown method {method!r}")
    parts: dict[str, BracketResult] = {}
    for name, M in mats.items():
        key = (str(M), M.shape)
        if cache is not None and key in cache:
            parts[name] = cache[key]
            continue
        parts[name] = dimker_bracket(M, cert, target, budget)
        if cache is not None:
            cache[key] = parts[name]
    lo = parts["ker_A"].lo + parts["ker_B"].lo - parts["ker_E"].hi
    hi = parts["ker_A"].hi + parts["ker_B"].hi - parts["ker_E"].lo
    m_k = inc.sub.rank(k)
    lo, hi = max(lo, Fraction(0)), min(hi, Fraction(m_k))
    status = "target-met" if all(p.status == "target-met" for p in parts.values()) else "budget-exceeded"
    return DimImResult(lo, hi, status, parts)


# ------------------------------------------------------------ Fox calculus


def fox_derivative(oracle: WordOracle, w: Word, s: int) -> GroupRingElement:
    """``d w / d s`` by the Fox rules ``d(uv) = du + u dv``, ``d s^-1 = -s^-1``."""
    model = oracle.model
    data: dict = {}
    prefix: tuple = ()
    for idx, sign in w.letters:
        if idx == s:
            if sign > 0:
                key = model.encode(prefix)
                data[key] = data.get(key, 0) + 1
            else:
                key = model.encode(prefix + ((idx, -1),))
                data[key] = data.get(key, 0) - 1
        prefix = prefix + ((idx, sign),)
    return GroupRingElement(oracle, data)


def fox_presentation_complex(oracle: WordOracle) -> FinPresComplex:
    """Chain complex of the presentation 2-complex's universal cover.

    ``n = (1, |S|, |R|)``, ``A_1`` is the column ``(s - 1)`` and ``A_2``
    has the Fox derivatives ``d r / d s`` as rows.
    """
    if oracle.relators is None:
        raise CapabilityMissing("Fox complex needs a finite presentation")
    S = len(oracle.alphabet)
    one = GroupRingElement.one(oracle)
    A1 = GroupRingMatrix(oracle, S, 1, [[GroupRingElement.from_word(oracle, oracle.alphabet.generator(s)) - one] for s in range(S)])
    rows = [[fox_derivative(oracle, r, s) for s in range(S)] for r in oracle.relators]
    A2 = GroupRingMatrix(oracle, len(rows), S, rows)
    return FinPresComplex(oracle, [1, S, len(rows)], [A1, A2])


# ------------------------------------------------- sup-inf Betti estimation


def _ball(oracle: WordOracle, radius: int) -> list:
    """Distinct element keys of word length at most ``radius``, shortlex order."""
    model = oracle.model
    seen = {}
    for w in reduced_words(oracle.alphabet, radius):
        try:
            k = model.encode(w.letters)
        except FuelExhausted:
            continue
        seen.setdefault(k, None)
    return list(seen)


@dataclass
class KernelSearch:
    rows: list[list[GroupRingElement]]
    tested: int
    exhausted: bool


def search_kernel_rows(
    A: GroupRingMatrix,
    fuel: int,
    support: int = 4,
    word_length: int = 1,
    coeff_bound: int = 1,
    max_rows: int = 2,
    known: Sequence[Sequence[GroupRingElement]] = (),
) -> KernelSearch:
    """Breadth-first search for row vectors ``x`` with ``x A = 0``.

    Candidates have at most ``support`` nonzero terms, group elements of
    word length at most ``word_length`` and integer coefficients bounded by
    ``coeff_bound``; they are tried in order of increasing support.  Rows
    equal up to sign to ``known`` rows or earlier finds are skipped.
    ``exhausted`` is true when the fuel ran out before the space was covered.
    """
    oracle = A.oracle
    model = oracle.model
    ball = _ball(oracle, word_length)
    slots = [(pos, g) for pos in range(A.rows) for g in ball]
    coeffs = [c for a in range(1, coeff_bound + 1) for c in (a, -a)]
    found: list[list[GroupRingElement]] = []
    seen = {tuple(e for e in r) for r in known}
    seen |= {tuple(-e for e in r) for r in known}
    tested = 0
    for size in range(1, support + 1):
        for chosen in itertools.combinations(slots, size):
            for cs in itertools.product(coeffs, repeat=size):
                if cs[0] < 0:
                    continue
                if tested >= fuel:
                    return KernelSearch(found, tested, True)
                tested += 1
                vec: list[dict] = [dict() for _ in range(A.rows)]
                for (pos, g), c in zip(chosen, cs):
                    vec[pos][g] = c
                ok = True
                for j in range(A.cols):
                    acc: dict = {}
                    for l in range(A.rows):
                        if vec[l]:
                            convolve(model, vec[l], A.entries[l][j].data, None, acc)
                    if acc:
                        ok = False
                        break
                if not ok:
                    continue
                row = [GroupRingElement(oracle, v) for v in vec]
                key = tuple(row)
                if key in seen:
                    continue
                seen.add(key)
                seen.add(tuple(-e for e in row))
                found.append(row)
                if len(found) >= max_rows:
                    return KernelSearch(found, tested, False)
    return KernelSearch(found, tested, False)


@dataclass
class BettiEstimate:
    k: int
    lo: Fraction
    hi: Fraction
    grid: dict[tuple[int, int], tuple[Fraction, Fraction]]
    rows: list[list[tuple[Fraction, Fraction]]]
    status: dict[str, str]

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi


def _complex_with_rows(oracle: WordOracle, lower: list[GroupRingMatrix], top_rows: list[list[GroupRingElement]], n_k: int) -> FinPresComplex:
    top = GroupRingMatrix(oracle, len(top_rows), n_k, top_rows)
    boundaries = lower + [top]
    ranks = [boundaries[0].cols] + [B.rows for B in boundaries]
    return FinPresComplex(oracle, ranks, boundaries)


def betti_estimate(
    oracle: WordOracle,
    k: int,
    fuel: int = 5000,
    max_rows: int = 2,
    budget: Budget | None = None,
    cert=None,
    support: int = 4,
    word_length: int = 1,
    coeff_bound: int = 1,
    on_entry=None,
) -> BettiEstimate:
    """Budgeted sup-inf estimate of the ``k``-th L2-Betti number of the group.

    Degrees up to 2 come from the Fox complex.  Higher degrees, and extra
    degree-``(k+1)`` rows, come from :func:`search_kernel_rows`.  Stage
    ``i`` keeps the first ``i`` degree-``(k+1)`` rows; for ``i <= j`` the
    image of ``H_k`` of stage ``i`` in stage ``j`` is bracketed.  The
    estimate is ``[sup_i inf_j lo, sup_i inf_j hi]`` over the computed grid,
    with ``status`` recording which axes were truncated.
    """
    if k < 0:
        raise ValueError("degree must be nonnegative")
    budget = budget or Budget(iters=6)
    fox = fox_presentation_complex(oracle)
    boundaries = list(fox.boundaries)
    status = {"resolution": "complete", "rows": "complete", "charseq": "target-met"}
    # extend the resolution below the top degree
    while len(boundaries) < k:
        A = boundaries[-1]
        found = search_kernel_rows(A, fuel, support, word_length, coeff_bound, max_rows)
        status["resolution"] = "truncated"
        boundaries.append(GroupRingMatrix(oracle, len(found.rows), A.rows, found.rows))
    lower = boundaries[:k]
    n_k = lower[-1].rows if lower else 1
    if k == 0:
        top_rows = [list(r) for r in boundaries[0].entries]
    else:
        top_rows = [list(r) for r in boundaries[k].entries] if len(boundaries) > k else []
        if k >= 2:
            status["resolution"] = "truncated"
        extra = search_kernel_rows(lower[-1], fuel, support, word_length, coeff_bound, max_rows, known=top_rows)
        if extra.rows:
            top_rows += extra.rows
        if extra.exhausted or k >= 2:
            status["rows"] = "truncated"
    stages = len(top_rows)
    complexes = [_complex_with_rows(oracle, lower, top_rows[:i], n_k) if k > 0 else FinPresComplex(oracle, [1, i], [GroupRingMatrix(oracle, i, 1, top_rows[:i])]) for i in range(stages + 1)]
    grid: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}
    cache: dict = {}
    rows_out: list[list[tuple[Fraction, Fraction]]] = []
    best_lo = best_hi = None
    for i in range(stages + 1):
        row: list[tuple[Fraction, Fraction]] = []
        run_lo = run_hi = None
        for j in range(i, stages + 1):
            sub, sup = complexes[i], complexes[j]
            res = dim_im_homology(ComplexInclusion(sub, sup), k, cert, budget, cache=cache)
            if res.status != "target-met":
                status["charseq"] = "budget-exceeded"
            grid[(i, j)] = (res.lo, res.hi)
            run_lo = res.lo if run_lo is None else min(run_lo, res.lo)
            run_hi = res.hi if run_hi is None else min(run_hi, res.hi)
            row.append((max(run_lo, Fraction(0)), max(run_hi, Fraction(0))))
            if on_entry:
                on_entry(i, j, res)
        rows_out.append(row)
        lo_i, hi_i = row[-1]
        best_lo = lo_i if best_lo is None else max(best_lo, lo_i)
        best_hi = hi_i if best_hi is None else max(best_hi, hi_i)
    return BettiEstimate(k, best_lo, best_hi, grid, rows_out, status)
