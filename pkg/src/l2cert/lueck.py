"""Approximation by finite quotients.

Pushing a matrix ``A`` over the group ring to a finite quotient ``H`` and
expanding through the regular representation gives a rational matrix ``A'``
of size ``m|H| x n|H|``; ``dim ker(A') / |H|`` approximates the von Neumann
kernel dimension.  If the quotients avoid the nontrivial diagonal elements
of ``A^0, ..., A^(k^2)`` the error is bounded by :func:`lueck_error_bound`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .elimination import inertia, rank, sparse_rank
from .enclosures import ceil_log_upper, log_ratio_upper
from .errors import CapabilityMissing, MemoryBudgetExceeded, QuotientCapExhausted
from .groupring import DEFAULT_MEM_TERMS, GroupRingMatrix, coeff_one_norm, gram
from .oracles import FiniteModel, WordOracle
from .quotients import FiniteQuotient, enumerate_permutation_homs
from .words import Word


class _Projector:
    """Caches the image in ``H`` of every group-element key seen."""

    def __init__(self, oracle: WordOracle, quotient: FiniteQuotient):
        self.model = oracle.model
        self.quotient = quotient
        self.cache: dict = {}

    def __call__(self, key) -> int:
        h = self.cache.get(key)
        if h is None:
            h = self.quotient.evaluate(self.model.decode(key))
            self.cache[key] = h
        return h


def regular_representation_sparse(A: GroupRingMatrix, quotient: FiniteQuotient) -> list[dict[int, Fraction]]:
    """Rows of ``A'`` as ``{column: value}``.

    Row convention: ``x -> x A``; the element ``sum a_g g`` acts on ``QH``
    by ``h -> h g``, so ``R(a)[h, h g] += a_g``.
    """
    proj = _Projector(A.oracle, quotient)
    H = quotient.order
    table = quotient.table
    rows: list[dict[int, Fraction]] = [dict() for _ in range(A.rows * H)]
    for i in range(A.rows):
        for j in range(A.cols):
            e = A.entries[i][j]
            if not e.data:
                continue
            images = [(proj(k), c) for k, c in e.data.items()]
            for h in range(H):
                row = rows[i * H + h]
                th = table[h]
                for g, c in images:
                    col = j * H + th[g]
                    v = row.get(col, 0) + c
                    if v:
                        row[col] = v
                    else:
                        row.pop(col, None)
    return rows


def regular_representation(A: GroupRingMatrix, quotient: FiniteQuotient) -> list[list[Fraction]]:
    """Dense ``m|H| x n|H|`` rational matrix of ``A`` pushed to ``H``."""
    ncols = A.cols * quotient.order
    out = []
    for r in regular_representation_sparse(A, quotient):
        dense = [Fraction(0)] * ncols
        for c, v in r.items():
            dense[c] = Fraction(v)
        out.append(dense)
    return out


def _integral_rows(rows: list[dict[int, Fraction]]) -> list[dict[int, int]]:
    import math

    out = []
    for r in rows:
        den = 1
        for v in r.values():
            den = math.lcm(den, Fraction(v).denominator)
        out.append({c: int(Fraction(v) * den) for c, v in r.items()})
    return out


def finite_rank(A: GroupRingMatrix, quotient: FiniteQuotient, method: str = "sparse-first") -> int:
    if method == "bareiss":
        return rank(regular_representation(A, quotient), "bareiss")
    rule = method.split("-", 1)[1] if "-" in method else "first"
    return sparse_rank(_integral_rows(regular_representation_sparse(A, quotient)), rule)


def finite_dimker(A: GroupRingMatrix, quotient: FiniteQuotient, hom=None, method: str = "sparse-first") -> Fraction:
    """``(m|H| - rank A') / |H|`` by exact elimination.

    ``hom`` is accepted for symmetry with :func:`find_separating_quotient`;
    the quotient's generator images already determine the map.
    """
    H = quotient.order
    return Fraction(A.rows * H - finite_rank(A, quotient, method), H)


def finite_certificate(A: GroupRingMatrix, quotient: FiniteQuotient, K=None) -> Fraction | None:
    """Determinant-class certificate for ``A A*`` over a finite group.

    The regular representation ``D`` of ``A A*`` is an integral symmetric
    matrix, so the product of its nonzero eigenvalues is a nonzero integer.
    Hence the eigenvalues in ``(0, 1)`` contribute at least
    ``-(#eigenvalues >= 1) ln d`` to the log-sum, and ``q`` is that count
    over ``|H|`` times ``ceil(ln d)``.  If no eigenvalue lies in ``(0, 1)``
    then ``q = 0``.  Returns ``None`` for non-integral ``A``.
    """
    if any(c.denominator != 1 for r in A.entries for e in r for c in e.data.values()):
        return None
    K = coeff_one_norm(A) if K is None else Fraction(K)
    D = regular_representation(gram(A), quotient)
    size = len(D)
    if size == 0:
        return Fraction(0)
    _, neg_shifted, _ = inertia([[D[i][j] - (1 if i == j else 0) for j in range(size)] for i in range(size)])
    _, _, nullity = inertia(D)
    below_one = neg_shifted - nullity
    if below_one == 0:
        return Fraction(0)
    at_least_one = size - neg_shifted
    return Fraction(at_least_one * ceil_log_upper(K * K), quotient.order)


class DiagonalCollector:
    """Accumulates nontrivial diagonal elements of ``A^0, A^1, ...``."""

    def __init__(self, A: GroupRingMatrix, mem_terms: int | None = DEFAULT_MEM_TERMS):
        if A.rows != A.cols:
            raise ValueError("diagonal elements need a square matrix")
        self.A = A
        self.mem_terms = mem_terms
        self.power = GroupRingMatrix.identity(A.oracle, A.rows)
        self.j = 0
        self.keys: dict = {}

    def _collect(self) -> None:
        model = self.A.oracle.model
        for i in range(self.A.rows):
            for key in self.power.entries[i][i].data:
                if key not in self.keys and not model.is_identity_key(key):
                    self.keys[key] = None

    def extend_to(self, j: int) -> None:
        if self.j == 0 and not self.keys:
            self._collect()
        while self.j < j:
            self.power = self.power.matmul(self.A, self.mem_terms)
            self.j += 1
            self._collect()

    def words(self) -> list[Word]:
        model = self.A.oracle.model
        return [model.decode(k) for k in sorted(self.keys, key=model.sort_key)]


def nontrivial_diagonal_elements(A: GroupRingMatrix, k: int, mem_terms: int | None = DEFAULT_MEM_TERMS) -> list[Word]:
    """Non-identity words on any diagonal of ``A^0, ..., A^(k^2)``, deduplicated."""
    col = DiagonalCollector(A, mem_terms)
    col.extend_to(k * k)
    return col.words()


@dataclass
class SeparatingQuotient:
    quotient: FiniteQuotient
    hom: tuple
    degree: int | None = None


def trivial_quotient(oracle: WordOracle) -> FiniteQuotient:
    return FiniteQuotient(1, ((0,),), (0,) * len(oracle.alphabet), oracle.alphabet, "trivial", ((),))


def find_separating_quotient(oracle: WordOracle, elements: Sequence[Word], cap: int | None = None, method: str = "auto") -> SeparatingQuotient:
    """First finite quotient (in enumeration order) where no element dies.

    ``method="auto"`` uses the oracle's quotient provider when present and
    the naive enumeration of maps to ``S_p`` (which needs relators)
    otherwise; ``"permutations"`` forces the latter.  Raises
    :class:`QuotientCapExhausted` when nothing is found up to ``cap``.
    """
    if not elements:
        return SeparatingQuotient(trivial_quotient(oracle), ((0,),) * len(oracle.alphabet), 1)
    use_provider = method == "auto" and oracle.quotient_provider is not None
    if use_provider:
        for q in oracle.quotient_provider(cap, elements):
            if q.label.startswith("S_") and q.elements:
                hom = tuple(q.elements[g] for g in q.generator_images)
                return SeparatingQuotient(q, hom, len(q.elements[0]))
            return SeparatingQuotient(q, tuple(q.generator_images), None)
        raise QuotientCapExhausted(f"no separating quotient up to cap {cap}")
    if oracle.relators is None:
        raise CapabilityMissing("oracle has neither a quotient provider nor relators")
    from .oracles import DEFAULT_SP_CAP

    limit = DEFAULT_SP_CAP if cap is None else cap
    for p, images in enumerate_permutation_homs(oracle.alphabet, oracle.relators, limit, elements):
        q = FiniteQuotient.from_permutations(oracle.alphabet, images, label=f"S_{p} image")
        return SeparatingQuotient(q, images, p)
    raise QuotientCapExhausted(f"no separating map to S_p with p <= {limit}")


def lueck_error_bound(n: int, d, k: int) -> Fraction:
    """Rational upper bound for ``n (1 - 1/(k d))^(k^2) + n ln d / ln k``.

    >>> b = lueck_error_bound(1, 2, 4)
    >>> exact = Fraction(7, 8) ** 16 + Fraction(1, 2)
    >>> exact <= b <= exact + Fraction(1, 2 ** 20)
    True
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    d = Fraction(d)
    if d < 1:
        raise ValueError("d must be at least 1")
    first = n * (1 - 1 / (k * d)) ** (k * k)
    return first + n * log_ratio_upper(d, k)


@dataclass
class AdaptedStep:
    k: int
    quotient: FiniteQuotient
    hom: tuple
    value: Fraction
    bound: Fraction
    elements: list[Word] = field(default_factory=list, repr=False)

    @property
    def order(self) -> int:
        return self.quotient.order


class LueckStream:
    """Iterator of :class:`AdaptedStep` for ``k = 0, 1, 2, ...``.

    Non-square matrices are replaced by ``A A*`` (same kernel).  The error
    bound uses ``d = coeff_one_norm`` of the matrix actually used.  The
    stream stops at ``k_max``, or early when no separating quotient is found
    below the cap (``status == "cap-exhausted"``) or the memory budget runs
    out; earlier steps remain valid.  Over a finite-table oracle the group
    itself is adapted at every level, so each step uses it and the stream is
    constant at the exact value.
    """

    def __init__(self, oracle: WordOracle, A: GroupRingMatrix, k_max: int | None = None, quotient_cap: int | None = None, mem_terms: int | None = DEFAULT_MEM_TERMS, method: str = "auto"):
        if A.oracle is not oracle:
            raise ValueError("matrix is over a different oracle")
        self.oracle = oracle
        self.matrix = A if A.rows == A.cols else gram(A, mem_terms)
        self.d = coeff_one_norm(self.matrix)
        self.k_max = k_max
        self.quotient_cap = quotient_cap
        self.method = method
        self.status = "running"
        self.steps: list[AdaptedStep] = []
        self._collector = DiagonalCollector(self.matrix, mem_terms)

    def __iter__(self) -> Iterator[AdaptedStep]:
        k = 0
        n = self.matrix.rows
        while self.k_max is None or k <= self.k_max:
            try:
                self._collector.extend_to(k * k)
            except MemoryBudgetExceeded:
                self.status = "budget-exceeded"
                return
            elements = self._collector.words()
            model = self.oracle.model
            if isinstance(model, FiniteModel):
                sep = SeparatingQuotient(model.table, tuple(model.table.generator_images))
            else:
                try:
                    sep = find_separating_quotient(self.oracle, elements, self.quotient_cap, self.method)
                except QuotientCapExhausted:
                    self.status = "cap-exhausted"
                    return
            q = sep.quotient
            # post-hoc adaptedness check, directly in the table
            for w in elements:
                if q.evaluate(w) == 0:
                    raise AssertionError(f"quotient {q.label} kills diagonal element {w}")
            value = finite_dimker(self.matrix, q)
            bound = lueck_error_bound(n, self.d, k) if k >= 2 else Fraction(n)
            step = AdaptedStep(k, q, sep.hom, value, bound, elements)
            self.steps.append(step)
            yield step
            k += 1
        self.status = "complete"


def lueck_stream(oracle: WordOracle, A: GroupRingMatrix, k_max: int | None = None, quotient_cap: int | None = None, mem_terms: int | None = DEFAULT_MEM_TERMS) -> LueckStream:
    return LueckStream(oracle, A, k_max, quotient_cap, mem_terms)
