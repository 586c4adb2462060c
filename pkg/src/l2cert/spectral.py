"""Characteristic sequences and the certified approximation regimes.

For an ``m x n`` matrix ``A`` over the group ring and a norm bound ``K``
the characteristic sequence is

    c(A, K)_p = tr((1 - K^-2 A A*)^p),

a non-increasing sequence of rationals in ``[0, m]`` whose limit is the von
Neumann dimension of the kernel.  From it we build

* the monotone upper stream (:func:`dimker_upper`),
* the certified lower terms (:func:`dimker_lower_term`),
* two-sided brackets under a determinant-class certificate
  (:func:`dimker_bracket`),
* log-determinant and torsion enclosures (:func:`fk_logdet_partial`,
  :func:`torsion_estimate`).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .enclosures import floor_log2, ln_enclosure, rational_power_lower
from .errors import BudgetExceeded, ComplexError, MemoryBudgetExceeded, MonotonicityViolation
from .groupring import DEFAULT_MEM_TERMS, GroupRingElement, GroupRingMatrix, adjoint, coeff_one_norm, convolve, gram, hstack
from .reals import RealStream, StreamExhausted

Rational = Fraction | int


def _lcm_denominators(M: GroupRingMatrix) -> int:
    L = 1
    for r in M.entries:
        for e in r:
            for c in e.data.values():
                L = math.lcm(L, c.denominator)
    return L


class CharSeqState:
    """Incremental exact computation of ``c(A, K)_p``.

    Works with the smaller of ``A A*`` and ``A* A``: when ``A`` has fewer
    columns than rows, ``c(A, K)_p = (m - n) + c(A*, K)_p`` because the two
    products share their nonzero spectrum.  ``transposed`` records this; the
    cached power is then the power for ``A* A``.

    The power is kept as an integer matrix ``N_p`` over a common
    denominator ``den_p`` so each step is one integer matrix product.
    """

    def __init__(self, A: GroupRingMatrix, K: Rational | None = None, mem_terms: int | None = DEFAULT_MEM_TERMS):
        self.A = A
        self.K = Fraction(K) if K is not None else coeff_one_norm(A)
        if self.K <= 0:
            raise ValueError("norm bound must be positive")
        self.d = self.K * self.K
        self.m = A.rows
        self.mem_terms = mem_terms
        self.transposed = A.cols < A.rows
        self.offset = A.rows - A.cols if self.transposed else 0
        source = adjoint(A) if self.transposed else A
        G = gram(source, mem_terms)
        self.size = G.rows
        self.model = A.oracle.model
        L = _lcm_denominators(G)
        a, b = self.d.numerator, self.d.denominator
        ident = self.model.identity
        # T = a L I - b L G, and (1 - G/d) = T / (a L)
        T = []
        for i in range(self.size):
            row = []
            for j in range(self.size):
                e = {k: -int(c * b * L) for k, c in G.entries[i][j].data.items()}
                if i == j:
                    e[ident] = e.get(ident, 0) + a * L
                    if not e[ident]:
                        del e[ident]
                row.append(e)
            T.append(row)
        self._T = T
        self._step_den = a * L
        self._N = [[({ident: 1} if i == j else {}) for j in range(self.size)] for i in range(self.size)]
        self._den = 1
        self.p = 0
        self.values: list[Fraction] = [Fraction(self.m)]
        self._lock = threading.Lock()

    @property
    def power(self) -> GroupRingMatrix:
        """``B_p`` as a rational matrix (of ``A* A`` when ``transposed``)."""
        oracle = self.A.oracle
        den = self._den
        return GroupRingMatrix(
            oracle,
            self.size,
            self.size,
            [[GroupRingElement(oracle, {k: Fraction(c, den) for k, c in e.items()}) for e in row] for row in self._N],
        )

    def max_support(self) -> int:
        return max((len(e) for row in self._N for e in row), default=0)

    def _step(self) -> None:
        n = self.size
        N, T, model, mem = self._N, self._T, self.model, self.mem_terms
        new = []
        for i in range(n):
            row = []
            for j in range(n):
                acc: dict = {}
                for l in range(n):
                    convolve(model, N[i][l], T[l][j], mem, acc)
                row.append(acc)
            new.append(row)
        den = self._den * self._step_den
        # cancel a common factor; stop as soon as the gcd reaches 1
        g = den
        for row in new:
            for e in row:
                for c in e.values():
                    g = math.gcd(g, c)
                    if g == 1:
                        break
                if g == 1:
                    break
            if g == 1:
                break
        if g > 1:
            new = [[{k: c // g for k, c in e.items()} for e in row] for row in new]
            den //= g
        self._N, self._den = new, den
        self.p += 1

    def _trace(self) -> Fraction:
        ident = self.model.identity
        return Fraction(sum(self._N[i][i].get(ident, 0) for i in range(self.size)), self._den) + self.offset

    def advance(self) -> Fraction:
        with self._lock:
            self._step()
            value = self._trace()
            prev = self.values[-1]
            if value > prev or value < 0 or value > self.m:
                raise MonotonicityViolation(
                    f"c_{self.p} = {value} violates monotonicity or range (previous {prev}); is K a valid norm bound?"
                )
            self.values.append(value)
            return value

    def extend_to(self, p: int) -> Fraction:
        while self.p < p:
            self.advance()
        return self.values[p]

    def value(self, p: int) -> Fraction:
        return self.extend_to(p)


def char_seq_next(state: CharSeqState) -> Fraction:
    """Advance the state by one multiplication and return the new ``c(A, K)_p``.

    >>> from l2cert.oracles import oracle_free_abelian
    >>> z = oracle_free_abelian(1)
    >>> st = CharSeqState(GroupRingMatrix.from_rows(z, [["1 - t"]]), 2)
    >>> char_seq_next(st), char_seq_next(st)
    (Fraction(1, 2), Fraction(3, 8))
    """
    return state.advance()


def char_seq(A: GroupRingMatrix, K: Rational | None, p_max: int, mem_terms: int | None = DEFAULT_MEM_TERMS) -> list[Fraction]:
    """``[c(A, K)_0, ..., c(A, K)_p_max]``."""
    st = CharSeqState(A, K, mem_terms)
    st.extend_to(p_max)
    return list(st.values)


@dataclass
class Budget:
    """Iteration and memory caps.

    ``iters`` caps bracket rounds (or stream length), ``steps`` caps the
    power ``p`` reached, ``mem_terms`` caps the support of any entry.
    """

    iters: int = 200
    steps: int | None = None
    mem_terms: int | None = DEFAULT_MEM_TERMS


def dimker_upper(A: GroupRingMatrix, budget: Budget | None = None, K: Rational | None = None, state: CharSeqState | None = None) -> RealStream:
    """Monotone upper stream ``c(A, K)_0, c(A, K)_1, ...``.

    The stream ends (with every emitted value still a valid upper bound)
    when the iteration or memory budget runs out.
    """
    budget = budget or Budget()
    st = state or CharSeqState(A, K, budget.mem_terms)
    limit = budget.iters if budget.steps is None else min(budget.iters, budget.steps)

    def producer(p: int) -> Fraction:
        if p > limit:
            raise StreamExhausted(f"iteration budget {limit} reached")
        try:
            return st.extend_to(p)
        except MemoryBudgetExceeded as exc:
            raise StreamExhausted(str(exc)) from None

    out = RealStream(producer, "monotone-upper", label="dimker_upper")
    out.state = st  # type: ignore[attr-defined]
    return out


def lower_correction(m: int, d: Fraction, k: int) -> Fraction:
    """``m (1 - 1/(k d))^(k^2)`` evaluated exactly."""
    return m * (1 - 1 / (k * Fraction(d))) ** (k * k)


def epsilon(q: Rational, k: int) -> Fraction:
    """``3 q / (2 floor(log2 k))``, an upper bound for ``q / ln k``."""
    if k < 2:
        raise ValueError("k must be at least 2")
    return Fraction(3) * Fraction(q) / (2 * floor_log2(k))


def dimker_lower_term(A: GroupRingMatrix, K: Rational | None, cert: Rational, k: int, state: CharSeqState | None = None) -> Fraction:
    """Certified lower bound ``c_(k^2) - eps_k - m (1 - 1/(k d))^(k^2)``.

    ``cert`` is a determinant-class certificate ``q`` for ``A A*``.

    >>> from l2cert.oracles import oracle_finite
    >>> from l2cert.quotients import FiniteQuotient
    >>> from l2cert.words import Alphabet
    >>> z2 = oracle_finite(FiniteQuotient.cyclic_product(Alphabet("s"), [2]))
    >>> A = GroupRingMatrix.from_rows(z2, [["1 + s"]])
    >>> dimker_lower_term(A, 2, 0, 2) == Fraction(1, 2) - Fraction(7, 8) ** 4
    True
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if Fraction(cert) < 0:
        raise ValueError("certificate must be nonnegative")
    st = state if state is not None else CharSeqState(A, K)
    if K is not None and Fraction(K) != st.K:
        raise ValueError("state was built for a different norm bound")
    c = st.extend_to(k * k)
    return c - epsilon(cert, k) - lower_correction(st.m, st.d, k)


def resolve_certificate(A: GroupRingMatrix, K: Fraction, cert) -> Fraction | None:
    """Turn ``cert`` (a rational, ``"auto"`` or ``None``) into ``q``.

    ``"auto"`` prefers the exact finite-group certificate and falls back to
    the oracle's declared (sofic) certificate.
    """
    if cert is None:
        return None
    if cert != "auto":
        q = Fraction(cert)
        if q < 0:
            raise ValueError("certificate must be nonnegative")
        return q
    from .lueck import finite_certificate
    from .oracles import FiniteModel

    model = A.oracle.model
    if isinstance(model, FiniteModel):
        q = finite_certificate(A, model.table, K)
        if q is not None:
            return q
    if A.oracle.detclass_certificate is None:
        return None
    return A.oracle.detclass_certificate(A.rows, K)


@dataclass
class BracketResult:
    lo: Fraction
    hi: Fraction
    status: str
    k: int
    p: int
    cert: Fraction | None
    history: list[tuple[int, Fraction, Fraction]] = field(default_factory=list)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Rational) -> bool:
        return self.lo <= x <= self.hi


def dimker_bracket(
    A: GroupRingMatrix,
    cert="auto",
    target: Rational = Fraction(1, 1024),
    budget: Budget | None = None,
    K: Rational | None = None,
    on_round=None,
) -> BracketResult:
    """Two-sided certified bracket for the kernel dimension.

    Round ``k = 2, 3, ...`` extends the sequence to ``p = k^2`` and updates

    * ``hi = min`` of all computed ``c_p``,
    * ``lo = max(lo, q_k, max(0, m - n))`` (the last term is rank-nullity).

    Stops with status ``target-met`` once ``hi - lo <= target``; otherwise
    ``budget-exceeded`` with the best bracket so far.  ``on_round`` is called
    with each ``(k, lo, hi)``.
    """
    budget = budget or Budget()
    target = Fraction(target)
    st = CharSeqState(A, K, budget.mem_terms)
    q = resolve_certificate(A, st.K, cert)
    floor = Fraction(max(0, A.rows - A.cols))
    lo, hi = floor, st.values[0]
    history: list[tuple[int, Fraction, Fraction]] = []
    k = 1
    status = "budget-exceeded"
    if hi - lo <= target:
        status = "target-met"
    for k in range(2, budget.iters + 2):
        if status == "target-met":
            break
        p = k * k
        try:
            while st.p < p:
                if budget.steps is not None and st.p >= budget.steps:
                    raise BudgetExceeded("step cap reached")
                hi = min(hi, st.advance())
                if hi - lo <= target:
                    break
        except BudgetExceeded:
            history.append((k, lo, hi))
            if on_round:
                on_round(k, lo, hi)
            break
        if st.p >= p and q is not None:
            lo = max(lo, st.values[p] - epsilon(q, k) - lower_correction(st.m, st.d, k))
        history.append((k, lo, hi))
        if on_round:
            on_round(k, lo, hi)
        if hi - lo <= target:
            status = "target-met"
            break
    return BracketResult(lo, hi, status, k, st.p, q, history)


# ------------------------------------------------------- log determinants


@dataclass
class LogDetInterval:
    lo: Fraction | None
    hi: Fraction
    s_lo: Fraction
    s_hi: Fraction
    tail: Fraction | None
    tail_kind: str
    certified: bool
    K: int
    values: list[Fraction] = field(default_factory=list, repr=False)

    @property
    def width(self) -> Fraction | None:
        return None if self.lo is None else self.hi - self.lo

    def contains(self, x: float | Fraction) -> bool:
        return self.lo is not None and self.lo <= x <= self.hi


def fk_logdet_partial(
    A: GroupRingMatrix,
    M: Rational,
    Kmax: int,
    *,
    tail_C: Rational | None = None,
    tail_alpha: Rational | None = None,
    ratio_bound: Rational | None = None,
    mem_terms: int | None = DEFAULT_MEM_TERMS,
    state: CharSeqState | None = None,
) -> LogDetInterval:
    """Enclosure of the Fuglede-Kadison log-determinant of ``A`` (kernel zero).

    With ``c_k = c(A, M)_k`` and ``m`` the number of rows,

        ln det A = m ln M - (1/2) sum_{k>=1} c_k / k,

    so the partial sum ``s_K`` is an upper bound and the interval is
    ``[s_K - tail, s_K]``.  The tail bound is, in order of preference:

    * ``C / (2 K^alpha)`` from user constants (``tail_kind="power"``),
    * ``c_K rho / (2 (1 - rho) K)`` from a user-certified spectral ratio
      bound ``rho`` (``"geometric"``),
    * zero if ``c_K = 0`` (``"exact"``),
    * the same geometric formula with the observed ratio ``c_K / c_(K-1)``,
      which is *not* certified (``"observed-geometric"``).
    """
    M = Fraction(M)
    if M < coeff_one_norm(A):
        raise ValueError(f"M = {M} is below the coefficient norm {coeff_one_norm(A)}")
    if Kmax < 1:
        raise ValueError("Kmax must be positive")
    if (tail_C is None) != (tail_alpha is None):
        raise ValueError("tail_C and tail_alpha go together")
    if tail_C is not None and (Fraction(tail_C) <= 0 or Fraction(tail_alpha) <= 0):
        raise ValueError("tail parameters must be positive")
    if ratio_bound is not None and not 0 < Fraction(ratio_bound) < 1:
        raise ValueError("ratio bound must lie in (0, 1)")
    st = state or CharSeqState(A, M, mem_terms)
    st.extend_to(Kmax)
    cs = st.values
    half_sum = sum((cs[k] / k for k in range(1, Kmax + 1)), Fraction(0)) / 2
    m = A.rows
    lnM_lo, lnM_hi = ln_enclosure(M)
    s_lo = m * lnM_lo - half_sum
    s_hi = m * lnM_hi - half_sum
    cK = cs[Kmax]
    certified = True
    if tail_C is not None:
        tail = Fraction(tail_C) / (2 * rational_power_lower(Kmax, Fraction(tail_alpha)))
        kind = "power"
    elif ratio_bound is not None:
        rho = Fraction(ratio_bound)
        tail = cK * rho / (2 * (1 - rho) * Kmax)
        kind = "geometric"
    elif cK == 0:
        tail, kind = Fraction(0), "exact"
    else:
        prev = cs[Kmax - 1]
        rho = cK / prev if prev else Fraction(1)
        certified = False
        if rho < 1:
            tail = cK * rho / (2 * (1 - rho) * Kmax)
            kind = "observed-geometric"
        else:
            tail, kind = None, "none"
    lo = None if tail is None else s_lo - tail
    return LogDetInterval(lo, s_hi, s_lo, s_hi, tail, kind, certified, Kmax, list(cs))


@dataclass
class TorsionInput:
    """A chain complex ``C_N -> ... -> C_0`` with tail constants.

    ``boundaries[p-1]`` is ``A_p`` of shape ``n_p x n_(p-1)``.  ``norm_bound``
    and the tail constants apply to every degree unless given as dicts
    keyed by degree.
    """

    boundaries: Sequence[GroupRingMatrix]
    norm_bound: Rational | dict | None = None
    tail_C: Rational | dict | None = None
    tail_alpha: Rational | dict | None = None
    ratio_bound: Rational | dict | None = None
    n0: int | None = None

    def ranks(self) -> list[int]:
        if not self.boundaries:
            return [self.n0 or 0]
        ranks = [self.boundaries[0].cols]
        for p, A in enumerate(self.boundaries, start=1):
            if A.cols != ranks[p - 1]:
                raise ComplexError(f"A_{p} has {A.cols} columns but n_{p - 1} = {ranks[p - 1]}")
            ranks.append(A.rows)
        return ranks


def _per_degree(value, p):
    if isinstance(value, dict):
        return value.get(p)
    return value


def laplacian_factor(boundaries: Sequence[GroupRingMatrix], p: int, oracle) -> GroupRingMatrix:
    """``B_p = [A_p | A_(p+1)*]`` so that ``B_p B_p* = A_p A_p* + A_(p+1)* A_(p+1)``."""
    N = len(boundaries)
    ranks = [boundaries[0].cols] + [A.rows for A in boundaries]
    n_p = ranks[p]
    left = boundaries[p - 1] if p >= 1 else GroupRingMatrix.zeros(oracle, n_p, 0)
    right = adjoint(boundaries[p]) if p < N else GroupRingMatrix.zeros(oracle, n_p, 0)
    return hstack(left, right)


@dataclass
class TorsionResult:
    lo: Fraction | None
    hi: Fraction | None
    degrees: dict[int, LogDetInterval]
    weights: dict[int, Fraction]
    certified: bool

    @property
    def width(self) -> Fraction | None:
        return None if self.lo is None or self.hi is None else self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo is not None and self.hi is not None and self.lo <= x <= self.hi


def torsion_estimate(inp: TorsionInput, K: int, mem_terms: int | None = DEFAULT_MEM_TERMS) -> TorsionResult:
    """Enclosure of ``rho = -1/2 sum_p (-1)^p p ln det Delta_p``.

    Each ``ln det Delta_p`` is ``2 ln det B_p`` with ``B_p`` from
    :func:`laplacian_factor`, enclosed by :func:`fk_logdet_partial`.  Degree
    0 has weight 0 and is skipped; empty degrees contribute 0.
    """
    ranks = inp.ranks()
    if not inp.boundaries:
        return TorsionResult(Fraction(0), Fraction(0), {}, {}, True)
    oracle = inp.boundaries[0].oracle
    lo, hi = Fraction(0), Fraction(0)
    degrees: dict[int, LogDetInterval] = {}
    weights: dict[int, Fraction] = {}
    certified = True
    for p in range(1, len(ranks)):
        if ranks[p] == 0:
            continue
        w = Fraction(-(-1) ** p * p, 2)
        B = laplacian_factor(inp.boundaries, p, oracle)
        M = _per_degree(inp.norm_bound, p)
        M = coeff_one_norm(B) if M is None else Fraction(M)
        C, alpha = _per_degree(inp.tail_C, p), _per_degree(inp.tail_alpha, p)
        res = fk_logdet_partial(B, M, K, tail_C=C, tail_alpha=alpha, ratio_bound=_per_degree(inp.ratio_bound, p), mem_terms=mem_terms)
        degrees[p], weights[p] = res, w
        certified = certified and res.certified
        if res.lo is None:
            lo = hi = None
            continue
        # ln det Delta_p = 2 ln det B_p
        a, b = 2 * w * res.lo, 2 * w * res.hi
        if lo is not None:
            lo += min(a, b)
            hi += max(a, b)
    return TorsionResult(lo, hi, degrees, weights, certified)
