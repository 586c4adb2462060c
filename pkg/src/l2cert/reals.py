"""Representations of computable reals as rational streams, with fuel.

A :class:`RealStream` is a cached, pull-based sequence of rationals tagged
with a *mode*:

``monotone-upper`` / ``monotone-lower``
    non-increasing / non-decreasing approximations; checked on every pair.
``effective``
    ``|r - q_n| <= 2^-n``; a producer contract.
``error-seq``
    ``|r - q_n| <= error(n)`` with ``error(n) -> 0``; a producer contract.
``unvalidated``
    convergent by assumption only.

Wherever the underlying mathematics calls for a jump oracle (halting
problem), the routines here run a bounded search and report an explicit
``undecided`` or exhausted outcome instead of guessing.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

from .errors import BudgetExceeded, FuelExhausted, MonotonicityViolation

MODES = ("monotone-upper", "monotone-lower", "effective", "error-seq", "unvalidated")


class StreamExhausted(BudgetExceeded):
    """The producer has no further values within its budget."""


class RealStream:
    """Cached pull-based rational stream.

    ``producer(n)`` returns the ``n``-th value (or raises
    :class:`StreamExhausted`); values are requested in increasing order and
    cached, so each index is produced once.  ``exact`` may hold the limit
    when it is known to be a specific rational (e.g. constant streams).
    """

    def __init__(
        self,
        producer: Callable[[int], Fraction],
        mode: str = "unvalidated",
        error: Callable[[int], Fraction] | None = None,
        *,
        exact: Fraction | None = None,
        certified: bool = True,
        modulus: Callable[[int], int] | None = None,
        label: str = "",
    ):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "error-seq" and error is None:
            raise ValueError("error-seq mode needs an error sequence")
        self.producer = producer
        self.mode = mode
        self.error = error
        self.exact = None if exact is None else Fraction(exact)
        self.certified = certified
        self.modulus = modulus
        self.label = label
        self._values: list[Fraction] = []
        self._done = False
        self._lock = threading.Lock()

    @classmethod
    def constant(cls, value, mode: str = "effective") -> "RealStream":
        v = Fraction(value)
        return cls(lambda n: v, mode, (lambda n: Fraction(0)) if mode == "error-seq" else None, exact=v, modulus=lambda m: 0)

    @classmethod
    def from_list(cls, values, mode: str = "unvalidated", **kw) -> "RealStream":
        vals = [Fraction(v) for v in values]

        def producer(n: int) -> Fraction:
            if n >= len(vals):
                raise StreamExhausted(f"list stream has only {len(vals)} values")
            return vals[n]

        return cls(producer, mode, **kw)

    @classmethod
    def from_iterator(cls, it: Iterator, mode: str = "unvalidated", **kw) -> "RealStream":
        lock = threading.Lock()

        def producer(n: int) -> Fraction:
            with lock:
                try:
                    return Fraction(next(it))
                except StopIteration:
                    raise StreamExhausted("iterator exhausted") from None

        return cls(producer, mode, **kw)

    @property
    def computed(self) -> list[Fraction]:
        return list(self._values)

    def __getitem__(self, n: int) -> Fraction:
        if n < 0:
            raise IndexError(n)
        with self._lock:
            while len(self._values) <= n:
                if self._done:
                    raise StreamExhausted(f"stream ended after {len(self._values)} values")
                try:
                    v = Fraction(self.producer(len(self._values)))
                except StreamExhausted:
                    self._done = True
                    raise
                self._check(v)
                self._values.append(v)
            return self._values[n]

    def _check(self, v: Fraction) -> None:
        if not self._values:
            return
        prev = self._values[-1]
        if self.mode == "monotone-upper" and v > prev:
            raise MonotonicityViolation(f"monotone-upper stream increased at index {len(self._values)}: {prev} -> {v}")
        if self.mode == "monotone-lower" and v < prev:
            raise MonotonicityViolation(f"monotone-lower stream decreased at index {len(self._values)}: {prev} -> {v}")

    def get(self, n: int, default=None):
        try:
            return self[n]
        except StreamExhausted:
            return default

    def __iter__(self) -> Iterator[Fraction]:
        n = 0
        while True:
            try:
                yield self[n]
            except StreamExhausted:
                return
            n += 1

    def take(self, n: int) -> list[Fraction]:
        out = []
        for i in range(n):
            try:
                out.append(self[i])
            except StreamExhausted:
                break
        return out


# ------------------------------------------------------------- conversions


def bracket_to_effective(lower: RealStream, upper: RealStream, budget: int = 10_000) -> RealStream:
    """Effective stream from a monotone lower and a monotone upper stream.

    The ``n``-th value is the midpoint of the first bracket of width at most
    ``2^-n``.  If no such bracket appears within ``budget`` pulls, the stream
    ends (:class:`StreamExhausted`) instead of emitting a wrong value.
    """
    if lower.mode not in ("monotone-lower", "effective", "error-seq") or upper.mode not in ("monotone-upper", "effective", "error-seq"):
        raise ValueError("need a lower and an upper monotone stream")
    state = {"i": 0}

    def producer(n: int) -> Fraction:
        tol = Fraction(1, 1 << n)
        i = state["i"]
        while i < budget:
            lo, hi = lower.get(i), upper.get(i)
            if lo is None or hi is None:
                break
            if hi - lo <= tol:
                state["i"] = i
                return (lo + hi) / 2
            i += 1
        state["i"] = i
        raise StreamExhausted(f"bracket did not reach width 2^-{n} within {budget} pulls")

    exact = lower.exact if lower.exact is not None and lower.exact == upper.exact else None
    return RealStream(producer, "effective", exact=exact, certified=lower.certified and upper.certified, label="bracket")


@dataclass
class BinaryExpansion:
    """``integer_part + sum(2^-n for n in digit_set)``, possibly truncated.

    ``digits`` lists the resolved digits in order; ``unresolved`` is true
    when extraction stopped at an undecidable digit.
    """

    integer_part: int
    digits: list[int] = field(default_factory=list)
    unresolved: bool = False
    certified: bool = True

    @property
    def digit_set(self) -> list[int]:
        return [i + 1 for i, d in enumerate(self.digits) if d]

    def value(self) -> Fraction:
        return self.integer_part + sum((Fraction(1, 1 << n) for n in self.digit_set), Fraction(0))

    def render(self) -> str:
        return f"k={self.integer_part}\n" + "".join(str(d) for d in self.digits) + ("?" if self.unresolved else "")


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def to_binary_expansion(r: RealStream, digits: int, fuel: int = 64) -> BinaryExpansion:
    """Binary digits of the limit of an effective stream.

    When ``r.exact`` is known the digits are computed exactly, with the
    finite expansion preferred for dyadic values.  Otherwise digit ``n`` is
    decided from ``q_l`` with ``l`` up to ``fuel``: the digit is certified
    once ``[q_l - 2^-l, q_l + 2^-l]`` lies on one side of the dyadic
    threshold.  If no ``l <= fuel`` separates, the expansion is marked
    ``unresolved`` and stops.
    """
    if r.exact is not None:
        x = r.exact
        k = _floor(x)
        frac = x - k
        out = []
        for _ in range(digits):
            frac *= 2
            d = 1 if frac >= 1 else 0
            out.append(d)
            frac -= d
        return BinaryExpansion(k, out, False, r.certified)
    if r.mode not in ("effective", "error-seq"):
        raise ValueError("binary expansion needs an effective stream")

    def enclosure(l: int) -> tuple[Fraction, Fraction]:
        q = r[l]
        e = r.error(l) if r.mode == "error-seq" else Fraction(1, 1 << l)
        return q - e, q + e

    # integer part: the enclosure must sit inside one unit interval
    k = None
    for l in range(fuel + 1):
        lo, hi = enclosure(l)
        if _floor(lo) == _floor(hi):
            k = _floor(lo)
            break
    if k is None:
        return BinaryExpansion(0, [], True, r.certified)
    out: list[int] = []
    base = Fraction(k)
    for n in range(1, digits + 1):
        threshold = base + Fraction(1, 1 << n)
        decided = None
        for l in range(fuel + 1):
            lo, hi = enclosure(l)
            if lo >= threshold:
                decided = 1
                break
            if hi < threshold:
                decided = 0
                break
        if decided is None:
            return BinaryExpansion(k, out, True, r.certified)
        out.append(decided)
        if decided:
            base = threshold
    return BinaryExpansion(k, out, False, r.certified)


@dataclass
class Extraction:
    index: int
    value: Fraction
    certified: bool


def extract_effective(q: RealStream, fuel: int, window: int = 64, max_index: int | None = None) -> RealStream:
    """Turn a convergent stream into a (heuristically) effective one.

    For precision ``m`` the candidate ``N = 0, 1, ...`` is refuted if some
    ``n`` in ``(N, N + window]`` has ``|q_n - q_N| > 2^-(m+1)``; the first
    candidate surviving its window is emitted.  Each pull costs one unit of
    ``fuel`` shared across all precisions; running out raises
    :class:`FuelExhausted`.  If ``q`` carries a modulus or an exact limit,
    no search is needed and the output is certified.
    """
    if q.exact is not None:
        v = q.exact
        return RealStream(lambda n: v, "effective", exact=v, certified=True, label="extracted")
    if q.modulus is not None:
        mod = q.modulus
        return RealStream(lambda n: q[mod(n)], "effective", certified=q.certified, label="extracted")
    state = {"fuel": fuel, "N": 0}
    found: list[Extraction] = []

    def producer(m: int) -> Fraction:
        tol = Fraction(1, 1 << (m + 1))
        N = state["N"]
        while True:
            if max_index is not None and N > max_index:
                raise FuelExhausted(f"no stable window for precision 2^-{m} below index {max_index}")
            qN = q[N]
            refuted = False
            for n in range(N + 1, N + window + 1):
                if state["fuel"] <= 0:
                    raise FuelExhausted(f"fuel exhausted at precision 2^-{m}")
                state["fuel"] -= 1
                try:
                    qn = q[n]
                except BudgetExceeded:
                    break
                if abs(qn - qN) > tol:
                    refuted = True
                    break
            if not refuted:
                state["N"] = N
                found.append(Extraction(N, qN, False))
                return qN
            N += 1

    out = RealStream(producer, "effective", certified=False, label="extracted")
    out.extractions = found  # type: ignore[attr-defined]
    return out


def diagonalize(q: Callable[[int, int], Fraction], fuel: int, window: int = 32, rows: int | None = None) -> RealStream:
    """Single limit from a double limit ``lim_i lim_j q(i, j)``.

    Row ``i`` is first made effective with :func:`extract_effective`; the
    output is the diagonal ``r(n) = row_n[n]``.  Heuristic, since each row's
    window search stands in for an oracle.
    """
    row_streams: dict[int, RealStream] = {}

    def row(i: int) -> RealStream:
        if i not in row_streams:
            row_streams[i] = extract_effective(RealStream(lambda j, i=i: Fraction(q(i, j))), fuel, window)
        return row_streams[i]

    def producer(n: int) -> Fraction:
        if rows is not None and n >= rows:
            raise StreamExhausted("row limit reached")
        return row(n)[n]

    return RealStream(producer, "unvalidated", certified=False, label="diagonal")


def detect_divergence(q: RealStream, threshold, fuel: int) -> tuple[str, int | None]:
    """One-sided test for ``q_k -> +infinity``.

    Returns ``("diverging", k)`` for the first ``k < fuel`` with
    ``q_k > threshold`` and ``("bounded-so-far", None)`` otherwise.  A stream
    with a declared modulus converges, so ``diverging`` is impossible for it
    and is never returned.
    """
    threshold = Fraction(threshold)
    if q.modulus is not None or q.exact is not None or q.mode in ("effective", "error-seq"):
        # declared convergent: divergence is impossible, whatever the values
        return "bounded-so-far", None
    for k in range(fuel):
        try:
            v = q[k]
        except BudgetExceeded:
            break
        if v > threshold:
            return "diverging", k
    return "bounded-so-far", None


def dedekind_query(r: RealStream, x, fuel: int) -> str:
    """Compare ``x`` with the limit of an effective stream.

    Returns ``"x<r"``, ``"x>r"`` or ``"undecided"``; the latter iff
    ``|r - x| < 2^-fuel`` remained possible at every precision tried.
    """
    x = Fraction(x)
    if r.exact is not None:
        if r.exact == x:
            return "undecided"
    for l in range(fuel + 1):
        q = r[l]
        e = r.error(l) if r.mode == "error-seq" else Fraction(1, 1 << l)
        if q - e > x:
            return "x<r"
        if q + e < x:
            return "x>r"
    return "undecided"
