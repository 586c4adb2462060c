"""Exact sparse arithmetic in the rational group ring and dense matrices over it.

Elements store a dict from element keys (see :class:`~l2cert.oracles.ElementModel`)
to nonzero coefficients.  Coefficients are ``Fraction`` in the public API; the
low-level convolution in :func:`convolve` works for ``int`` as well, which the
spectral code uses for speed.
"""

from __future__ import annotations

import re
import threading
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import MemoryBudgetExceeded, OracleMismatch, WordSyntaxError
from .oracles import WordOracle
from .words import Word, parse_word

DEFAULT_MEM_TERMS = 1_000_000

Scalar = int | Fraction


def convolve(model, x: Mapping, y: Mapping, mem_terms: int | None = None, out: dict | None = None) -> dict:
    """Add the product ``x * y`` of two coefficient dicts into ``out``.

    Zero coefficients are dropped at the end.  Raises
    :class:`MemoryBudgetExceeded` when the support grows past ``mem_terms``.
    """
    res: dict = {} if out is None else out
    if not x or not y:
        return res
    get = res.get
    if model.additive:
        for gy, cy in y.items():
            for gx, cx in x.items():
                k = gx + gy
                res[k] = get(k, 0) + cx * cy
            if mem_terms is not None and len(res) > mem_terms:
                raise MemoryBudgetExceeded(f"support exceeded {mem_terms} terms")
    else:
        mul = model.mul
        for gx, cx in x.items():
            for gy, cy in y.items():
                k = mul(gx, gy)
                res[k] = get(k, 0) + cx * cy
            if mem_terms is not None and len(res) > mem_terms:
                raise MemoryBudgetExceeded(f"support exceeded {mem_terms} terms")
    for k in [k for k, c in res.items() if not c]:
        del res[k]
    return res


def trace_pairing(model, x: Mapping, y: Mapping):
    """Identity coefficient of ``x * y``, i.e. ``sum_g x[g] y[g^-1]``."""
    if len(y) < len(x):
        x, y = y, x
    inv = model.inv
    total = 0
    for g, c in x.items():
        d = y.get(inv(g))
        if d:
            total += c * d
    return total


class GroupRingElement:
    """Finite rational combination of group elements, canonicalized by the oracle."""

    __slots__ = ("oracle", "data")

    def __init__(self, oracle: WordOracle, data: Mapping | None = None):
        self.oracle = oracle
        self.data: dict = {k: Fraction(c) for k, c in (data or {}).items() if c}

    # -- construction
    @classmethod
    def zero(cls, oracle: WordOracle) -> "GroupRingElement":
        return cls(oracle)

    @classmethod
    def scalar(cls, oracle: WordOracle, c: Scalar) -> "GroupRingElement":
        return cls(oracle, {oracle.model.identity: c})

    @classmethod
    def one(cls, oracle: WordOracle) -> "GroupRingElement":
        return cls.scalar(oracle, 1)

    @classmethod
    def from_word(cls, oracle: WordOracle, w: Word | str, c: Scalar = 1) -> "GroupRingElement":
        if isinstance(w, str):
            w = parse_word(w, oracle.alphabet)
        elif w.alphabet != oracle.alphabet:
            raise OracleMismatch("word alphabet differs from the oracle's")
        return cls(oracle, {oracle.model.encode(w.letters): c})

    @classmethod
    def from_terms(cls, oracle: WordOracle, terms: Mapping[Word | str, Scalar] | Iterable[tuple[Word | str, Scalar]]) -> "GroupRingElement":
        """Sum of ``c * w``; equal group elements are merged."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        data: dict = {}
        for w, c in items:
            if isinstance(w, str):
                w = parse_word(w, oracle.alphabet)
            k = oracle.model.encode(w.letters)
            data[k] = data.get(k, 0) + Fraction(c)
        return cls(oracle, data)

    @classmethod
    def parse(cls, oracle: WordOracle, text: str) -> "GroupRingElement":
        return parse_element(text, oracle)

    # -- inspection
    @property
    def terms(self) -> dict[Word, Fraction]:
        """Canonical word -> coefficient, in the model's sort order."""
        model = self.oracle.model
        return {model.decode(k): c for k, c in sorted(self.data.items(), key=lambda kv: model.sort_key(kv[0]))}

    def identity_coefficient(self) -> Fraction:
        return self.data.get(self.oracle.model.identity, Fraction(0))

    def coefficient(self, w: Word | str) -> Fraction:
        if isinstance(w, str):
            w = parse_word(w, self.oracle.alphabet)
        return self.data.get(self.oracle.model.encode(w.letters), Fraction(0))

    def one_norm(self) -> Fraction:
        return sum((abs(c) for c in self.data.values()), Fraction(0))

    def is_zero(self) -> bool:
        return not self.data

    def __len__(self) -> int:
        return len(self.data)

    def _check(self, other: "GroupRingElement") -> None:
        if other.oracle is not self.oracle:
            raise OracleMismatch("group-ring elements over different oracles")

    def _lift(self, other) -> "GroupRingElement":
        if isinstance(other, GroupRingElement):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return GroupRingElement.scalar(self.oracle, other)
        return NotImplemented

    # -- ring operations
    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        data = dict(self.data)
        for k, c in other.data.items():
            data[k] = data.get(k, 0) + c
        return GroupRingElement(self.oracle, data)

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElement(self.oracle, {k: -c for k, c in self.data.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        self._check(other)
        return GroupRingElement(self.oracle, convolve(self.oracle.model, self.data, other.data))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c: Scalar) -> "GroupRingElement":
        return GroupRingElement(self.oracle, {k: v * c for k, v in self.data.items()})

    def star(self) -> "GroupRingElement":
        """The involution ``g -> g^-1`` (coefficients are real)."""
        inv = self.oracle.model.inv
        return GroupRingElement(self.oracle, {inv(k): c for k, c in self.data.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = GroupRingElement.scalar(self.oracle, other)
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self.oracle is other.oracle and self.data == other.data

    def __hash__(self):
        return hash(frozenset(self.data.items()))

    def __str__(self) -> str:
        return format_element(self)

    def __repr__(self) -> str:
        return f"GroupRingElement({format_element(self)!r})"


def mul(x: GroupRingElement, y: GroupRingElement) -> GroupRingElement:
    return x * y


def add(x: GroupRingElement, y: GroupRingElement) -> GroupRingElement:
    return x + y


def sub(x: GroupRingElement, y: GroupRingElement) -> GroupRingElement:
    return x - y


def scalar_mul(c: Scalar, x: GroupRingElement) -> GroupRingElement:
    return x.scale(c)


def format_element(x: GroupRingElement) -> str:
    """Human-readable form such as ``2 - t - t^-1``."""
    if not x.data:
        return "0"
    parts = []
    for w, c in x.terms.items():
        word = str(w)
        mag = abs(c)
        if word == "1":
            body = str(mag)
        elif mag == 1:
            body = word
        else:
            body = f"{mag}*{word}"
        if not parts:
            parts.append(body if c > 0 else "-" + body)
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts)


_RATIONAL = re.compile(r"\d+(?:/\d+)?")
_COEFF_TERM = re.compile(r"(\d+(?:/\d+)?)\s*(?:\*\s*(.+)|([A-Za-z_].*))", re.S)


def _split_terms(text: str) -> list[tuple[int, str, int]]:
    """Split at top-level ``+``/``-``; a ``-`` right after ``^`` belongs to an exponent."""
    out = []
    sign, i = 1, 0
    pending = True
    body_start = 0
    n = len(text)
    while i < n:
        ch = text[i]
        prev = text[:i].rstrip()[-1:] if i else ""
        if ch in "+-" and prev != "^":
            if pending and not text[body_start:i].strip():
                sign = sign * (-1 if ch == "-" else 1)
                body_start = i + 1
            else:
                out.append((sign, text[body_start:i], body_start))
                sign = -1 if ch == "-" else 1
                body_start = i + 1
                pending = True
            i += 1
            continue
        if not ch.isspace():
            pending = False
        i += 1
    out.append((sign, text[body_start:], body_start))
    return out


def parse_element(text: str, oracle: WordOracle) -> GroupRingElement:
    """Parse ``[rational *] word`` terms joined by ``+``/``-``.

    A bare rational is a multiple of the identity and ``0`` is the zero
    element.  The ``*`` may be omitted before a word, and ``e`` denotes the
    identity unless it is a generator name.

    >>> from l2cert.oracles import oracle_free_abelian
    >>> z = oracle_free_abelian(1)
    >>> str(parse_element("2 - 1*t - t^-1", z))
    '2 - t - t^-1'
    """
    data: dict = {}
    if not text.strip():
        raise WordSyntaxError("empty group-ring element", 0, text)
    for sign, body, pos in _split_terms(text):
        body_s = body.strip()
        if not body_s:
            raise WordSyntaxError("missing term", pos, text)
        offset = pos + (len(body) - len(body.lstrip()))
        if _RATIONAL.fullmatch(body_s):
            coeff, word = Fraction(body_s), Word(oracle.alphabet, ())
        else:
            m = _COEFF_TERM.fullmatch(body_s)
            if m:
                coeff = Fraction(m.group(1))
                g = 2 if m.group(2) is not None else 3
                wtext = m.group(g)
                woff = offset + m.start(g)
            else:
                coeff, wtext, woff = Fraction(1), body_s, offset
            try:
                if wtext.strip() == "e" and "e" not in oracle.alphabet:
                    wtext = "1"
                word = parse_word(wtext, oracle.alphabet)
            except WordSyntaxError as exc:
                raise WordSyntaxError(str(exc).split(" at position")[0], woff + exc.position, text) from None
        k = oracle.model.encode(word.letters)
        data[k] = data.get(k, 0) + sign * coeff
    return GroupRingElement(oracle, data)


class GroupRingMatrix:
    """Dense ``rows x cols`` matrix of group-ring elements over one oracle."""

    __slots__ = ("oracle", "rows", "cols", "entries")

    def __init__(self, oracle: WordOracle, rows: int, cols: int, entries: Sequence[Sequence[GroupRingElement]] | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        self.oracle = oracle
        self.rows, self.cols = rows, cols
        if entries is None:
            entries = [[GroupRingElement(oracle) for _ in range(cols)] for _ in range(rows)]
        if len(entries) != rows or any(len(r) != cols for r in entries):
            raise ValueError(f"entries do not form a {rows}x{cols} array")
        for r in entries:
            for e in r:
                if e.oracle is not oracle:
                    raise OracleMismatch("matrix entries over different oracles")
        self.entries = tuple(tuple(r) for r in entries)

    @classmethod
    def from_rows(cls, oracle: WordOracle, rows: Sequence[Sequence], cols: int | None = None) -> "GroupRingMatrix":
        """Build from nested lists of elements, strings, ints or Fractions."""
        def lift(e):
            if isinstance(e, GroupRingElement):
                return e
            if isinstance(e, str):
                return parse_element(e, oracle)
            return GroupRingElement.scalar(oracle, Fraction(e))

        entries = [[lift(e) for e in r] for r in rows]
        n = cols if cols is not None else (len(entries[0]) if entries else 0)
        return cls(oracle, len(entries), n, entries)

    @classmethod
    def identity(cls, oracle: WordOracle, n: int) -> "GroupRingMatrix":
        one = GroupRingElement.one(oracle)
        zero = GroupRingElement(oracle)
        return cls(oracle, n, n, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, oracle: WordOracle, rows: int, cols: int) -> "GroupRingMatrix":
        return cls(oracle, rows, cols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> GroupRingElement:
        i, j = ij
        return self.entries[i][j]

    def _check(self, other: "GroupRingMatrix") -> None:
        if other.oracle is not self.oracle:
            raise OracleMismatch("matrices over different oracles")

    def __add__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        self._check(other)
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return GroupRingMatrix(self.oracle, self.rows, self.cols, [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __neg__(self) -> "GroupRingMatrix":
        return self.scale(-1)

    def __sub__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        return self + (-other)

    def scale(self, c: Scalar) -> "GroupRingMatrix":
        return GroupRingMatrix(self.oracle, self.rows, self.cols, [[e.scale(c) for e in r] for r in self.entries])

    def matmul(self, other: "GroupRingMatrix", mem_terms: int | None = DEFAULT_MEM_TERMS) -> "GroupRingMatrix":
        self._check(other)
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        model = self.oracle.model
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc: dict = {}
                for l in range(self.cols):
                    convolve(model, self.entries[i][l].data, other.entries[l][j].data, mem_terms, acc)
                row.append(GroupRingElement(self.oracle, acc))
            out.append(row)
        return GroupRingMatrix(self.oracle, self.rows, other.cols, out)

    def __matmul__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        return self.matmul(other)

    def __mul__(self, other):
        if isinstance(other, GroupRingMatrix):
            return self.matmul(other)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def adjoint(self) -> "GroupRingMatrix":
        return adjoint(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupRingMatrix):
            return NotImplemented
        return self.oracle is other.oracle and self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.shape, self.entries))

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.entries for e in r)

    def is_self_adjoint(self) -> bool:
        return self.rows == self.cols and adjoint(self) == self

    def block(self, rows: range | Sequence[int], cols: range | Sequence[int]) -> "GroupRingMatrix":
        rows, cols = list(rows), list(cols)
        return GroupRingMatrix(self.oracle, len(rows), len(cols), [[self.entries[i][j] for j in cols] for i in rows])

    def max_support(self) -> int:
        return max((len(e) for r in self.entries for e in r), default=0)

    def __str__(self) -> str:
        return "[" + "; ".join(", ".join(str(e) for e in r) for r in self.entries) + "]"

    def __repr__(self) -> str:
        return f"GroupRingMatrix({self.rows}x{self.cols}, {self})"


def adjoint(A: GroupRingMatrix) -> GroupRingMatrix:
    """Transpose combined with ``g -> g^-1`` on every entry."""
    return GroupRingMatrix(A.oracle, A.cols, A.rows, [[A.entries[i][j].star() for i in range(A.rows)] for j in range(A.cols)])


def trace(A: GroupRingMatrix) -> Fraction:
    """Sum of the identity coefficients of the diagonal entries."""
    if A.rows != A.cols:
        raise ValueError("trace of a non-square matrix")
    return sum((A.entries[i][i].identity_coefficient() for i in range(A.rows)), Fraction(0))


def coeff_one_norm(A: GroupRingMatrix) -> Fraction:
    """``max(1, sum of |coefficients| over all entries)``; an operator-norm bound."""
    total = sum((e.one_norm() for r in A.entries for e in r), Fraction(0))
    return max(Fraction(1), total)


def gram(A: GroupRingMatrix, mem_terms: int | None = DEFAULT_MEM_TERMS) -> GroupRingMatrix:
    """``A A*``, a self-adjoint ``m x m`` matrix with the same kernel as ``A``."""
    return A.matmul(adjoint(A), mem_terms)


def vstack(top: GroupRingMatrix, bottom: GroupRingMatrix) -> GroupRingMatrix:
    if top.cols != bottom.cols:
        raise ValueError("column counts differ")
    top._check(bottom)
    return GroupRingMatrix(top.oracle, top.rows + bottom.rows, top.cols, list(top.entries) + list(bottom.entries))


def hstack(left: GroupRingMatrix, right: GroupRingMatrix) -> GroupRingMatrix:
    if left.rows != right.rows:
        raise ValueError("row counts differ")
    left._check(right)
    return GroupRingMatrix(left.oracle, left.rows, left.cols + right.cols, [a + b for a, b in zip(left.entries, right.entries)])


class SpectralMoments:
    """Lazily extended moments ``tr(D^j)`` of a self-adjoint matrix ``D``.

    Uses doubling: with ``P_j = D^j``, ``tr(D^(2j)) = tr(P_j P_j)`` and
    ``tr(D^(2j+1)) = tr(P_j P_(j+1))``, so only about half the powers are
    ever formed.  Extension is synchronized; each index is computed once.
    """

    def __init__(self, source: GroupRingMatrix, mem_terms: int | None = DEFAULT_MEM_TERMS):
        if source.rows != source.cols:
            raise ValueError("moments need a square matrix")
        self.source = source
        self.mem_terms = mem_terms
        self._powers = [GroupRingMatrix.identity(source.oracle, source.rows)]
        self.moments: list[Fraction] = []
        self._lock = threading.Lock()

    def _power(self, j: int) -> GroupRingMatrix:
        while len(self._powers) <= j:
            self._powers.append(self._powers[-1].matmul(self.source, self.mem_terms))
        return self._powers[j]

    def _pair(self, X: GroupRingMatrix, Y: GroupRingMatrix) -> Fraction:
        model = self.source.oracle.model
        total = Fraction(0)
        n = X.rows
        for i in range(n):
            for l in range(n):
                total += trace_pairing(model, X.entries[i][l].data, Y.entries[l][i].data)
        return total

    def __getitem__(self, j: int) -> Fraction:
        with self._lock:
            while len(self.moments) <= j:
                r = len(self.moments)
                h = r // 2
                self.moments.append(self._pair(self._power(h), self._power(r - h)))
            return self.moments[j]

    def char_seq(self, K: Scalar, p: int) -> Fraction:
        """``tr((1 - K^-2 D)^p)`` by binomial expansion of the moments."""
        from math import comb

        x = -1 / Fraction(K) ** 2
        return sum((comb(p, i) * x ** i * self[i] for i in range(p + 1)), Fraction(0))
